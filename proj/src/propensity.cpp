#include "ck/propensity.hpp"

#include <algorithm>
#include <cmath>

#include "ck/rng.hpp"
#include "ck/stats.hpp"

namespace ck {

PropensityFit fit_ps(const AnalysisFrame& frame) {
  DesignMatrix X;
  X.values = Eigen::MatrixXd::Ones(frame.n(), 1);
  X.column_labels = {"intercept"};
  for (Eigen::Index c = 0; c < frame.confounders.cols(); ++c) {
    X.push_column(frame.confounders.values.col(c),
                  frame.confounders.column_labels[static_cast<std::size_t>(c)]);
  }
  PropensityFit fit;
  fit.model = logistic_fit(X, frame.a);
  fit.linear_index = X.values * fit.model.coefficients;
  fit.scores.resize(frame.n());
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    fit.scores(i) = expit(fit.linear_index(i));
  }
  return fit;
}

WeightSet make_weights(const Eigen::VectorXd& exposure,
                       const Eigen::VectorXd& scores, WeightKind kind,
                       Truncation truncation) {
  const Eigen::Index n = exposure.size();
  if (scores.size() != n) {
    fail(errc::dimension_mismatch, "scores and exposure differ in length");
  }
  if (n == 0) fail(errc::empty_input, "no rows to weight");

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(scores(i) > 0.0 && scores(i) < 1.0)) {
      fail(errc::positivity_violation,
           "propensity score " + std::to_string(scores(i)) + " at row " +
               std::to_string(i) + " leaves one arm without support");
    }
  }

  const double p_treated = exposure.mean();
  if (p_treated <= 0.0 || p_treated >= 1.0) {
    fail(errc::positivity_violation, "exposure has a single arm");
  }
  const double odds_marginal = (1.0 - p_treated) / p_treated;

  WeightSet set;
  set.kind = kind;
  set.truncation = truncation;
  set.marginal_treated = p_treated;
  set.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool treated = exposure(i) == 1.0;
    const double e = scores(i);
    double w = 0.0;
    switch (kind) {
      case WeightKind::ate_unstabilized:
        w = treated ? 1.0 / e : 1.0 / (1.0 - e);
        break;
      case WeightKind::ate_stabilized:
        w = treated ? p_treated / e : (1.0 - p_treated) / (1.0 - e);
        break;
      case WeightKind::att_unstabilized:
        w = treated ? 1.0 : e / (1.0 - e);
        break;
      case WeightKind::att_stabilized:
        w = treated ? 1.0 : (e / (1.0 - e)) * odds_marginal;
        break;
    }
    set.weights(i) = w;
  }

  double cap = 0.0;
  switch (truncation.kind) {
    case Truncation::Kind::none:
      return set;
    case Truncation::Kind::percentile: {
      if (!(truncation.value > 0.0 && truncation.value < 1.0)) {
        fail(errc::invalid_config, "truncation percentile must be in (0, 1)");
      }
      cap = quantile(set.weights, truncation.value);
      break;
    }
    case Truncation::Kind::cap:
      if (!(truncation.value > 0.0)) {
        fail(errc::invalid_config, "truncation cap must be positive");
      }
      cap = truncation.value;
      break;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (set.weights(i) > cap) set.weights(i) = cap;
  }
  return set;
}

double BalanceTable::max_abs_smd_before() const {
  double worst = 0.0;
  for (const auto& row : rows) {
    worst = std::max(worst, std::fabs(row.smd_before));
  }
  return worst;
}

double BalanceTable::max_abs_smd_after() const {
  double worst = 0.0;
  for (const auto& row : rows) {
    worst = std::max(worst, std::fabs(row.smd_after));
  }
  return worst;
}

namespace {

struct ArmMoments {
  double mean = 0.0;
  double variance = 0.0;
  double mass = 0.0;
};

ArmMoments arm_moments(const Eigen::VectorXd& x, const Eigen::VectorXd& a,
                       const Eigen::VectorXd* w, bool treated) {
  double mass = 0.0, sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((a(i) == 1.0) != treated) continue;
    const double wi = w ? (*w)(i) : 1.0;
    mass += wi;
    sum += wi * x(i);
  }
  ArmMoments m;
  m.mass = mass;
  if (mass <= 0.0) return m;
  m.mean = sum / mass;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((a(i) == 1.0) != treated) continue;
    const double wi = w ? (*w)(i) : 1.0;
    ss += wi * (x(i) - m.mean) * (x(i) - m.mean);
  }
  m.variance = ss / mass;
  return m;
}

}  // namespace

BalanceTable balance_check(const AnalysisFrame& frame,
                           const WeightSet* weights) {
  if (frame.n() == 0) fail(errc::empty_input, "empty frame");
  const Eigen::VectorXd* w = weights ? &weights->weights : nullptr;

  BalanceTable table;
  for (Eigen::Index c = 0; c < frame.confounders.cols(); ++c) {
    const Eigen::VectorXd x = frame.confounders.values.col(c);
    const ArmMoments raw1 = arm_moments(x, frame.a, nullptr, true);
    const ArmMoments raw0 = arm_moments(x, frame.a, nullptr, false);
    if (raw1.mass == 0.0 || raw0.mass == 0.0) {
      fail(errc::empty_subpopulation, "one exposure arm is empty");
    }
    // Fixed denominator: unweighted pooled SD, so before and after SMDs are
    // directly comparable.
    const double pooled_sd = std::sqrt((raw1.variance + raw0.variance) / 2.0);

    BalanceRow row;
    row.label = frame.confounders.column_labels[static_cast<std::size_t>(c)];
    if (pooled_sd <= 0.0) {
      row.zero_variance = true;
      row.smd_before = 0.0;
      row.smd_after = 0.0;
      row.var_ratio_before = 1.0;
      row.var_ratio_after = 1.0;
      table.rows.push_back(row);
      continue;
    }
    row.smd_before = (raw1.mean - raw0.mean) / pooled_sd;
    row.var_ratio_before =
        raw0.variance > 0.0 ? raw1.variance / raw0.variance : 0.0;
    if (w) {
      const ArmMoments adj1 = arm_moments(x, frame.a, w, true);
      const ArmMoments adj0 = arm_moments(x, frame.a, w, false);
      row.smd_after = (adj1.mean - adj0.mean) / pooled_sd;
      row.var_ratio_after =
          adj0.variance > 0.0 ? adj1.variance / adj0.variance : 0.0;
    } else {
      row.smd_after = row.smd_before;
      row.var_ratio_after = row.var_ratio_before;
    }
    table.rows.push_back(row);
  }
  return table;
}

OverlapReport overlap_check(const AnalysisFrame& frame,
                            const PropensityFit& fit) {
  if (fit.scores.size() != frame.n()) {
    fail(errc::dimension_mismatch, "fit does not match frame");
  }
  std::vector<double> treated, control;
  double index_sum1 = 0.0, index_sum0 = 0.0;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    if (frame.a(i) == 1.0) {
      treated.push_back(fit.scores(i));
      index_sum1 += fit.linear_index(i);
    } else {
      control.push_back(fit.scores(i));
      index_sum0 += fit.linear_index(i);
    }
  }
  if (treated.empty() || control.empty()) {
    fail(errc::empty_subpopulation, "one exposure arm is empty");
  }
  std::sort(treated.begin(), treated.end());
  std::sort(control.begin(), control.end());

  OverlapReport report;
  report.treated_min = treated.front();
  report.treated_max = treated.back();
  report.control_min = control.front();
  report.control_max = control.back();
  const double probs[5] = {0.01, 0.25, 0.50, 0.75, 0.99};
  for (int k = 0; k < 5; ++k) {
    report.treated_quantiles[static_cast<std::size_t>(k)] =
        quantile_sorted(treated, probs[k]);
    report.control_quantiles[static_cast<std::size_t>(k)] =
        quantile_sorted(control, probs[k]);
  }

  std::size_t treated_outside = 0, control_outside = 0;
  for (const double s : treated) {
    if (s < report.control_min || s > report.control_max) ++treated_outside;
  }
  for (const double s : control) {
    if (s < report.treated_min || s > report.treated_max) ++control_outside;
  }
  report.frac_treated_outside =
      static_cast<double>(treated_outside) / static_cast<double>(treated.size());
  report.frac_control_outside =
      static_cast<double>(control_outside) / static_cast<double>(control.size());
  report.frac_outside = static_cast<double>(treated_outside + control_outside) /
                        static_cast<double>(frame.n());

  // Normalized difference of the linear index (Imbens-Rubin style): mean gap
  // over the pooled-arm SD.  Unlike the range-based fractions this is smooth
  // in the data, so it ranks frames by separation reliably.
  const double m1 = index_sum1 / static_cast<double>(treated.size());
  const double m0 = index_sum0 / static_cast<double>(control.size());
  double ss1 = 0.0, ss0 = 0.0;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    const double d = fit.linear_index(i) - (frame.a(i) == 1.0 ? m1 : m0);
    (frame.a(i) == 1.0 ? ss1 : ss0) += d * d;
  }
  const double v1 = ss1 / std::max<double>(1.0, static_cast<double>(treated.size() - 1));
  const double v0 = ss0 / std::max<double>(1.0, static_cast<double>(control.size() - 1));
  const double pooled = std::sqrt((v1 + v0) / 2.0);
  report.index_smd = pooled > 0.0 ? (m1 - m0) / pooled : 0.0;
  return report;
}

StrataAssignment stratify_by_ps(const Eigen::VectorXd& scores, int n_strata) {
  if (n_strata < 2) fail(errc::invalid_config, "need at least 2 strata");
  if (scores.size() < n_strata) {
    fail(errc::invalid_config, "fewer observations than strata");
  }
  std::vector<double> sorted(scores.data(), scores.data() + scores.size());
  std::sort(sorted.begin(), sorted.end());

  StrataAssignment assignment;
  assignment.n_strata = n_strata;
  assignment.boundaries.reserve(static_cast<std::size_t>(n_strata - 1));
  for (int j = 1; j < n_strata; ++j) {
    assignment.boundaries.push_back(
        quantile_sorted(sorted, static_cast<double>(j) / n_strata));
  }
  assignment.stratum.resize(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    // First boundary >= score wins; a score equal to a boundary lands in the
    // lower of the two adjacent strata.
    const auto it = std::lower_bound(assignment.boundaries.begin(),
                                     assignment.boundaries.end(), scores(i));
    assignment.stratum(i) =
        static_cast<int>(it - assignment.boundaries.begin());
  }
  return assignment;
}

}  // namespace ck
