#include "ck/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ck/stats.hpp"

namespace ck {

namespace {

void split_counts(const AnalysisFrame& frame, Eigen::Index* n_treated,
                  Eigen::Index* n_control) {
  Eigen::Index n1 = 0;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    if (frame.a(i) == 1.0) ++n1;
  }
  *n_treated = n1;
  *n_control = frame.n() - n1;
  if (n1 == 0 || *n_control == 0) {
    fail(errc::empty_subpopulation, "one exposure arm is empty");
  }
}

// Exposure, confounders, and optionally exposure-by-confounder products.
DesignMatrix outcome_design(const AnalysisFrame& frame, bool interactions) {
  DesignMatrix X;
  X.values = Eigen::MatrixXd::Ones(frame.n(), 1);
  X.column_labels = {"intercept"};
  X.push_column(frame.a, "a");
  for (Eigen::Index c = 0; c < frame.confounders.cols(); ++c) {
    X.push_column(frame.confounders.values.col(c),
                  frame.confounders.column_labels[static_cast<std::size_t>(c)]);
  }
  if (interactions) {
    for (Eigen::Index c = 0; c < frame.confounders.cols(); ++c) {
      X.push_column(
          frame.a.cwiseProduct(frame.confounders.values.col(c)),
          "a:" + frame.confounders.column_labels[static_cast<std::size_t>(c)]);
    }
  }
  return X;
}

OutcomeModelFit outcome_regression(const AnalysisFrame& frame,
                                   bool interactions, Target target) {
  Eigen::Index n1 = 0, n0 = 0;
  split_counts(frame, &n1, &n0);

  const DesignMatrix X = outcome_design(frame, interactions);
  OutcomeModelFit result;
  result.interactions = interactions;
  result.fit = ols_fit(X, frame.y);

  const Eigen::Index p_conf = frame.confounders.cols();
  // The effect is the coefficient on the exposure plus, with interactions,
  // the interaction terms evaluated at the target population's covariate
  // means: everyone for the ATE, the treated for the ATT.
  Eigen::VectorXd contrast = Eigen::VectorXd::Zero(X.cols());
  contrast(1) = 1.0;
  if (interactions) {
    for (Eigen::Index c = 0; c < p_conf; ++c) {
      const Eigen::VectorXd& column = frame.confounders.values.col(c);
      double sum = 0.0;
      Eigen::Index count = 0;
      for (Eigen::Index i = 0; i < frame.n(); ++i) {
        if (target == Target::att && frame.a(i) != 1.0) continue;
        sum += column(i);
        ++count;
      }
      contrast(2 + p_conf + c) = sum / static_cast<double>(count);
    }
  }
  result.estimate = contrast.dot(result.fit.coefficients);
  result.se_model =
      std::sqrt(contrast.dot(result.fit.covariance * contrast));
  return result;
}

}  // namespace

CrudeResult crude_difference(const AnalysisFrame& frame) {
  Eigen::Index n1 = 0, n0 = 0;
  split_counts(frame, &n1, &n0);
  double sum1 = 0.0, sum0 = 0.0;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    (frame.a(i) == 1.0 ? sum1 : sum0) += frame.y(i);
  }
  const double mean1 = sum1 / static_cast<double>(n1);
  const double mean0 = sum0 / static_cast<double>(n0);
  double ss1 = 0.0, ss0 = 0.0;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    const double d = frame.y(i) - (frame.a(i) == 1.0 ? mean1 : mean0);
    (frame.a(i) == 1.0 ? ss1 : ss0) += d * d;
  }
  CrudeResult result;
  result.n_treated = n1;
  result.n_control = n0;
  result.estimate = mean1 - mean0;
  const double v1 = n1 > 1 ? ss1 / static_cast<double>(n1 - 1) : 0.0;
  const double v0 = n0 > 1 ? ss0 / static_cast<double>(n0 - 1) : 0.0;
  result.se = std::sqrt(v1 / static_cast<double>(n1) +
                        v0 / static_cast<double>(n0));
  return result;
}

OutcomeModelFit or_ate(const AnalysisFrame& frame, bool with_interactions) {
  return outcome_regression(frame, with_interactions, Target::ate);
}

OutcomeModelFit or_att(const AnalysisFrame& frame, bool with_interactions) {
  return outcome_regression(frame, with_interactions, Target::att);
}

OutcomeModelFit ps_regression(const AnalysisFrame& frame,
                              const PropensityFit& ps) {
  if (ps.scores.size() != frame.n()) {
    fail(errc::dimension_mismatch, "fit does not match frame");
  }
  Eigen::Index n1 = 0, n0 = 0;
  split_counts(frame, &n1, &n0);

  DesignMatrix X;
  X.values = Eigen::MatrixXd::Ones(frame.n(), 1);
  X.column_labels = {"intercept"};
  X.push_column(frame.a, "a");

  OutcomeModelFit result;
  const double spread = ps.scores.maxCoeff() - ps.scores.minCoeff();
  if (spread < 1e-12) {
    // A constant score carries no information; keep the regression honest by
    // dropping it rather than fitting a collinear column.
    result.score_dropped = true;
  } else {
    X.push_column(ps.scores, "score");
  }
  result.fit = ols_fit(X, frame.y);
  result.estimate = result.fit.coefficients(1);
  result.se_model = std::sqrt(result.fit.covariance(1, 1));
  return result;
}

StrataSummary stratification(const AnalysisFrame& frame,
                             const StrataAssignment& strata, Target target) {
  if (strata.stratum.size() != frame.n()) {
    fail(errc::dimension_mismatch, "strata do not match frame");
  }
  Eigen::Index n1_total = 0, n0_total = 0;
  split_counts(frame, &n1_total, &n0_total);

  const int J = strata.n_strata;
  std::vector<Eigen::Index> n1(static_cast<std::size_t>(J), 0),
      n0(static_cast<std::size_t>(J), 0);
  std::vector<double> sum1(static_cast<std::size_t>(J), 0.0),
      sum0(static_cast<std::size_t>(J), 0.0);
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    const auto j = static_cast<std::size_t>(strata.stratum(i));
    if (frame.a(i) == 1.0) {
      ++n1[j];
      sum1[j] += frame.y(i);
    } else {
      ++n0[j];
      sum0[j] += frame.y(i);
    }
  }

  StrataSummary summary;
  double estimate = 0.0;
  for (int j = 0; j < J; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    StrataSummary::Row row;
    row.stratum = j;
    row.n_treated = n1[ju];
    row.n_control = n0[ju];
    row.n = n1[ju] + n0[ju];
    const double weight =
        target == Target::ate
            ? static_cast<double>(row.n) / static_cast<double>(frame.n())
            : static_cast<double>(row.n_treated) /
                  static_cast<double>(n1_total);
    if (weight > 0.0 && (n1[ju] == 0 || n0[ju] == 0)) {
      fail(errc::empty_arm_in_stratum,
           "stratum " + std::to_string(j) + " has " +
               std::to_string(n1[ju]) + " treated and " +
               std::to_string(n0[ju]) + " control units");
    }
    if (n1[ju] > 0) row.mean_treated = sum1[ju] / static_cast<double>(n1[ju]);
    if (n0[ju] > 0) row.mean_control = sum0[ju] / static_cast<double>(n0[ju]);
    row.effect = row.mean_treated - row.mean_control;
    estimate += weight * row.effect;
    summary.rows.push_back(row);
  }
  summary.estimate = estimate;
  return summary;
}

namespace {

struct Candidate {
  double score;
  Eigen::Index row;
};

// The up-to-M nearest candidates to `score` by |score difference|, ties
// toward the lower row index, restricted to the caliper when given.
// `used` marks candidates already consumed (without-replacement matching).
std::vector<Eigen::Index> nearest(const std::vector<Candidate>& sorted,
                                  double score, int m,
                                  const std::optional<double>& caliper,
                                  const std::vector<char>* used) {
  struct Pick {
    double distance;
    Eigen::Index row;
  };
  std::vector<Pick> picked;

  auto eligible = [&](std::size_t k) {
    return used == nullptr || !(*used)[k];
  };
  auto distance_at = [&](std::size_t k) {
    return std::fabs(sorted[k].score - score);
  };

  // Two cursors walk outward from the insertion point.  We keep pulling the
  // nearer side until we have m candidates and the next candidate on each
  // side is strictly farther than the worst kept distance (so all ties at
  // the cut make it into the pool before the index tie-break).
  const auto begin_it = std::lower_bound(
      sorted.begin(), sorted.end(), score,
      [](const Candidate& c, double s) { return c.score < s; });
  std::ptrdiff_t right = begin_it - sorted.begin();
  std::ptrdiff_t left = right - 1;
  const auto size = static_cast<std::ptrdiff_t>(sorted.size());

  auto within = [&](double d) { return !caliper || d <= *caliper; };

  while (true) {
    const bool left_ok = left >= 0;
    const bool right_ok = right < size;
    if (!left_ok && !right_ok) break;

    double worst = picked.size() >= static_cast<std::size_t>(m)
                       ? picked[static_cast<std::size_t>(m) - 1].distance
                       : -1.0;
    const double left_d = left_ok ? distance_at(static_cast<std::size_t>(left))
                                  : std::numeric_limits<double>::infinity();
    const double right_d = right_ok
                               ? distance_at(static_cast<std::size_t>(right))
                               : std::numeric_limits<double>::infinity();
    const double next_d = std::min(left_d, right_d);
    if (!within(next_d)) break;
    if (picked.size() >= static_cast<std::size_t>(m) && next_d > worst) break;

    if (left_d <= right_d) {
      const auto k = static_cast<std::size_t>(left);
      if (eligible(k)) picked.push_back({left_d, sorted[k].row});
      --left;
    } else {
      const auto k = static_cast<std::size_t>(right);
      if (eligible(k)) picked.push_back({right_d, sorted[k].row});
      ++right;
    }
    std::sort(picked.begin(), picked.end(), [](const Pick& x, const Pick& y) {
      return x.distance != y.distance ? x.distance < y.distance
                                      : x.row < y.row;
    });
    // Trim provisionally, but never below the tie boundary: entries tied
    // with the m-th distance stay until the loop proves no closer ties exist.
    while (picked.size() > static_cast<std::size_t>(m) &&
           picked.back().distance > picked[static_cast<std::size_t>(m) - 1].distance) {
      picked.pop_back();
    }
  }

  std::vector<Eigen::Index> rows;
  for (const Pick& pick : picked) {
    if (rows.size() == static_cast<std::size_t>(m)) break;
    if (!within(pick.distance)) continue;
    rows.push_back(pick.row);
  }
  return rows;
}

}  // namespace

MatchResult matching(const AnalysisFrame& frame, const Eigen::VectorXd& scores,
                     const MatchConfig& config, Target target) {
  if (scores.size() != frame.n()) {
    fail(errc::dimension_mismatch, "scores do not match frame");
  }
  if (config.n_matches < 1) {
    fail(errc::invalid_config, "need at least one match per target");
  }
  if (config.caliper && !(*config.caliper > 0.0)) {
    fail(errc::invalid_config, "caliper must be positive");
  }
  Eigen::Index n1 = 0, n0 = 0;
  split_counts(frame, &n1, &n0);

  std::vector<Candidate> treated_pool, control_pool;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    (frame.a(i) == 1.0 ? treated_pool : control_pool)
        .push_back({scores(i), i});
  }
  auto by_score = [](const Candidate& x, const Candidate& y) {
    return x.score != y.score ? x.score < y.score : x.row < y.row;
  };
  std::sort(treated_pool.begin(), treated_pool.end(), by_score);
  std::sort(control_pool.begin(), control_pool.end(), by_score);

  MatchResult result;
  result.usage_weight = Eigen::VectorXd::Zero(frame.n());
  result.target_weight = Eigen::VectorXd::Zero(frame.n());

  double effect_sum = 0.0;
  Eigen::Index matches_total = 0;

  auto run_pass = [&](bool targets_treated) {
    const std::vector<Candidate>& pool =
        targets_treated ? control_pool : treated_pool;
    std::vector<char> used(pool.size(), 0);
    std::vector<char>* used_ptr =
        config.with_replacement ? nullptr : &used;

    for (Eigen::Index i = 0; i < frame.n(); ++i) {
      if ((frame.a(i) == 1.0) != targets_treated) continue;
      ++result.n_targets;
      const std::vector<Eigen::Index> rows =
          nearest(pool, scores(i), config.n_matches, config.caliper, used_ptr);
      if (rows.empty()) {
        ++result.n_unmatched;
        continue;
      }
      if (!config.with_replacement) {
        for (const Eigen::Index r : rows) {
          const auto it = std::lower_bound(
              pool.begin(), pool.end(), Candidate{scores(r), r}, by_score);
          used[static_cast<std::size_t>(it - pool.begin())] = 1;
        }
      }
      ++result.n_matched;
      matches_total += static_cast<Eigen::Index>(rows.size());
      double match_mean = 0.0;
      const double share = 1.0 / static_cast<double>(rows.size());
      for (const Eigen::Index r : rows) {
        match_mean += frame.y(r) * share;
        result.usage_weight(r) += share;
      }
      result.target_weight(i) = 1.0;
      effect_sum += targets_treated ? frame.y(i) - match_mean
                                    : match_mean - frame.y(i);
    }
  };

  run_pass(true);
  if (target == Target::ate) run_pass(false);

  if (result.n_matched == 0) {
    fail(errc::unmatched_units,
         "no target found an eligible match within the caliper");
  }
  result.estimate = effect_sum / static_cast<double>(result.n_matched);
  result.mean_matches = static_cast<double>(matches_total) /
                        static_cast<double>(result.n_matched);
  return result;
}

IpwResult ipw(const AnalysisFrame& frame, const WeightSet& weights,
              Target target) {
  if (weights.weights.size() != frame.n()) {
    fail(errc::dimension_mismatch, "weights do not match frame");
  }
  Eigen::Index n1 = 0, n0 = 0;
  split_counts(frame, &n1, &n0);

  double w1 = 0.0, w0 = 0.0, wy1 = 0.0, wy0 = 0.0;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    const double w = weights.weights(i);
    if (frame.a(i) == 1.0) {
      w1 += w;
      wy1 += w * frame.y(i);
    } else {
      w0 += w;
      wy0 += w * frame.y(i);
    }
  }
  if (w1 <= 0.0 || w0 <= 0.0) {
    fail(errc::positivity_violation, "an arm carries no weight");
  }

  IpwResult result;
  result.sum_weights_treated = w1;
  result.sum_weights_control = w0;
  // Ratio (weight-mass normalized) form: robust to weights that do not sum
  // to the target denominator.
  result.estimate = wy1 / w1 - wy0 / w0;
  if (target == Target::ate) {
    const double n = static_cast<double>(frame.n());
    result.ht_estimate = wy1 / n - wy0 / n;
  } else {
    // Treated arm at its own mean; controls reweighted to the treated
    // covariate law, plain form dividing by the treated count.
    result.ht_estimate =
        wy1 / w1 - wy0 / static_cast<double>(n1);
  }
  return result;
}

AipwResult aipw(const AnalysisFrame& frame, const PropensityFit& ps) {
  if (ps.scores.size() != frame.n()) {
    fail(errc::dimension_mismatch, "fit does not match frame");
  }
  Eigen::Index n1 = 0, n0 = 0;
  split_counts(frame, &n1, &n0);

  // Outcome model with interactions, then per-row predictions under both
  // exposure levels.
  const DesignMatrix X = outcome_design(frame, true);
  const RegressionFit fit = ols_fit(X, frame.y);
  const Eigen::Index p_conf = frame.confounders.cols();
  const Eigen::Index n = frame.n();

  AipwResult result;
  result.influence.resize(n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double m0 = fit.coefficients(0);
    double m1 = fit.coefficients(0) + fit.coefficients(1);
    for (Eigen::Index c = 0; c < p_conf; ++c) {
      const double x = frame.confounders.values(i, c);
      m0 += fit.coefficients(2 + c) * x;
      m1 += (fit.coefficients(2 + c) + fit.coefficients(2 + p_conf + c)) * x;
    }
    const double e = ps.scores(i);
    if (!(e > 0.0 && e < 1.0)) {
      fail(errc::positivity_violation,
           "propensity score " + std::to_string(e) + " at row " +
               std::to_string(i));
    }
    const double a = frame.a(i);
    const double y = frame.y(i);
    const double psi = a * (y - m1) / e - (1.0 - a) * (y - m0) / (1.0 - e) +
                       m1 - m0;
    result.influence(i) = psi;
    sum += psi;
  }
  result.estimate = sum / static_cast<double>(n);
  result.influence.array() -= result.estimate;
  const double var =
      result.influence.squaredNorm() / static_cast<double>(n - 1);
  result.se_influence = std::sqrt(var / static_cast<double>(n));
  return result;
}

}  // namespace ck
