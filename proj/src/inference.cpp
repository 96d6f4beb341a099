#include "ck/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ck/rng.hpp"
#include "ck/stats.hpp"

namespace ck {

namespace {

// Domain separator so bootstrap index streams never coincide with the data
// generator's record streams even when the seeds match.
constexpr std::uint64_t kBootstrapDomain = 0xB007578A9E5EEDULL;

}  // namespace

std::vector<BootstrapResult> bootstrap_many(
    const BootstrapPlan& plan, Eigen::Index n_rows, std::size_t n_outputs,
    const std::function<std::vector<double>(const std::vector<Eigen::Index>&)>&
        estimators) {
  if (plan.n_replicates < 2) {
    fail(errc::invalid_config, "need at least 2 bootstrap replicates");
  }
  if (n_rows < 2) fail(errc::empty_input, "need at least 2 rows to resample");

  std::vector<std::vector<double>> draws(n_outputs);
  for (auto& d : draws) d.reserve(static_cast<std::size_t>(plan.n_replicates));

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_rows));
  for (int r = 0; r < plan.n_replicates; ++r) {
    SplitMix64 rng(stream_key(plan.base_seed ^ kBootstrapDomain,
                              static_cast<std::uint64_t>(r)));
    for (auto& i : idx) {
      i = static_cast<Eigen::Index>(
          rng.next_below(static_cast<std::uint64_t>(n_rows)));
    }
    std::vector<double> values;
    try {
      values = estimators(idx);
      if (values.size() != n_outputs) {
        fail(errc::dimension_mismatch, "replicate returned wrong output count");
      }
    } catch (const Error&) {
      values.assign(n_outputs, std::numeric_limits<double>::quiet_NaN());
    }
    for (std::size_t k = 0; k < n_outputs; ++k) {
      if (std::isfinite(values[k])) draws[k].push_back(values[k]);
    }
  }

  std::vector<BootstrapResult> results(n_outputs);
  for (std::size_t k = 0; k < n_outputs; ++k) {
    BootstrapResult& result = results[k];
    result.n_failed = plan.n_replicates - static_cast<int>(draws[k].size());
    const double failure_share =
        static_cast<double>(result.n_failed) / plan.n_replicates;
    if (failure_share > plan.max_failure_fraction || draws[k].size() < 2) {
      result.budget_exceeded = true;
      result.se = std::numeric_limits<double>::quiet_NaN();
      result.ci_low = result.se;
      result.ci_high = result.se;
      continue;
    }
    // Sorted before reduction: the SE and interval are invariant to the order
    // replicates were produced in.
    std::sort(draws[k].begin(), draws[k].end());
    result.replicates = std::move(draws[k]);

    const auto m = static_cast<double>(result.replicates.size());
    double sum = 0.0;
    for (const double v : result.replicates) sum += v;
    const double mean = sum / m;
    double ss = 0.0;
    for (const double v : result.replicates) ss += (v - mean) * (v - mean);
    result.se = std::sqrt(ss / (m - 1.0));
    result.ci_low = quantile_sorted(result.replicates, 0.025);
    result.ci_high = quantile_sorted(result.replicates, 0.975);
  }
  return results;
}

BootstrapResult bootstrap_se(
    const BootstrapPlan& plan, Eigen::Index n_rows,
    const std::function<double(const std::vector<Eigen::Index>&)>& estimator) {
  auto wrapped = [&](const std::vector<Eigen::Index>& idx) {
    return std::vector<double>{estimator(idx)};
  };
  BootstrapResult result = bootstrap_many(plan, n_rows, 1, wrapped).front();
  if (result.budget_exceeded) {
    fail(errc::too_many_failed_replicates,
         std::to_string(result.n_failed) + " of " +
             std::to_string(plan.n_replicates) +
             " bootstrap replicates failed");
  }
  return result;
}

double sandwich_se_weighted(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& w) {
  const Eigen::Index n = y.size();
  if (a.size() != n || w.size() != n) {
    fail(errc::dimension_mismatch, "y, a, w must have equal length");
  }
  if (n == 0) fail(errc::empty_input, "no rows");
  if (w.minCoeff() < 0.0) fail(errc::invalid_config, "negative weight");
  if (w.maxCoeff() <= 0.0) fail(errc::invalid_config, "all weights are zero");

  // Bread: X'WX for X = (1, a).
  double s_w = 0.0, s_wa = 0.0, s_waa = 0.0, s_wy = 0.0, s_way = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    s_w += w(i);
    s_wa += w(i) * a(i);
    s_waa += w(i) * a(i) * a(i);
    s_wy += w(i) * y(i);
    s_way += w(i) * a(i) * y(i);
  }
  const double det = s_w * s_waa - s_wa * s_wa;
  if (std::fabs(det) < 1e-12 * s_w * s_w) {
    fail(errc::rank_deficient, "weighted mass sits in a single arm");
  }
  const double beta1 = (s_w * s_way - s_wa * s_wy) / det;
  const double beta0 = (s_wy - s_wa * beta1) / s_w;

  // Meat: sum of w^2 e^2 x x'.
  double m00 = 0.0, m01 = 0.0, m11 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = y(i) - beta0 - beta1 * a(i);
    const double we2 = w(i) * w(i) * e * e;
    m00 += we2;
    m01 += we2 * a(i);
    m11 += we2 * a(i) * a(i);
  }
  // V = B^{-1} M B^{-1}; only the slope's diagonal element is needed, using
  // the slope row of B^{-1}: (-s_wa, s_w) / det.
  const double inv01 = -s_wa / det;
  const double inv11 = s_w / det;
  const double v11 = inv01 * (m00 * inv01 + m01 * inv11) +
                     inv11 * (m01 * inv01 + m11 * inv11);
  if (v11 < 0.0) fail(errc::non_convergence, "negative variance estimate");
  return std::sqrt(v11);
}

namespace {

struct ScoredRow {
  double score;
  Eigen::Index row;
};

// sigma^2 from same-arm nearest-neighbor differencing: E[(Y_i - Y_j)^2] = 2
// sigma^2 when i, j share an arm and (approximately) a score.
double nn_noise_variance(const AnalysisFrame& frame,
                         const Eigen::VectorXd& scores) {
  std::vector<ScoredRow> arm[2];
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    arm[frame.a(i) == 1.0 ? 1 : 0].push_back({scores(i), i});
  }
  auto by_score = [](const ScoredRow& x, const ScoredRow& y) {
    return x.score != y.score ? x.score < y.score : x.row < y.row;
  };
  std::sort(arm[0].begin(), arm[0].end(), by_score);
  std::sort(arm[1].begin(), arm[1].end(), by_score);

  double ss = 0.0;
  Eigen::Index pairs = 0;
  for (const auto& rows : arm) {
    const auto m = static_cast<std::ptrdiff_t>(rows.size());
    if (m < 2) continue;
    for (std::ptrdiff_t k = 0; k < m; ++k) {
      // Nearest same-arm neighbor: adjacent in score order, ties broken
      // toward the lowest original row index among equidistant entries.
      double best_d = std::numeric_limits<double>::infinity();
      if (k > 0) best_d = rows[static_cast<std::size_t>(k)].score -
                          rows[static_cast<std::size_t>(k - 1)].score;
      if (k + 1 < m) {
        best_d = std::min(best_d, rows[static_cast<std::size_t>(k + 1)].score -
                                      rows[static_cast<std::size_t>(k)].score);
      }
      Eigen::Index best_row = -1;
      for (std::ptrdiff_t j = k - 1; j >= 0; --j) {
        const double d = rows[static_cast<std::size_t>(k)].score -
                         rows[static_cast<std::size_t>(j)].score;
        if (d > best_d) break;
        const Eigen::Index r = rows[static_cast<std::size_t>(j)].row;
        if (best_row < 0 || r < best_row) best_row = r;
      }
      for (std::ptrdiff_t j = k + 1; j < m; ++j) {
        const double d = rows[static_cast<std::size_t>(j)].score -
                         rows[static_cast<std::size_t>(k)].score;
        if (d > best_d) break;
        const Eigen::Index r = rows[static_cast<std::size_t>(j)].row;
        if (best_row < 0 || r < best_row) best_row = r;
      }
      const double diff = frame.y(rows[static_cast<std::size_t>(k)].row) -
                          frame.y(best_row);
      ss += diff * diff;
      ++pairs;
    }
  }
  if (pairs == 0) {
    fail(errc::empty_subpopulation,
         "both arms need at least two units for the noise estimate");
  }
  return ss / (2.0 * static_cast<double>(pairs));
}

}  // namespace

double matching_se(const AnalysisFrame& frame, const Eigen::VectorXd& scores,
                   const MatchResult& result, Target target) {
  (void)target;  // the reuse weights already encode the direction(s)
  if (result.usage_weight.size() != frame.n() ||
      result.target_weight.size() != frame.n()) {
    fail(errc::dimension_mismatch, "match result does not match frame");
  }
  if (result.n_matched == 0) fail(errc::unmatched_units, "no matched targets");

  const double sigma2 = nn_noise_variance(frame, scores);
  // Each row enters the estimator with coefficient (target indicator + reuse
  // weight); under homoscedastic noise the variance is sigma^2 times the sum
  // of squared coefficients over the matched count squared.
  double coeff_ss = 0.0;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    const double c = result.target_weight(i) + result.usage_weight(i);
    coeff_ss += c * c;
  }
  const double n_matched = static_cast<double>(result.n_matched);
  return std::sqrt(sigma2 * coeff_ss / (n_matched * n_matched));
}

}  // namespace ck
