#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ck/error.hpp"
#include "ck/estimators.hpp"

// Uncertainty machinery: row-resampling bootstrap with counter-based
// per-replicate seeds, a heteroscedasticity-robust sandwich for weighted
// mean-difference regressions, and the matched-pair variance for matching
// estimators (which must never be bootstrapped).

namespace ck {

struct BootstrapPlan {
  int n_replicates = 1000;
  std::uint64_t base_seed = 0;
  // A replicate whose estimator throws ck::Error is dropped; more than this
  // share of failures voids the run.
  double max_failure_fraction = 0.05;
};

struct BootstrapResult {
  double se = 0.0;
  double ci_low = 0.0;    // percentile interval
  double ci_high = 0.0;
  int n_failed = 0;
  bool budget_exceeded = false;  // too many failures: se/ci are not usable
  std::vector<double> replicates;  // sorted, failures removed
};

// Resamples row indices (0..n_rows-1, with replacement, same size) and
// re-runs the full estimator on each replicate.  Replicate r draws from a
// stream keyed by (base_seed, r), so results do not depend on evaluation
// order.  Throws too_many_failed_replicates past the failure budget.
BootstrapResult bootstrap_se(
    const BootstrapPlan& plan, Eigen::Index n_rows,
    const std::function<double(const std::vector<Eigen::Index>&)>& estimator);

// Multi-output variant: one resampling pass drives several estimators that
// share expensive intermediate fits.  The callback may return NaN for an
// output whose estimator failed on that replicate; the failure budget is
// tracked per output, and an output past it comes back flagged rather than
// throwing (so one fragile method cannot void the others).
std::vector<BootstrapResult> bootstrap_many(
    const BootstrapPlan& plan, Eigen::Index n_rows, std::size_t n_outputs,
    const std::function<std::vector<double>(const std::vector<Eigen::Index>&)>&
        estimators);

// HC0 sandwich SE for the exposure coefficient in the weighted regression of
// y on (1, a): the usual robust variance for normalized weighting estimators.
double sandwich_se_weighted(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& w);

// Matched-pair variance for nearest-neighbor matching: a homoscedastic
// within-arm noise estimate from same-arm nearest-neighbor differences,
// combined with the match reuse counts.
double matching_se(const AnalysisFrame& frame, const Eigen::VectorXd& scores,
                   const MatchResult& result, Target target);

}  // namespace ck
