#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ck/estimands.hpp"
#include "ck/numkit.hpp"
#include "ck/propensity.hpp"

// Estimators that lean on no unmeasured confounding: outcome regression,
// regression on the propensity score, score stratification, score matching,
// inverse-probability weighting, and the augmented (doubly robust) weighting
// estimator.  Each returns its point estimate plus whatever the downstream
// variance machinery needs.

namespace ck {

enum class Target { ate, att };

// Unadjusted treated-minus-control mean difference with its two-sample SE.
struct CrudeResult {
  double estimate = 0.0;
  double se = 0.0;
  Eigen::Index n_treated = 0;
  Eigen::Index n_control = 0;
};

CrudeResult crude_difference(const AnalysisFrame& frame);

struct OutcomeModelFit {
  RegressionFit fit;
  double estimate = 0.0;
  double se_model = 0.0;     // delta-method SE from the fit covariance
  bool interactions = false;
  bool score_dropped = false;  // ps_regression only: constant score removed
};

// Linear outcome regression on exposure and confounders.  With interactions,
// exposure-by-confounder products are added and the effect is averaged over
// the target population (everyone for ATE, the treated for ATT).
OutcomeModelFit or_ate(const AnalysisFrame& frame, bool with_interactions);
OutcomeModelFit or_att(const AnalysisFrame& frame, bool with_interactions);

// Outcome regression on exposure and the fitted score alone.  A score with
// no variation is dropped (flagged), collapsing to the crude difference.
OutcomeModelFit ps_regression(const AnalysisFrame& frame,
                              const PropensityFit& ps);

struct StrataSummary {
  struct Row {
    int stratum = 0;
    Eigen::Index n = 0;
    Eigen::Index n_treated = 0;
    Eigen::Index n_control = 0;
    double mean_treated = 0.0;
    double mean_control = 0.0;
    double effect = 0.0;
  };
  std::vector<Row> rows;
  double estimate = 0.0;
};

// Within-stratum mean differences combined with stratum-share weights
// (population shares for ATE, treated shares for ATT).  A stratum with an
// empty arm throws empty_arm_in_stratum.
StrataSummary stratification(const AnalysisFrame& frame,
                             const StrataAssignment& strata, Target target);

struct MatchConfig {
  int n_matches = 1;            // matches per target (M)
  bool with_replacement = true;
  std::optional<double> caliper;  // max |score difference|
};

struct MatchResult {
  double estimate = 0.0;
  Eigen::Index n_targets = 0;     // units we tried to match
  Eigen::Index n_matched = 0;     // targets with at least one match
  Eigen::Index n_unmatched = 0;   // targets dropped by the caliper
  double mean_matches = 0.0;      // average matches per matched target
  // Usage weight per frame row: sum over targets of 1/m_target for every
  // time the row served as a match (drives the matching variance).
  Eigen::VectorXd usage_weight;
  // 1 if the row was a matched target, 0 otherwise.
  Eigen::VectorXd target_weight;
};

// Nearest-neighbor matching on |score difference|.  Ties break toward the
// lower row index; a target takes min(M, eligible-within-caliper) matches and
// is dropped when none are eligible.  ATT matches controls to each treated
// unit; ATE additionally matches treated units to each control.  Throws
// unmatched_units when every target is dropped.
MatchResult matching(const AnalysisFrame& frame, const Eigen::VectorXd& scores,
                     const MatchConfig& config, Target target);

struct IpwResult {
  double estimate = 0.0;       // reported: weighted-least-squares (ratio) form
  double ht_estimate = 0.0;    // plain sum form, dividing by n (or n_treated)
  double sum_weights_treated = 0.0;
  double sum_weights_control = 0.0;
};

// Weighted mean difference under the given weight set.  For ATE targets the
// plain form divides arm sums by n; for ATT it divides the reweighted control
// sum by the number of treated.  The reported estimate always normalizes by
// realized weight mass.
IpwResult ipw(const AnalysisFrame& frame, const WeightSet& weights,
              Target target);

struct AipwResult {
  double estimate = 0.0;
  double se_influence = 0.0;   // SE from the influence-function variance
  Eigen::VectorXd influence;   // per-row contribution (mean already removed)
};

// Augmented IPW for the ATE: outcome-model predictions corrected by weighted
// residuals.  Consistent when either the score model or the outcome model is
// right.
AipwResult aipw(const AnalysisFrame& frame, const PropensityFit& ps);

}  // namespace ck
