#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ck/estimands.hpp"
#include "ck/numkit.hpp"

// Propensity-score machinery: logistic score fitting, design-based weights,
// covariate balance tables, overlap diagnostics, and quantile stratification.

namespace ck {

struct PropensityFit {
  RegressionFit model;
  Eigen::VectorXd scores;        // fitted P(A=1 | L), in (0, 1)
  Eigen::VectorXd linear_index;  // logit of the score
};

// Logistic regression of the exposure on an intercept plus the frame's
// confounders (intercept-only when the frame has none).
PropensityFit fit_ps(const AnalysisFrame& frame);

enum class WeightKind {
  ate_unstabilized,  // 1/e treated, 1/(1-e) control
  ate_stabilized,    // P(A=1)/e treated, P(A=0)/(1-e) control
  att_unstabilized,  // 1 treated, e/(1-e) control
  att_stabilized,    // 1 treated, [e/(1-e)] * P(A=0)/P(A=1) control
};

struct Truncation {
  enum class Kind { none, percentile, cap };
  Kind kind = Kind::none;
  double value = 0.0;  // percentile in (0,1), or absolute cap

  static Truncation none() { return {}; }
  static Truncation percentile(double p) { return {Kind::percentile, p}; }
  static Truncation cap(double c) { return {Kind::cap, c}; }
};

struct WeightSet {
  WeightKind kind = WeightKind::ate_unstabilized;
  Eigen::VectorXd weights;
  Truncation truncation;
  double marginal_treated = 0.0;  // sample share with A=1 (stabilization)
};

// Builds weights from fitted scores.  Scores at 0/1 (or beyond) throw
// positivity_violation; truncation caps large weights after construction.
WeightSet make_weights(const Eigen::VectorXd& exposure,
                       const Eigen::VectorXd& scores, WeightKind kind,
                       Truncation truncation = Truncation::none());

struct BalanceRow {
  std::string label;
  double smd_before = 0.0;       // standardized mean difference, treated-control
  double smd_after = 0.0;        // same, under the weights
  double var_ratio_before = 0.0;  // treated/control variance ratio
  double var_ratio_after = 0.0;
  bool zero_variance = false;    // no variation in either arm; SMD set to 0
};

struct BalanceTable {
  std::vector<BalanceRow> rows;

  double max_abs_smd_before() const;
  double max_abs_smd_after() const;
};

// SMDs use the unweighted pooled standard deviation as denominator in both
// columns, so before/after are on the same scale.
BalanceTable balance_check(const AnalysisFrame& frame,
                           const WeightSet* weights = nullptr);

struct OverlapReport {
  double treated_min = 0.0, treated_max = 0.0;
  double control_min = 0.0, control_max = 0.0;
  // Score quantiles per arm at 1, 25, 50, 75, 99 percent.
  std::array<double, 5> treated_quantiles{};
  std::array<double, 5> control_quantiles{};
  // Share of each arm outside the other arm's [min, max] score range.
  double frac_treated_outside = 0.0;
  double frac_control_outside = 0.0;
  double frac_outside = 0.0;  // combined share
  // Normalized difference of the linear index between arms: the headline
  // separation measure (larger = worse overlap).
  double index_smd = 0.0;
};

OverlapReport overlap_check(const AnalysisFrame& frame,
                            const PropensityFit& fit);

struct StrataAssignment {
  Eigen::VectorXi stratum;          // 0-based stratum per row
  int n_strata = 0;
  std::vector<double> boundaries;   // score quantiles at j/J, j = 1..J-1
};

// Cuts scores into J quantile strata; scores equal to a boundary go to the
// lower stratum.
StrataAssignment stratify_by_ps(const Eigen::VectorXd& scores, int n_strata = 6);

}  // namespace ck
