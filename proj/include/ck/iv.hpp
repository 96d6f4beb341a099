#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ck/estimands.hpp"
#include "ck/numkit.hpp"

// Instrument-based estimators for the encouragement design: the randomized
// offer instruments uptake.  Wald ratio, two-stage least squares, and the
// structural mean estimator that reads the same ratio as an effect on the
// treated under one-sided noncompliance.

namespace ck {

struct IVFrame {
  Eigen::VectorXd y;
  Eigen::VectorXd a;          // exposure
  Eigen::VectorXd z;          // binary instrument
  DesignMatrix covariates;    // optional, no intercept

  static IVFrame from_analysis(const AnalysisFrame& frame);
  Eigen::Index n() const { return y.size(); }
};

struct FirstStageSummary {
  double rate_treated_z1 = 0.0;   // P(A=1 | Z=1)
  double rate_treated_z0 = 0.0;   // P(A=1 | Z=0)
  double rate_difference = 0.0;
  bool weak = false;              // |difference| < 0.1: flagged, not fatal
};

struct IVFit {
  double beta_iv = 0.0;
  double se = 0.0;
  FirstStageSummary first_stage;
  double itt_outcome = 0.0;       // E[Y|Z=1] - E[Y|Z=0]
  // Filled by tsls: the two fitted stages.
  RegressionFit first_stage_fit;
  RegressionFit second_stage_fit;
};

// Ratio of intention-to-treat effects with a delta-method SE.  A first-stage
// rate difference below 0.01 in magnitude throws weak_or_null_first_stage;
// below 0.1 it only sets the weak flag.
IVFit wald(const IVFrame& frame);

// Two-stage least squares with the frame's covariates (equals the Wald ratio
// when there are none).  Classical 2SLS standard error.
IVFit tsls(const IVFrame& frame);

// Structural-mean estimator of the effect on the treated.  With a randomized
// instrument and no always-takers it solves to the same ratio as wald(); the
// interpretation, not the arithmetic, changes.
IVFit smm_att(const IVFrame& frame);

struct IVDiagnostics {
  FirstStageSummary first_stage;
  double first_stage_F = 0.0;               // from the first-stage regression
  std::vector<std::string> covariate_labels;
  std::vector<double> covariate_smd_across_z;  // randomization check
  // The exclusion restriction and instrument-exogeneity cannot be tested
  // from data; rendered with every IV report.
  std::string untestable_note;
};

IVDiagnostics iv_diagnostics(const IVFrame& frame);

}  // namespace ck
