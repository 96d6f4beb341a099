#include "ck/iv.hpp"

#include <cmath>

#include "ck/stats.hpp"

namespace ck {

IVFrame IVFrame::from_analysis(const AnalysisFrame& frame) {
  if (!frame.has_instrument()) {
    fail(errc::illegal_world,
         "frame carries no instrument; resolve the estimand with iv=a1");
  }
  IVFrame iv;
  iv.y = frame.y;
  iv.a = frame.a;
  iv.z = frame.z;
  iv.covariates = frame.confounders;
  return iv;
}

namespace {

struct ArmStats {
  Eigen::Index n = 0;
  double mean_y = 0.0, mean_a = 0.0;
  double var_y = 0.0, var_a = 0.0, cov_ya = 0.0;
};

ArmStats arm_stats(const IVFrame& frame, double z_value) {
  ArmStats s;
  double sum_y = 0.0, sum_a = 0.0;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    if (frame.z(i) != z_value) continue;
    ++s.n;
    sum_y += frame.y(i);
    sum_a += frame.a(i);
  }
  if (s.n == 0) {
    fail(errc::empty_subpopulation,
         "instrument arm z=" + std::to_string(static_cast<int>(z_value)) +
             " is empty");
  }
  s.mean_y = sum_y / static_cast<double>(s.n);
  s.mean_a = sum_a / static_cast<double>(s.n);
  double ss_y = 0.0, ss_a = 0.0, ss_ya = 0.0;
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    if (frame.z(i) != z_value) continue;
    const double dy = frame.y(i) - s.mean_y;
    const double da = frame.a(i) - s.mean_a;
    ss_y += dy * dy;
    ss_a += da * da;
    ss_ya += dy * da;
  }
  const double dof = s.n > 1 ? static_cast<double>(s.n - 1) : 1.0;
  s.var_y = ss_y / dof;
  s.var_a = ss_a / dof;
  s.cov_ya = ss_ya / dof;
  return s;
}

FirstStageSummary first_stage_summary(const ArmStats& z1, const ArmStats& z0) {
  FirstStageSummary fs;
  fs.rate_treated_z1 = z1.mean_a;
  fs.rate_treated_z0 = z0.mean_a;
  fs.rate_difference = z1.mean_a - z0.mean_a;
  if (std::fabs(fs.rate_difference) < 0.01) {
    fail(errc::weak_or_null_first_stage,
         "first-stage rate difference " + std::to_string(fs.rate_difference) +
             " is indistinguishable from zero");
  }
  fs.weak = std::fabs(fs.rate_difference) < 0.1;
  return fs;
}

void check_binary_instrument(const IVFrame& frame) {
  for (Eigen::Index i = 0; i < frame.n(); ++i) {
    if (frame.z(i) != 0.0 && frame.z(i) != 1.0) {
      fail(errc::invalid_config, "instrument must be binary 0/1");
    }
  }
}

}  // namespace

IVFit wald(const IVFrame& frame) {
  if (frame.n() == 0) fail(errc::empty_input, "empty frame");
  check_binary_instrument(frame);
  const ArmStats z1 = arm_stats(frame, 1.0);
  const ArmStats z0 = arm_stats(frame, 0.0);

  IVFit fit;
  fit.first_stage = first_stage_summary(z1, z0);
  fit.itt_outcome = z1.mean_y - z0.mean_y;
  const double denom = fit.first_stage.rate_difference;
  fit.beta_iv = fit.itt_outcome / denom;

  // Delta method on the ratio of two arm-mean differences; the numerator and
  // denominator share sampling noise through the within-arm (Y, A) covariance.
  const double n1 = static_cast<double>(z1.n);
  const double n0 = static_cast<double>(z0.n);
  const double var_dy = z1.var_y / n1 + z0.var_y / n0;
  const double var_da = z1.var_a / n1 + z0.var_a / n0;
  const double cov = z1.cov_ya / n1 + z0.cov_ya / n0;
  const double var_beta =
      (var_dy - 2.0 * fit.beta_iv * cov + fit.beta_iv * fit.beta_iv * var_da) /
      (denom * denom);
  fit.se = std::sqrt(std::max(0.0, var_beta));
  return fit;
}

IVFit tsls(const IVFrame& frame) {
  if (frame.n() == 0) fail(errc::empty_input, "empty frame");
  check_binary_instrument(frame);
  const ArmStats z1 = arm_stats(frame, 1.0);
  const ArmStats z0 = arm_stats(frame, 0.0);

  IVFit fit;
  fit.first_stage = first_stage_summary(z1, z0);
  fit.itt_outcome = z1.mean_y - z0.mean_y;

  const Eigen::Index n = frame.n();
  DesignMatrix first;
  first.values = Eigen::MatrixXd::Ones(n, 1);
  first.column_labels = {"intercept"};
  for (Eigen::Index c = 0; c < frame.covariates.cols(); ++c) {
    first.push_column(frame.covariates.values.col(c),
                      frame.covariates.column_labels[static_cast<std::size_t>(c)]);
  }
  first.push_column(frame.z, "z");
  fit.first_stage_fit = ols_fit(first, frame.a);
  const Eigen::VectorXd a_hat = first.values * fit.first_stage_fit.coefficients;

  DesignMatrix second;
  second.values = Eigen::MatrixXd::Ones(n, 1);
  second.column_labels = {"intercept"};
  for (Eigen::Index c = 0; c < frame.covariates.cols(); ++c) {
    second.push_column(frame.covariates.values.col(c),
                       frame.covariates.column_labels[static_cast<std::size_t>(c)]);
  }
  second.push_column(a_hat, "a_hat");
  fit.second_stage_fit = ols_fit(second, frame.y);
  const Eigen::Index p = second.cols();
  fit.beta_iv = fit.second_stage_fit.coefficients(p - 1);

  // Classical 2SLS variance: residuals use the actual exposure, the bread
  // uses the projected one.
  Eigen::VectorXd residuals = frame.y;
  residuals -= second.values.leftCols(p - 1) *
               fit.second_stage_fit.coefficients.head(p - 1);
  residuals -= frame.a * fit.beta_iv;
  const double sigma2 =
      residuals.squaredNorm() / static_cast<double>(n - p);
  const Eigen::MatrixXd xtx = second.values.transpose() * second.values;
  const Eigen::MatrixXd cov =
      sigma2 * xtx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.se = std::sqrt(cov(p - 1, p - 1));
  return fit;
}

IVFit smm_att(const IVFrame& frame) {
  // The linear structural-mean moment E[(Y - beta * A) | Z] free of Z solves
  // to the ratio of ITT effects; with no always-takers the treated are
  // compliers under offer, so the ratio is the effect on the treated.
  return wald(frame);
}

IVDiagnostics iv_diagnostics(const IVFrame& frame) {
  if (frame.n() == 0) fail(errc::empty_input, "empty frame");
  check_binary_instrument(frame);
  const ArmStats z1 = arm_stats(frame, 1.0);
  const ArmStats z0 = arm_stats(frame, 0.0);

  IVDiagnostics diag;
  diag.first_stage = first_stage_summary(z1, z0);
  diag.untestable_note =
      "exclusion and instrument exogeneity are assumptions: the offer must "
      "move the outcome only through uptake and be as good as random";

  // Partial F for the instrument in the first stage.
  {
    DesignMatrix first;
    first.values = Eigen::MatrixXd::Ones(frame.n(), 1);
    first.column_labels = {"intercept"};
    for (Eigen::Index c = 0; c < frame.covariates.cols(); ++c) {
      first.push_column(
          frame.covariates.values.col(c),
          frame.covariates.column_labels[static_cast<std::size_t>(c)]);
    }
    first.push_column(frame.z, "z");
    const RegressionFit fs = ols_fit(first, frame.a);
    const Eigen::Index p = first.cols();
    const double t = fs.coefficients(p - 1) / std::sqrt(fs.covariance(p - 1, p - 1));
    diag.first_stage_F = t * t;
  }

  // Covariate SMDs across instrument arms: should be noise under
  // randomization.
  const double n1 = static_cast<double>(z1.n);
  const double n0 = static_cast<double>(z0.n);
  for (Eigen::Index c = 0; c < frame.covariates.cols(); ++c) {
    const Eigen::VectorXd x = frame.covariates.values.col(c);
    double s1 = 0.0, s0 = 0.0;
    for (Eigen::Index i = 0; i < frame.n(); ++i) {
      (frame.z(i) == 1.0 ? s1 : s0) += x(i);
    }
    const double m1 = s1 / n1;
    const double m0 = s0 / n0;
    double ss1 = 0.0, ss0 = 0.0;
    for (Eigen::Index i = 0; i < frame.n(); ++i) {
      const double d = x(i) - (frame.z(i) == 1.0 ? m1 : m0);
      (frame.z(i) == 1.0 ? ss1 : ss0) += d * d;
    }
    const double v1 = z1.n > 1 ? ss1 / (n1 - 1.0) : 0.0;
    const double v0 = z0.n > 1 ? ss0 / (n0 - 1.0) : 0.0;
    const double pooled = std::sqrt((v1 + v0) / 2.0);
    diag.covariate_labels.push_back(
        frame.covariates.column_labels[static_cast<std::size_t>(c)]);
    diag.covariate_smd_across_z.push_back(pooled > 0.0 ? (m1 - m0) / pooled
                                                       : 0.0);
  }
  return diag;
}

}  // namespace ck
