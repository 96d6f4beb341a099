#include "ck/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ck/rng.hpp"

namespace ck {

DesignMatrix::DesignMatrix(Eigen::MatrixXd m, std::vector<std::string> labels)
    : values(std::move(m)), column_labels(std::move(labels)) {
  if (static_cast<Eigen::Index>(column_labels.size()) != values.cols()) {
    fail(errc::dimension_mismatch, "design has " + std::to_string(values.cols()) +
                                       " columns but " +
                                       std::to_string(column_labels.size()) +
                                       " labels");
  }
}

void DesignMatrix::push_column(const Eigen::VectorXd& column,
                               const std::string& label) {
  if (values.size() != 0 && column.size() != values.rows()) {
    fail(errc::dimension_mismatch,
         "column '" + label + "' has " + std::to_string(column.size()) +
             " rows, design has " + std::to_string(values.rows()));
  }
  values.conservativeResize(column.size(), values.cols() + 1);
  values.col(values.cols() - 1) = column;
  column_labels.push_back(label);
}

DesignMatrix design_with_intercept(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& columns,
    Eigen::Index n_rows) {
  DesignMatrix X;
  X.values = Eigen::MatrixXd::Ones(n_rows, 1);
  X.column_labels = {"intercept"};
  for (const auto& [label, column] : columns) X.push_column(column, label);
  return X;
}

namespace {

void check_shapes(const DesignMatrix& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) {
    fail(errc::dimension_mismatch,
         "design has " + std::to_string(X.rows()) + " rows, response has " +
             std::to_string(y.size()));
  }
  if (X.rows() == 0 || X.cols() == 0) {
    fail(errc::dimension_mismatch, "empty design matrix");
  }
  if (X.rows() < X.cols()) {
    fail(errc::rank_deficient, "fewer rows than columns (" +
                                   std::to_string(X.rows()) + " < " +
                                   std::to_string(X.cols()) + ")");
  }
}

[[noreturn]] void report_rank_deficiency(
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
    const std::vector<std::string>& labels) {
  // Pivot order puts the columns that failed to contribute rank at the end of
  // the permutation; those are the ones worth naming.
  const auto rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  std::ostringstream msg;
  msg << "design rank " << rank << " < " << labels.size()
      << "; dependent column(s):";
  for (Eigen::Index k = rank; k < perm.size(); ++k) {
    msg << " '" << labels[static_cast<std::size_t>(perm(k))] << "'";
  }
  fail(errc::rank_deficient, msg.str());
}

// (X'X)^{-1} recovered from the pivoted QR factorization X P = Q R.
Eigen::MatrixXd xtx_inverse(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                            Eigen::Index p) {
  Eigen::MatrixXd r_inv =
      qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>().solve(
          Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd inv_permuted = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation();
  return perm * inv_permuted * perm.transpose();
}

}  // namespace

RegressionFit ols_fit(const DesignMatrix& X, const Eigen::VectorXd& y) {
  check_shapes(X, y);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.values);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) report_rank_deficiency(qr, X.column_labels);

  RegressionFit fit;
  fit.link = Link::identity;
  fit.column_labels = X.column_labels;
  fit.coefficients = qr.solve(y);
  const Eigen::VectorXd residuals = y - X.values * fit.coefficients;
  const Eigen::Index dof = std::max<Eigen::Index>(n - p, 1);
  fit.sigma2 = residuals.squaredNorm() / static_cast<double>(dof);
  fit.covariance = fit.sigma2 * xtx_inverse(qr, p);
  fit.converged = true;
  fit.n_iterations = 1;
  return fit;
}

RegressionFit wls_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& w) {
  check_shapes(X, y);
  if (w.size() != y.size()) {
    fail(errc::dimension_mismatch, "weight vector length " +
                                       std::to_string(w.size()) +
                                       " does not match n = " +
                                       std::to_string(y.size()));
  }
  if (w.minCoeff() < 0.0) fail(errc::invalid_config, "negative weight");
  if (w.maxCoeff() <= 0.0) {
    fail(errc::invalid_config, "all regression weights are zero");
  }
  const Eigen::VectorXd root = w.array().sqrt();
  DesignMatrix Xw;
  Xw.values = root.asDiagonal() * X.values;
  Xw.column_labels = X.column_labels;
  const Eigen::VectorXd yw = root.asDiagonal() * y;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw.values);
  qr.setThreshold(1e-10);
  if (qr.rank() < Xw.cols()) report_rank_deficiency(qr, Xw.column_labels);

  RegressionFit fit;
  fit.link = Link::identity;
  fit.column_labels = X.column_labels;
  fit.coefficients = qr.solve(yw);
  const Eigen::VectorXd residuals = yw - Xw.values * fit.coefficients;
  const Eigen::Index dof = std::max<Eigen::Index>(X.rows() - X.cols(), 1);
  fit.sigma2 = residuals.squaredNorm() / static_cast<double>(dof);
  fit.covariance = fit.sigma2 * xtx_inverse(qr, Xw.cols());
  fit.converged = true;
  fit.n_iterations = 1;
  return fit;
}

double logistic_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log(p) and log(1-p) written to stay finite for large |eta|.
    const double e = eta(i);
    const double log1pexp = e > 30.0 ? e : std::log1p(std::exp(e));
    ll += y(i) * e - log1pexp;
  }
  return ll;
}

RegressionFit logistic_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                           const LogisticOptions& options) {
  check_shapes(X, y);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();

  bool any_zero = false, any_one = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) == 0.0) {
      any_zero = true;
    } else if (y(i) == 1.0) {
      any_one = true;
    } else {
      fail(errc::invalid_config,
           "binary response required, found " + std::to_string(y(i)));
    }
  }
  if (!any_zero || !any_one) {
    fail(errc::invalid_config, "response has a single class; both 0 and 1 "
                               "outcomes are required");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  double ll = logistic_loglik(eta, y);
  if (options.loglik_trace) {
    options.loglik_trace->clear();
    options.loglik_trace->push_back(ll);
  }

  bool converged = false;
  int iteration = 0;
  Eigen::VectorXd prob(n);

  // The pin threshold sits above the probability floor implied by the score
  // tolerance (|y - p| can reach ~1e-9 per row at "convergence" on separated
  // data), so quasi-separation is reported rather than returned as a fit.
  auto check_separation = [&]() {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (prob(i) <= 1e-8 || prob(i) >= 1.0 - 1e-8) {
        fail(errc::separation,
             "fitted probabilities pinned to 0/1 (row " + std::to_string(i) +
                 "); data are separated");
      }
    }
  };

  while (iteration < options.max_iterations) {
    ++iteration;
    for (Eigen::Index i = 0; i < n; ++i) prob(i) = expit(eta(i));

    const Eigen::VectorXd score = X.values.transpose() * (y - prob);
    if (score.cwiseAbs().maxCoeff() < options.score_tolerance) {
      converged = true;
      break;
    }

    Eigen::VectorXd weights = (prob.array() * (1.0 - prob.array())).max(1e-12);
    Eigen::MatrixXd info = X.values.transpose() * weights.asDiagonal() * X.values;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.values);
      qr.setThreshold(1e-10);
      if (qr.rank() < p) report_rank_deficiency(qr, X.column_labels);
      fail(errc::non_convergence, "information matrix is not positive definite");
    }
    const Eigen::VectorXd direction = ldlt.solve(score);

    // Step halving: accept the first step that does not decrease the
    // log-likelihood, so the trace is monotone even far from the optimum.
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd eta_new;
    double ll_new = ll;
    for (int halving = 0; halving < 40; ++halving) {
      eta_new = eta + step * (X.values * direction);
      ll_new = logistic_loglik(eta_new, y);
      if (ll_new >= ll - 1e-12) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled: no uphill step exists at any scale

    beta += step * direction;
    eta = eta_new;
    if (options.loglik_trace) options.loglik_trace->push_back(ll_new);
    const double rel_change = std::fabs(ll_new - ll) / (std::fabs(ll) + 1.0);
    ll = ll_new;
    if (rel_change < options.loglik_tolerance) {
      for (Eigen::Index i = 0; i < n; ++i) prob(i) = expit(eta(i));
      converged = true;
      break;
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) prob(i) = expit(eta(i));
  check_separation();
  if (!converged) {
    fail(errc::non_convergence,
         "IRLS did not converge in " + std::to_string(options.max_iterations) +
             " iterations");
  }

  RegressionFit fit;
  fit.link = Link::logit;
  fit.column_labels = X.column_labels;
  fit.coefficients = beta;
  fit.converged = true;
  fit.n_iterations = iteration;
  fit.loglik = ll;
  Eigen::VectorXd weights = (prob.array() * (1.0 - prob.array())).max(1e-12);
  Eigen::MatrixXd info = X.values.transpose() * weights.asDiagonal() * X.values;
  fit.covariance = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  return fit;
}

Eigen::VectorXd predict(const RegressionFit& fit, const DesignMatrix& X) {
  if (X.cols() != fit.coefficients.size()) {
    fail(errc::dimension_mismatch,
         "design has " + std::to_string(X.cols()) + " columns, fit has " +
             std::to_string(fit.coefficients.size()) + " coefficients");
  }
  Eigen::VectorXd eta = X.values * fit.coefficients;
  if (fit.link == Link::logit) {
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta(i) = expit(eta(i));
  }
  return eta;
}

}  // namespace ck
