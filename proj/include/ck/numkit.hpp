#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ck/error.hpp"

// Small regression toolkit on top of Eigen: labelled design matrices, OLS via
// column-pivoted QR, and logistic fits via iteratively reweighted least
// squares.  Everything downstream (propensity scores, outcome models, 2SLS)
// goes through these two fitters so rank, separation, and convergence
// problems surface with column labels attached.

namespace ck {

struct DesignMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> column_labels;

  DesignMatrix() = default;
  DesignMatrix(Eigen::MatrixXd m, std::vector<std::string> labels);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  // Appends a column on the right.
  void push_column(const Eigen::VectorXd& column, const std::string& label);
};

// Convenience builder: an intercept column followed by the given columns.
DesignMatrix design_with_intercept(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& columns,
    Eigen::Index n_rows);

enum class Link { identity, logit };

struct RegressionFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;  // model-based covariance of the coefficients
  Link link = Link::identity;
  bool converged = true;
  int n_iterations = 0;
  double sigma2 = 0.0;    // residual variance (identity link only)
  double loglik = 0.0;    // final log-likelihood (logit link only)
  std::vector<std::string> column_labels;
};

struct LogisticOptions {
  int max_iterations = 100;
  double score_tolerance = 1e-8;       // converged when max |score| is below
  double loglik_tolerance = 1e-10;     // or relative log-likelihood change is
  // Per-iteration log-likelihoods, recorded if non-null (monotone by
  // construction of the step-halving line search).
  std::vector<double>* loglik_trace = nullptr;
};

// Least squares via column-pivoted QR.  Throws rank_deficient naming the
// offending columns when X does not have full column rank.
RegressionFit ols_fit(const DesignMatrix& X, const Eigen::VectorXd& y);

// Weighted least squares with fixed non-negative weights.
RegressionFit wls_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& w);

// Binomial MLE by IRLS with step halving.  y must be 0/1 with both classes
// present.  Throws separation when fitted probabilities pin to 0/1, and
// non_convergence when the iteration budget runs out.
RegressionFit logistic_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                           const LogisticOptions& options = {});

// Linear predictor passed through the fit's link (probabilities for logit).
Eigen::VectorXd predict(const RegressionFit& fit, const DesignMatrix& X);

double logistic_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y);

}  // namespace ck
