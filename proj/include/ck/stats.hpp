#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ck/error.hpp"

// Shared descriptive statistics helpers.

namespace ck {

// Linear-interpolation quantile (the "type 7" rule: h = (n-1)p) on an
// already-sorted vector.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) fail(errc::empty_input, "quantile of empty vector");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(const Eigen::VectorXd& values, double p) {
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, p);
}

inline double mean(const Eigen::VectorXd& values) {
  if (values.size() == 0) fail(errc::empty_input, "mean of empty vector");
  return values.mean();
}

// Unbiased sample variance.
inline double variance(const Eigen::VectorXd& values) {
  const Eigen::Index n = values.size();
  if (n < 2) return 0.0;
  const double m = values.mean();
  return (values.array() - m).square().sum() / static_cast<double>(n - 1);
}

inline double weighted_mean(const Eigen::VectorXd& values,
                            const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  if (total <= 0.0) fail(errc::empty_input, "weighted mean with zero mass");
  return values.dot(weights) / total;
}

// Weight-frequency variance: sum w (x - mean)^2 / sum w.
inline double weighted_variance(const Eigen::VectorXd& values,
                                const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  if (total <= 0.0) fail(errc::empty_input, "weighted variance with zero mass");
  const double m = values.dot(weights) / total;
  return (values.array() - m).square().matrix().dot(weights) / total;
}

}  // namespace ck
