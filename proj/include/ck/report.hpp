#pragma once

#include <string>
#include <vector>

#include "ck/estimands.hpp"

// Result rows produced by estimator runs, their CSV round-trip, and the
// rendered comparison table.

namespace ck {

struct EstimateReport {
  EstimandSpec spec;
  std::string method;
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  std::string se_method;  // model | bootstrap | matched-pair | delta | two-sample
  std::string ci_method;  // normal | percentile | none
  double truth = std::numeric_limits<double>::quiet_NaN();  // when available
  Eigen::Index n_used = 0;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::string error;  // non-empty when the row's estimator failed

  void diag(const std::string& key, double value) {
    diagnostics.emplace_back(key, value);
  }
};

void write_reports(const std::vector<EstimateReport>& reports,
                   const std::string& path);

std::vector<EstimateReport> read_reports(const std::string& path);

// Human-readable table.  Rows with truth available are flagged with '*' when
// the estimate sits more than 3 SEs from it; missing values render as '-'.
// Throws empty_input when there are no rows.
std::string render_report(const std::vector<EstimateReport>& reports);

}  // namespace ck
