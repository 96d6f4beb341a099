#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ck/dataset.hpp"
#include "ck/numkit.hpp"
#include "ck/sim.hpp"

// Estimand descriptions and their translation into concrete analysis frames:
// which rows enter, which column is the exposure, which covariates must be
// adjusted for, and (for encouragement analyses) which column instruments the
// exposure.

namespace ck {

enum class Contrast { ate, att, atnt, cace };
enum class Exposure { a1, a2, a3, a4 };

// Upstream exposures held fixed when a downstream effect is evaluated.
// Supported settings: none (A1/A2 effects), a1=0 / a1=1 / a2=1 (A3 effects),
// a3=1 (A4 effects, optionally with a1 fixed as well).
struct WorldSetting {
  std::optional<int> a1;
  std::optional<int> a2;
  std::optional<int> a3;

  bool empty() const { return !a1 && !a2 && !a3; }
};

// Restriction to a covariate stratum, e.g. {"edu", 2}.
struct SubpopulationFilter {
  std::string column;
  double value = 0.0;
};

struct EstimandSpec {
  Contrast contrast = Contrast::ate;
  Exposure exposure = Exposure::a2;
  WorldSetting world;
  std::optional<std::string> instrument;  // column name, e.g. "a1"
  std::optional<SubpopulationFilter> subpopulation;
};

const char* contrast_name(Contrast contrast);
const char* exposure_name(Exposure exposure);

// Compact text form, e.g. "ate:a3,a1=1" or "cace:a2,iv=a1" or
// "att:a2,sub=edu:2"; parse and to_string round-trip.
std::string to_string(const EstimandSpec& spec);
EstimandSpec parse_estimand(const std::string& text);

// A resolved frame: everything an estimator needs, detached from the dataset.
struct AnalysisFrame {
  EstimandSpec spec;
  Eigen::VectorXd y;            // outcome
  Eigen::VectorXd a;            // binary exposure
  DesignMatrix confounders;     // labelled columns, no intercept
  Eigen::VectorXd z;            // instrument; size 0 when absent
  std::vector<Eigen::Index> rows;  // row indices into the source dataset

  Eigen::Index n() const { return y.size(); }
  bool has_instrument() const { return z.size() == y.size() && y.size() > 0; }
};

// Builds the analysis frame for a spec: applies world restrictions and
// subpopulation filters, picks the exposure column, and assembles the
// exposure-specific confounder set.  Throws illegal_world for disallowed
// combinations (A3 effects without a world, instrumenting A3, A4 effects
// without a3=1), unsupported_world for world settings outside the supported
// list, missing_column, and empty_subpopulation.
AnalysisFrame resolve(const EstimandSpec& spec, const Dataset& dataset);

// Ground-truth value of the spec from stored potential outcomes.
double true_contrast(const std::vector<IndividualRecord>& records,
                     const EstimandSpec& spec);

// Same, from a dataset that carries the potential-outcome columns.
double true_contrast(const Dataset& dataset, const EstimandSpec& spec);

// Table-based variant for contrasts expressible as a difference of two truth
// table cells (all the headline contrasts are).
double true_contrast(const TruthTable& table, const EstimandSpec& spec);

}  // namespace ck
