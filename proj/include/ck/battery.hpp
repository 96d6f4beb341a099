#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ck/dataset.hpp"
#include "ck/report.hpp"

// Standard estimator batteries: for one exposure frame, run the whole ladder
// of methods (crude, outcome regressions, score stratification/regression,
// matching, weighting, augmented weighting, and the instrument row where one
// exists) in a fixed order, sharing one bootstrap pass across the methods
// whose SE is resampled.

namespace ck {

enum class BatteryPreset {
  offer,                 // a1: randomized, crude only
  uptake,                // a2: full ladder plus the offer-instrument row
  initiation_no_offer,   // a3 within a1=0
  initiation_offer,      // a3 within a1=1
};

BatteryPreset battery_preset_from_name(const std::string& name);
const char* battery_preset_name(BatteryPreset preset);

struct BatteryOptions {
  int bootstrap_replicates = 1000;
  std::uint64_t seed = 0;
  bool run_ate = true;
  bool run_att = true;
  // Matching must not be bootstrapped; enforced here at assembly.
};

// Runs the battery on the dataset.  Per-row estimator failures land in the
// row's error column; the run itself only throws for frame-level problems
// (missing columns, empty frames).  When the dataset carries potential
// outcome columns, each row's truth field is filled in.
std::vector<EstimateReport> run_battery(const Dataset& dataset,
                                        BatteryPreset preset,
                                        const BatteryOptions& options);

// One estimand, one method ("crude", "or_noint", "or_int", "ps_strat6",
// "ps_reg", "match_m1", "match_m3", "ipw", "aipw", "iv_wald", "iv_tsls",
// "smm").  Unknown names throw unknown_method.
EstimateReport run_single(const Dataset& dataset, const EstimandSpec& spec,
                          const std::string& method,
                          const BatteryOptions& options);

}  // namespace ck
