#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ck/error.hpp"

// Synthetic mother-infant cohort with known potential outcomes.
//
// The exposure chain is nested: A1 (randomized encouragement offer) can only
// raise uptake A2 (following the encouragement), which can only raise A3
// (starting to breastfeed) and its duration, and A4 means breastfeeding ran
// the full 91 days.  Every record carries the potential outcomes of
// three-month weight under each supported intervention, so estimators can be
// scored against per-individual ground truth.
//
// Each record is a pure function of (config, seed, id): covariates and latent
// shocks come from a per-individual counter-based stream (see rng.hpp), which
// makes generation order-, chunk-, and thread-independent.

namespace ck {

// Centering used inside all structural equations: age in years relative to
// 24, birth weight relative to 3400 g (in grams or kilograms as labelled).
inline constexpr double kAgeCenter = 24.0;
inline constexpr double kBirthWeightCenter = 3400.0;
inline constexpr double kFullDurationDays = 91.0;

struct CovariateProfile {
  double maternal_age = 0.0;      // years
  bool urban = false;             // urban residence
  bool east = false;              // eastern region
  int education = 0;              // 0 low, 1 intermediate, 2 high
  bool allergy = false;           // family allergy history
  bool smoke = false;             // smoked during pregnancy
  bool female = false;            // infant sex
  double birth_weight = 0.0;      // grams
  bool caesarean = false;
};

struct ExposurePath {
  bool a1_offered = false;        // randomized encouragement offer
  bool a2_followed = false;       // followed the encouragement (needs offer)
  bool a3_started_bf = false;     // initiated breastfeeding
  bool a4_full3months = false;    // breastfed the full 91 days
  double bf_duration = 0.0;       // days, 0 iff a3_started_bf is false
};

struct PotentialOutcomeSet {
  double y_a1_0 = 0.0;        // offer withheld
  double y_a1_1 = 0.0;        // offer made
  double y_a2_0 = 0.0;        // uptake prevented (== y_a1_0 by construction)
  double y_a2_1 = 0.0;        // uptake imposed
  double y_a1_0_a3_0 = 0.0;   // never breastfed (common to all a3(0) worlds)
  double y_a1_0_a3_1 = 0.0;   // initiation imposed, no offer
  double y_a1_1_a3_1 = 0.0;   // initiation imposed, offer made
  double y_a2_1_a3_1 = 0.0;   // initiation imposed, uptake imposed
  double y_a4_1 = 0.0;        // full 91-day breastfeeding imposed
  bool a2_under_offer = false;  // would follow the encouragement if offered
};

struct IndividualRecord {
  std::int64_t id = 0;
  CovariateProfile covariates;
  ExposurePath exposures;
  double y_observed = 0.0;        // three-month weight, grams
  PotentialOutcomeSet potentials;
  double u_hidden = 0.0;          // standard-normal unmeasured confounder
};

struct DgpConfig {
  std::int64_t n = 17044;
  std::uint64_t seed = 1;

  // Randomized offer probability.
  double p_offer = 0.5;

  // Covariate marginals.
  double age_mean = 24.5;
  double age_sd = 5.0;
  double age_min = 16.0;
  double age_max = 45.0;
  double p_urban = 0.60;
  double p_east = 0.40;
  double p_edu_low = 0.35;
  double p_edu_mid = 0.45;
  double p_allergy = 0.15;
  double p_smoke = 0.20;
  double p_female = 0.48;
  double bw_mean = 3450.0;
  double bw_smoke_shift = -180.0;
  double bw_female_shift = -110.0;
  double bw_sd = 420.0;
  double bw_min = 1800.0;
  double bw_max = 5200.0;
  double p_caesar = 0.12;

  // Uptake (following the offer), logit scale.
  double uptake_intercept = 0.0;
  double uptake_age = 0.0450407454991253;
  double uptake_edu = 0.8015313742343491;
  double uptake_smoke = -0.45202578245347347;

  // Initiation, logit scale; uptake shifts the propensity upward.
  double init_intercept = 0.043143745873049075;
  double init_uptake = 1.4468710175219153;
  double init_age = 0.077888;
  double init_edu = 0.18180865102675317;
  double init_smoke = -0.7;
  double init_bweight_kg = 0.3416397355094396;
  double init_female = -0.25;

  // Breastfeeding duration in days (clamped to [1, 91] when initiated).
  double dur_intercept = 70.41586492009904;
  double dur_uptake = 16.28168779576359;
  double dur_age = 0.45;
  double dur_edu = 0.030794;
  double dur_allergy = 4.0;
  double dur_smoke = -7.0;
  double dur_bweight_kg = 7.0;
  double dur_caesar = -6.0;
  double dur_female = 2.5;
  double dur_noise_sd = 26.0;

  // Weight gain per breastfed day, grams.
  double gain_intercept = 7.810684085416881;
  double gain_edu = -2.4350841773558862;
  double gain_smoke = 0.0015949145761154318;
  double gain_bweight_kg = -0.5119638014237007;

  // Baseline three-month weight, grams.
  double base_intercept = 5790.562923751839;
  double base_age = 3.0;
  double base_age2 = -0.9;
  double base_edu_mid = 200.0;
  double base_edu_high = 400.0;
  double base_allergy = -10.0;
  double base_smoke = -60.0;
  double base_urban = 15.0;
  double base_east = -12.0;
  double base_female = -110.0;
  double base_bweight_g = 1.15;
  double base_bweight_kg2 = -40.0;
  double base_caesar = -30.0;
  double base_noise_sd = 140.0;

  // Unmeasured confounding: strength 0 disables it; the scales control how a
  // shared latent enters the uptake logit and the outcome baseline.
  double confounding_strength = 0.0;
  double confounding_uptake_scale = 1.0;
  double confounding_outcome_scale = 60.0;

  // Table of all real-valued fields, used for config file round-tripping.
  static const std::vector<std::pair<std::string, double DgpConfig::*>>&
  double_fields();
};

// Coefficient sign conventions and basic range checks; throws invalid_config.
void validate(const DgpConfig& config);

DgpConfig default_config();

// Breastfeeding has no effect on weight: per-day gain and the uptake effect
// on duration are zero, so all potential outcomes coincide per record.
DgpConfig null_effect_config();

// Default coefficients plus a shared latent that raises uptake and the
// outcome together, breaking no-unmeasured-confounding for A2 and A3.
DgpConfig confounded_config(double strength);

// The record for one individual; pure in (config, seed embedded in config, id).
IndividualRecord make_record(const DgpConfig& config, std::int64_t id);

// All n records.  n_threads > 1 splits the id range across threads; output is
// identical regardless of thread count.
std::vector<IndividualRecord> generate(const DgpConfig& config,
                                       int n_threads = 1);

// --- ground truth ----------------------------------------------------------

struct TruthTable {
  static constexpr int n_rows = 9;    // intervention rows
  static constexpr int n_columns = 10;  // subpopulation columns

  std::array<std::array<double, n_columns>, n_rows> means{};  // NaN if empty
  std::array<std::int64_t, n_columns> counts{};

  static const char* row_label(int row);
  static const char* column_label(int column);

  // Throws empty_subpopulation naming the cell when the column is empty.
  double cell(int row, int column) const;
};

// Row indices of the truth table.
enum : int {
  kRowYa1_0 = 0, kRowYa1_1, kRowYa2_0, kRowYa2_1, kRowYa3_0,
  kRowYa1_0a3_1, kRowYa1_1a3_1, kRowYa2_1a3_1, kRowYa4_1,
};
// Column indices of the truth table.
enum : int {
  kColOverall = 0, kColA2, kColA1OnlyOffer, kColA1_1A3_1, kColA1_1A3_0,
  kColA1_0A3_1, kColA1_0A3_0, kColEduLow, kColEduMid, kColEduHigh,
};

class TruthAccumulator {
 public:
  void add(const IndividualRecord& record);
  void merge(const TruthAccumulator& other);
  TruthTable table() const;

 private:
  std::array<std::array<double, TruthTable::n_columns>, TruthTable::n_rows>
      sums_{};
  std::array<std::int64_t, TruthTable::n_columns> counts_{};
};

TruthTable truth_table(const std::vector<IndividualRecord>& records);

// Streaming variant: never materializes the cohort.  Chunk boundaries are
// fixed, so the result is bitwise identical for any thread count.
TruthTable truth_table(const DgpConfig& config, int n_threads = 1);

enum class ComplianceClass { complier, never_taker };

ComplianceClass classify_compliance(const IndividualRecord& record);

// --- CSV and config serialization -------------------------------------------

extern const std::vector<std::string> kObservedColumns;   // id ... y
extern const std::vector<std::string> kPotentialColumns;  // y_a1_0 ... u

// Writes records to CSV (observed columns, plus potential-outcome columns
// when include_potentials is set).  Reals carry 12 significant digits.
void export_csv(const std::vector<IndividualRecord>& records,
                const std::string& path, bool include_potentials);

// Streaming export straight from the generator.
void export_csv(const DgpConfig& config, const std::string& path,
                bool include_potentials, int n_threads = 1);

void save_config(const DgpConfig& config, const std::string& path);
DgpConfig load_config(const std::string& path);

// Canonical flat key-value rendering (also what save_config writes).
std::string config_text(const DgpConfig& config);

// FNV-1a hash of the canonical config text, for run provenance lines.
std::uint64_t config_hash(const DgpConfig& config);

}  // namespace ck
