#include "ck/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "ck/rng.hpp"

namespace ck {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::int64_t kChunkSize = 65536;

double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(errc::invalid_config,
         std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

void check_sign(bool ok, const char* what) {
  if (!ok) fail(errc::invalid_config, std::string("sign constraint violated: ") + what);
}

}  // namespace

const std::vector<std::pair<std::string, double DgpConfig::*>>&
DgpConfig::double_fields() {
  static const std::vector<std::pair<std::string, double DgpConfig::*>> fields = {
      {"p_offer", &DgpConfig::p_offer},
      {"age_mean", &DgpConfig::age_mean},
      {"age_sd", &DgpConfig::age_sd},
      {"age_min", &DgpConfig::age_min},
      {"age_max", &DgpConfig::age_max},
      {"p_urban", &DgpConfig::p_urban},
      {"p_east", &DgpConfig::p_east},
      {"p_edu_low", &DgpConfig::p_edu_low},
      {"p_edu_mid", &DgpConfig::p_edu_mid},
      {"p_allergy", &DgpConfig::p_allergy},
      {"p_smoke", &DgpConfig::p_smoke},
      {"p_female", &DgpConfig::p_female},
      {"bw_mean", &DgpConfig::bw_mean},
      {"bw_smoke_shift", &DgpConfig::bw_smoke_shift},
      {"bw_female_shift", &DgpConfig::bw_female_shift},
      {"bw_sd", &DgpConfig::bw_sd},
      {"bw_min", &DgpConfig::bw_min},
      {"bw_max", &DgpConfig::bw_max},
      {"p_caesar", &DgpConfig::p_caesar},
      {"uptake_intercept", &DgpConfig::uptake_intercept},
      {"uptake_age", &DgpConfig::uptake_age},
      {"uptake_edu", &DgpConfig::uptake_edu},
      {"uptake_smoke", &DgpConfig::uptake_smoke},
      {"init_intercept", &DgpConfig::init_intercept},
      {"init_uptake", &DgpConfig::init_uptake},
      {"init_age", &DgpConfig::init_age},
      {"init_edu", &DgpConfig::init_edu},
      {"init_smoke", &DgpConfig::init_smoke},
      {"init_bweight_kg", &DgpConfig::init_bweight_kg},
      {"init_female", &DgpConfig::init_female},
      {"dur_intercept", &DgpConfig::dur_intercept},
      {"dur_uptake", &DgpConfig::dur_uptake},
      {"dur_age", &DgpConfig::dur_age},
      {"dur_edu", &DgpConfig::dur_edu},
      {"dur_allergy", &DgpConfig::dur_allergy},
      {"dur_smoke", &DgpConfig::dur_smoke},
      {"dur_bweight_kg", &DgpConfig::dur_bweight_kg},
      {"dur_caesar", &DgpConfig::dur_caesar},
      {"dur_female", &DgpConfig::dur_female},
      {"dur_noise_sd", &DgpConfig::dur_noise_sd},
      {"gain_intercept", &DgpConfig::gain_intercept},
      {"gain_edu", &DgpConfig::gain_edu},
      {"gain_smoke", &DgpConfig::gain_smoke},
      {"gain_bweight_kg", &DgpConfig::gain_bweight_kg},
      {"base_intercept", &DgpConfig::base_intercept},
      {"base_age", &DgpConfig::base_age},
      {"base_age2", &DgpConfig::base_age2},
      {"base_edu_mid", &DgpConfig::base_edu_mid},
      {"base_edu_high", &DgpConfig::base_edu_high},
      {"base_allergy", &DgpConfig::base_allergy},
      {"base_smoke", &DgpConfig::base_smoke},
      {"base_urban", &DgpConfig::base_urban},
      {"base_east", &DgpConfig::base_east},
      {"base_female", &DgpConfig::base_female},
      {"base_bweight_g", &DgpConfig::base_bweight_g},
      {"base_bweight_kg2", &DgpConfig::base_bweight_kg2},
      {"base_caesar", &DgpConfig::base_caesar},
      {"base_noise_sd", &DgpConfig::base_noise_sd},
      {"confounding_strength", &DgpConfig::confounding_strength},
      {"confounding_uptake_scale", &DgpConfig::confounding_uptake_scale},
      {"confounding_outcome_scale", &DgpConfig::confounding_outcome_scale},
  };
  return fields;
}

void validate(const DgpConfig& c) {
  if (c.n < 1) fail(errc::invalid_config, "n must be positive");
  check_probability(c.p_offer, "p_offer");
  check_probability(c.p_urban, "p_urban");
  check_probability(c.p_east, "p_east");
  check_probability(c.p_allergy, "p_allergy");
  check_probability(c.p_smoke, "p_smoke");
  check_probability(c.p_female, "p_female");
  check_probability(c.p_caesar, "p_caesar");
  check_probability(c.p_edu_low, "p_edu_low");
  check_probability(c.p_edu_mid, "p_edu_mid");
  if (c.p_edu_low + c.p_edu_mid > 1.0) {
    fail(errc::invalid_config, "education class probabilities exceed 1");
  }
  if (!(c.age_sd > 0.0) || !(c.bw_sd > 0.0) || !(c.dur_noise_sd > 0.0) ||
      !(c.base_noise_sd > 0.0)) {
    fail(errc::invalid_config, "scale parameters must be positive");
  }
  if (!(c.age_min < c.age_max) || !(c.bw_min < c.bw_max)) {
    fail(errc::invalid_config, "truncation bounds must be ordered");
  }
  if (c.confounding_strength < 0.0) {
    fail(errc::invalid_config, "confounding_strength must be non-negative");
  }

  // Directional conventions of the cohort: uptake rises with age and
  // education and falls with smoking; initiation rises with uptake, age,
  // education and birth weight and falls with smoking and female infant;
  // duration rises with uptake, age, education, allergy history and birth
  // weight and falls with smoking and caesarean delivery.
  check_sign(c.uptake_age >= 0.0, "uptake_age >= 0");
  check_sign(c.uptake_edu >= 0.0, "uptake_edu >= 0");
  check_sign(c.uptake_smoke <= 0.0, "uptake_smoke <= 0");
  check_sign(c.init_uptake >= 0.0, "init_uptake >= 0");
  check_sign(c.init_age >= 0.0, "init_age >= 0");
  check_sign(c.init_edu >= 0.0, "init_edu >= 0");
  check_sign(c.init_smoke <= 0.0, "init_smoke <= 0");
  check_sign(c.init_bweight_kg >= 0.0, "init_bweight_kg >= 0");
  check_sign(c.init_female <= 0.0, "init_female <= 0");
  check_sign(c.dur_uptake >= 0.0, "dur_uptake >= 0");
  check_sign(c.dur_age >= 0.0, "dur_age >= 0");
  check_sign(c.dur_edu >= 0.0, "dur_edu >= 0");
  check_sign(c.dur_allergy >= 0.0, "dur_allergy >= 0");
  check_sign(c.dur_smoke <= 0.0, "dur_smoke <= 0");
  check_sign(c.dur_bweight_kg >= 0.0, "dur_bweight_kg >= 0");
  check_sign(c.dur_caesar <= 0.0, "dur_caesar <= 0");
  check_sign(c.dur_female >= 0.0, "dur_female >= 0");
  check_sign(c.base_edu_mid >= 0.0, "base_edu_mid >= 0");
  check_sign(c.base_edu_high >= c.base_edu_mid,
             "base_edu_high >= base_edu_mid");

  // Breastfeeding must never lower weight: the per-day gain has to stay
  // non-negative over the whole covariate support, checked at the corners of
  // the (education, smoking, birth weight) box.
  for (int edu : {0, 2}) {
    for (int smoke : {0, 1}) {
      for (double bw : {c.bw_min, c.bw_max}) {
        const double bwk = (bw - kBirthWeightCenter) / 1000.0;
        const double gain = c.gain_intercept + c.gain_edu * edu +
                            c.gain_smoke * smoke + c.gain_bweight_kg * bwk;
        if (gain < 0.0) {
          fail(errc::invalid_config,
               "per-day weight gain is negative at a covariate corner (edu=" +
                   std::to_string(edu) + ", smoke=" + std::to_string(smoke) +
                   ", bw=" + std::to_string(bw) + ")");
        }
      }
    }
  }
}

DgpConfig default_config() { return DgpConfig{}; }

DgpConfig null_effect_config() {
  DgpConfig c;
  c.gain_intercept = 0.0;
  c.gain_edu = 0.0;
  c.gain_smoke = 0.0;
  c.gain_bweight_kg = 0.0;
  c.dur_uptake = 0.0;
  return c;
}

DgpConfig confounded_config(double strength) {
  DgpConfig c;
  c.confounding_strength = strength;
  return c;
}

IndividualRecord make_record(const DgpConfig& c, std::int64_t id) {
  SplitMix64 rng(stream_key(c.seed, static_cast<std::uint64_t>(id)));

  // Fixed draw order; every latent consumes exactly one uniform.
  const double u_age = rng.next_uniform();
  const double u_urban = rng.next_uniform();
  const double u_east = rng.next_uniform();
  const double u_edu = rng.next_uniform();
  const double u_allergy = rng.next_uniform();
  const double u_smoke = rng.next_uniform();
  const double u_female = rng.next_uniform();
  const double u_bw = rng.next_uniform();
  const double u_caesar = rng.next_uniform();
  const double z_hidden = normal_quantile(rng.next_uniform());
  const double u_offer = rng.next_uniform();
  const double u_uptake = rng.next_uniform();
  const double u_init = rng.next_uniform();
  const double z_duration = normal_quantile(rng.next_uniform());
  const double z_outcome = normal_quantile(rng.next_uniform());

  IndividualRecord rec;
  rec.id = id;
  rec.u_hidden = z_hidden;

  CovariateProfile& x = rec.covariates;
  x.maternal_age = truncated_normal(u_age, c.age_mean, c.age_sd, c.age_min, c.age_max);
  x.urban = u_urban < c.p_urban;
  x.east = u_east < c.p_east;
  x.education = u_edu < c.p_edu_low ? 0 : (u_edu < c.p_edu_low + c.p_edu_mid ? 1 : 2);
  x.allergy = u_allergy < c.p_allergy;
  x.smoke = u_smoke < c.p_smoke;
  x.female = u_female < c.p_female;
  x.birth_weight = truncated_normal(
      u_bw,
      c.bw_mean + c.bw_smoke_shift * (x.smoke ? 1.0 : 0.0) +
          c.bw_female_shift * (x.female ? 1.0 : 0.0),
      c.bw_sd, c.bw_min, c.bw_max);
  x.caesarean = u_caesar < c.p_caesar;

  const double age_c = x.maternal_age - kAgeCenter;
  const double bw_g = x.birth_weight - kBirthWeightCenter;
  const double bw_kg = bw_g / 1000.0;
  const double edu = static_cast<double>(x.education);
  const double smoke = x.smoke ? 1.0 : 0.0;
  const double female = x.female ? 1.0 : 0.0;
  const double latent = c.confounding_strength * z_hidden;

  // Uptake under an offer: who would follow the encouragement.
  const double uptake_logit = c.uptake_intercept + c.uptake_age * age_c +
                              c.uptake_edu * edu + c.uptake_smoke * smoke +
                              c.confounding_uptake_scale * latent;
  const bool a2_under_offer = u_uptake < expit(uptake_logit);

  // Initiation under each uptake level.  The shared uniform makes initiation
  // monotone in uptake (init_uptake >= 0).
  auto init_prob = [&](double uptake) {
    return expit(c.init_intercept + c.init_uptake * uptake +
                 c.init_age * age_c + c.init_edu * edu + c.init_smoke * smoke +
                 c.init_bweight_kg * bw_kg + c.init_female * female);
  };
  const bool a3_without_uptake = u_init < init_prob(0.0);
  const bool a3_with_uptake = u_init < init_prob(1.0);

  // Breastfeeding duration under each uptake level, days in [1, 91].
  auto duration = [&](double uptake) {
    return clamp(c.dur_intercept + c.dur_uptake * uptake + c.dur_age * age_c +
                     c.dur_edu * edu +
                     c.dur_allergy * (x.allergy ? 1.0 : 0.0) +
                     c.dur_smoke * smoke + c.dur_bweight_kg * bw_kg +
                     c.dur_caesar * (x.caesarean ? 1.0 : 0.0) +
                     c.dur_female * female + c.dur_noise_sd * z_duration,
                 1.0, kFullDurationDays);
  };
  const double dur_without_uptake = duration(0.0);
  const double dur_with_uptake = duration(1.0);

  const double gain_per_day = c.gain_intercept + c.gain_edu * edu +
                              c.gain_smoke * smoke + c.gain_bweight_kg * bw_kg;
  const double baseline =
      c.base_intercept + c.base_age * age_c + c.base_age2 * age_c * age_c +
      c.base_edu_mid * (x.education == 1 ? 1.0 : 0.0) +
      c.base_edu_high * (x.education == 2 ? 1.0 : 0.0) +
      c.base_allergy * (x.allergy ? 1.0 : 0.0) + c.base_smoke * smoke +
      c.base_urban * (x.urban ? 1.0 : 0.0) + c.base_east * (x.east ? 1.0 : 0.0) +
      c.base_female * female + c.base_bweight_g * bw_g +
      c.base_bweight_kg2 * bw_kg * bw_kg +
      c.base_caesar * (x.caesarean ? 1.0 : 0.0) +
      c.confounding_outcome_scale * latent + c.base_noise_sd * z_outcome;

  auto weight_after = [&](double days) { return baseline + gain_per_day * days; };

  PotentialOutcomeSet& po = rec.potentials;
  po.a2_under_offer = a2_under_offer;
  po.y_a1_0_a3_0 = weight_after(0.0);
  po.y_a4_1 = weight_after(kFullDurationDays);
  po.y_a1_0_a3_1 = weight_after(dur_without_uptake);
  po.y_a2_1_a3_1 = weight_after(dur_with_uptake);
  po.y_a1_1_a3_1 = a2_under_offer ? po.y_a2_1_a3_1 : po.y_a1_0_a3_1;
  po.y_a1_0 = a3_without_uptake ? po.y_a1_0_a3_1 : po.y_a1_0_a3_0;
  po.y_a2_0 = po.y_a1_0;
  po.y_a2_1 = a3_with_uptake ? po.y_a2_1_a3_1 : po.y_a1_0_a3_0;
  po.y_a1_1 = a2_under_offer ? po.y_a2_1 : po.y_a1_0;

  ExposurePath& e = rec.exposures;
  e.a1_offered = u_offer < c.p_offer;
  e.a2_followed = e.a1_offered && a2_under_offer;
  e.a3_started_bf = e.a2_followed ? a3_with_uptake : a3_without_uptake;
  e.bf_duration =
      e.a3_started_bf ? (e.a2_followed ? dur_with_uptake : dur_without_uptake)
                      : 0.0;
  e.a4_full3months = e.a3_started_bf && e.bf_duration >= kFullDurationDays;

  rec.y_observed = e.a1_offered ? po.y_a1_1 : po.y_a1_0;
  return rec;
}

namespace {

// Runs fn(chunk_index, first_id, last_id) over fixed-size chunks of [0, n),
// possibly on several threads.  Chunk boundaries depend only on n, so any
// chunk-indexed accumulation merged in chunk order is thread-count invariant.
void for_each_chunk(std::int64_t n, int n_threads,
                    const std::function<void(std::int64_t, std::int64_t,
                                             std::int64_t)>& fn) {
  const std::int64_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  if (n_threads <= 1 || n_chunks <= 1) {
    for (std::int64_t chunk = 0; chunk < n_chunks; ++chunk) {
      const std::int64_t first = chunk * kChunkSize;
      fn(chunk, first, std::min(first + kChunkSize, n));
    }
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::int64_t chunk = next.fetch_add(1);
      if (chunk >= n_chunks) return;
      const std::int64_t first = chunk * kChunkSize;
      fn(chunk, first, std::min(first + kChunkSize, n));
    }
  };
  std::vector<std::thread> pool;
  const int usable = static_cast<int>(
      std::min<std::int64_t>(n_threads, n_chunks));
  pool.reserve(static_cast<std::size_t>(usable));
  for (int t = 0; t < usable; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

std::vector<IndividualRecord> generate(const DgpConfig& config, int n_threads) {
  validate(config);
  std::vector<IndividualRecord> records(static_cast<std::size_t>(config.n));
  for_each_chunk(config.n, n_threads,
                 [&](std::int64_t, std::int64_t first, std::int64_t last) {
                   for (std::int64_t id = first; id < last; ++id) {
                     records[static_cast<std::size_t>(id)] =
                         make_record(config, id);
                   }
                 });
  return records;
}

// --- truth table -------------------------------------------------------------

const char* TruthTable::row_label(int row) {
  static const char* labels[n_rows] = {
      "y_a1_0", "y_a1_1", "y_a2_0", "y_a2_1", "y_a3_0",
      "y_a1_0_a3_1", "y_a1_1_a3_1", "y_a2_1_a3_1", "y_a4_1"};
  return labels[row];
}

const char* TruthTable::column_label(int column) {
  static const char* labels[n_columns] = {
      "overall", "a2_1", "a1_1_a2_0", "a1_1_a3_1", "a1_1_a3_0",
      "a1_0_a3_1", "a1_0_a3_0", "edu_low", "edu_mid", "edu_high"};
  return labels[column];
}

double TruthTable::cell(int row, int column) const {
  if (row < 0 || row >= n_rows || column < 0 || column >= n_columns) {
    fail(errc::invalid_config, "truth table cell out of range");
  }
  if (counts[static_cast<std::size_t>(column)] == 0) {
    fail(errc::empty_subpopulation,
         std::string("truth table column '") + column_label(column) +
             "' is empty (row '" + row_label(row) + "')");
  }
  return means[static_cast<std::size_t>(row)][static_cast<std::size_t>(column)];
}

void TruthAccumulator::add(const IndividualRecord& rec) {
  const PotentialOutcomeSet& po = rec.potentials;
  const ExposurePath& e = rec.exposures;
  const double row_values[TruthTable::n_rows] = {
      po.y_a1_0, po.y_a1_1, po.y_a2_0, po.y_a2_1, po.y_a1_0_a3_0,
      po.y_a1_0_a3_1, po.y_a1_1_a3_1, po.y_a2_1_a3_1, po.y_a4_1};
  const bool in_column[TruthTable::n_columns] = {
      true,
      e.a2_followed,
      e.a1_offered && !e.a2_followed,
      e.a1_offered && e.a3_started_bf,
      e.a1_offered && !e.a3_started_bf,
      !e.a1_offered && e.a3_started_bf,
      !e.a1_offered && !e.a3_started_bf,
      rec.covariates.education == 0,
      rec.covariates.education == 1,
      rec.covariates.education == 2};
  for (int col = 0; col < TruthTable::n_columns; ++col) {
    if (!in_column[col]) continue;
    ++counts_[static_cast<std::size_t>(col)];
    for (int row = 0; row < TruthTable::n_rows; ++row) {
      sums_[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] +=
          row_values[row];
    }
  }
}

void TruthAccumulator::merge(const TruthAccumulator& other) {
  for (int col = 0; col < TruthTable::n_columns; ++col) {
    counts_[static_cast<std::size_t>(col)] +=
        other.counts_[static_cast<std::size_t>(col)];
    for (int row = 0; row < TruthTable::n_rows; ++row) {
      sums_[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] +=
          other.sums_[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    }
  }
}

TruthTable TruthAccumulator::table() const {
  TruthTable t;
  t.counts = counts_;
  for (int row = 0; row < TruthTable::n_rows; ++row) {
    for (int col = 0; col < TruthTable::n_columns; ++col) {
      const auto count = counts_[static_cast<std::size_t>(col)];
      t.means[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] =
          count == 0
              ? kNaN
              : sums_[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] /
                    static_cast<double>(count);
    }
  }
  return t;
}

TruthTable truth_table(const std::vector<IndividualRecord>& records) {
  if (records.empty()) fail(errc::empty_input, "no records");
  TruthAccumulator acc;
  for (const auto& rec : records) acc.add(rec);
  return acc.table();
}

TruthTable truth_table(const DgpConfig& config, int n_threads) {
  validate(config);
  const std::int64_t n_chunks = (config.n + kChunkSize - 1) / kChunkSize;
  std::vector<TruthAccumulator> partials(static_cast<std::size_t>(n_chunks));
  for_each_chunk(config.n, n_threads,
                 [&](std::int64_t chunk, std::int64_t first, std::int64_t last) {
                   TruthAccumulator& acc =
                       partials[static_cast<std::size_t>(chunk)];
                   for (std::int64_t id = first; id < last; ++id) {
                     acc.add(make_record(config, id));
                   }
                 });
  TruthAccumulator total;
  for (const auto& part : partials) total.merge(part);
  return total.table();
}

ComplianceClass classify_compliance(const IndividualRecord& record) {
  return record.potentials.a2_under_offer ? ComplianceClass::complier
                                          : ComplianceClass::never_taker;
}

// --- CSV ---------------------------------------------------------------------

const std::vector<std::string> kObservedColumns = {
    "id",     "age",   "urban",  "east",  "edu",  "allergy",
    "smoke",  "female", "bweight", "caesar", "a1",  "a2",
    "a3",     "a4",    "bfdur",  "y"};

const std::vector<std::string> kPotentialColumns = {
    "y_a1_0", "y_a1_1", "y_a2_0", "y_a2_1", "y_a3_0", "y_a1_0_a3_1",
    "y_a1_1_a3_1", "y_a2_1_a3_1", "y_a4_1", "a2_offer", "u"};

namespace {

void write_header(std::FILE* out, bool include_potentials) {
  std::string header;
  for (std::size_t i = 0; i < kObservedColumns.size(); ++i) {
    if (i) header += ',';
    header += kObservedColumns[i];
  }
  if (include_potentials) {
    for (const auto& name : kPotentialColumns) {
      header += ',';
      header += name;
    }
  }
  header += '\n';
  std::fputs(header.c_str(), out);
}

void write_row(std::FILE* out, const IndividualRecord& rec,
               bool include_potentials) {
  const CovariateProfile& x = rec.covariates;
  const ExposurePath& e = rec.exposures;
  char buffer[768];
  int len = std::snprintf(
      buffer, sizeof buffer,
      "%lld,%.12g,%d,%d,%d,%d,%d,%d,%.12g,%d,%d,%d,%d,%d,%.12g,%.12g",
      static_cast<long long>(rec.id), x.maternal_age, x.urban ? 1 : 0,
      x.east ? 1 : 0, x.education, x.allergy ? 1 : 0, x.smoke ? 1 : 0,
      x.female ? 1 : 0, x.birth_weight, x.caesarean ? 1 : 0,
      e.a1_offered ? 1 : 0, e.a2_followed ? 1 : 0, e.a3_started_bf ? 1 : 0,
      e.a4_full3months ? 1 : 0, e.bf_duration, rec.y_observed);
  if (include_potentials) {
    const PotentialOutcomeSet& po = rec.potentials;
    len += std::snprintf(
        buffer + len, sizeof buffer - static_cast<std::size_t>(len),
        ",%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%.12g",
        po.y_a1_0, po.y_a1_1, po.y_a2_0, po.y_a2_1, po.y_a1_0_a3_0,
        po.y_a1_0_a3_1, po.y_a1_1_a3_1, po.y_a2_1_a3_1, po.y_a4_1,
        po.a2_under_offer ? 1 : 0, rec.u_hidden);
  }
  buffer[len++] = '\n';
  std::fwrite(buffer, 1, static_cast<std::size_t>(len), out);
}

class FileHandle {
 public:
  FileHandle(const std::string& path, const char* mode)
      : file_(std::fopen(path.c_str(), mode)) {
    if (!file_) fail(errc::io_failure, "cannot open '" + path + "'");
  }
  ~FileHandle() {
    if (file_) std::fclose(file_);
  }
  std::FILE* get() { return file_; }

 private:
  std::FILE* file_;
};

}  // namespace

void export_csv(const std::vector<IndividualRecord>& records,
                const std::string& path, bool include_potentials) {
  FileHandle out(path, "w");
  write_header(out.get(), include_potentials);
  for (const auto& rec : records) write_row(out.get(), rec, include_potentials);
  if (std::ferror(out.get())) fail(errc::io_failure, "write failed: " + path);
}

void export_csv(const DgpConfig& config, const std::string& path,
                bool include_potentials, int n_threads) {
  validate(config);
  FileHandle out(path, "w");
  write_header(out.get(), include_potentials);
  // Rows must land in id order, so chunks are generated (possibly in
  // parallel) into buffers and written sequentially.
  const std::int64_t n_chunks = (config.n + kChunkSize - 1) / kChunkSize;
  if (n_threads <= 1 || n_chunks <= 1) {
    for (std::int64_t id = 0; id < config.n; ++id) {
      write_row(out.get(), make_record(config, id), include_potentials);
    }
  } else {
    std::vector<std::vector<IndividualRecord>> buffers(
        static_cast<std::size_t>(n_chunks));
    for_each_chunk(config.n, n_threads,
                   [&](std::int64_t chunk, std::int64_t first, std::int64_t last) {
                     auto& buf = buffers[static_cast<std::size_t>(chunk)];
                     buf.reserve(static_cast<std::size_t>(last - first));
                     for (std::int64_t id = first; id < last; ++id) {
                       buf.push_back(make_record(config, id));
                     }
                   });
    for (const auto& buf : buffers) {
      for (const auto& rec : buf) write_row(out.get(), rec, include_potentials);
    }
  }
  if (std::ferror(out.get())) fail(errc::io_failure, "write failed: " + path);
}

// --- config serialization ----------------------------------------------------

std::string config_text(const DgpConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "n = " << config.n << "\n";
  out << "seed = " << config.seed << "\n";
  for (const auto& [name, member] : DgpConfig::double_fields()) {
    out << name << " = " << config.*member << "\n";
  }
  return out.str();
}

void save_config(const DgpConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_failure, "cannot open '" + path + "'");
  out << config_text(config);
  if (!out) fail(errc::io_failure, "write failed: " + path);
}

DgpConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_failure, "cannot open '" + path + "'");
  DgpConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r'; };
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (std::all_of(line.begin(), line.end(), is_space)) continue;
      fail(errc::invalid_config, path + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
    }
    auto trim = [&](std::string s) {
      while (!s.empty() && is_space(s.front())) s.erase(s.begin());
      while (!s.empty() && is_space(s.back())) s.pop_back();
      return s;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail(errc::invalid_config, path + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
    }
    try {
      if (key == "n") {
        config.n = std::stoll(value);
        continue;
      }
      if (key == "seed") {
        config.seed = std::stoull(value);
        continue;
      }
      bool known = false;
      for (const auto& [name, member] : DgpConfig::double_fields()) {
        if (key == name) {
          config.*member = std::stod(value);
          known = true;
          break;
        }
      }
      if (!known) {
        fail(errc::invalid_config, path + ":" + std::to_string(line_no) +
                                       ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      fail(errc::invalid_config, path + ":" + std::to_string(line_no) +
                                     ": bad numeric value '" + value + "'");
    } catch (const std::out_of_range&) {
      fail(errc::invalid_config, path + ":" + std::to_string(line_no) +
                                     ": numeric value out of range");
    }
  }
  return config;
}

std::uint64_t config_hash(const DgpConfig& config) {
  const std::string text = config_text(config);
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a offset basis
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace ck
