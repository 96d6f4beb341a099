// Acceptance battery: each criterion prints exactly one PASS/FAIL line and
// sets the exit code.  Run as `acceptance --criterion N` (N in 1..9).

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ck/battery.hpp"
#include "ck/dataset.hpp"
#include "ck/estimands.hpp"
#include "ck/estimators.hpp"
#include "ck/inference.hpp"
#include "ck/iv.hpp"
#include "ck/propensity.hpp"
#include "ck/sim.hpp"
#include "fixtures.hpp"

namespace {

namespace fs = std::filesystem;

constexpr double kZ95 = 1.959963984540054;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, ...) {
  char buffer[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buffer, sizeof buffer, pattern, args);
  va_end(args);
  return buffer;
}

// --- criterion 1: truth-table reproduction ----------------------------------

bool criterion1(std::string& detail) {
  Timer timer;
  ck::DgpConfig config = ck::default_config();
  config.n = 5000000;
  const ck::TruthTable table = ck::truth_table(config, 1);

  const double reference_overall[ck::TruthTable::n_rows] = {
      6017, 6115, 6017, 6182, 5827, 6214, 6249, 6277, 6351};
  double worst = 0.0;
  std::string worst_name;
  for (int r = 0; r < ck::TruthTable::n_rows; ++r) {
    const double dev =
        std::fabs(table.cell(r, ck::kColOverall) - reference_overall[r]);
    if (dev > worst) {
      worst = dev;
      worst_name = ck::TruthTable::row_label(r);
    }
  }

  const std::pair<const char*, double> contrasts[] = {
      {"ate:a1", 98},       {"ate:a2", 165},      {"att:a2", 153},
      {"atnt:a2", 185},     {"ate:a3,a1=0", 387}, {"ate:a3,a1=1", 422},
      {"ate:a3,a2=1", 450}, {"att:a3,a1=1", 421}, {"att:a3,a1=0", 381},
      {"ate:a4,a3=1", 524},
  };
  for (const auto& [text, target] : contrasts) {
    const double value =
        ck::true_contrast(table, ck::parse_estimand(text));
    const double dev = std::fabs(value - target);
    if (dev > worst) {
      worst = dev;
      worst_name = text;
    }
  }

  const double elapsed = timer.seconds();
  detail = fmt(
      "truth table at n=5000000: max deviation %.2f g (at %s) vs +/-5 g "
      "band, %.1f s single-threaded vs 300 s budget",
      worst, worst_name.c_str(), elapsed);
  return worst <= 5.0 && elapsed < 300.0;
}

// --- criterion 2: randomized-contrast coverage ------------------------------

bool criterion2(std::string& detail) {
  Timer timer;
  const ck::EstimandSpec spec = ck::parse_estimand("ate:a1");
  int covered = 0;
  const int n_reps = 100;
  for (int rep = 1; rep <= n_reps; ++rep) {
    ck::DgpConfig config = ck::default_config();
    config.n = 17044;
    config.seed = static_cast<std::uint64_t>(rep);
    const std::vector<ck::IndividualRecord> records = ck::generate(config, 1);
    const double truth = ck::true_contrast(records, spec);
    const ck::Dataset data = ck::to_dataset(records, false);
    const ck::CrudeResult crude =
        ck::crude_difference(ck::resolve(spec, data));
    const double lo = crude.estimate - kZ95 * crude.se;
    const double hi = crude.estimate + kZ95 * crude.se;
    if (truth >= lo && truth <= hi) ++covered;
  }
  const double elapsed = timer.seconds();
  detail = fmt(
      "offer-contrast 95%% CI covered the sample truth in %d/%d seeded "
      "cohorts (need >= 93), %.1f s vs 120 s budget",
      covered, n_reps, elapsed);
  return covered >= 93 && elapsed < 120.0;
}

// --- criteria 3 and 4: battery vs the reference tables ----------------------

struct TableEntry {
  double value = 0.0;
  double se = 0.0;
  bool truth_clause = true;  // checked against simulator truth as well
};

// Keyed by "<contrast>|<method>"; the instrument rows are keyed by method
// only, since both ratio rows reproduce the single reference IV entry.
using TableMap = std::map<std::string, TableEntry>;

std::string row_key(const ck::EstimateReport& row) {
  if (row.method == "iv_wald" || row.method == "smm") return row.method;
  return std::string(ck::contrast_name(row.spec.contrast)) + "|" + row.method;
}

bool check_battery_against_table(const std::vector<ck::EstimateReport>& rows,
                                 const TableMap& table,
                                 const std::string& context,
                                 std::string& problems, double& worst_z) {
  bool ok = true;
  std::size_t matched = 0;
  for (const auto& row : rows) {
    const auto it = table.find(row_key(row));
    if (it == table.end()) continue;
    ++matched;
    const TableEntry& entry = it->second;
    if (!row.error.empty()) {
      problems += fmt(" [%s %s: %s]", context.c_str(), row.method.c_str(),
                      row.error.c_str());
      ok = false;
      continue;
    }
    const double z_table = std::fabs(row.estimate - entry.value) / entry.se;
    worst_z = std::max(worst_z, z_table);
    if (z_table > 3.0) {
      problems += fmt(" [%s %s: %.1f is %.2f table-SEs from %.1f]",
                      context.c_str(), row_key(row).c_str(), row.estimate,
                      z_table, entry.value);
      ok = false;
    }
    if (entry.truth_clause) {
      if (!(row.se > 0.0) || std::isnan(row.truth)) {
        problems += fmt(" [%s %s: missing SE or truth]", context.c_str(),
                        row.method.c_str());
        ok = false;
        continue;
      }
      const double z_truth = std::fabs(row.estimate - row.truth) / row.se;
      if (z_truth > 3.0) {
        problems += fmt(" [%s %s: %.1f is %.2f own-SEs from truth %.1f]",
                        context.c_str(), row_key(row).c_str(), row.estimate,
                        z_truth, row.truth);
        ok = false;
      }
    }
  }
  if (matched != table.size()) {
    problems += fmt(" [%s: %zu of %zu table rows matched]", context.c_str(),
                    matched, table.size());
    ok = false;
  }
  return ok;
}

ck::Dataset calibrated_cohort(std::uint64_t seed) {
  ck::DgpConfig config = ck::default_config();
  config.n = 17044;
  config.seed = seed;
  return ck::to_dataset(ck::generate(config, 1), true);
}

bool criterion3(std::string& detail) {
  Timer timer;
  const ck::Dataset data = calibrated_cohort(3);
  ck::BatteryOptions options;
  options.bootstrap_replicates = 1000;
  options.seed = 42;
  const std::vector<ck::EstimateReport> rows =
      ck::run_battery(data, ck::BatteryPreset::uptake, options);

  TableMap table;
  table["ate|crude"] = {196.0, 9.6, false};  // confounded benchmark row
  table["ate|or_noint"] = {155.4, 9.5, true};
  table["ate|or_int"] = {165.0, 9.7, true};
  table["ate|ps_strat6"] = {165.0, 9.4, true};
  table["ate|ps_reg"] = {156.2, 9.0, true};
  table["ate|match_m1"] = {155.7, 10.1, true};
  table["ate|match_m3"] = {154.9, 10.1, true};
  table["ate|ipw"] = {164.7, 9.3, true};
  table["ate|aipw"] = {164.7, 9.7, true};
  table["iv_wald"] = {146.2, 14.0, true};
  table["att|or_int"] = {148.7, 9.4, true};
  table["att|ps_strat6"] = {148.7, 9.6, true};
  table["att|match_m1"] = {145.8, 9.8, true};
  table["att|match_m3"] = {145.4, 9.7, true};
  table["att|ipw"] = {148.0, 9.6, true};
  table["smm"] = {146.2, 14.0, true};

  std::string problems;
  double worst_z = 0.0;
  const bool ok =
      check_battery_against_table(rows, table, "a2", problems, worst_z);
  const double elapsed = timer.seconds();
  detail = fmt(
      "uptake battery vs reference values: worst table z %.2f (band 3), "
      "%.1f s with B=1000 vs 300 s budget%s",
      worst_z, elapsed, problems.c_str());
  return ok && elapsed < 300.0;
}

bool criterion4(std::string& detail) {
  Timer timer;
  const ck::Dataset data = calibrated_cohort(3);
  ck::BatteryOptions options;
  options.bootstrap_replicates = 1000;
  options.seed = 42;

  TableMap w0;
  w0["ate|crude"] = {503.2, 11.6, false};
  w0["ate|or_noint"] = {384.3, 2.8, true};
  w0["ate|or_int"] = {384.7, 3.2, true};
  w0["ate|ps_reg"] = {384.4, 3.2, true};
  w0["ate|ps_strat6"] = {392.2, 4.1, true};
  w0["ate|match_m1"] = {386.5, 13.7, true};
  w0["ate|match_m3"] = {380.7, 12.4, true};
  w0["ate|ipw"] = {384.7, 3.8, true};
  w0["ate|aipw"] = {384.8, 4.0, true};
  w0["att|or_int"] = {378.0, 2.9, true};
  w0["att|ps_strat6"] = {388.8, 4.8, true};
  w0["att|match_m1"] = {384.3, 15.8, true};
  w0["att|match_m3"] = {387.9, 13.5, true};
  w0["att|ipw"] = {381.9, 5.3, true};

  TableMap w1;
  w1["ate|crude"] = {582.0, 12.2, false};
  w1["ate|or_noint"] = {428.0, 3.3, true};
  w1["ate|or_int"] = {425.3, 2.7, true};
  w1["ate|ps_reg"] = {425.9, 3.3, true};
  // The reference stratification value in the offered world sits 3.03 of its
  // own SEs from the reference truth (residual coarsening bias with 6
  // strata), so truth proximity cannot be part of reproducing it.
  w1["ate|ps_strat6"] = {442.0, 6.5, false};
  w1["ate|match_m1"] = {429.0, 17.4, true};
  w1["ate|match_m3"] = {437.2, 15.2, true};
  w1["ate|ipw"] = {426.6, 7.1, true};
  w1["ate|aipw"] = {426.7, 7.3, true};
  w1["att|or_int"] = {421.7, 2.5, true};
  w1["att|ps_strat6"] = {438.3, 9.5, true};
  w1["att|match_m1"] = {435.6, 21.2, true};
  w1["att|match_m3"] = {441.2, 18.0, true};
  w1["att|ipw"] = {429.2, 10.1, true};

  std::string problems;
  double worst_z = 0.0;
  bool ok = check_battery_against_table(
      ck::run_battery(data, ck::BatteryPreset::initiation_no_offer, options),
      w0, "a3|a1=0", problems, worst_z);
  ok = check_battery_against_table(
           ck::run_battery(data, ck::BatteryPreset::initiation_offer, options),
           w1, "a3|a1=1", problems, worst_z) &&
       ok;
  const double elapsed = timer.seconds();
  detail = fmt(
      "initiation batteries (both worlds) vs reference values: worst table z "
      "%.2f (band 3), %.1f s with B=1000 vs 300 s budget%s",
      worst_z, elapsed, problems.c_str());
  return ok && elapsed < 300.0;
}

// --- criterion 5: fixture oracle suite ---------------------------------------

bool criterion5(std::string& detail) {
  Timer timer;
  const double tol = 1e-10;
  std::string problems;
  auto expect = [&](const char* name, double got, double want) {
    if (std::fabs(got - want) > tol) {
      problems += fmt(" [%s = %.12f, want %.12f]", name, got, want);
    }
  };

  const ck::AnalysisFrame f8 = ckt::f8_frame();
  const Eigen::VectorXd scores = ckt::f8_scores();
  const ck::PropensityFit ps = ck::fit_ps(f8);
  const ck::StrataAssignment strata = ck::stratify_by_ps(scores, 2);

  expect("or_ate", ck::or_ate(f8, true).estimate, 6.0);
  expect("stratification_ate",
         ck::stratification(f8, strata, ck::Target::ate).estimate, 6.0);
  const ck::WeightSet ate_w =
      ck::make_weights(f8.a, scores, ck::WeightKind::ate_unstabilized);
  expect("ht_ipw", ck::ipw(f8, ate_w, ck::Target::ate).ht_estimate, 6.0);
  expect("aipw", ck::aipw(f8, ps).estimate, 6.0);

  expect("or_att", ck::or_att(f8, true).estimate, 6.4);
  expect("stratification_att",
         ck::stratification(f8, strata, ck::Target::att).estimate, 6.4);
  const ck::WeightSet att_w =
      ck::make_weights(f8.a, scores, ck::WeightKind::att_unstabilized);
  expect("ipw_att", ck::ipw(f8, att_w, ck::Target::att).estimate, 6.4);

  const ck::IVFrame iv = ck::IVFrame::from_analysis(ckt::fiv_frame());
  expect("wald", ck::wald(iv).beta_iv, 6.0);
  expect("tsls", ck::tsls(iv).beta_iv, 6.0);
  expect("smm_att", ck::smm_att(iv).beta_iv, 6.0);

  const double elapsed = timer.seconds();
  detail = fmt(
      "fixture oracles exact to 1e-10 (ATE ladder 6.0, ATT ladder 6.4, "
      "instrument ratios 6.0), %.3f s vs 1 s budget%s",
      elapsed, problems.c_str());
  return problems.empty() && elapsed < 1.0;
}

// --- criterion 6: double robustness ------------------------------------------

// Confounder set with the education indicators removed.
ck::AnalysisFrame drop_education(const ck::AnalysisFrame& frame) {
  ck::AnalysisFrame bad = frame;
  bad.confounders = ck::DesignMatrix{};
  bad.confounders.values.resize(frame.n(), 0);
  for (Eigen::Index c = 0; c < frame.confounders.cols(); ++c) {
    const std::string& label =
        frame.confounders.column_labels[static_cast<std::size_t>(c)];
    if (label.rfind("edu_", 0) == 0) continue;
    bad.confounders.push_column(frame.confounders.values.col(c), label);
  }
  return bad;
}

bool criterion6(std::string& detail) {
  ck::DgpConfig config = ck::default_config();
  config.n = 100000;
  config.seed = 6;
  const ck::Dataset data = ck::to_dataset(ck::generate(config, 1), true);
  const ck::EstimandSpec spec = ck::parse_estimand("ate:a2");
  const double truth = ck::true_contrast(data, spec);
  const ck::AnalysisFrame frame = ck::resolve(spec, data);
  const ck::AnalysisFrame bad_frame = drop_education(frame);

  std::string problems;

  // Score model misses education; outcome model is right.
  const ck::PropensityFit bad_ps = ck::fit_ps(bad_frame);
  const ck::WeightSet bad_w =
      ck::make_weights(frame.a, bad_ps.scores, ck::WeightKind::ate_unstabilized);
  const double ipw_est = ck::ipw(frame, bad_w, ck::Target::ate).estimate;
  const double ipw_se =
      ck::sandwich_se_weighted(frame.y, frame.a, bad_w.weights);
  const ck::AipwResult dr_bad_ps = ck::aipw(frame, bad_ps);
  const double z_ipw = std::fabs(ipw_est - truth) / ipw_se;
  const double z_dr1 = std::fabs(dr_bad_ps.estimate - truth) /
                       dr_bad_ps.se_influence;
  if (z_ipw <= 3.0) {
    problems += fmt(" [weighting with the broken score sits %.2f SEs from "
                    "truth; expected > 3]",
                    z_ipw);
  }
  if (z_dr1 > 3.0) {
    problems += fmt(" [augmented estimator with broken score: %.2f SEs]",
                    z_dr1);
  }

  // Outcome model misses education; score model is right.
  const ck::PropensityFit good_ps = ck::fit_ps(frame);
  const ck::OutcomeModelFit bad_or = ck::or_ate(bad_frame, true);
  const ck::AipwResult dr_bad_or = ck::aipw(bad_frame, good_ps);
  const double z_or = std::fabs(bad_or.estimate - truth) / bad_or.se_model;
  const double z_dr2 = std::fabs(dr_bad_or.estimate - truth) /
                       dr_bad_or.se_influence;
  if (z_or <= 3.0) {
    problems += fmt(" [regression with the broken outcome model sits %.2f "
                    "SEs from truth; expected > 3]",
                    z_or);
  }
  if (z_dr2 > 3.0) {
    problems += fmt(" [augmented estimator with broken outcome model: %.2f "
                    "SEs]",
                    z_dr2);
  }

  detail = fmt(
      "n=100000, education omitted: weighting-only %.1f SEs off / augmented "
      "%.1f SEs; regression-only %.1f SEs off / augmented %.1f SEs%s",
      z_ipw, z_dr1, z_or, z_dr2, problems.c_str());
  return problems.empty();
}

// --- criterion 7: unmeasured confounding and the instrument -----------------

bool criterion7(std::string& detail) {
  ck::DgpConfig config = ck::confounded_config(1.4);
  config.n = 100000;
  config.seed = 7;
  const ck::Dataset data = ck::to_dataset(ck::generate(config, 1), true);
  const double truth = ck::true_contrast(data, ck::parse_estimand("att:a2"));

  const ck::AnalysisFrame frame =
      ck::resolve(ck::parse_estimand("att:a2"), data);
  const ck::OutcomeModelFit or_fit = ck::or_att(frame, true);
  const ck::PropensityFit ps = ck::fit_ps(frame);
  const ck::WeightSet att_w =
      ck::make_weights(frame.a, ps.scores, ck::WeightKind::att_unstabilized);
  const double ipw_est = ck::ipw(frame, att_w, ck::Target::att).estimate;
  const double ipw_se =
      ck::sandwich_se_weighted(frame.y, frame.a, att_w.weights);

  const ck::IVFrame iv = ck::IVFrame::from_analysis(
      ck::resolve(ck::parse_estimand("cace:a2,iv=a1"), data));
  const ck::IVFit smm = ck::smm_att(iv);

  const double or_bias = or_fit.estimate - truth;
  const double ipw_bias = ipw_est - truth;
  const double z_or = std::fabs(or_bias) / or_fit.se_model;
  const double z_ipw = std::fabs(ipw_bias) / ipw_se;
  const double z_smm = std::fabs(smm.beta_iv - truth) / smm.se;

  std::string problems;
  if (std::fabs(or_bias) <= 30.0 || z_or <= 3.0) {
    problems += fmt(" [regression bias %.1f g (%.1f SEs); expected > 30 g "
                    "and > 3 SEs]",
                    or_bias, z_or);
  }
  if (std::fabs(ipw_bias) <= 30.0 || z_ipw <= 3.0) {
    problems += fmt(" [weighting bias %.1f g (%.1f SEs); expected > 30 g and "
                    "> 3 SEs]",
                    ipw_bias, z_ipw);
  }
  if (z_smm > 3.0) {
    problems += fmt(" [structural-mean estimate %.1f sits %.2f SEs from "
                    "truth %.1f]",
                    smm.beta_iv, z_smm, truth);
  }

  detail = fmt(
      "hidden confounder at strength 1.4, n=100000: regression bias %.1f g, "
      "weighting bias %.1f g, structural-mean estimator %.2f SEs from "
      "truth%s",
      or_bias, ipw_bias, z_smm, problems.c_str());
  return problems.empty();
}

// --- criterion 8: balance and overlap ----------------------------------------

bool criterion8(std::string& detail) {
  ck::DgpConfig config = ck::default_config();
  config.n = 17044;
  config.seed = 8;
  const ck::Dataset data = ck::to_dataset(ck::generate(config, 1), false);

  const ck::AnalysisFrame a2 = ck::resolve(ck::parse_estimand("ate:a2"), data);
  const ck::PropensityFit ps_a2 = ck::fit_ps(a2);
  const ck::WeightSet weights =
      ck::make_weights(a2.a, ps_a2.scores, ck::WeightKind::ate_stabilized);
  const ck::BalanceTable balance = ck::balance_check(a2, &weights);
  const double max_smd = balance.max_abs_smd_after();

  const double sep_a2 = ck::overlap_check(a2, ps_a2).index_smd;
  auto frame_separation = [&](const char* spec_text) {
    const ck::AnalysisFrame frame =
        ck::resolve(ck::parse_estimand(spec_text), data);
    return ck::overlap_check(frame, ck::fit_ps(frame)).index_smd;
  };
  const double sep_w0 = frame_separation("ate:a3,a1=0");
  const double sep_w1 = frame_separation("ate:a3,a1=1");

  std::string problems;
  if (!(max_smd < 0.05)) {
    problems += fmt(" [post-weighting max |SMD| %.4f, need < 0.05]", max_smd);
  }
  if (!(sep_w0 > sep_a2) || !(sep_w1 > sep_a2)) {
    problems += " [initiation frames should separate more than uptake]";
  }

  detail = fmt(
      "uptake frame max post-weighting |SMD| %.4f (< 0.05); score-index "
      "separation %.2f vs initiation frames %.2f / %.2f (both worse)%s",
      max_smd, sep_a2, sep_w0, sep_w1, problems.c_str());
  return problems.empty();
}

// --- criterion 9: determinism ------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool criterion9(std::string& detail) {
  const fs::path dir =
      fs::temp_directory_path() / ("ck_accept9_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  auto run = [&](const std::string& args) {
    const std::string command = "\"" CK_CLI_PATH "\" " + args + " > \"" +
                                (dir / "stdout.txt").string() + "\" 2> \"" +
                                (dir / "stderr.txt").string() + "\"";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  auto file = [&](const char* name) { return (dir / name).string(); };

  std::string problems;
  bool ok = true;

  // Cohort export: reruns and thread counts.
  ok &= run("generate --n 17044 --seed 3 --potentials --threads 1 --out \"" +
            file("g1.csv") + "\"");
  ok &= run("generate --n 17044 --seed 3 --potentials --threads 4 --out \"" +
            file("g2.csv") + "\"");
  const std::string cohort_bytes = slurp(file("g1.csv"));
  if (!ok || cohort_bytes.empty() ||
      slurp(file("g2.csv")) != cohort_bytes) {
    problems += " [cohort export differs across thread counts]";
  }

  // Estimation: reruns with one (seed, B).
  const std::string est_args = "estimate --data \"" + file("g1.csv") +
                               "\" --battery a2 --bootstrap 200 --seed 7 ";
  ok &= run(est_args + "--out \"" + file("r1.csv") + "\"");
  ok &= run(est_args + "--out \"" + file("r2.csv") + "\"");
  const std::string results_bytes = slurp(file("r1.csv"));
  if (!ok || results_bytes.empty() ||
      slurp(file("r2.csv")) != results_bytes) {
    problems += " [estimation results differ across reruns]";
  }

  // Truth table: thread counts.
  ok &= run("truth --n 100000 --seed 5 --threads 1 --out \"" +
            file("t1.txt") + "\"");
  ok &= run("truth --n 100000 --seed 5 --threads 3 --out \"" +
            file("t2.txt") + "\"");
  const std::string truth_bytes = slurp(file("t1.txt"));
  if (!ok || truth_bytes.empty() || slurp(file("t2.txt")) != truth_bytes) {
    problems += " [truth table differs across thread counts]";
  }

  fs::remove_all(dir);
  if (!ok) problems += " [a command exited nonzero]";
  detail = fmt(
      "byte-identical outputs: cohort export (1 vs 4 threads), estimation "
      "results (rerun, B=200), truth table (1 vs 3 threads)%s",
      problems.c_str());
  return problems.empty();
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      criterion = std::atoi(argv[i + 1]);
      ++i;
    }
  }
  if (criterion < 1 || criterion > 9) {
    std::fprintf(stderr, "usage: acceptance --criterion N   (N in 1..9)\n");
    return 2;
  }

  using CriterionFn = bool (*)(std::string&);
  static const CriterionFn criteria[9] = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9};

  std::string detail;
  bool ok = false;
  try {
    ok = criteria[criterion - 1](detail);
  } catch (const std::exception& error) {
    detail = std::string("unexpected exception: ") + error.what();
    ok = false;
  }
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
              detail.c_str());
  return ok ? 0 : 1;
}
