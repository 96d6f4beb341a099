// causalkit: synthetic mother-infant cohorts with known counterfactuals, and
// a battery of estimators scored against that ground truth.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ck/battery.hpp"
#include "ck/dataset.hpp"
#include "ck/error.hpp"
#include "ck/estimands.hpp"
#include "ck/propensity.hpp"
#include "ck/report.hpp"
#include "ck/sim.hpp"

namespace {

struct ConfigArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::int64_t n = 0;
  bool n_set = false;
  bool null_effect = false;
  double confounding = 0.0;
  bool confounding_set = false;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "Load generator settings from a key = value file");
  cmd->add_option("--seed", args.seed, "Generator seed")
      ->envname("CK_SEED")
      ->trigger_on_parse();
  cmd->add_option("--n", args.n, "Cohort size");
  cmd->add_flag("--null-effect", args.null_effect,
                "Preset: feeding has no effect on weight (all true contrasts 0)");
  cmd->add_option("--confounding", args.confounding,
                  "Unmeasured-confounding strength (0 = none)");
}

ck::DgpConfig build_config(const CLI::App* cmd, ConfigArgs& args) {
  ck::DgpConfig config;
  if (!args.config_path.empty()) {
    config = ck::load_config(args.config_path);
  } else if (args.null_effect) {
    config = ck::null_effect_config();
  }
  if (args.null_effect && !args.config_path.empty()) {
    ck::fail(ck::errc::invalid_config,
             "--null-effect cannot be combined with --config");
  }
  if (cmd->count("--confounding") > 0) {
    config.confounding_strength = args.confounding;
  }
  if (cmd->count("--seed") > 0 || std::getenv("CK_SEED") != nullptr) {
    config.seed = args.seed;
  }
  if (cmd->count("--n") > 0) config.n = args.n;
  ck::validate(config);
  return config;
}

int thread_count(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("CK_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

void print_truth_table(const ck::TruthTable& table, std::ostream& out) {
  char buffer[64];
  out << "counts";
  for (int c = 0; c < ck::TruthTable::n_columns; ++c) {
    std::snprintf(buffer, sizeof buffer, " %12s",
                  ck::TruthTable::column_label(c));
    out << buffer;
  }
  out << "\n      ";
  for (int c = 0; c < ck::TruthTable::n_columns; ++c) {
    std::snprintf(buffer, sizeof buffer, " %12lld",
                  static_cast<long long>(table.counts[static_cast<std::size_t>(c)]));
    out << buffer;
  }
  out << "\n";
  for (int r = 0; r < ck::TruthTable::n_rows; ++r) {
    std::snprintf(buffer, sizeof buffer, "%-12s", ck::TruthTable::row_label(r));
    out << buffer;
    for (int c = 0; c < ck::TruthTable::n_columns; ++c) {
      const auto count = table.counts[static_cast<std::size_t>(c)];
      if (count == 0) {
        std::snprintf(buffer, sizeof buffer, " %12s", "-");
      } else {
        std::snprintf(
            buffer, sizeof buffer, " %12.2f",
            table.means[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
      }
      out << buffer;
    }
    out << "\n";
  }
  out << "\nheadline contrasts (grams):\n";
  static const char* kSpecs[] = {
      "ate:a1",      "ate:a2",      "att:a2",      "atnt:a2",
      "ate:a3,a1=0", "ate:a3,a1=1", "ate:a3,a2=1", "att:a3,a1=1",
      "att:a3,a1=0", "ate:a4,a3=1",
  };
  for (const char* text : kSpecs) {
    const ck::EstimandSpec spec = ck::parse_estimand(text);
    try {
      const double value = ck::true_contrast(table, spec);
      std::snprintf(buffer, sizeof buffer, "  %-14s %10.3f\n", text, value);
      out << buffer;
    } catch (const ck::Error&) {
      // contrasts a finite table column cannot express are skipped
    }
  }
}

void print_balance(const ck::BalanceTable& balance, bool weighted,
                   std::ostream& out) {
  char buffer[160];
  std::snprintf(buffer, sizeof buffer, "%-12s %12s %12s %10s %10s\n",
                "covariate", "smd_before", weighted ? "smd_after" : "-",
                "vr_before", weighted ? "vr_after" : "-");
  out << buffer;
  for (const auto& row : balance.rows) {
    if (weighted) {
      std::snprintf(buffer, sizeof buffer,
                    "%-12s %12.4f %12.4f %10.3f %10.3f%s\n", row.label.c_str(),
                    row.smd_before, row.smd_after, row.var_ratio_before,
                    row.var_ratio_after, row.zero_variance ? "  (no variance)" : "");
    } else {
      std::snprintf(buffer, sizeof buffer, "%-12s %12.4f %12s %10.3f %10s%s\n",
                    row.label.c_str(), row.smd_before, "-",
                    row.var_ratio_before, "-",
                    row.zero_variance ? "  (no variance)" : "");
    }
    out << buffer;
  }
  std::snprintf(buffer, sizeof buffer, "max |smd| before %.4f%s",
                balance.max_abs_smd_before(), weighted ? "" : "\n");
  out << buffer;
  if (weighted) {
    std::snprintf(buffer, sizeof buffer, ", after %.4f\n",
                  balance.max_abs_smd_after());
    out << buffer;
  }
}

void print_overlap(const ck::OverlapReport& overlap, std::ostream& out) {
  char buffer[200];
  std::snprintf(buffer, sizeof buffer,
                "score range   treated [%.4f, %.4f]   control [%.4f, %.4f]\n",
                overlap.treated_min, overlap.treated_max, overlap.control_min,
                overlap.control_max);
  out << buffer;
  static const char* kQ[] = {"p1", "p25", "p50", "p75", "p99"};
  out << "quantiles     ";
  for (int i = 0; i < 5; ++i) {
    std::snprintf(buffer, sizeof buffer, " %s=%.4f/%.4f", kQ[i],
                  overlap.treated_quantiles[static_cast<std::size_t>(i)],
                  overlap.control_quantiles[static_cast<std::size_t>(i)]);
    out << buffer;
  }
  std::snprintf(buffer, sizeof buffer,
                " (treated/control)\noutside other arm's range: treated %.4f, "
                "control %.4f, combined %.4f\nlinear-index smd: %.4f\n",
                overlap.frac_treated_outside, overlap.frac_control_outside,
                overlap.frac_outside, overlap.index_smd);
  out << buffer;
}

int run(int argc, char** argv) {
  CLI::App app{
      "causalkit: simulate infant-feeding cohorts with known counterfactuals "
      "and score causal estimators against the truth"};
  app.require_subcommand(1);

  // generate ----------------------------------------------------------------
  auto* generate = app.add_subcommand(
      "generate", "Write a synthetic cohort to CSV");
  ConfigArgs gen_args;
  add_config_options(generate, gen_args);
  std::string gen_out = "cohort.csv";
  std::string gen_write_config;
  bool gen_potentials = false;
  int gen_threads = 0;
  generate->add_option("--out", gen_out, "Output CSV path")
      ->capture_default_str();
  generate->add_option("--write-config", gen_write_config,
                       "Also save the effective generator settings here");
  generate->add_flag("--potentials", gen_potentials,
                     "Include potential-outcome columns (enables truth "
                     "scoring in `estimate`)");
  generate->add_option("--threads", gen_threads,
                       "Worker threads (output is identical for any count)");

  // truth -------------------------------------------------------------------
  auto* truth = app.add_subcommand(
      "truth", "Stream the cohort and print the potential-outcome mean table");
  ConfigArgs truth_args;
  add_config_options(truth, truth_args);
  std::string truth_out;
  int truth_threads = 0;
  truth->add_option("--out", truth_out, "Write the table here instead of stdout");
  truth->add_option("--threads", truth_threads, "Worker threads");

  // estimate ------------------------------------------------------------------
  auto* estimate = app.add_subcommand(
      "estimate", "Run an estimator battery (or one method) on a cohort CSV");
  std::string est_data;
  std::string est_battery;
  std::string est_estimand;
  std::string est_method;
  std::string est_out;
  std::string est_contrasts = "both";
  int est_bootstrap = 1000;
  std::uint64_t est_seed = 1;
  estimate->add_option("--data", est_data, "Cohort CSV")->required();
  estimate->add_option("--battery", est_battery,
                       "Preset battery: a1, a2, a3w0, or a3w1");
  estimate->add_option("--estimand", est_estimand,
                       "Single estimand, e.g. att:a3,a1=1 or cace:a2,iv=a1");
  estimate->add_option("--method", est_method,
                       "Single method: crude, or_noint, or_int, ps_strat6, "
                       "ps_reg, match_m1, match_m3, ipw, aipw, iv_wald, "
                       "iv_tsls, smm");
  estimate->add_option("--estimands", est_contrasts,
                       "Battery contrasts to run: ate, att, or both")
      ->capture_default_str();
  estimate->add_option("--bootstrap", est_bootstrap,
                       "Bootstrap replicates for resampled standard errors")
      ->capture_default_str();
  estimate->add_option("--seed", est_seed, "Bootstrap seed")
      ->envname("CK_SEED")
      ->capture_default_str();
  estimate->add_option("--out", est_out, "Write results CSV here");

  // balance -----------------------------------------------------------------
  auto* balance = app.add_subcommand(
      "balance", "Covariate balance and score overlap for an analysis frame");
  std::string bal_data;
  std::string bal_frame = "ate:a2";
  balance->add_option("--data", bal_data, "Cohort CSV")->required();
  balance->add_option("--frame", bal_frame,
                      "Estimand defining the frame (exposure, world, rows)")
      ->capture_default_str();

  // report --------------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Render a results CSV as a table");
  std::string rep_results;
  report->add_option("--results", rep_results, "Results CSV from `estimate`")
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (generate->parsed()) {
    const ck::DgpConfig config = build_config(generate, gen_args);
    const int threads = thread_count(gen_threads);
    ck::export_csv(config, gen_out, gen_potentials, threads);
    if (!gen_write_config.empty()) ck::save_config(config, gen_write_config);
    std::printf("wrote %lld rows to %s (seed %llu, config %016" PRIx64 ")\n",
                static_cast<long long>(config.n), gen_out.c_str(),
                static_cast<unsigned long long>(config.seed),
                ck::config_hash(config));
    return 0;
  }

  if (truth->parsed()) {
    const ck::DgpConfig config = build_config(truth, truth_args);
    const int threads = thread_count(truth_threads);
    const ck::TruthTable table = ck::truth_table(config, threads);
    if (truth_out.empty()) {
      print_truth_table(table, std::cout);
    } else {
      std::ofstream out(truth_out);
      if (!out) ck::fail(ck::errc::io_failure, "cannot open " + truth_out);
      print_truth_table(table, out);
    }
    return 0;
  }

  if (estimate->parsed()) {
    const bool battery_mode = !est_battery.empty();
    const bool single_mode = !est_estimand.empty() || !est_method.empty();
    if (battery_mode == single_mode) {
      ck::fail(ck::errc::invalid_config,
               "pass either --battery, or --estimand with --method");
    }
    if (single_mode && (est_estimand.empty() || est_method.empty())) {
      ck::fail(ck::errc::invalid_config,
               "--estimand and --method go together");
    }
    const ck::Dataset data = ck::read_dataset(est_data);
    ck::BatteryOptions options;
    options.bootstrap_replicates = est_bootstrap;
    options.seed = est_seed;
    std::vector<ck::EstimateReport> rows;
    if (battery_mode) {
      if (est_contrasts == "ate") {
        options.run_att = false;
      } else if (est_contrasts == "att") {
        options.run_ate = false;
      } else if (est_contrasts != "both") {
        ck::fail(ck::errc::invalid_config,
                 "--estimands must be ate, att, or both");
      }
      rows = ck::run_battery(data, ck::battery_preset_from_name(est_battery),
                             options);
    } else {
      rows.push_back(
          ck::run_single(data, ck::parse_estimand(est_estimand), est_method,
                         options));
    }
    if (!est_out.empty()) ck::write_reports(rows, est_out);
    std::cout << ck::render_report(rows);
    return 0;
  }

  if (balance->parsed()) {
    const ck::Dataset data = ck::read_dataset(bal_data);
    const ck::AnalysisFrame frame =
        ck::resolve(ck::parse_estimand(bal_frame), data);
    const ck::PropensityFit ps = ck::fit_ps(frame);
    const ck::WeightSet weights =
        ck::make_weights(frame.a, ps.scores, ck::WeightKind::ate_stabilized);
    const ck::BalanceTable table = ck::balance_check(frame, &weights);
    std::printf("frame %s: %lld rows, %lld treated\n", bal_frame.c_str(),
                static_cast<long long>(frame.n()),
                static_cast<long long>((frame.a.array() > 0.5).count()));
    std::printf("weights: stabilized inverse-score (ate)\n\n");
    print_balance(table, true, std::cout);
    std::printf("\n");
    print_overlap(ck::overlap_check(frame, ps), std::cout);
    return 0;
  }

  if (report->parsed()) {
    const std::vector<ck::EstimateReport> rows = ck::read_reports(rep_results);
    std::cout << ck::render_report(rows);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ck::Error& error) {
    // what() already starts with "<Name>: "; strip it to avoid repeating the
    // bracketed label.
    const std::string name = ck::errc_name(error.code());
    std::string message = error.what();
    if (message.rfind(name + ": ", 0) == 0) message.erase(0, name.size() + 2);
    std::fprintf(stderr, "error [%s]: %s\n", name.c_str(), message.c_str());
    return 1;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
}
