#include "ck/battery.hpp"

#include <cmath>
#include <functional>
#include <set>

#include "ck/estimators.hpp"
#include "ck/inference.hpp"
#include "ck/iv.hpp"
#include "ck/propensity.hpp"

namespace ck {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kDefaultStrata = 6;

AnalysisFrame subframe(const AnalysisFrame& frame,
                       const std::vector<Eigen::Index>& idx) {
  AnalysisFrame out;
  out.spec = frame.spec;
  const auto m = static_cast<Eigen::Index>(idx.size());
  out.y.resize(m);
  out.a.resize(m);
  out.confounders.values.resize(m, frame.confounders.cols());
  out.confounders.column_labels = frame.confounders.column_labels;
  const bool has_z = frame.z.size() == frame.y.size();
  if (has_z) out.z.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index s = idx[static_cast<std::size_t>(i)];
    out.y(i) = frame.y(s);
    out.a(i) = frame.a(s);
    out.confounders.values.row(i) = frame.confounders.values.row(s);
    if (has_z) out.z(i) = frame.z(s);
  }
  return out;
}

// Truth for the spec when the dataset carries potential outcomes.
double truth_or_nan(const Dataset& dataset, const EstimandSpec& spec) {
  if (!dataset.has("y_a1_0")) return kNaN;
  try {
    return true_contrast(dataset, spec);
  } catch (const Error&) {
    return kNaN;
  }
}

// The methods whose SE comes from the shared bootstrap pass.
enum class BootSlot {
  or_int_ate,
  strat_ate,
  ps_reg,
  ipw_ate,
  aipw,
  or_int_att,
  strat_att,
  ipw_att,
};

double evaluate_boot_slot(BootSlot slot, const AnalysisFrame& frame,
                          const PropensityFit* ps) {
  switch (slot) {
    case BootSlot::or_int_ate:
      return or_ate(frame, true).estimate;
    case BootSlot::or_int_att:
      return or_att(frame, true).estimate;
    case BootSlot::strat_ate:
    case BootSlot::strat_att: {
      if (!ps) fail(errc::non_convergence, "no propensity fit");
      const StrataAssignment strata = stratify_by_ps(ps->scores, kDefaultStrata);
      return stratification(frame, strata,
                            slot == BootSlot::strat_ate ? Target::ate
                                                        : Target::att)
          .estimate;
    }
    case BootSlot::ps_reg: {
      if (!ps) fail(errc::non_convergence, "no propensity fit");
      return ps_regression(frame, *ps).estimate;
    }
    case BootSlot::ipw_ate: {
      if (!ps) fail(errc::non_convergence, "no propensity fit");
      const WeightSet w =
          make_weights(frame.a, ps->scores, WeightKind::ate_stabilized);
      return ipw(frame, w, Target::ate).estimate;
    }
    case BootSlot::ipw_att: {
      if (!ps) fail(errc::non_convergence, "no propensity fit");
      const WeightSet w =
          make_weights(frame.a, ps->scores, WeightKind::att_stabilized);
      return ipw(frame, w, Target::att).estimate;
    }
    case BootSlot::aipw: {
      if (!ps) fail(errc::non_convergence, "no propensity fit");
      return aipw(frame, *ps).estimate;
    }
  }
  fail(errc::unknown_method, "unreachable bootstrap slot");
}

struct BatteryBuilder {
  const Dataset& dataset;
  const BatteryOptions& options;
  const AnalysisFrame& frame;
  std::vector<EstimateReport> rows;
  std::vector<std::pair<std::size_t, BootSlot>> boot_requests;  // row, slot

  EstimateReport base_row(const EstimandSpec& spec, const std::string& method) {
    EstimateReport report;
    report.spec = spec;
    report.method = method;
    report.n_used = frame.n();
    report.truth = truth_or_nan(dataset, spec);
    return report;
  }

  // Adds a row whose point estimate and model-free SE are filled by `fill`;
  // estimator failures land in the error column.
  void add_row(const EstimandSpec& spec, const std::string& method,
               const std::function<void(EstimateReport&)>& fill) {
    EstimateReport report = base_row(spec, method);
    try {
      fill(report);
    } catch (const Error& error) {
      report.error = error.what();
      report.estimate = kNaN;
      report.se = kNaN;
      report.ci_low = kNaN;
      report.ci_high = kNaN;
    }
    rows.push_back(std::move(report));
  }

  // Same, but the SE/CI comes from the shared bootstrap pass afterwards.
  void add_boot_row(const EstimandSpec& spec, const std::string& method,
                    BootSlot slot,
                    const std::function<void(EstimateReport&)>& fill) {
    add_row(spec, method, fill);
    if (rows.back().error.empty()) {
      rows.back().se_method = "bootstrap";
      rows.back().ci_method = "percentile";
      boot_requests.emplace_back(rows.size() - 1, slot);
    }
  }

  void run_bootstrap() {
    if (boot_requests.empty()) return;
    BootstrapPlan plan;
    plan.n_replicates = options.bootstrap_replicates;
    plan.base_seed = options.seed;

    std::vector<BootSlot> slots;
    slots.reserve(boot_requests.size());
    for (const auto& [row, slot] : boot_requests) slots.push_back(slot);

    auto evaluate = [&](const std::vector<Eigen::Index>& idx) {
      const AnalysisFrame rframe = subframe(frame, idx);
      const PropensityFit* ps = nullptr;
      PropensityFit ps_storage;
      try {
        ps_storage = fit_ps(rframe);
        ps = &ps_storage;
      } catch (const Error&) {
        ps = nullptr;  // score-based slots will fail individually
      }
      std::vector<double> values;
      values.reserve(slots.size());
      for (const BootSlot slot : slots) {
        try {
          values.push_back(evaluate_boot_slot(slot, rframe, ps));
        } catch (const Error&) {
          values.push_back(kNaN);
        }
      }
      return values;
    };

    const std::vector<BootstrapResult> results =
        bootstrap_many(plan, frame.n(), slots.size(), evaluate);
    for (std::size_t k = 0; k < boot_requests.size(); ++k) {
      EstimateReport& report = rows[boot_requests[k].first];
      const BootstrapResult& result = results[k];
      if (result.budget_exceeded) {
        report.error = std::string(errc_name(errc::too_many_failed_replicates)) +
                       ": " + std::to_string(result.n_failed) + " of " +
                       std::to_string(plan.n_replicates) +
                       " replicates failed";
        report.se = kNaN;
        report.ci_low = kNaN;
        report.ci_high = kNaN;
        continue;
      }
      report.se = result.se;
      report.ci_low = result.ci_low;
      report.ci_high = result.ci_high;
      report.diag("boot_failed", result.n_failed);
    }
  }
};

void fill_normal_ci(EstimateReport& report) {
  report.ci_low = report.estimate - 1.959963984540054 * report.se;
  report.ci_high = report.estimate + 1.959963984540054 * report.se;
}

}  // namespace

BatteryPreset battery_preset_from_name(const std::string& name) {
  if (name == "a1") return BatteryPreset::offer;
  if (name == "a2") return BatteryPreset::uptake;
  if (name == "a3w0") return BatteryPreset::initiation_no_offer;
  if (name == "a3w1") return BatteryPreset::initiation_offer;
  fail(errc::invalid_config,
       "unknown battery '" + name + "' (expected a1, a2, a3w0, or a3w1)");
}

const char* battery_preset_name(BatteryPreset preset) {
  switch (preset) {
    case BatteryPreset::offer: return "a1";
    case BatteryPreset::uptake: return "a2";
    case BatteryPreset::initiation_no_offer: return "a3w0";
    case BatteryPreset::initiation_offer: return "a3w1";
  }
  return "?";
}

std::vector<EstimateReport> run_battery(const Dataset& dataset,
                                        BatteryPreset preset,
                                        const BatteryOptions& options) {
  EstimandSpec ate_spec, att_spec;
  bool with_iv = false;
  switch (preset) {
    case BatteryPreset::offer:
      ate_spec = parse_estimand("ate:a1");
      break;
    case BatteryPreset::uptake:
      ate_spec = parse_estimand("ate:a2");
      att_spec = parse_estimand("att:a2");
      with_iv = true;
      break;
    case BatteryPreset::initiation_no_offer:
      ate_spec = parse_estimand("ate:a3,a1=0");
      att_spec = parse_estimand("att:a3,a1=0");
      break;
    case BatteryPreset::initiation_offer:
      ate_spec = parse_estimand("ate:a3,a1=1");
      att_spec = parse_estimand("att:a3,a1=1");
      break;
  }

  const AnalysisFrame frame = resolve(ate_spec, dataset);
  BatteryBuilder builder{dataset, options, frame, {}, {}};

  // The crude contrast always leads the table.
  builder.add_row(ate_spec, "crude", [&](EstimateReport& report) {
    const CrudeResult crude = crude_difference(frame);
    report.estimate = crude.estimate;
    report.se = crude.se;
    report.se_method = "two-sample";
    report.ci_method = "normal";
    fill_normal_ci(report);
    report.diag("n_treated", static_cast<double>(crude.n_treated));
    report.diag("n_control", static_cast<double>(crude.n_control));
  });

  if (preset == BatteryPreset::offer) {
    return builder.rows;
  }

  // One propensity fit is shared by every score-based point estimate.
  PropensityFit ps;
  std::string ps_error;
  try {
    ps = fit_ps(frame);
  } catch (const Error& error) {
    ps_error = error.what();
  }
  auto require_ps = [&]() -> const PropensityFit& {
    if (!ps_error.empty()) {
      fail(errc::non_convergence, "propensity fit failed: " + ps_error);
    }
    return ps;
  };

  builder.add_row(ate_spec, "or_noint", [&](EstimateReport& report) {
    const OutcomeModelFit fit = or_ate(frame, false);
    report.estimate = fit.estimate;
    report.se = fit.se_model;
    report.se_method = "model";
    report.ci_method = "normal";
    fill_normal_ci(report);
  });

  builder.add_boot_row(ate_spec, "or_int", BootSlot::or_int_ate,
                       [&](EstimateReport& report) {
                         report.estimate = or_ate(frame, true).estimate;
                       });

  builder.add_boot_row(ate_spec, "ps_strat6", BootSlot::strat_ate,
                       [&](EstimateReport& report) {
                         const StrataAssignment strata =
                             stratify_by_ps(require_ps().scores, kDefaultStrata);
                         report.estimate =
                             stratification(frame, strata, Target::ate).estimate;
                       });

  builder.add_boot_row(ate_spec, "ps_reg", BootSlot::ps_reg,
                       [&](EstimateReport& report) {
                         const OutcomeModelFit fit =
                             ps_regression(frame, require_ps());
                         report.estimate = fit.estimate;
                         report.diag("score_dropped", fit.score_dropped);
                       });

  // Matching SEs use the matched-pair variance; resampling would break the
  // match structure, so these rows are never bootstrapped.
  auto add_match_row = [&](const EstimandSpec& spec, int m, Target target) {
    builder.add_row(
        spec, "match_m" + std::to_string(m), [&, m, target](EstimateReport& report) {
          MatchConfig config;
          config.n_matches = m;
          const MatchResult result =
              matching(frame, require_ps().scores, config, target);
          report.estimate = result.estimate;
          report.se = matching_se(frame, require_ps().scores, result, target);
          report.se_method = "matched-pair";
          report.ci_method = "normal";
          fill_normal_ci(report);
          report.diag("n_matched", static_cast<double>(result.n_matched));
          report.diag("n_unmatched", static_cast<double>(result.n_unmatched));
          report.diag("mean_matches", result.mean_matches);
        });
  };
  add_match_row(ate_spec, 1, Target::ate);
  add_match_row(ate_spec, 3, Target::ate);

  builder.add_boot_row(
      ate_spec, "ipw", BootSlot::ipw_ate, [&](EstimateReport& report) {
        const WeightSet weights = make_weights(frame.a, require_ps().scores,
                                               WeightKind::ate_stabilized);
        const IpwResult result = ipw(frame, weights, Target::ate);
        report.estimate = result.estimate;
        report.diag("ht_estimate", result.ht_estimate);
        report.diag("mean_weight",
                    weights.weights.mean());
        report.diag("sandwich_se",
                    sandwich_se_weighted(frame.y, frame.a, weights.weights));
      });

  builder.add_boot_row(ate_spec, "aipw", BootSlot::aipw,
                       [&](EstimateReport& report) {
                         const AipwResult result = aipw(frame, require_ps());
                         report.estimate = result.estimate;
                         report.diag("influence_se", result.se_influence);
                       });

  // Instrument rows exist only where the offer instruments the exposure.
  EstimandSpec iv_ate_spec, iv_att_spec;
  AnalysisFrame iv_frame;
  if (with_iv) {
    iv_ate_spec = ate_spec;
    iv_ate_spec.instrument = "a1";
    iv_att_spec = att_spec;
    iv_att_spec.instrument = "a1";
    iv_frame = resolve(iv_ate_spec, dataset);

    builder.add_row(iv_ate_spec, "iv_wald", [&](EstimateReport& report) {
      const IVFrame ivf = IVFrame::from_analysis(iv_frame);
      const IVFit fit = wald(ivf);
      report.estimate = fit.beta_iv;
      report.se = fit.se;
      report.se_method = "delta";
      report.ci_method = "normal";
      fill_normal_ci(report);
      // The ratio identifies the complier effect; score it against that.
      EstimandSpec cace = iv_ate_spec;
      cace.contrast = Contrast::cace;
      report.truth = truth_or_nan(dataset, cace);
      report.diag("first_stage_diff", fit.first_stage.rate_difference);
      report.diag("first_stage_weak", fit.first_stage.weak);
      report.diag("itt_outcome", fit.itt_outcome);
      report.diag("tsls_estimate", tsls(ivf).beta_iv);
    });
  }

  if (options.run_att) {
    builder.add_boot_row(att_spec, "or_int", BootSlot::or_int_att,
                         [&](EstimateReport& report) {
                           report.estimate = or_att(frame, true).estimate;
                         });
    builder.add_boot_row(att_spec, "ps_strat6", BootSlot::strat_att,
                         [&](EstimateReport& report) {
                           const StrataAssignment strata = stratify_by_ps(
                               require_ps().scores, kDefaultStrata);
                           report.estimate =
                               stratification(frame, strata, Target::att)
                                   .estimate;
                         });
    add_match_row(att_spec, 1, Target::att);
    add_match_row(att_spec, 3, Target::att);
    builder.add_boot_row(
        att_spec, "ipw", BootSlot::ipw_att, [&](EstimateReport& report) {
          const WeightSet weights = make_weights(frame.a, require_ps().scores,
                                                 WeightKind::att_stabilized);
          const IpwResult result = ipw(frame, weights, Target::att);
          report.estimate = result.estimate;
          report.diag("ht_estimate", result.ht_estimate);
          report.diag("sandwich_se",
                      sandwich_se_weighted(frame.y, frame.a, weights.weights));
        });
    if (with_iv) {
      builder.add_row(iv_att_spec, "smm", [&](EstimateReport& report) {
        const IVFrame ivf = IVFrame::from_analysis(iv_frame);
        const IVFit fit = smm_att(ivf);
        report.estimate = fit.beta_iv;
        report.se = fit.se;
        report.se_method = "delta";
        report.ci_method = "normal";
        fill_normal_ci(report);
        report.diag("first_stage_diff", fit.first_stage.rate_difference);
      });
    }
  }

  if (!options.run_ate) {
    // Drop the ATE ladder but keep the crude row convention: re-run with only
    // ATT rows requested is uncommon; simplest is filtering here.
    std::vector<EstimateReport> att_only;
    std::vector<std::pair<std::size_t, BootSlot>> remapped;
    for (std::size_t r = 0; r < builder.rows.size(); ++r) {
      const bool is_att = builder.rows[r].spec.contrast == Contrast::att;
      if (!is_att) continue;
      for (const auto& [row, slot] : builder.boot_requests) {
        if (row == r) remapped.emplace_back(att_only.size(), slot);
      }
      att_only.push_back(builder.rows[r]);
    }
    builder.rows = std::move(att_only);
    builder.boot_requests = std::move(remapped);
  }

  builder.run_bootstrap();
  return builder.rows;
}

EstimateReport run_single(const Dataset& dataset, const EstimandSpec& spec,
                          const std::string& method,
                          const BatteryOptions& options) {
  static const std::set<std::string> known_methods = {
      "crude",    "or_noint", "or_int", "ps_strat6", "ps_reg",  "match_m1",
      "match_m3", "ipw",      "aipw",   "iv_wald",   "iv_tsls", "smm"};
  // Unknown names are caller mistakes, not data problems: reject before
  // touching the dataset instead of recording them in the error column.
  if (known_methods.find(method) == known_methods.end()) {
    fail(errc::unknown_method, "unknown method '" + method + "'");
  }

  const AnalysisFrame frame = resolve(spec, dataset);
  const Target target =
      spec.contrast == Contrast::att ? Target::att : Target::ate;

  EstimateReport report;
  report.spec = spec;
  report.method = method;
  report.n_used = frame.n();
  report.truth = truth_or_nan(dataset, spec);

  BootstrapPlan plan;
  plan.n_replicates = options.bootstrap_replicates;
  plan.base_seed = options.seed;

  auto bootstrap_for = [&](const std::function<double(const AnalysisFrame&)>& f) {
    const BootstrapResult result = bootstrap_se(
        plan, frame.n(), [&](const std::vector<Eigen::Index>& idx) {
          return f(subframe(frame, idx));
        });
    report.se = result.se;
    report.ci_low = result.ci_low;
    report.ci_high = result.ci_high;
    report.se_method = "bootstrap";
    report.ci_method = "percentile";
    report.diag("boot_failed", result.n_failed);
  };

  try {
    if (method == "crude") {
      const CrudeResult crude = crude_difference(frame);
      report.estimate = crude.estimate;
      report.se = crude.se;
      report.se_method = "two-sample";
      report.ci_method = "normal";
      fill_normal_ci(report);
    } else if (method == "or_noint" || method == "or_int") {
      const bool interactions = method == "or_int";
      const OutcomeModelFit fit = target == Target::att
                                      ? or_att(frame, interactions)
                                      : or_ate(frame, interactions);
      report.estimate = fit.estimate;
      if (interactions) {
        bootstrap_for([&](const AnalysisFrame& f) {
          return (target == Target::att ? or_att(f, true) : or_ate(f, true))
              .estimate;
        });
      } else {
        report.se = fit.se_model;
        report.se_method = "model";
        report.ci_method = "normal";
        fill_normal_ci(report);
      }
    } else if (method == "ps_strat6") {
      const PropensityFit ps = fit_ps(frame);
      report.estimate =
          stratification(frame, stratify_by_ps(ps.scores, kDefaultStrata),
                         target)
              .estimate;
      bootstrap_for([&](const AnalysisFrame& f) {
        const PropensityFit rps = fit_ps(f);
        return stratification(f, stratify_by_ps(rps.scores, kDefaultStrata),
                              target)
            .estimate;
      });
    } else if (method == "ps_reg") {
      const PropensityFit ps = fit_ps(frame);
      const OutcomeModelFit fit = ps_regression(frame, ps);
      report.estimate = fit.estimate;
      report.diag("score_dropped", fit.score_dropped);
      bootstrap_for([&](const AnalysisFrame& f) {
        return ps_regression(f, fit_ps(f)).estimate;
      });
    } else if (method == "match_m1" || method == "match_m3") {
      const PropensityFit ps = fit_ps(frame);
      MatchConfig config;
      config.n_matches = method == "match_m1" ? 1 : 3;
      const MatchResult result = matching(frame, ps.scores, config, target);
      report.estimate = result.estimate;
      report.se = matching_se(frame, ps.scores, result, target);
      report.se_method = "matched-pair";
      report.ci_method = "normal";
      fill_normal_ci(report);
      report.diag("n_matched", static_cast<double>(result.n_matched));
      report.diag("n_unmatched", static_cast<double>(result.n_unmatched));
    } else if (method == "ipw") {
      const PropensityFit ps = fit_ps(frame);
      const WeightKind kind = target == Target::att
                                  ? WeightKind::att_stabilized
                                  : WeightKind::ate_stabilized;
      const WeightSet weights = make_weights(frame.a, ps.scores, kind);
      report.estimate = ipw(frame, weights, target).estimate;
      report.diag("sandwich_se",
                  sandwich_se_weighted(frame.y, frame.a, weights.weights));
      bootstrap_for([&](const AnalysisFrame& f) {
        const PropensityFit rps = fit_ps(f);
        return ipw(f, make_weights(f.a, rps.scores, kind), target).estimate;
      });
    } else if (method == "aipw") {
      const PropensityFit ps = fit_ps(frame);
      const AipwResult result = aipw(frame, ps);
      report.estimate = result.estimate;
      report.diag("influence_se", result.se_influence);
      bootstrap_for([&](const AnalysisFrame& f) {
        return aipw(f, fit_ps(f)).estimate;
      });
    } else if (method == "iv_wald" || method == "iv_tsls" || method == "smm") {
      const IVFrame ivf = IVFrame::from_analysis(frame);
      const IVFit fit = method == "iv_tsls"
                            ? tsls(ivf)
                            : (method == "smm" ? smm_att(ivf) : wald(ivf));
      report.estimate = fit.beta_iv;
      report.se = fit.se;
      report.se_method = "delta";
      report.ci_method = "normal";
      fill_normal_ci(report);
      report.diag("first_stage_diff", fit.first_stage.rate_difference);
    }
  } catch (const Error& error) {
    report.error = error.what();
    report.estimate = kNaN;
    report.se = kNaN;
    report.ci_low = kNaN;
    report.ci_high = kNaN;
  }
  return report;
}

}  // namespace ck
