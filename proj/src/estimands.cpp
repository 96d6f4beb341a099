#include "ck/estimands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ck {

const char* contrast_name(Contrast contrast) {
  switch (contrast) {
    case Contrast::ate: return "ate";
    case Contrast::att: return "att";
    case Contrast::atnt: return "atnt";
    case Contrast::cace: return "cace";
  }
  return "?";
}

const char* exposure_name(Exposure exposure) {
  switch (exposure) {
    case Exposure::a1: return "a1";
    case Exposure::a2: return "a2";
    case Exposure::a3: return "a3";
    case Exposure::a4: return "a4";
  }
  return "?";
}

std::string to_string(const EstimandSpec& spec) {
  std::ostringstream out;
  out << contrast_name(spec.contrast) << ':' << exposure_name(spec.exposure);
  if (spec.world.a1) out << ",a1=" << *spec.world.a1;
  if (spec.world.a2) out << ",a2=" << *spec.world.a2;
  if (spec.world.a3) out << ",a3=" << *spec.world.a3;
  if (spec.instrument) out << ",iv=" << *spec.instrument;
  if (spec.subpopulation) {
    out << ",sub=" << spec.subpopulation->column << ':'
        << spec.subpopulation->value;
  }
  return out.str();
}

EstimandSpec parse_estimand(const std::string& text) {
  auto bad = [&](const std::string& why) -> void {
    fail(errc::invalid_config, "cannot parse estimand '" + text + "': " + why);
  };
  EstimandSpec spec;
  const auto colon = text.find(':');
  if (colon == std::string::npos) bad("expected contrast:exposure");
  const std::string contrast = text.substr(0, colon);
  if (contrast == "ate") spec.contrast = Contrast::ate;
  else if (contrast == "att") spec.contrast = Contrast::att;
  else if (contrast == "atnt") spec.contrast = Contrast::atnt;
  else if (contrast == "cace") spec.contrast = Contrast::cace;
  else bad("unknown contrast '" + contrast + "'");

  std::string rest = text.substr(colon + 1);
  std::vector<std::string> tokens;
  std::stringstream stream(rest);
  std::string token;
  while (std::getline(stream, token, ',')) tokens.push_back(token);
  if (tokens.empty()) bad("missing exposure");

  const std::string& exposure = tokens[0];
  if (exposure == "a1") spec.exposure = Exposure::a1;
  else if (exposure == "a2") spec.exposure = Exposure::a2;
  else if (exposure == "a3") spec.exposure = Exposure::a3;
  else if (exposure == "a4") spec.exposure = Exposure::a4;
  else bad("unknown exposure '" + exposure + "'");

  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string& kv = tokens[i];
    const auto eq = kv.find('=');
    if (eq == std::string::npos) bad("expected key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (key == "a1" || key == "a2" || key == "a3") {
      int v = 0;
      if (value == "0") v = 0;
      else if (value == "1") v = 1;
      else bad("world setting '" + key + "' must be 0 or 1");
      if (key == "a1") spec.world.a1 = v;
      if (key == "a2") spec.world.a2 = v;
      if (key == "a3") spec.world.a3 = v;
    } else if (key == "iv") {
      spec.instrument = value;
    } else if (key == "sub") {
      const auto sep = value.find(':');
      if (sep == std::string::npos) bad("subpopulation must be column:value");
      SubpopulationFilter filter;
      filter.column = value.substr(0, sep);
      try {
        filter.value = std::stod(value.substr(sep + 1));
      } catch (...) {
        bad("bad subpopulation value in '" + value + "'");
      }
      spec.subpopulation = filter;
    } else {
      bad("unknown key '" + key + "'");
    }
  }
  return spec;
}

namespace {

// Validates the (exposure, world, instrument, contrast) combination.  The
// supported worlds mirror the nested exposure chain; anything else is either
// illegal (identification would silently break) or unsupported.
void check_spec(const EstimandSpec& spec) {
  const WorldSetting& w = spec.world;
  switch (spec.exposure) {
    case Exposure::a1:
      if (!w.empty()) {
        fail(errc::unsupported_world,
             "offer effects take no world setting (the offer is the root of "
             "the chain)");
      }
      if (spec.instrument) {
        fail(errc::illegal_world, "the offer cannot be instrumented");
      }
      break;
    case Exposure::a2:
      if (!w.empty()) {
        fail(errc::unsupported_world, "uptake effects take no world setting");
      }
      if (spec.instrument && *spec.instrument != "a1") {
        fail(errc::illegal_world,
             "only the randomized offer 'a1' can instrument uptake");
      }
      break;
    case Exposure::a3: {
      if (spec.instrument) {
        fail(errc::illegal_world,
             "the offer is not a valid instrument for initiation: it reaches "
             "the outcome through duration, violating exclusion");
      }
      const bool a1_world = w.a1.has_value() && !w.a2 && !w.a3;
      const bool a2_world = w.a2.has_value() && *w.a2 == 1 && !w.a1 && !w.a3;
      if (!a1_world && !a2_world) {
        if (w.empty()) {
          fail(errc::illegal_world,
               "initiation effects require a world: a1=0, a1=1, or a2=1");
        }
        fail(errc::unsupported_world,
             "initiation effects support worlds a1=0, a1=1, or a2=1 only");
      }
      break;
    }
    case Exposure::a4:
      if (!w.a3 || *w.a3 != 1) {
        fail(errc::illegal_world,
             "full-duration effects require world a3=1: without initiation "
             "the exposure is undefined");
      }
      if (w.a2) {
        fail(errc::unsupported_world,
             "full-duration effects support a3=1 with an optional a1 setting");
      }
      if (spec.instrument) {
        fail(errc::illegal_world, "full-duration effects cannot be instrumented");
      }
      break;
  }
  if (spec.contrast == Contrast::cace) {
    if (spec.exposure != Exposure::a2 || !spec.instrument) {
      fail(errc::illegal_world,
           "complier effects are defined for uptake with the offer as "
           "instrument (cace:a2,iv=a1)");
    }
  }
}

const char* exposure_column(Exposure exposure) {
  return exposure_name(exposure);
}

std::vector<Eigen::Index> masked_rows(const Dataset& dataset,
                                      const EstimandSpec& spec) {
  const Eigen::Index n = dataset.n_rows();
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(n));

  const Eigen::VectorXd* a1 = spec.world.a1 ? &dataset.col("a1") : nullptr;
  const Eigen::VectorXd* a2 =
      (spec.world.a2 && spec.exposure == Exposure::a3) ? &dataset.col("a2")
                                                       : nullptr;
  const Eigen::VectorXd* a3 =
      (spec.world.a3 && spec.exposure == Exposure::a4) ? &dataset.col("a3")
                                                       : nullptr;
  const Eigen::VectorXd* sub =
      spec.subpopulation ? &dataset.col(spec.subpopulation->column) : nullptr;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (a1 && (*a1)(i) != static_cast<double>(*spec.world.a1)) continue;
    if (a2 && (*a2)(i) != 1.0) continue;
    if (a3 && (*a3)(i) != 1.0) continue;
    if (sub && (*sub)(i) != spec.subpopulation->value) continue;
    rows.push_back(i);
  }
  if (rows.empty()) {
    fail(errc::empty_subpopulation,
         "no rows satisfy '" + to_string(spec) + "'");
  }
  return rows;
}

Eigen::VectorXd take(const Eigen::VectorXd& column,
                     const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = column(rows[i]);
  }
  return out;
}

}  // namespace

AnalysisFrame resolve(const EstimandSpec& spec, const Dataset& dataset) {
  check_spec(spec);

  AnalysisFrame frame;
  frame.spec = spec;
  frame.rows = masked_rows(dataset, spec);

  frame.y = take(dataset.col("y"), frame.rows);
  frame.a = take(dataset.col(exposure_column(spec.exposure)), frame.rows);

  const auto n = static_cast<Eigen::Index>(frame.rows.size());
  frame.confounders.values.resize(n, 0);

  auto push = [&](const std::string& label, const Eigen::VectorXd& column) {
    frame.confounders.push_column(column, label);
  };

  if (spec.exposure != Exposure::a1) {
    // Maternal covariates that drive uptake and the outcome.
    const Eigen::VectorXd age = take(dataset.col("age"), frame.rows);
    const Eigen::VectorXd edu = take(dataset.col("edu"), frame.rows);
    const Eigen::VectorXd age_c = age.array() - kAgeCenter;
    push("age_c", age_c);
    push("age_c2", age_c.array().square());
    push("edu_mid", (edu.array() == 1.0).cast<double>());
    push("edu_high", (edu.array() == 2.0).cast<double>());
    push("allergy", take(dataset.col("allergy"), frame.rows));
    push("smoke", take(dataset.col("smoke"), frame.rows));
    push("urban", take(dataset.col("urban"), frame.rows));
    push("east", take(dataset.col("east"), frame.rows));
  }
  if (spec.exposure == Exposure::a3 || spec.exposure == Exposure::a4) {
    // Infant covariates that drive initiation and duration.
    const Eigen::VectorXd bw = take(dataset.col("bweight"), frame.rows);
    const Eigen::VectorXd bw_kg =
        (bw.array() - kBirthWeightCenter) / 1000.0;
    push("female", take(dataset.col("female"), frame.rows));
    push("bw_kg", bw_kg);
    push("bw_kg2", bw_kg.array().square());
    push("caesar", take(dataset.col("caesar"), frame.rows));
    // Uptake varies inside the offered arm (and inside a3=1 frames when no
    // offer arm is fixed), so it has to be adjusted for there.
    const bool uptake_varies =
        (spec.exposure == Exposure::a3 && spec.world.a1 && *spec.world.a1 == 1) ||
        spec.exposure == Exposure::a4;
    if (uptake_varies) push("a2", take(dataset.col("a2"), frame.rows));
  }

  if (spec.instrument) {
    frame.z = take(dataset.col(*spec.instrument), frame.rows);
  }
  return frame;
}

// --- ground truth -------------------------------------------------------------

namespace {

struct PotentialPair {
  const char* treated;
  const char* control;
};

PotentialPair potential_pair(const EstimandSpec& spec) {
  switch (spec.exposure) {
    case Exposure::a1: return {"y_a1_1", "y_a1_0"};
    case Exposure::a2: return {"y_a2_1", "y_a2_0"};
    case Exposure::a3:
      if (spec.world.a2) return {"y_a2_1_a3_1", "y_a3_0"};
      return *spec.world.a1 == 1 ? PotentialPair{"y_a1_1_a3_1", "y_a3_0"}
                                 : PotentialPair{"y_a1_0_a3_1", "y_a3_0"};
    case Exposure::a4: return {"y_a4_1", "y_a3_0"};
  }
  fail(errc::invalid_config, "unreachable exposure");
}

// Rows entering the contrast's averaging set, on top of any subpopulation
// filter.  ATT/ATNT condition on the realized exposure inside the world.
std::vector<Eigen::Index> contrast_rows(const Dataset& dataset,
                                        const EstimandSpec& spec) {
  const Eigen::Index n = dataset.n_rows();
  const Eigen::VectorXd* exposure = nullptr;
  double exposure_value = 1.0;
  const Eigen::VectorXd* world_a1 = nullptr;
  const Eigen::VectorXd* world_a2 = nullptr;
  const Eigen::VectorXd* offer_compliance = nullptr;
  const Eigen::VectorXd* offer = nullptr;

  switch (spec.contrast) {
    case Contrast::ate:
      break;
    case Contrast::att:
    case Contrast::atnt:
      exposure = &dataset.col(exposure_column(spec.exposure));
      exposure_value = spec.contrast == Contrast::att ? 1.0 : 0.0;
      if (spec.exposure == Exposure::a3) {
        if (spec.world.a1) world_a1 = &dataset.col("a1");
        if (spec.world.a2) world_a2 = &dataset.col("a2");
      } else if (spec.exposure == Exposure::a2 &&
                 spec.contrast == Contrast::atnt) {
        // Uptake is only on offer, so the non-treated group for the uptake
        // effect is "offered but opted out"; the treated group satisfies
        // a1 == 1 automatically.
        offer = &dataset.col("a1");
      }
      break;
    case Contrast::cace:
      offer_compliance = &dataset.col("a2_offer");
      break;
  }
  const Eigen::VectorXd* sub =
      spec.subpopulation ? &dataset.col(spec.subpopulation->column) : nullptr;

  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (exposure && (*exposure)(i) != exposure_value) continue;
    if (offer && (*offer)(i) != 1.0) continue;
    if (world_a1 && (*world_a1)(i) != static_cast<double>(*spec.world.a1)) continue;
    if (world_a2 && (*world_a2)(i) != 1.0) continue;
    if (offer_compliance && (*offer_compliance)(i) != 1.0) continue;
    if (sub && (*sub)(i) != spec.subpopulation->value) continue;
    rows.push_back(i);
  }
  if (rows.empty()) {
    fail(errc::empty_subpopulation,
         "no individuals in the averaging set of '" + to_string(spec) + "'");
  }
  return rows;
}

}  // namespace

double true_contrast(const Dataset& dataset, const EstimandSpec& spec) {
  check_spec(spec);
  // CACE needs the instrument conceptually, but its truth only needs the
  // compliance column; other contrasts need their potential columns.
  const PotentialPair pair = potential_pair(spec);
  const Eigen::VectorXd& treated = dataset.col(pair.treated);
  const Eigen::VectorXd& control = dataset.col(pair.control);
  const std::vector<Eigen::Index> rows = contrast_rows(dataset, spec);
  double sum = 0.0;
  for (const Eigen::Index i : rows) sum += treated(i) - control(i);
  return sum / static_cast<double>(rows.size());
}

double true_contrast(const std::vector<IndividualRecord>& records,
                     const EstimandSpec& spec) {
  return true_contrast(to_dataset(records, true), spec);
}

double true_contrast(const TruthTable& table, const EstimandSpec& spec) {
  check_spec(spec);
  if (spec.contrast == Contrast::cace) {
    fail(errc::unsupported_world,
         "complier contrasts are not expressible as truth table cells");
  }

  int treated_row = 0, control_row = 0;
  switch (spec.exposure) {
    case Exposure::a1: treated_row = kRowYa1_1; control_row = kRowYa1_0; break;
    case Exposure::a2: treated_row = kRowYa2_1; control_row = kRowYa2_0; break;
    case Exposure::a3:
      control_row = kRowYa3_0;
      if (spec.world.a2) treated_row = kRowYa2_1a3_1;
      else treated_row = *spec.world.a1 == 1 ? kRowYa1_1a3_1 : kRowYa1_0a3_1;
      break;
    case Exposure::a4: treated_row = kRowYa4_1; control_row = kRowYa3_0; break;
  }

  int column = kColOverall;
  if (spec.subpopulation) {
    if (spec.contrast != Contrast::ate || spec.subpopulation->column != "edu") {
      fail(errc::unsupported_world,
           "truth table subpopulations cover education strata of the ATE only");
    }
    const int edu = static_cast<int>(spec.subpopulation->value);
    column = edu == 0 ? kColEduLow : (edu == 1 ? kColEduMid : kColEduHigh);
  } else if (spec.contrast == Contrast::att || spec.contrast == Contrast::atnt) {
    const bool want_treated = spec.contrast == Contrast::att;
    switch (spec.exposure) {
      case Exposure::a2:
        if (!want_treated) { column = kColA1OnlyOffer; break; }
        column = kColA2;
        break;
      case Exposure::a3:
        if (spec.world.a2) {
          fail(errc::unsupported_world,
               "treated/untreated columns are tabulated for a1 worlds only");
        }
        if (*spec.world.a1 == 1) {
          column = want_treated ? kColA1_1A3_1 : kColA1_1A3_0;
        } else {
          column = want_treated ? kColA1_0A3_1 : kColA1_0A3_0;
        }
        break;
      default:
        fail(errc::unsupported_world,
             "treated/untreated columns are tabulated for a2 and a3 effects");
    }
  }
  return table.cell(treated_row, column) - table.cell(control_row, column);
}

}  // namespace ck
