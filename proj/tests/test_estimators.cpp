#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ck/estimators.hpp"
#include "ck/propensity.hpp"
#include "fixtures.hpp"

// All point values here are hand-derived from the eight-row fixture; see
// fixtures.hpp for the arithmetic behind the headline 6.0 / 6.4 effects.

namespace {

constexpr double kTol = 1e-10;

}  // namespace

TEST_CASE("crude difference ignores the confounder") {
  const ck::AnalysisFrame frame = ckt::f8_frame();
  const ck::CrudeResult crude = ck::crude_difference(frame);
  CHECK(crude.estimate == doctest::Approx(74.0 / 5.0 - 22.0 / 3.0).epsilon(kTol));
  CHECK(crude.n_treated == 5);
  CHECK(crude.n_control == 3);
  CHECK(crude.se > 0.0);
}

TEST_CASE("outcome regression with interactions standardizes exactly") {
  const ck::AnalysisFrame frame = ckt::f8_frame();

  const ck::OutcomeModelFit ate = ck::or_ate(frame, true);
  CHECK(ate.estimate == doctest::Approx(6.0).epsilon(kTol));
  CHECK(ate.interactions);
  CHECK(ate.se_model > 0.0);

  const ck::OutcomeModelFit att = ck::or_att(frame, true);
  CHECK(att.estimate == doctest::Approx(6.4).epsilon(kTol));

  // Without interactions both targets collapse to one slope: 40/7.
  const ck::OutcomeModelFit noint = ck::or_ate(frame, false);
  CHECK(noint.estimate == doctest::Approx(40.0 / 7.0).epsilon(kTol));
  CHECK(ck::or_att(frame, false).estimate ==
        doctest::Approx(noint.estimate).epsilon(kTol));
}

TEST_CASE("score regression equals covariate regression when collinear") {
  const ck::AnalysisFrame frame = ckt::f8_frame();
  const ck::PropensityFit ps = ck::fit_ps(frame);
  const ck::OutcomeModelFit fit = ck::ps_regression(frame, ps);
  // The fitted score is affine in L, so adjusting for it is adjusting for L.
  CHECK(fit.estimate == doctest::Approx(40.0 / 7.0).epsilon(1e-6));
  CHECK(!fit.score_dropped);
}

TEST_CASE("a constant score falls back to the crude contrast") {
  ck::AnalysisFrame frame = ckt::f8_frame();
  frame.confounders = ck::DesignMatrix{};  // drop L: intercept-only score
  frame.confounders.values.resize(8, 0);
  const ck::PropensityFit ps = ck::fit_ps(frame);
  const ck::OutcomeModelFit fit = ck::ps_regression(frame, ps);
  CHECK(fit.score_dropped);
  CHECK(fit.estimate ==
        doctest::Approx(74.0 / 5.0 - 22.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("stratification weights strata by population or treated share") {
  const ck::AnalysisFrame frame = ckt::f8_frame();
  const ck::StrataAssignment strata = ck::stratify_by_ps(ckt::f8_scores(), 2);

  const ck::StrataSummary ate = ck::stratification(frame, strata, ck::Target::ate);
  CHECK(ate.estimate == doctest::Approx(6.0).epsilon(kTol));
  REQUIRE(ate.rows.size() == 2);
  CHECK(ate.rows[0].effect == doctest::Approx(4.0).epsilon(kTol));
  CHECK(ate.rows[1].effect == doctest::Approx(8.0).epsilon(kTol));
  CHECK(ate.rows[0].n == 4);
  CHECK(ate.rows[1].n_control == 1);

  const ck::StrataSummary att = ck::stratification(frame, strata, ck::Target::att);
  CHECK(att.estimate == doctest::Approx(6.4).epsilon(kTol));
}

TEST_CASE("stratification flags strata with an empty arm") {
  ck::AnalysisFrame frame = ckt::f8_frame();
  frame.a << 0, 1, 1, 1, 1, 1, 1, 1;  // stratum of L=1 rows is all-treated
  const ck::StrataAssignment strata = ck::stratify_by_ps(ckt::f8_scores(), 2);
  try {
    ck::stratification(frame, strata, ck::Target::ate);
    FAIL("expected empty_arm_in_stratum");
  } catch (const ck::Error& error) {
    CHECK(error.code() == ck::errc::empty_arm_in_stratum);
  }
}

TEST_CASE("single-neighbor matching reuses nearest donors") {
  const ck::AnalysisFrame frame = ckt::f8_frame();
  ck::MatchConfig config;
  config.n_matches = 1;

  const ck::MatchResult att =
      ck::matching(frame, ckt::f8_scores(), config, ck::Target::att);
  // Targets 2,3 take row 0 (tie with row 1 broken by index); 5,6,7 take row 4.
  CHECK(att.estimate == doctest::Approx(34.0 / 5.0).epsilon(kTol));
  CHECK(att.n_targets == 5);
  CHECK(att.n_matched == 5);
  CHECK(att.n_unmatched == 0);
  CHECK(att.mean_matches == doctest::Approx(1.0));
  CHECK(att.usage_weight(0) == doctest::Approx(2.0).epsilon(kTol));
  CHECK(att.usage_weight(1) == doctest::Approx(0.0));
  CHECK(att.usage_weight(4) == doctest::Approx(3.0).epsilon(kTol));
  CHECK(att.target_weight.sum() == doctest::Approx(5.0));

  const ck::MatchResult ate =
      ck::matching(frame, ckt::f8_scores(), config, ck::Target::ate);
  // Controls 0,1 pull treated row 2; control 4 pulls row 5.
  CHECK(ate.estimate == doctest::Approx(46.0 / 8.0).epsilon(kTol));
  CHECK(ate.n_targets == 8);
  CHECK(ate.usage_weight(2) == doctest::Approx(2.0).epsilon(kTol));
  CHECK(ate.usage_weight(5) == doctest::Approx(1.0).epsilon(kTol));
}

TEST_CASE("calipered multi-neighbor matching recovers the exact effects") {
  const ck::AnalysisFrame frame = ckt::f8_frame();
  ck::MatchConfig config;
  config.n_matches = 3;
  config.caliper = 0.1;  // keeps each target inside its own score stratum

  const ck::MatchResult ate =
      ck::matching(frame, ckt::f8_scores(), config, ck::Target::ate);
  CHECK(ate.estimate == doctest::Approx(6.0).epsilon(kTol));
  const ck::MatchResult att =
      ck::matching(frame, ckt::f8_scores(), config, ck::Target::att);
  CHECK(att.estimate == doctest::Approx(6.4).epsilon(kTol));
  // Treated targets at score 0.75 find exactly one in-caliper control.
  CHECK(att.mean_matches == doctest::Approx((2 + 2 + 1 + 1 + 1) / 5.0));
}

TEST_CASE("matching without replacement exhausts the donor pool") {
  const ck::AnalysisFrame frame = ckt::f8_frame();
  ck::MatchConfig config;
  config.n_matches = 1;
  config.with_replacement = false;

  const ck::MatchResult att =
      ck::matching(frame, ckt::f8_scores(), config, ck::Target::att);
  // Greedy in row order: 2 takes 0, 3 takes 1, 5 takes 4; 6 and 7 starve.
  CHECK(att.n_matched == 3);
  CHECK(att.n_unmatched == 2);
  CHECK(att.estimate == doctest::Approx((4.0 + 4.0 + 6.0) / 3.0).epsilon(kTol));
}

TEST_CASE("matching drops targets outside the caliper") {
  ck::AnalysisFrame frame;
  frame.y.resize(2);
  frame.y << 1, 2;
  frame.a.resize(2);
  frame.a << 0, 1;
  frame.confounders.values.resize(2, 0);
  Eigen::VectorXd scores(2);
  scores << 0.1, 0.9;
  ck::MatchConfig config;
  config.caliper = 0.01;
  try {
    ck::matching(frame, scores, config, ck::Target::att);
    FAIL("expected unmatched_units");
  } catch (const ck::Error& error) {
    CHECK(error.code() == ck::errc::unmatched_units);
  }
}

TEST_CASE("weighting estimators hit the stratified answers") {
  const ck::AnalysisFrame frame = ckt::f8_frame();
  const Eigen::VectorXd scores = ckt::f8_scores();

  const ck::WeightSet ate_w =
      ck::make_weights(frame.a, scores, ck::WeightKind::ate_unstabilized);
  const ck::IpwResult ate = ck::ipw(frame, ate_w, ck::Target::ate);
  // Horvitz-Thompson arm means: 112/8 = 14 and 64/8 = 8.
  CHECK(ate.ht_estimate == doctest::Approx(6.0).epsilon(kTol));
  CHECK(ate.estimate == doctest::Approx(6.0).epsilon(kTol));
  CHECK(ate.sum_weights_treated == doctest::Approx(8.0).epsilon(kTol));
  CHECK(ate.sum_weights_control == doctest::Approx(8.0).epsilon(kTol));

  // Stabilization rescales weights without moving the normalized estimate.
  const ck::WeightSet ate_s =
      ck::make_weights(frame.a, scores, ck::WeightKind::ate_stabilized);
  CHECK(ck::ipw(frame, ate_s, ck::Target::ate).estimate ==
        doctest::Approx(6.0).epsilon(kTol));

  const ck::WeightSet att_w =
      ck::make_weights(frame.a, scores, ck::WeightKind::att_unstabilized);
  const ck::IpwResult att = ck::ipw(frame, att_w, ck::Target::att);
  // Treated mean 14.8 against the reweighted control mean 42/5 = 8.4.
  CHECK(att.estimate == doctest::Approx(6.4).epsilon(kTol));
  CHECK(att.ht_estimate == doctest::Approx(6.4).epsilon(kTol));

  const ck::WeightSet att_s =
      ck::make_weights(frame.a, scores, ck::WeightKind::att_stabilized);
  CHECK(ck::ipw(frame, att_s, ck::Target::att).estimate ==
        doctest::Approx(6.4).epsilon(kTol));
}

TEST_CASE("augmented weighting is exact under the saturated models") {
  const ck::AnalysisFrame frame = ckt::f8_frame();
  const ck::PropensityFit ps = ck::fit_ps(frame);
  const ck::AipwResult result = ck::aipw(frame, ps);
  CHECK(result.estimate == doctest::Approx(6.0).epsilon(1e-7));
  CHECK(result.se_influence ==
        doctest::Approx(1.0540925533894596).epsilon(1e-6));
  CHECK(result.influence.mean() == doctest::Approx(0.0).scale(1e-12));
}
