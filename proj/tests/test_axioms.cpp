#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metadistill/axioms.hpp"
#include "metadistill/io.hpp"

using namespace metadistill;

namespace {

OperatorConfig mixture_config(OperatorKind kind, double alpha) {
  OperatorConfig c;
  c.kind = kind;
  c.alpha = alpha;
  c.generation_scheme = GenerationWeightScheme::recency(1);
  return c;
}

OperatorConfig unanchored_config() {
  OperatorConfig c;
  c.kind = OperatorKind::GeneralizedMixture;
  c.alpha = 0.0;
  c.unanchored = true;
  c.generation_scheme = GenerationWeightScheme::recency(1);
  return c;
}

}  // namespace

TEST_CASE("effective anchor frozen values") {
  const Distribution t0 = Distribution::from_probabilities({0.6, 0.3, 0.1});
  CHECK(effective_anchor(t0, t0) == 1.0);
  CHECK(std::abs(effective_anchor(Distribution::from_probabilities({0.32, 0.44, 0.24}), t0) -
                 0.5333) <= 1e-4);
  CHECK(std::abs(effective_anchor(Distribution::from_probabilities({0.2, 0.5, 0.3}), t0) -
                 0.3333) <= 1e-4);
  try {
    effective_anchor(Distribution::from_probabilities({0.5, 0.5}), t0);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("convex mixture passes the provable axioms over 1000 trials") {
  const AxiomReport report = check_axioms(mixture_config(OperatorKind::ConvexMixture, 0.3),
                                          1000, 42);
  CHECK(report.validity.status == AxiomStatus::Pass);
  CHECK(report.positivity.status == AxiomStatus::Pass);
  CHECK(report.anchoring.status == AxiomStatus::Pass);
  CHECK(report.continuity.status == AxiomStatus::Measured);
  CHECK(report.monotonicity.status == AxiomStatus::Pass);
  CHECK(report.effective_anchor_min >= 0.3 - 1e-12);
  CHECK(report.continuity_ratio_max <= kContinuityBound);
}

TEST_CASE("reports are deterministic in (config, trials, seed)") {
  const auto config = mixture_config(OperatorKind::GeneralizedMixture, 0.4);
  const json a = axiom_report_to_json(check_axioms(config, 250, 7));
  const json b = axiom_report_to_json(check_axioms(config, 250, 7));
  CHECK(a.dump() == b.dump());
  const json c = axiom_report_to_json(check_axioms(config, 250, 8));
  CHECK(a.dump() != c.dump());
}

TEST_CASE("unanchored operator fails teacher anchoring with replayable evidence") {
  const auto config = unanchored_config();
  const AxiomReport report = check_axioms(config, 1000, 3);
  CHECK(report.anchoring.status == AxiomStatus::Fail);
  CHECK(report.anchoring.violations == 1000);
  REQUIRE(!report.anchoring.counterexamples.empty());

  const Counterexample& ce = report.anchoring.counterexamples.front();
  CHECK(ce.axiom == 3);
  const double replayed = replay_counterexample(config, ce);
  CHECK(replayed == ce.observed);  // exact reproduction
  CHECK(ce.alpha == 0.0);

  // The other structural axioms still hold for the bare mixture.
  CHECK(report.validity.status == AxiomStatus::Pass);
  CHECK(report.positivity.status == AxiomStatus::Pass);
}

TEST_CASE("counterexamples survive a serialization round trip") {
  const auto config = unanchored_config();
  const AxiomReport report = check_axioms(config, 10, 99);
  const json j = axiom_report_to_json(report);
  const json& ce_json = j["axioms"]["axiom3_anchoring"]["counterexamples"][0];
  const Counterexample ce = counterexample_from_json(ce_json);
  CHECK(replay_counterexample(config, ce) == ce.observed);
}

TEST_CASE("i-projection: anchoring measured, structure and monotonicity pass") {
  OperatorConfig config = mixture_config(OperatorKind::IProjection, 0.3);
  const AxiomReport report = check_axioms(config, 1000, 11);
  CHECK(report.validity.status == AxiomStatus::Pass);
  CHECK(report.positivity.status == AxiomStatus::Pass);
  CHECK(report.anchoring.status == AxiomStatus::Measured);
  CHECK(report.monotonicity.status == AxiomStatus::Pass);
  CHECK(report.effective_anchor_min > 0.0);
  CHECK(std::isfinite(report.general_anchor_min));
}

TEST_CASE("explicit generation weights drive the sampled history length") {
  OperatorConfig config;
  config.kind = OperatorKind::GeneralizedMixture;
  config.alpha = 0.5;
  config.generation_scheme = GenerationWeightScheme::explicit_weights_of({0.25, 0.25, 0.5});
  const AxiomReport report = check_axioms(config, 100, 5);
  CHECK(report.validity.status == AxiomStatus::Pass);
  CHECK(report.anchoring.status == AxiomStatus::Pass);
}

TEST_CASE("check_axioms validates its inputs") {
  CHECK_THROWS_AS(check_axioms(mixture_config(OperatorKind::ConvexMixture, 0.3), 0, 1), Error);
  OperatorConfig bad;
  bad.alpha = -0.2;
  CHECK_THROWS_AS(check_axioms(bad, 10, 1), Error);
}
