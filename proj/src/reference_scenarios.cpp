#include "metadistill/reference_scenarios.hpp"

namespace metadistill {

namespace {

Scenario reference_base() {
  Scenario s{
      ConditionalModel::single(Distribution::from_probabilities({0.6, 0.3, 0.1})),
      {},
      ConditionalModel::single(Distribution::from_probabilities({0.2, 0.5, 0.3})),
      OperatorConfig{},
      ScheduleConfig::constant(),
      NoiseModel{},
      DivergenceKind::KL,
      10,
      StopCriteria{0.0, 10},
      7,
      ""};
  return s;
}

}  // namespace

Scenario reference_anchored_scenario() {
  Scenario s = reference_base();
  s.op.kind = OperatorKind::ConvexMixture;
  s.op.alpha = 0.3;
  s.op.generation_scheme = GenerationWeightScheme::recency(1);
  s.label = "appendix-a-anchored";
  return s;
}

Scenario reference_drift_scenario() {
  Scenario s = reference_base();
  s.op.kind = OperatorKind::GeneralizedMixture;
  s.op.alpha = 0.0;
  s.op.unanchored = true;
  s.op.generation_scheme = GenerationWeightScheme::recency(1);
  s.noise.kind = NoiseKind::CalibratedDrift;
  s.noise.epsilon = 0.05;
  s.noise.distractor = Distribution::from_probabilities({0.01, 0.04, 0.95});
  s.label = "appendix-a-drift";
  return s;
}

}  // namespace metadistill
