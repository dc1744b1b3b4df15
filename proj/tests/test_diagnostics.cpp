#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metadistill/diagnostics.hpp"
#include "metadistill/reference_scenarios.hpp"
#include "metadistill/rng.hpp"

using namespace metadistill;

namespace {

GenerationTrace synthetic_trace(const std::vector<double>& ds) {
  GenerationTrace trace;
  for (std::size_t g = 0; g < ds.size(); ++g) {
    StepRecord row;
    row.generation = static_cast<int>(g);
    row.alpha = 0.3;
    row.d_actual = ds[g];
    row.d_bound = ds[0];
    if (g + 1 < ds.size() && ds[g] >= 1e-14) row.beta_hat = ds[g + 1] / ds[g];
    trace.rows.push_back(row);
  }
  return trace;
}

GenerationTrace scaled(const GenerationTrace& trace, double factor) {
  GenerationTrace out = trace;
  for (auto& row : out.rows) {
    row.d_actual *= factor;
    row.d_bound *= factor;
  }
  return out;
}

OperatorConfig config_of(OperatorKind kind, double alpha) {
  OperatorConfig c;
  c.kind = kind;
  c.alpha = alpha;
  c.generation_scheme = GenerationWeightScheme::recency(1);
  return c;
}

}  // namespace

TEST_CASE("anchored trace classifies as geometric decay") {
  const ConvergenceSummary summary = summarize(run(reference_anchored_scenario()));
  CHECK(summary.classification == TrendClass::GeometricDecay);
  CHECK(summary.geometric_fit.slope <= std::log(0.7) + 1e-6);
  CHECK(summary.geometric_fit.r_squared >= 0.99);
  CHECK(summary.beta_hat_series.size() == 10);
  for (const auto& b : summary.beta_hat_series) {
    REQUIRE(b.has_value());
    CHECK(*b <= 0.7 + 1e-12);
  }
}

TEST_CASE("drift trace classifies as linear growth with the calibrated slope") {
  const ConvergenceSummary summary = summarize(run(reference_drift_scenario()));
  CHECK(summary.classification == TrendClass::LinearGrowth);
  CHECK(std::abs(summary.linear_fit.slope - 0.05) <= 1e-6);
  CHECK(summary.linear_fit.r_squared >= 0.99);
}

TEST_CASE("constant series classifies as plateau") {
  const ConvergenceSummary summary = summarize(synthetic_trace({0.5, 0.5, 0.5, 0.5, 0.5}));
  CHECK(summary.classification == TrendClass::Plateau);
}

TEST_CASE("classification is invariant under uniform rescaling") {
  const GenerationTrace anchored = run(reference_anchored_scenario());
  const GenerationTrace drift = run(reference_drift_scenario());
  for (double factor : {1e-6, 1e6}) {
    CHECK(summarize(scaled(anchored, factor)).classification == TrendClass::GeometricDecay);
    CHECK(summarize(scaled(drift, factor)).classification == TrendClass::LinearGrowth);
  }
}

TEST_CASE("noise bound violation rate is reported, not asserted") {
  // Exact realizability: the per-step inequality is the contraction theorem.
  const ConvergenceSummary exact = summarize(run(reference_anchored_scenario()));
  REQUIRE(exact.noise_bound_violation_rate.has_value());
  CHECK(*exact.noise_bound_violation_rate == 0.0);

  Scenario tilted = reference_anchored_scenario();
  tilted.noise.kind = NoiseKind::GeometricTilt;
  tilted.noise.target_kl = 0.004;
  tilted.noise.seed = 3;
  const ConvergenceSummary noisy = summarize(run(tilted));
  REQUIRE(noisy.noise_bound_violation_rate.has_value());
  CHECK(*noisy.noise_bound_violation_rate >= 0.0);
  CHECK(*noisy.noise_bound_violation_rate <= 1.0);

  // Synthetic traces carry no step records, so the rate is absent.
  CHECK(!summarize(synthetic_trace({1.0, 0.9, 0.8, 0.7})).noise_bound_violation_rate);
}

TEST_CASE("summarize preconditions") {
  try {
    summarize(synthetic_trace({1.0, 0.5}));
    FAIL("expected TraceTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TraceTooShort);
  }
  try {
    summarize(synthetic_trace({0.0, 0.0, 0.0, 0.0}));
    FAIL("expected DegenerateBaseline");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateBaseline);
  }
}

TEST_CASE("fixed point residual vanishes at the base teacher for every kind") {
  const auto t0 = ConditionalModel::single(Distribution::from_probabilities({0.6, 0.3, 0.1}));
  for (OperatorKind kind : {OperatorKind::ConvexMixture, OperatorKind::GeneralizedMixture,
                            OperatorKind::MProjection, OperatorKind::IProjection}) {
    CHECK(fixed_point_residual(config_of(kind, 0.3), t0, t0) <= 1e-12);
  }
}

TEST_CASE("fixed point residual frozen value") {
  const auto t0 = ConditionalModel::single(Distribution::from_probabilities({0.6, 0.3, 0.1}));
  const auto s = ConditionalModel::single(Distribution::from_probabilities({0.2, 0.5, 0.3}));
  const double residual = fixed_point_residual(config_of(OperatorKind::ConvexMixture, 0.3), t0, s);
  // KL(S || 0.3 T0 + 0.7 S) by direct evaluation.
  CHECK(std::abs(residual - 0.03685902530005834) <= 1e-5);

  const double full = fixed_point_residual(config_of(OperatorKind::ConvexMixture, 1.0), t0, s);
  CHECK(full == divergence(DivergenceKind::KL, s.context(0).dist, t0.context(0).dist));
}

TEST_CASE("basin probe converges from every sampled initialization") {
  Scenario scenario = reference_anchored_scenario();
  scenario.max_generations = 30;
  scenario.stop.max_generations = 30;
  const BasinReport report = basin_probe(scenario, 25, 1e-4, 1234);
  CHECK(report.fraction_converged == 1.0);
  CHECK(report.failures == 0);
  CHECK(report.worst_final_divergence < 1e-4);

  const BasinReport single = basin_probe(scenario, 1, 1e-4, 5);
  CHECK(single.fraction_converged == 1.0);
}

TEST_CASE("basin probe reports zero convergence for the drift template") {
  Scenario scenario = reference_drift_scenario();
  const BasinReport report = basin_probe(scenario, 10, 1e-4, 77);
  CHECK(report.fraction_converged == 0.0);
  CHECK(report.worst_final_divergence > 0.4);
}

TEST_CASE("stability probe") {
  const Scenario scenario = reference_anchored_scenario();
  const StabilityReport zero = stability_probe(scenario, 0.0, 5, 9);
  CHECK(zero.max_deviation == 0.0);

  const StabilityReport small = stability_probe(scenario, 0.01, 20, 9);
  CHECK(small.max_deviation <= 0.05);

  try {
    stability_probe(scenario, 1.0, 5, 9);
    FAIL("expected InvalidPerturbation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidPerturbation);
  }
}

TEST_CASE("ensemble variance: identical teachers have zero spread") {
  const auto t = ConditionalModel::single(Distribution::from_probabilities({0.6, 0.3, 0.1}));
  const EnsembleVarianceReport report = ensemble_variance_report({t, t}, {0.5, 0.5});
  CHECK(report.mean_individual_variance == 0.0);
  CHECK(report.mean_jackknife_variance == 0.0);
  CHECK(report.mixture_variance == 0.0);
  CHECK(report.reduction_holds);
}

TEST_CASE("ensemble variance: two-teacher worked example, equality at k = 2") {
  const auto t1 = ConditionalModel::single(Distribution::from_probabilities({0.5, 0.5}));
  const auto t2 = ConditionalModel::single(Distribution::from_probabilities({0.9, 0.1}));
  const EnsembleVarianceReport report = ensemble_variance_report({t1, t2}, {0.5, 0.5});
  REQUIRE(report.individual_variance.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(report.individual_variance[i] - 0.04) <= 1e-15);
    CHECK(std::abs(report.jackknife_variance[i] - 0.04) <= 1e-15);
  }
  CHECK(report.reduction_holds);
}

TEST_CASE("ensemble variance: jittered copies shrink the mean's variability") {
  RngStream rng(31);
  const Distribution base = Distribution::from_probabilities({0.6, 0.3, 0.1});
  std::vector<ConditionalModel> teachers;
  for (int k = 0; k < 10; ++k) {
    std::vector<double> probs = base.probs();
    for (double& p : probs) p *= 1.0 + 0.05 * rng.next_in(-1.0, 1.0);
    teachers.push_back(ConditionalModel::single(normalize(std::move(probs))));
  }
  const EnsembleVarianceReport report =
      ensemble_variance_report(teachers, std::vector<double>(10, 0.1));
  CHECK(report.mean_jackknife_variance < report.mean_individual_variance);
  CHECK(report.reduction_holds);
}

TEST_CASE("ensemble variance requires at least two teachers") {
  const auto t = ConditionalModel::single(Distribution::from_probabilities({0.6, 0.3, 0.1}));
  try {
    ensemble_variance_report({t}, {1.0});
    FAIL("expected TooFewTeachers");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewTeachers);
  }
}
