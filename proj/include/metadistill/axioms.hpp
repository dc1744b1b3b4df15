#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metadistill/operators.hpp"
#include "metadistill/simplex.hpp"

namespace metadistill {

enum class AxiomStatus { Pass, Fail, Measured };

const char* axiom_status_name(AxiomStatus status);

/// Replayable evidence for a violated check: the concrete inputs, the trial's
/// derived RNG seed, and the observed quantity. replay_counterexample()
/// reconstructs the violation from this record alone.
struct Counterexample {
  int axiom = 0;
  int trial_index = 0;
  std::uint64_t trial_seed = 0;
  std::size_t vocab = 0;
  double alpha = 0.0;   // alpha used to build the output (alpha_1 for axiom 5)
  double alpha2 = 0.0;  // axiom 5 only
  std::vector<std::vector<double>> teachers;
  std::vector<std::vector<double>> students;
  std::vector<std::vector<double>> teachers_perturbed;  // axiom 4 only
  std::vector<std::vector<double>> students_perturbed;  // axiom 4 only
  std::vector<double> output;
  std::vector<double> output2;  // axiom 4 perturbed / axiom 5 second output
  double observed = 0.0;
  double threshold = 0.0;
  std::string message;
};

struct AxiomCheck {
  AxiomStatus status = AxiomStatus::Pass;
  int trials = 0;
  int violations = 0;
  std::vector<Counterexample> counterexamples;  // first few, ordered by trial
};

struct AxiomReport {
  OperatorConfig config;
  int trials = 0;
  std::uint64_t seed = 0;
  AxiomCheck validity;      // Axiom 1
  AxiomCheck positivity;    // Axiom 2
  AxiomCheck anchoring;     // Axiom 3
  AxiomCheck continuity;    // Axiom 4
  AxiomCheck monotonicity;  // Axiom 5
  double effective_anchor_min = 0.0;  // min over trials of min_i q_i / tbar_i
  double general_anchor_min = 0.0;    // general-form quantity, r = non-anchor component or uniform
  double continuity_ratio_max = 0.0;  // max over trials of L1(dq)/delta

  bool all_pass_or_measured() const;
};

/// Continuity probe constants: each input is nudged by L1 magnitude
/// kContinuityDelta along a random simplex tangent; the output must move by
/// at most kContinuityBound * delta.
inline constexpr double kContinuityDelta = 1e-4;
inline constexpr double kContinuityBound = 50.0;

/// Largest alpha* such that q = alpha* * t0 + (1 - alpha*) * (valid
/// distribution); equals min_i q_i / t0_i. A value >= alpha certifies
/// mixture-form anchoring.
double effective_anchor(const Distribution& q, const Distribution& t0);

/// Property-based conformance check of an operator config against the five
/// meta-teacher axioms. Deterministic in (config, trials, seed); trials are
/// independent, so the aggregation is order-free.
AxiomReport check_axioms(const OperatorConfig& config, int trials, std::uint64_t seed);

/// Recomputes the violated quantity from a counterexample's stored inputs.
/// Returns the recomputed value; a faithful replay matches ce.observed
/// exactly and still violates ce.threshold.
double replay_counterexample(const OperatorConfig& config, const Counterexample& ce);

}  // namespace metadistill
