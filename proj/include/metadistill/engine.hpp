#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "metadistill/operators.hpp"
#include "metadistill/rng.hpp"
#include "metadistill/simplex.hpp"

namespace metadistill {

enum class NoiseKind {
  None,                  // exact realizability
  ArithmeticDistractor,  // (1-delta)*q + delta*u
  GeometricTilt,         // q^(1-eta) * u^eta with eta solved for KL(q||result)
  CalibratedDrift,       // tilt with eta solved so KL(T0||result) grows by epsilon
};

const char* noise_kind_name(NoiseKind kind);
NoiseKind noise_kind_from_name(const std::string& name);

/// Optimization-error channel applied between the meta-teacher and the next
/// student. An absent distractor means "sample one per (generation, context)
/// from the derived seed".
struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double delta = 0.0;      // ArithmeticDistractor, in [0, 1)
  double target_kl = 0.0;  // GeometricTilt, >= 0
  double epsilon = 0.0;    // CalibratedDrift, > 0
  std::optional<Distribution> distractor;
  std::uint64_t seed = 0;

  void validate(std::size_t vocab_size) const;
  bool operator==(const NoiseModel&) const = default;
};

struct StopCriteria {
  double improvement_tol = 0.0;
  int max_generations = 1;

  void validate() const;
  bool operator==(const StopCriteria&) const = default;
};

enum class StopReason { MaxGenerations, DiminishedImprovement };

const char* stop_reason_name(StopReason reason);

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::MaxGenerations;
};

struct Scenario {
  ConditionalModel teacher;
  std::vector<ConditionalModel> extra_teachers;
  ConditionalModel student0;
  OperatorConfig op;
  ScheduleConfig schedule;
  NoiseModel noise;
  DivergenceKind divergence = DivergenceKind::KL;
  int max_generations = 10;
  StopCriteria stop;
  std::uint64_t seed = 0;
  std::string label;

  void validate() const;
};

/// Row g of a trace: the state at generation g plus the step g -> g+1.
/// Step fields are absent on the final row (no step was taken from it);
/// its alpha is the value the schedule would have emitted next.
struct StepRecord {
  int generation = 0;
  double alpha = 0.0;
  double d_actual = 0.0;  // D(S_g)
  double d_bound = 0.0;   // (1 - alpha_min_so_far)^g * D(S_0)
  std::optional<double> beta_hat;       // D(S_{g+1}) / D(S_g), absent when D(S_g) < 1e-14
  std::optional<double> step_noise_kl;  // context-weighted KL(q_g || S_{g+1})
  std::optional<ConditionalModel> meta_teacher;
  std::optional<ConditionalModel> next_student;
};

struct GenerationTrace {
  std::vector<StepRecord> rows;  // generations + 1 entries, g = 0 baseline first
  StopReason stop_reason = StopReason::MaxGenerations;
  DivergenceKind divergence = DivergenceKind::KL;
  std::uint64_t seed = 0;
  std::string label;

  int generations() const { return static_cast<int>(rows.size()) - 1; }
  double baseline_divergence() const { return rows.front().d_actual; }
  double final_divergence() const { return rows.back().d_actual; }
};

/// Run failure that preserves the trace accumulated before the fault.
class RunError : public Error {
 public:
  RunError(ErrorCode code, const std::string& message, GenerationTrace partial, int generation)
      : Error(code, message), partial_trace(std::move(partial)), generation(generation) {}

  GenerationTrace partial_trace;
  int generation;
};

/// Bisection for a target value of a continuous objective on [0, 1] whose
/// sublevel set {objective <= target} is an interval containing 0 (monotone
/// objectives and the convex drift objective both qualify). Converges to
/// |objective(eta) - target| <= 1e-9 within 200 iterations.
double calibrate_tilt(const std::function<double(double)>& objective, double target);

/// Normalized q^(1-eta) * u^eta, computed in log space. eta = 0 returns q
/// bit-for-bit, eta = 1 returns u.
Distribution geometric_tilt(const Distribution& q, const Distribution& u, double eta);

/// Applies the configured noise channel to one meta-teacher distribution.
/// `anchor` is the base-teacher distribution for the same context; it is
/// required by CalibratedDrift and ignored otherwise.
Distribution apply_noise(const Distribution& q, const NoiseModel& noise, RngStream& rng,
                         const Distribution* anchor = nullptr);

struct StepResult {
  ConditionalModel meta_teacher;
  ConditionalModel next_student;
  double noise_kl = 0.0;
};

/// One application of the meta-distillation operator: builds q_g per context
/// from the teachers and the student history, then realizes S_{g+1} through
/// the noise channel.
StepResult step(const Scenario& scenario, const std::vector<ConditionalModel>& students,
                double alpha_g, int g);

StopDecision should_stop(const GenerationTrace& trace, const StopCriteria& criteria);

/// Iterates step() with the alpha schedule until a stopping criterion fires.
/// Deterministic: identical scenario and seed give a bit-identical trace.
GenerationTrace run(const Scenario& scenario);

}  // namespace metadistill
