#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metadistill/simplex.hpp"

namespace metadistill {

enum class OperatorKind {
  ConvexMixture,      // alpha*T0 + (1-alpha)*S_g
  GeneralizedMixture, // alpha*(sum w_k T_k) + (1-alpha)*(sum v_j S_j)
  MProjection,        // argmin_q sum c_m KL(p_m || q) over the pooled set
  IProjection,        // argmin_q sum c_m KL(q || p_m) over the pooled set
};

const char* operator_kind_name(OperatorKind kind);
OperatorKind operator_kind_from_name(const std::string& name);

/// How prior student generations are weighted inside the meta-teacher.
struct GenerationWeightScheme {
  enum class Kind { Explicit, ExponentialDecay, Recency };

  Kind kind = Kind::Recency;
  std::vector<double> explicit_weights;  // Explicit
  double decay_rate = 1.0;               // ExponentialDecay, in (0, 1]
  int window = 1;                        // Recency, >= 1

  static GenerationWeightScheme recency(int window);
  static GenerationWeightScheme exponential_decay(double rate);
  static GenerationWeightScheme explicit_weights_of(std::vector<double> weights);

  void validate() const;
  bool operator==(const GenerationWeightScheme&) const = default;
};

/// Weights v_0..v_g over student generations 0..g for the given scheme.
std::vector<double> generation_weights(const GenerationWeightScheme& scheme, int g);

/// Declarative description of a meta-teacher construction operator.
/// alpha = 0 is permitted only for GeneralizedMixture with the explicit
/// unanchored flag (drift reproductions); every other configuration must
/// anchor with alpha in (0, 1].
struct OperatorConfig {
  OperatorKind kind = OperatorKind::ConvexMixture;
  double alpha = 0.3;
  std::vector<double> teacher_weights{1.0};
  GenerationWeightScheme generation_scheme{};
  bool unanchored = false;

  void validate() const;
  bool operator==(const OperatorConfig&) const = default;
};

/// Builds the meta-teacher q_g for one context.
///   base_teachers: [T0, T1, ..., Tk], matching config.teacher_weights
///   students:      [S0, ..., Sg], weighted by config.generation_scheme
/// alpha_g overrides config.alpha for this step (schedules).
Distribution build_meta_teacher(const OperatorConfig& config, double alpha_g,
                                const std::vector<Distribution>& base_teachers,
                                const std::vector<Distribution>& students);

/// Anchor-weight schedule across generations.
struct ScheduleConfig {
  enum class Kind { Constant, Linear, Adaptive };

  Kind kind = Kind::Constant;
  std::optional<double> constant_alpha;  // Constant; defaults to the operator alpha
  double from = 0.1;                     // Linear
  double to = 0.5;                       // Linear
  int over_generations = 1;              // Linear
  double increase_factor = 1.5;          // Adaptive
  double trigger_ratio = 0.9;            // Adaptive

  static ScheduleConfig constant();
  static ScheduleConfig constant_of(double alpha);
  static ScheduleConfig linear(double from, double to, int over_generations);
  static ScheduleConfig adaptive(double increase_factor, double trigger_ratio);

  void validate() const;
  bool operator==(const ScheduleConfig&) const = default;
};

/// alpha_g for step g. `current_alpha` is the previously emitted value
/// (the operator alpha on the first call); `last_ratio` is D(S_g)/D(S_{g-1})
/// when defined, used by the adaptive schedule.
double next_alpha(const ScheduleConfig& schedule, int g, double current_alpha,
                  std::optional<double> last_ratio);

}  // namespace metadistill
