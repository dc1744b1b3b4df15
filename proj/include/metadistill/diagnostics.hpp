#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metadistill/engine.hpp"

namespace metadistill {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

enum class TrendClass { GeometricDecay, LinearGrowth, Plateau, Indeterminate };

const char* trend_class_name(TrendClass c);

/// Post-hoc convergence analysis of a trace. The geometric fit regresses
/// ln D on g; the linear fit regresses D on g. Classification thresholds are
/// evaluated on scale-free quantities (log slope, slope normalized by D(S_0),
/// relative change), so the verdict is invariant under rescaling the series.
///
/// noise_bound_violation_rate is the fraction of steps with
/// D(S_{g+1}) > (1 - alpha_g) D(S_g) + step_noise_kl + 1e-10. The inequality
/// is a theorem only for the arithmetic-distractor channel; for geometric
/// tilts it is reported, not asserted.
struct ConvergenceSummary {
  std::vector<std::optional<double>> beta_hat_series;
  LineFit geometric_fit;
  LineFit linear_fit;
  TrendClass classification = TrendClass::Indeterminate;
  std::optional<double> noise_bound_violation_rate;
};

ConvergenceSummary summarize(const GenerationTrace& trace);

/// Expected KL between the candidate and one exact-realizability application
/// of the meta-distillation operator to it. Zero iff the candidate is a
/// fixed point.
double fixed_point_residual(const OperatorConfig& config, const ConditionalModel& t0,
                            const ConditionalModel& candidate);

struct BasinReport {
  int n_inits = 0;
  int converged = 0;
  int failures = 0;  // runs that raised instead of finishing
  double fraction_converged = 0.0;
  double worst_final_divergence = 0.0;
  int worst_init_index = -1;
};

/// Replaces the template's initial student with n_inits Dirichlet draws, runs
/// each to the generation budget, and reports the fraction whose final D
/// lands under `threshold`.
BasinReport basin_probe(const Scenario& scenario_template, int n_inits, double threshold,
                        std::uint64_t seed);

struct StabilityReport {
  int n_trials = 0;
  double baseline_final_divergence = 0.0;
  double max_deviation = 0.0;
};

/// Jitters operator weights and the improvement tolerance by the given
/// relative scale and reports the largest change in final divergence.
StabilityReport stability_probe(const Scenario& scenario, double perturbation_scale,
                                int n_trials, std::uint64_t seed);

struct EnsembleVarianceReport {
  std::vector<double> individual_variance;  // per token, context-weighted
  std::vector<double> jackknife_variance;   // per token, delete-one weighted mean
  double mean_individual_variance = 0.0;
  double mean_jackknife_variance = 0.0;
  double mixture_variance = 0.0;  // the weighted mean itself is deterministic
  bool reduction_holds = false;
};

/// Treats the teacher index as weight-distributed and compares the spread of
/// individual teachers against the delete-one variability of their weighted
/// mean.
EnsembleVarianceReport ensemble_variance_report(const std::vector<ConditionalModel>& teachers,
                                                const std::vector<double>& weights);

}  // namespace metadistill
