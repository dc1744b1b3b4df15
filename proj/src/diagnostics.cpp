#include "metadistill/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metadistill {

namespace {

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  LineFit fit;
  fit.points = static_cast<int>(xs.size());
  if (xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy <= 1e-30) {
    // Constant series: the flat line is a perfect fit.
    fit.slope = 0.0;
    fit.intercept = my;
    fit.r_squared = 1.0;
    return fit;
  }
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

}  // namespace

const char* trend_class_name(TrendClass c) {
  switch (c) {
    case TrendClass::GeometricDecay: return "geometric_decay";
    case TrendClass::LinearGrowth: return "linear_growth";
    case TrendClass::Plateau: return "plateau";
    case TrendClass::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

ConvergenceSummary summarize(const GenerationTrace& trace) {
  if (trace.generations() < 3) {
    throw_error(ErrorCode::TraceTooShort,
                "need >= 3 generations, got " + std::to_string(trace.generations()));
  }
  const double d0 = trace.baseline_divergence();
  if (!(d0 > 1e-14)) {
    throw_error(ErrorCode::DegenerateBaseline, "D(S_0) is numerically zero");
  }

  ConvergenceSummary summary;
  for (int g = 0; g < trace.generations(); ++g) {
    summary.beta_hat_series.push_back(trace.rows[static_cast<std::size_t>(g)].beta_hat);
  }

  std::vector<double> gs, ds, log_gs, log_ds;
  for (const auto& row : trace.rows) {
    gs.push_back(static_cast<double>(row.generation));
    ds.push_back(row.d_actual);
    if (row.d_actual > 1e-300) {
      log_gs.push_back(static_cast<double>(row.generation));
      log_ds.push_back(std::log(row.d_actual));
    }
  }
  summary.geometric_fit = least_squares(log_gs, log_ds);
  summary.linear_fit = least_squares(gs, ds);

  double max_relative_change = 0.0;
  for (double d : ds) max_relative_change = std::max(max_relative_change, std::abs(d - d0) / d0);

  int noisy_steps = 0, violations = 0;
  for (int g = 0; g < trace.generations(); ++g) {
    const auto& row = trace.rows[static_cast<std::size_t>(g)];
    if (!row.step_noise_kl) continue;
    ++noisy_steps;
    const double bound = (1.0 - row.alpha) * row.d_actual + *row.step_noise_kl + 1e-10;
    if (trace.rows[static_cast<std::size_t>(g) + 1].d_actual > bound) ++violations;
  }
  if (noisy_steps > 0) {
    summary.noise_bound_violation_rate =
        static_cast<double>(violations) / static_cast<double>(noisy_steps);
  }

  if (summary.geometric_fit.points >= 3 && summary.geometric_fit.r_squared >= 0.99 &&
      summary.geometric_fit.slope < -1e-3) {
    summary.classification = TrendClass::GeometricDecay;
  } else if (summary.linear_fit.r_squared >= 0.99 && summary.linear_fit.slope / d0 > 1e-3) {
    summary.classification = TrendClass::LinearGrowth;
  } else if (max_relative_change < 0.01) {
    summary.classification = TrendClass::Plateau;
  } else {
    summary.classification = TrendClass::Indeterminate;
  }
  return summary;
}

double fixed_point_residual(const OperatorConfig& config, const ConditionalModel& t0,
                            const ConditionalModel& candidate) {
  if (!t0.same_shape(candidate)) {
    throw_error(ErrorCode::DimensionMismatch, "t0 and candidate shapes differ");
  }
  double total = 0.0;
  for (std::size_t x = 0; x < t0.context_count(); ++x) {
    const Distribution q = build_meta_teacher(
        config, config.alpha, {t0.context(x).dist}, {candidate.context(x).dist});
    total += t0.context(x).weight * divergence(DivergenceKind::KL, candidate.context(x).dist, q);
  }
  return total;
}

BasinReport basin_probe(const Scenario& scenario_template, int n_inits, double threshold,
                        std::uint64_t seed) {
  if (n_inits < 1) throw_error(ErrorCode::ValidationError, "n_inits must be >= 1");
  scenario_template.validate();
  if (scenario_template.op.alpha <= 0.0 && !scenario_template.op.unanchored) {
    throw_error(ErrorCode::ValidationError, "basin probe requires an anchored operator");
  }

  BasinReport report;
  report.n_inits = n_inits;
  report.worst_final_divergence = -std::numeric_limits<double>::infinity();
  const std::size_t vocab = scenario_template.teacher.vocab_size();

  for (int i = 0; i < n_inits; ++i) {
    std::vector<Distribution> inits;
    inits.reserve(scenario_template.teacher.context_count());
    for (std::size_t x = 0; x < scenario_template.teacher.context_count(); ++x) {
      RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(x));
      inits.push_back(normalize(sample_simplex(rng, vocab)));
    }
    Scenario scenario = scenario_template;
    scenario.student0 = scenario_template.student0.with_distributions(std::move(inits));
    double final_d;
    try {
      final_d = run(scenario).final_divergence();
    } catch (const RunError&) {
      ++report.failures;
      continue;
    }
    if (final_d < threshold) ++report.converged;
    if (final_d > report.worst_final_divergence) {
      report.worst_final_divergence = final_d;
      report.worst_init_index = i;
    }
  }
  report.fraction_converged = static_cast<double>(report.converged) / n_inits;
  return report;
}

namespace {

double jitter(double value, double scale, RngStream& rng) {
  return value * (1.0 + scale * rng.next_in(-1.0, 1.0));
}

std::vector<double> jitter_normalized(const std::vector<double>& weights, double scale,
                                      RngStream& rng) {
  std::vector<double> out(weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = jitter(weights[i], scale, rng);
    sum += out[i];
  }
  for (double& w : out) w /= sum;
  return out;
}

}  // namespace

StabilityReport stability_probe(const Scenario& scenario, double perturbation_scale,
                                int n_trials, std::uint64_t seed) {
  if (n_trials < 1) throw_error(ErrorCode::ValidationError, "n_trials must be >= 1");
  if (!(perturbation_scale >= 0.0) || !std::isfinite(perturbation_scale)) {
    throw_error(ErrorCode::InvalidPerturbation, "perturbation scale must be >= 0");
  }
  scenario.validate();
  if (perturbation_scale >= 1.0 ||
      scenario.op.alpha * (1.0 - perturbation_scale) <= 0.0) {
    throw_error(ErrorCode::InvalidPerturbation,
                "perturbation scale can push alpha to 0");
  }

  StabilityReport report;
  report.n_trials = n_trials;
  report.baseline_final_divergence = run(scenario).final_divergence();

  for (int t = 0; t < n_trials; ++t) {
    RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(t));
    Scenario jittered = scenario;
    if (perturbation_scale == 0.0) {
      const double final_d = run(jittered).final_divergence();
      report.max_deviation = std::max(
          report.max_deviation, std::abs(final_d - report.baseline_final_divergence));
      continue;
    }
    jittered.op.alpha = std::min(1.0, jitter(scenario.op.alpha, perturbation_scale, rng));
    jittered.op.teacher_weights =
        jitter_normalized(scenario.op.teacher_weights, perturbation_scale, rng);
    if (jittered.op.generation_scheme.kind == GenerationWeightScheme::Kind::Explicit) {
      jittered.op.generation_scheme.explicit_weights = jitter_normalized(
          scenario.op.generation_scheme.explicit_weights, perturbation_scale, rng);
    }
    jittered.stop.improvement_tol = jitter(scenario.stop.improvement_tol, perturbation_scale, rng);
    const double final_d = run(jittered).final_divergence();
    report.max_deviation = std::max(
        report.max_deviation, std::abs(final_d - report.baseline_final_divergence));
  }
  return report;
}

EnsembleVarianceReport ensemble_variance_report(const std::vector<ConditionalModel>& teachers,
                                                const std::vector<double>& weights) {
  if (teachers.size() < 2) {
    throw_error(ErrorCode::TooFewTeachers, "need >= 2 teachers, got " +
                                               std::to_string(teachers.size()));
  }
  if (weights.size() != teachers.size()) {
    throw_error(ErrorCode::DimensionMismatch, "one weight per teacher required");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw_error(ErrorCode::ValidationError, "teacher weights must be positive");
    }
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > kSumTolerance) {
    throw_error(ErrorCode::ValidationError, "teacher weights must sum to 1");
  }
  for (const auto& t : teachers) {
    if (!teachers.front().same_shape(t)) {
      throw_error(ErrorCode::DimensionMismatch, "teacher shapes differ");
    }
  }

  const std::size_t vocab = teachers.front().vocab_size();
  const std::size_t n_ctx = teachers.front().context_count();
  EnsembleVarianceReport report;
  report.individual_variance.assign(vocab, 0.0);
  report.jackknife_variance.assign(vocab, 0.0);

  for (std::size_t x = 0; x < n_ctx; ++x) {
    const double ctx_w = teachers.front().context(x).weight;
    for (std::size_t i = 0; i < vocab; ++i) {
      double mean = 0.0;
      for (std::size_t k = 0; k < teachers.size(); ++k) {
        mean += weights[k] * teachers[k].context(x).dist[i];
      }
      double ind = 0.0, jack = 0.0;
      for (std::size_t k = 0; k < teachers.size(); ++k) {
        const double p = teachers[k].context(x).dist[i];
        const double dev = p - mean;
        ind += weights[k] * dev * dev;
        // Delete-one weighted mean: (mean - w_k p_k) / (1 - w_k).
        const double loo = (mean - weights[k] * p) / (1.0 - weights[k]);
        jack += (1.0 - weights[k]) * (loo - mean) * (loo - mean);
      }
      report.individual_variance[i] += ctx_w * ind;
      report.jackknife_variance[i] += ctx_w * jack;
    }
  }

  for (std::size_t i = 0; i < vocab; ++i) {
    report.mean_individual_variance += report.individual_variance[i];
    report.mean_jackknife_variance += report.jackknife_variance[i];
  }
  report.mean_individual_variance /= static_cast<double>(vocab);
  report.mean_jackknife_variance /= static_cast<double>(vocab);
  report.mixture_variance = 0.0;
  report.reduction_holds =
      report.mean_jackknife_variance <= report.mean_individual_variance + 1e-12;
  return report;
}

}  // namespace metadistill
