#include "metadistill/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metadistill {

namespace {

constexpr double kCalibrationTol = 1e-9;
constexpr int kCalibrationMaxIter = 200;

std::uint64_t mix_seeds(std::uint64_t a, std::uint64_t b) {
  return RngStream::derive(a, b).next_u64();
}

}  // namespace

const char* noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::ArithmeticDistractor: return "arithmetic_distractor";
    case NoiseKind::GeometricTilt: return "geometric_tilt";
    case NoiseKind::CalibratedDrift: return "calibrated_drift";
  }
  return "none";
}

NoiseKind noise_kind_from_name(const std::string& name) {
  if (name == "none") return NoiseKind::None;
  if (name == "arithmetic_distractor") return NoiseKind::ArithmeticDistractor;
  if (name == "geometric_tilt") return NoiseKind::GeometricTilt;
  if (name == "calibrated_drift") return NoiseKind::CalibratedDrift;
  throw_error(ErrorCode::ValidationError, "unknown noise kind '" + name + "'");
}

const char* stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::MaxGenerations: return "max_generations";
    case StopReason::DiminishedImprovement: return "diminished_improvement";
  }
  return "max_generations";
}

void NoiseModel::validate(std::size_t vocab_size) const {
  switch (kind) {
    case NoiseKind::None:
      break;
    case NoiseKind::ArithmeticDistractor:
      if (!(delta >= 0.0 && delta < 1.0)) {
        throw_error(ErrorCode::InvalidNoiseParam, "delta must be in [0, 1)");
      }
      break;
    case NoiseKind::GeometricTilt:
      if (!(target_kl >= 0.0) || !std::isfinite(target_kl)) {
        throw_error(ErrorCode::InvalidNoiseParam, "target_kl must be >= 0");
      }
      break;
    case NoiseKind::CalibratedDrift:
      if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw_error(ErrorCode::InvalidNoiseParam, "epsilon must be > 0");
      }
      break;
  }
  if (distractor && distractor->size() != vocab_size) {
    throw_error(ErrorCode::DimensionMismatch, "distractor vocabulary size mismatch");
  }
}

void StopCriteria::validate() const {
  if (!(improvement_tol >= 0.0) || !std::isfinite(improvement_tol)) {
    throw_error(ErrorCode::ValidationError, "improvement_tol must be >= 0");
  }
  if (max_generations < 1) {
    throw_error(ErrorCode::ValidationError, "stop.max_generations must be >= 1");
  }
}

void Scenario::validate() const {
  op.validate();
  schedule.validate();
  stop.validate();
  if (max_generations < 1) {
    throw_error(ErrorCode::ValidationError, "max_generations must be >= 1");
  }
  if (!teacher.same_shape(student0)) {
    throw_error(ErrorCode::DimensionMismatch,
                "teacher and student0 context structures differ");
  }
  for (const auto& extra : extra_teachers) {
    if (!teacher.same_shape(extra)) {
      throw_error(ErrorCode::DimensionMismatch,
                  "extra teacher context structure differs from T0");
    }
  }
  if (op.teacher_weights.size() != extra_teachers.size() + 1) {
    throw_error(ErrorCode::DimensionMismatch,
                "teacher_weights covers " + std::to_string(op.teacher_weights.size()) +
                    " teachers, scenario provides " +
                    std::to_string(extra_teachers.size() + 1));
  }
  noise.validate(teacher.vocab_size());
}

double calibrate_tilt(const std::function<double(double)>& objective, double target) {
  const double f0 = objective(0.0);
  const double f1 = objective(1.0);
  if (target < f0 - kCalibrationTol || target > f1 + kCalibrationTol) {
    throw_error(ErrorCode::CalibrationFailed,
                "target " + std::to_string(target) + " outside objective range [" +
                    std::to_string(f0) + ", " + std::to_string(f1) + "]");
  }
  if (std::abs(f0 - target) <= kCalibrationTol) return 0.0;
  if (std::abs(f1 - target) <= kCalibrationTol) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < kCalibrationMaxIter; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = objective(mid);
    if (std::abs(fm - target) <= kCalibrationTol) return mid;
    if (fm < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw_error(ErrorCode::CalibrationFailed, "bisection did not converge in 200 iterations");
}

Distribution geometric_tilt(const Distribution& q, const Distribution& u, double eta) {
  if (q.size() != u.size()) {
    throw_error(ErrorCode::DimensionMismatch, "tilt direction vocabulary mismatch");
  }
  if (eta == 0.0) return q;
  if (eta == 1.0) return u;
  std::vector<double> log_out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    log_out[i] = (1.0 - eta) * std::log(q[i]) + eta * std::log(u[i]);
  }
  const double shift = *std::max_element(log_out.begin(), log_out.end());
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = std::exp(log_out[i] - shift);
  return normalize(std::move(out));
}

Distribution apply_noise(const Distribution& q, const NoiseModel& noise, RngStream& rng,
                         const Distribution* anchor) {
  noise.validate(q.size());
  switch (noise.kind) {
    case NoiseKind::None:
      return q;

    case NoiseKind::ArithmeticDistractor: {
      const Distribution u =
          noise.distractor ? *noise.distractor : normalize(sample_simplex(rng, q.size()));
      return weighted_sum({1.0 - noise.delta, noise.delta}, {&q, &u});
    }

    case NoiseKind::GeometricTilt: {
      const Distribution u =
          noise.distractor ? *noise.distractor : normalize(sample_simplex(rng, q.size()));
      const auto objective = [&](double eta) {
        return divergence(DivergenceKind::KL, q, geometric_tilt(q, u, eta));
      };
      const double eta = calibrate_tilt(objective, noise.target_kl);
      return geometric_tilt(q, u, eta);
    }

    case NoiseKind::CalibratedDrift: {
      if (anchor == nullptr) {
        throw_error(ErrorCode::InvalidNoiseParam,
                    "calibrated drift needs the base-teacher distribution");
      }
      const Distribution u =
          noise.distractor ? *noise.distractor : normalize(sample_simplex(rng, q.size()));
      const double current = divergence(DivergenceKind::KL, *anchor, q);
      const auto objective = [&](double eta) {
        return divergence(DivergenceKind::KL, *anchor, geometric_tilt(q, u, eta));
      };
      const double eta = calibrate_tilt(objective, current + noise.epsilon);
      return geometric_tilt(q, u, eta);
    }
  }
  throw_error(ErrorCode::InvalidNoiseParam, "unreachable noise kind");
}

StepResult step(const Scenario& scenario, const std::vector<ConditionalModel>& students,
                double alpha_g, int g) {
  if (students.empty()) throw_error(ErrorCode::EmptyInputs, "no student history");
  const std::size_t n_ctx = scenario.teacher.context_count();
  const std::uint64_t noise_base = mix_seeds(scenario.seed, scenario.noise.seed);

  std::vector<Distribution> metas;
  std::vector<Distribution> nexts;
  metas.reserve(n_ctx);
  nexts.reserve(n_ctx);
  double noise_kl = 0.0;

  for (std::size_t x = 0; x < n_ctx; ++x) {
    std::vector<Distribution> teachers_x;
    teachers_x.reserve(1 + scenario.extra_teachers.size());
    teachers_x.push_back(scenario.teacher.context(x).dist);
    for (const auto& extra : scenario.extra_teachers) {
      teachers_x.push_back(extra.context(x).dist);
    }
    std::vector<Distribution> students_x;
    students_x.reserve(students.size());
    for (const auto& s : students) students_x.push_back(s.context(x).dist);

    Distribution q = build_meta_teacher(scenario.op, alpha_g, teachers_x, students_x);
    RngStream rng = RngStream::derive(noise_base, static_cast<std::uint64_t>(g) + 1,
                                      static_cast<std::uint64_t>(x) + 1);
    Distribution s_next =
        apply_noise(q, scenario.noise, rng, &scenario.teacher.context(x).dist);
    noise_kl += scenario.teacher.context(x).weight *
                divergence(DivergenceKind::KL, q, s_next);
    metas.push_back(std::move(q));
    nexts.push_back(std::move(s_next));
  }

  return StepResult{scenario.teacher.with_distributions(std::move(metas)),
                    scenario.teacher.with_distributions(std::move(nexts)), noise_kl};
}

StopDecision should_stop(const GenerationTrace& trace, const StopCriteria& criteria) {
  criteria.validate();
  if (trace.rows.empty()) {
    throw_error(ErrorCode::TraceTooShort, "trace has no baseline row");
  }
  const int generations = trace.generations();
  if (generations >= 1) {
    const double improvement = std::abs(trace.rows[generations].d_actual -
                                        trace.rows[generations - 1].d_actual);
    if (improvement < criteria.improvement_tol) {
      return StopDecision{true, StopReason::DiminishedImprovement};
    }
  }
  if (generations >= criteria.max_generations) {
    return StopDecision{true, StopReason::MaxGenerations};
  }
  return StopDecision{};
}

GenerationTrace run(const Scenario& scenario) {
  scenario.validate();
  const DivergenceKind dk = scenario.divergence;

  GenerationTrace trace;
  trace.divergence = dk;
  trace.seed = scenario.seed;
  trace.label = scenario.label;

  StopCriteria effective = scenario.stop;
  effective.max_generations = std::min(effective.max_generations, scenario.max_generations);

  std::vector<ConditionalModel> students{scenario.student0};
  const double d0 = expected_divergence(dk, scenario.teacher, scenario.student0);
  trace.rows.push_back(StepRecord{0, 0.0, d0, d0, std::nullopt, std::nullopt,
                                  std::nullopt, std::nullopt});

  double current_alpha = scenario.op.alpha;
  double alpha_min = 1.0;
  bool any_step = false;
  double d_prev = d0;
  std::optional<double> last_ratio;

  for (int g = 0;; ++g) {
    const StopDecision decision = should_stop(trace, effective);
    if (decision.stop) {
      trace.stop_reason = decision.reason;
      // The final row never drove a step; record the alpha the schedule
      // would emit next so the column is total.
      trace.rows.back().alpha = next_alpha(scenario.schedule, g, current_alpha, last_ratio);
      break;
    }

    const double alpha_g = next_alpha(scenario.schedule, g, current_alpha, last_ratio);
    current_alpha = alpha_g;
    trace.rows[static_cast<std::size_t>(g)].alpha = alpha_g;

    std::optional<StepResult> result;
    try {
      result = step(scenario, students, alpha_g, g);
    } catch (const Error& e) {
      throw RunError(e.code(),
                     std::string(e.what()) + " (generation " + std::to_string(g) + ")",
                     trace, g);
    }

    const double d_next = expected_divergence(dk, scenario.teacher, result->next_student);
    auto& row = trace.rows[static_cast<std::size_t>(g)];
    row.beta_hat = d_prev < 1e-14 ? std::optional<double>{} : std::optional<double>{d_next / d_prev};
    row.step_noise_kl = result->noise_kl;
    row.meta_teacher = std::move(result->meta_teacher);
    row.next_student = std::move(result->next_student);

    alpha_min = any_step ? std::min(alpha_min, alpha_g) : alpha_g;
    any_step = true;
    const double bound = d0 * std::pow(1.0 - alpha_min, g + 1);
    trace.rows.push_back(StepRecord{g + 1, 0.0, d_next, bound, std::nullopt, std::nullopt,
                                    std::nullopt, std::nullopt});

    students.push_back(*trace.rows[static_cast<std::size_t>(g)].next_student);
    last_ratio = row.beta_hat;
    d_prev = d_next;
  }

  return trace;
}

}  // namespace metadistill
