#include "metadistill/operators.hpp"

#include <algorithm>
#include <cmath>

namespace metadistill {

namespace {

bool normalized_within(const std::vector<double>& w, double tol) {
  double sum = 0.0;
  for (double x : w) sum += x;
  return std::abs(sum - 1.0) <= tol;
}

}  // namespace

const char* operator_kind_name(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::ConvexMixture: return "convex_mixture";
    case OperatorKind::GeneralizedMixture: return "generalized_mixture";
    case OperatorKind::MProjection: return "m_projection";
    case OperatorKind::IProjection: return "i_projection";
  }
  return "convex_mixture";
}

OperatorKind operator_kind_from_name(const std::string& name) {
  if (name == "convex_mixture") return OperatorKind::ConvexMixture;
  if (name == "generalized_mixture") return OperatorKind::GeneralizedMixture;
  if (name == "m_projection") return OperatorKind::MProjection;
  if (name == "i_projection") return OperatorKind::IProjection;
  throw_error(ErrorCode::ValidationError, "unknown operator kind '" + name + "'");
}

GenerationWeightScheme GenerationWeightScheme::recency(int window) {
  GenerationWeightScheme s;
  s.kind = Kind::Recency;
  s.window = window;
  return s;
}

GenerationWeightScheme GenerationWeightScheme::exponential_decay(double rate) {
  GenerationWeightScheme s;
  s.kind = Kind::ExponentialDecay;
  s.decay_rate = rate;
  return s;
}

GenerationWeightScheme GenerationWeightScheme::explicit_weights_of(std::vector<double> weights) {
  GenerationWeightScheme s;
  s.kind = Kind::Explicit;
  s.explicit_weights = std::move(weights);
  return s;
}

void GenerationWeightScheme::validate() const {
  switch (kind) {
    case Kind::Explicit: {
      if (explicit_weights.empty()) {
        throw_error(ErrorCode::ValidationError, "explicit generation weights are empty");
      }
      for (double w : explicit_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw_error(ErrorCode::ValidationError, "generation weights must be non-negative");
        }
      }
      if (!normalized_within(explicit_weights, kSumTolerance)) {
        throw_error(ErrorCode::ValidationError, "generation weights must sum to 1");
      }
      break;
    }
    case Kind::ExponentialDecay:
      if (!(decay_rate > 0.0 && decay_rate <= 1.0)) {
        throw_error(ErrorCode::InvalidRate,
                    "decay rate " + std::to_string(decay_rate) + " not in (0, 1]");
      }
      break;
    case Kind::Recency:
      if (window < 1) {
        throw_error(ErrorCode::InvalidWindow, "recency window must be >= 1");
      }
      break;
  }
}

std::vector<double> generation_weights(const GenerationWeightScheme& scheme, int g) {
  if (g < 0) throw_error(ErrorCode::ValidationError, "generation index must be >= 0");
  scheme.validate();
  const std::size_t n = static_cast<std::size_t>(g) + 1;
  switch (scheme.kind) {
    case GenerationWeightScheme::Kind::Explicit: {
      if (scheme.explicit_weights.size() != n) {
        throw_error(ErrorCode::DimensionMismatch,
                    "explicit weights cover " + std::to_string(scheme.explicit_weights.size()) +
                        " generations, need " + std::to_string(n));
      }
      return scheme.explicit_weights;
    }
    case GenerationWeightScheme::Kind::ExponentialDecay: {
      std::vector<double> v(n);
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        v[j] = std::pow(scheme.decay_rate, static_cast<double>(n - 1 - j));
        sum += v[j];
      }
      for (double& x : v) x /= sum;
      return v;
    }
    case GenerationWeightScheme::Kind::Recency: {
      std::vector<double> v(n, 0.0);
      const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(scheme.window), n);
      for (std::size_t j = n - m; j < n; ++j) v[j] = 1.0 / static_cast<double>(m);
      return v;
    }
  }
  throw_error(ErrorCode::ValidationError, "unreachable scheme kind");
}

void OperatorConfig::validate() const {
  if (!std::isfinite(alpha)) throw_error(ErrorCode::AlphaOutOfRange, "alpha is not finite");
  if (alpha == 0.0) {
    if (!unanchored) {
      throw_error(ErrorCode::UnanchoredWithoutFlag,
                  "alpha = 0 requires the explicit unanchored flag");
    }
    if (kind != OperatorKind::GeneralizedMixture) {
      throw_error(ErrorCode::AlphaOutOfRange,
                  "alpha = 0 is only permitted for generalized_mixture drift scenarios");
    }
  } else if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw_error(ErrorCode::AlphaOutOfRange,
                "alpha = " + std::to_string(alpha) + " not in (0, 1]");
  }
  if (teacher_weights.empty()) {
    throw_error(ErrorCode::EmptyInputs, "teacher_weights is empty");
  }
  for (double w : teacher_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw_error(ErrorCode::ValidationError, "teacher weights must be positive");
    }
  }
  if (!normalized_within(teacher_weights, kSumTolerance)) {
    throw_error(ErrorCode::ValidationError, "teacher weights must sum to 1");
  }
  if (kind == OperatorKind::ConvexMixture && teacher_weights.size() != 1) {
    throw_error(ErrorCode::ValidationError,
                "convex_mixture uses a single base teacher; use generalized_mixture for ensembles");
  }
  generation_scheme.validate();
}

namespace {

/// Pooled (weight, distribution) list shared by the projection kinds:
/// teachers carry alpha*w_k, students (1-alpha)*v_j.
struct PooledInputs {
  std::vector<double> weights;
  std::vector<const Distribution*> dists;
};

PooledInputs pool_inputs(const OperatorConfig& config, double alpha_g,
                         const std::vector<Distribution>& teachers,
                         const std::vector<Distribution>& students) {
  PooledInputs pooled;
  const auto v = generation_weights(config.generation_scheme,
                                    static_cast<int>(students.size()) - 1);
  pooled.weights.reserve(teachers.size() + students.size());
  pooled.dists.reserve(teachers.size() + students.size());
  for (std::size_t k = 0; k < teachers.size(); ++k) {
    pooled.weights.push_back(alpha_g * config.teacher_weights[k]);
    pooled.dists.push_back(&teachers[k]);
  }
  for (std::size_t j = 0; j < students.size(); ++j) {
    pooled.weights.push_back((1.0 - alpha_g) * v[j]);
    pooled.dists.push_back(&students[j]);
  }
  return pooled;
}

/// Normalized weighted geometric mean, computed in log space so vocabularies
/// up to ~1e5 stay stable. Zero-weight members are dropped; a single
/// surviving member is returned bit-for-bit.
Distribution log_space_geometric_mean(const std::vector<double>& weights,
                                      const std::vector<const Distribution*>& dists) {
  std::vector<double> w;
  std::vector<const Distribution*> ds;
  for (std::size_t m = 0; m < weights.size(); ++m) {
    if (weights[m] > 0.0) {
      w.push_back(weights[m]);
      ds.push_back(dists[m]);
    }
  }
  if (ds.empty()) throw_error(ErrorCode::EmptyInputs, "all pooled weights are zero");
  if (ds.size() == 1) return *ds[0];
  const std::size_t vocab = ds[0]->size();
  std::vector<double> log_out(vocab, 0.0);
  for (std::size_t m = 0; m < ds.size(); ++m) {
    if (ds[m]->size() != vocab) {
      throw_error(ErrorCode::DimensionMismatch, "vocabulary sizes differ inside projection");
    }
    const auto& p = ds[m]->probs();
    for (std::size_t i = 0; i < vocab; ++i) log_out[i] += w[m] * std::log(p[i]);
  }
  const double shift = *std::max_element(log_out.begin(), log_out.end());
  std::vector<double> out(vocab);
  for (std::size_t i = 0; i < vocab; ++i) out[i] = std::exp(log_out[i] - shift);
  return normalize(std::move(out));
}

}  // namespace

Distribution build_meta_teacher(const OperatorConfig& config, double alpha_g,
                                const std::vector<Distribution>& base_teachers,
                                const std::vector<Distribution>& students) {
  config.validate();
  const bool drift_mode = config.unanchored && alpha_g == 0.0;
  if (!drift_mode && !(alpha_g > 0.0 && alpha_g <= 1.0)) {
    throw_error(ErrorCode::AlphaOutOfRange,
                "alpha_g = " + std::to_string(alpha_g) + " not in (0, 1]");
  }
  if (students.empty()) throw_error(ErrorCode::EmptyInputs, "no student distributions");
  if (base_teachers.empty() && !drift_mode) {
    throw_error(ErrorCode::EmptyInputs, "no base teacher distributions");
  }
  if (!drift_mode && base_teachers.size() != config.teacher_weights.size()) {
    throw_error(ErrorCode::DimensionMismatch,
                "got " + std::to_string(base_teachers.size()) + " teachers for " +
                    std::to_string(config.teacher_weights.size()) + " weights");
  }

  switch (config.kind) {
    case OperatorKind::ConvexMixture:
      return weighted_sum({alpha_g, 1.0 - alpha_g}, {&base_teachers[0], &students.back()});

    case OperatorKind::GeneralizedMixture: {
      const auto v = generation_weights(config.generation_scheme,
                                        static_cast<int>(students.size()) - 1);
      std::vector<double> weights;
      std::vector<const Distribution*> dists;
      if (!base_teachers.empty()) {
        for (std::size_t k = 0; k < base_teachers.size(); ++k) {
          weights.push_back(alpha_g * config.teacher_weights[k]);
          dists.push_back(&base_teachers[k]);
        }
      }
      for (std::size_t j = 0; j < students.size(); ++j) {
        weights.push_back((1.0 - alpha_g) * v[j]);
        dists.push_back(&students[j]);
      }
      return weighted_sum(weights, dists);
    }

    case OperatorKind::MProjection: {
      const auto pooled = pool_inputs(config, alpha_g, base_teachers, students);
      return weighted_sum(pooled.weights, pooled.dists);
    }

    case OperatorKind::IProjection: {
      const auto pooled = pool_inputs(config, alpha_g, base_teachers, students);
      return log_space_geometric_mean(pooled.weights, pooled.dists);
    }
  }
  throw_error(ErrorCode::ValidationError, "unreachable operator kind");
}

ScheduleConfig ScheduleConfig::constant() { return ScheduleConfig{}; }

ScheduleConfig ScheduleConfig::constant_of(double alpha) {
  ScheduleConfig s;
  s.constant_alpha = alpha;
  return s;
}

ScheduleConfig ScheduleConfig::linear(double from, double to, int over_generations) {
  ScheduleConfig s;
  s.kind = Kind::Linear;
  s.from = from;
  s.to = to;
  s.over_generations = over_generations;
  return s;
}

ScheduleConfig ScheduleConfig::adaptive(double increase_factor, double trigger_ratio) {
  ScheduleConfig s;
  s.kind = Kind::Adaptive;
  s.increase_factor = increase_factor;
  s.trigger_ratio = trigger_ratio;
  return s;
}

void ScheduleConfig::validate() const {
  switch (kind) {
    case Kind::Constant:
      if (constant_alpha && !(*constant_alpha > 0.0 && *constant_alpha <= 1.0)) {
        throw_error(ErrorCode::InvalidSchedule, "constant alpha not in (0, 1]");
      }
      break;
    case Kind::Linear:
      if (!(from > 0.0 && from <= 1.0 && to > 0.0 && to <= 1.0)) {
        throw_error(ErrorCode::InvalidSchedule, "linear schedule endpoints not in (0, 1]");
      }
      if (over_generations < 1) {
        throw_error(ErrorCode::InvalidSchedule, "linear schedule needs over_generations >= 1");
      }
      break;
    case Kind::Adaptive:
      if (!(increase_factor >= 1.0) || !std::isfinite(increase_factor)) {
        throw_error(ErrorCode::InvalidSchedule, "adaptive increase_factor must be >= 1");
      }
      if (!(trigger_ratio > 0.0) || !std::isfinite(trigger_ratio)) {
        throw_error(ErrorCode::InvalidSchedule, "adaptive trigger_ratio must be > 0");
      }
      break;
  }
}

double next_alpha(const ScheduleConfig& schedule, int g, double current_alpha,
                  std::optional<double> last_ratio) {
  if (g < 0) throw_error(ErrorCode::InvalidSchedule, "generation index must be >= 0");
  schedule.validate();
  switch (schedule.kind) {
    case ScheduleConfig::Kind::Constant:
      return schedule.constant_alpha.value_or(current_alpha);
    case ScheduleConfig::Kind::Linear: {
      const double t =
          std::min<double>(g, schedule.over_generations) / schedule.over_generations;
      const double alpha = schedule.from + (schedule.to - schedule.from) * t;
      const double lo = std::min(schedule.from, schedule.to);
      const double hi = std::max(schedule.from, schedule.to);
      return std::clamp(alpha, lo, hi);
    }
    case ScheduleConfig::Kind::Adaptive: {
      if (last_ratio && *last_ratio > schedule.trigger_ratio) {
        return std::min(1.0, current_alpha * schedule.increase_factor);
      }
      return current_alpha;
    }
  }
  throw_error(ErrorCode::InvalidSchedule, "unreachable schedule kind");
}

}  // namespace metadistill
