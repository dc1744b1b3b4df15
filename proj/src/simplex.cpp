#include "metadistill/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace metadistill {

namespace {

double kahan_sum(const std::vector<double>& xs) {
  double sum = 0.0, carry = 0.0;
  for (double x : xs) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

void check_finite(const std::vector<double>& xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw_error(ErrorCode::NonFinite, "entry is NaN or infinite");
  }
}

void check_same_size(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) {
    throw_error(ErrorCode::DimensionMismatch,
                "vocabulary sizes differ: " + std::to_string(p.size()) + " vs " +
                    std::to_string(q.size()));
  }
}

}  // namespace

const char* divergence_kind_name(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::KL: return "kl";
    case DivergenceKind::ReverseKL: return "reverse_kl";
    case DivergenceKind::TotalVariation: return "total_variation";
    case DivergenceKind::JensenShannon: return "jensen_shannon";
    case DivergenceKind::ChiSquared: return "chi_squared";
    case DivergenceKind::HellingerSquared: return "hellinger_squared";
  }
  return "kl";
}

DivergenceKind divergence_kind_from_name(const std::string& name) {
  if (name == "kl") return DivergenceKind::KL;
  if (name == "reverse_kl") return DivergenceKind::ReverseKL;
  if (name == "total_variation") return DivergenceKind::TotalVariation;
  if (name == "jensen_shannon") return DivergenceKind::JensenShannon;
  if (name == "chi_squared") return DivergenceKind::ChiSquared;
  if (name == "hellinger_squared") return DivergenceKind::HellingerSquared;
  throw_error(ErrorCode::ValidationError, "unknown divergence kind '" + name + "'");
}

Distribution Distribution::from_probabilities(std::vector<double> probs) {
  if (probs.size() < 2) {
    throw_error(ErrorCode::LengthTooSmall, "need at least 2 entries, got " +
                                               std::to_string(probs.size()));
  }
  check_finite(probs);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) {
      throw_error(ErrorCode::ZeroEntry, "entry " + std::to_string(i) +
                                            " violates strict positivity");
    }
  }
  double sum = kahan_sum(probs);
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw_error(ErrorCode::ValidationError,
                "probabilities sum to " + std::to_string(sum) + ", not 1");
  }
  return Distribution(Trusted{}, std::move(probs));
}

Distribution Distribution::uniform(std::size_t n) {
  if (n < 2) throw_error(ErrorCode::LengthTooSmall, "need at least 2 entries");
  return Distribution(Trusted{}, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double Distribution::min_entry() const {
  return *std::min_element(probs_.begin(), probs_.end());
}

Distribution normalize(std::vector<double> raw) {
  if (raw.size() < 2) {
    throw_error(ErrorCode::LengthTooSmall,
                "need at least 2 entries, got " + std::to_string(raw.size()));
  }
  check_finite(raw);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] <= 0.0) {
      throw_error(ErrorCode::ZeroEntry, "entry " + std::to_string(i) +
                                            " violates strict positivity");
    }
  }
  double sum = kahan_sum(raw);
  for (double& x : raw) x /= sum;
  // One correction pass keeps the 1e-12 invariant even for large vocabularies.
  sum = kahan_sum(raw);
  if (sum != 1.0) {
    for (double& x : raw) x /= sum;
  }
  return Distribution(Distribution::Trusted{}, std::move(raw));
}

Distribution weighted_sum(const std::vector<double>& weights,
                          const std::vector<const Distribution*>& dists) {
  if (weights.size() != dists.size() || dists.empty()) {
    throw_error(ErrorCode::DimensionMismatch, "weights/distribution count mismatch");
  }
  const std::size_t vocab = dists[0]->size();
  for (const Distribution* d : dists) {
    if (d->size() != vocab) {
      throw_error(ErrorCode::DimensionMismatch, "vocabulary sizes differ inside mixture");
    }
  }
  // A unit weight short-circuits so "fully anchored" returns the input exactly.
  for (std::size_t m = 0; m < weights.size(); ++m) {
    if (weights[m] == 1.0) return *dists[m];
  }
  std::vector<double> out(vocab, 0.0);
  for (std::size_t m = 0; m < weights.size(); ++m) {
    if (weights[m] == 0.0) continue;
    const auto& p = dists[m]->probs();
    for (std::size_t i = 0; i < vocab; ++i) out[i] += weights[m] * p[i];
  }
  return normalize(std::move(out));
}

Distribution convex_combine(double lambda, const Distribution& p, const Distribution& q) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw_error(ErrorCode::LambdaOutOfRange,
                "lambda = " + std::to_string(lambda) + " not in [0, 1]");
  }
  check_same_size(p, q);
  return weighted_sum({lambda, 1.0 - lambda}, {&p, &q});
}

namespace {

double kl_nats(const Distribution& p, const Distribution& q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

}  // namespace

double divergence(DivergenceKind kind, const Distribution& p, const Distribution& q) {
  check_same_size(p, q);
  double value = 0.0;
  switch (kind) {
    case DivergenceKind::KL:
      value = kl_nats(p, q);
      break;
    case DivergenceKind::ReverseKL:
      value = kl_nats(q, p);
      break;
    case DivergenceKind::TotalVariation: {
      for (std::size_t i = 0; i < p.size(); ++i) value += std::abs(p[i] - q[i]);
      value *= 0.5;
      break;
    }
    case DivergenceKind::JensenShannon: {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        value += 0.5 * p[i] * std::log(p[i] / m) + 0.5 * q[i] * std::log(q[i] / m);
      }
      break;
    }
    case DivergenceKind::ChiSquared: {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - q[i];
        value += d * d / q[i];
      }
      break;
    }
    case DivergenceKind::HellingerSquared: {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        value += d * d;
      }
      value *= 0.5;
      break;
    }
  }
  // True f-divergences are non-negative; strip rounding noise near equality.
  return std::max(value, 0.0);
}

ConditionalModel ConditionalModel::from_contexts(std::vector<Context> contexts) {
  if (contexts.empty()) throw_error(ErrorCode::EmptyInputs, "model needs at least one context");
  const std::size_t vocab = contexts.front().dist.size();
  double wsum = 0.0;
  for (const auto& c : contexts) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw_error(ErrorCode::ValidationError, "context weights must be positive and finite");
    }
    if (c.dist.size() != vocab) {
      throw_error(ErrorCode::DimensionMismatch, "contexts have differing vocabulary sizes");
    }
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > kSumTolerance) {
    throw_error(ErrorCode::ValidationError,
                "context weights sum to " + std::to_string(wsum) + ", not 1");
  }
  return ConditionalModel(std::move(contexts));
}

ConditionalModel ConditionalModel::single(Distribution dist) {
  std::vector<Context> ctx;
  ctx.push_back(Context{1.0, std::move(dist)});
  return ConditionalModel(std::move(ctx));
}

ConditionalModel ConditionalModel::with_distributions(std::vector<Distribution> dists) const {
  if (dists.size() != contexts_.size()) {
    throw_error(ErrorCode::DimensionMismatch, "context count mismatch");
  }
  std::vector<Context> ctx;
  ctx.reserve(dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i) {
    if (dists[i].size() != vocab_size()) {
      throw_error(ErrorCode::DimensionMismatch, "vocabulary size mismatch");
    }
    ctx.push_back(Context{contexts_[i].weight, std::move(dists[i])});
  }
  return ConditionalModel(std::move(ctx));
}

bool ConditionalModel::same_shape(const ConditionalModel& other) const {
  if (context_count() != other.context_count()) return false;
  if (vocab_size() != other.vocab_size()) return false;
  for (std::size_t i = 0; i < contexts_.size(); ++i) {
    if (std::abs(contexts_[i].weight - other.contexts_[i].weight) > kSumTolerance) return false;
  }
  return true;
}

double expected_divergence(DivergenceKind kind, const ConditionalModel& teacher,
                           const ConditionalModel& model) {
  if (teacher.context_count() != model.context_count()) {
    throw_error(ErrorCode::DimensionMismatch, "context counts differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < teacher.context_count(); ++i) {
    const auto& tc = teacher.context(i);
    const auto& mc = model.context(i);
    if (std::abs(tc.weight - mc.weight) > kSumTolerance) {
      throw_error(ErrorCode::ContextWeightMismatch,
                  "context " + std::to_string(i) + " weights differ");
    }
    total += tc.weight * divergence(kind, tc.dist, mc.dist);
  }
  return total;
}

}  // namespace metadistill
