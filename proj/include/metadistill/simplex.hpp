#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metadistill/errors.hpp"

namespace metadistill {

inline constexpr double kSumTolerance = 1e-12;

enum class DivergenceKind {
  KL,
  ReverseKL,
  TotalVariation,
  JensenShannon,
  ChiSquared,
  HellingerSquared,
};

const char* divergence_kind_name(DivergenceKind kind);
DivergenceKind divergence_kind_from_name(const std::string& name);

/// Strictly positive categorical distribution over a finite vocabulary.
/// Entries sum to 1 within 1e-12; every entry is > 0. Immutable after
/// construction, so instances are safe to share across threads.
class Distribution {
 public:
  /// Validates length >= 2, finiteness, strict positivity, and sum == 1
  /// within 1e-12. Does not rescale.
  static Distribution from_probabilities(std::vector<double> probs);

  /// Uniform distribution over n >= 2 tokens.
  static Distribution uniform(std::size_t n);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }
  double min_entry() const;

  bool operator==(const Distribution& other) const { return probs_ == other.probs_; }

  friend Distribution normalize(std::vector<double> raw);
  friend Distribution weighted_sum(const std::vector<double>& weights,
                                   const std::vector<const Distribution*>& dists);

 private:
  struct Trusted {};
  Distribution(Trusted, std::vector<double> probs) : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

/// Rescales a raw non-negative vector onto the simplex. Zero (or negative)
/// entries are rejected rather than clamped: the positivity assumption is a
/// hard precondition of everything downstream.
Distribution normalize(std::vector<double> raw);

/// Exact weighted sum of distributions (weights >= 0, sum 1). If a single
/// weight is 1 the corresponding input is returned bit-for-bit; otherwise the
/// result is renormalized by its own sum so the 1e-12 invariant holds for any
/// vocabulary size.
Distribution weighted_sum(const std::vector<double>& weights,
                          const std::vector<const Distribution*>& dists);

/// Entrywise lambda*p + (1-lambda)*q.
Distribution convex_combine(double lambda, const Distribution& p, const Distribution& q);

/// Pointwise divergence kernel, in nats for the KL family. Non-negative,
/// zero iff p == q.
double divergence(DivergenceKind kind, const Distribution& p, const Distribution& q);

/// Weighted family of distributions indexed by context. Context weights are
/// positive and sum to 1 within 1e-12; all member distributions share the
/// same vocabulary size.
class ConditionalModel {
 public:
  struct Context {
    double weight;
    Distribution dist;
  };

  static ConditionalModel from_contexts(std::vector<Context> contexts);
  static ConditionalModel single(Distribution dist);

  std::size_t context_count() const { return contexts_.size(); }
  std::size_t vocab_size() const { return contexts_.front().dist.size(); }
  const Context& context(std::size_t i) const { return contexts_[i]; }
  const std::vector<Context>& contexts() const { return contexts_; }

  /// Replaces the distribution of every context, preserving weights.
  ConditionalModel with_distributions(std::vector<Distribution> dists) const;

  bool same_shape(const ConditionalModel& other) const;

 private:
  explicit ConditionalModel(std::vector<Context> contexts) : contexts_(std::move(contexts)) {}
  std::vector<Context> contexts_;
};

/// D(M) of the framework: context-weighted divergence between two models.
double expected_divergence(DivergenceKind kind, const ConditionalModel& teacher,
                           const ConditionalModel& model);

}  // namespace metadistill
