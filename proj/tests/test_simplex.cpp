#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "metadistill/rng.hpp"
#include "metadistill/simplex.hpp"

using namespace metadistill;

namespace {

const std::vector<DivergenceKind> kAllKinds = {
    DivergenceKind::KL,           DivergenceKind::ReverseKL,
    DivergenceKind::TotalVariation, DivergenceKind::JensenShannon,
    DivergenceKind::ChiSquared,   DivergenceKind::HellingerSquared};

Distribution random_dist(RngStream& rng, std::size_t n) {
  return normalize(sample_simplex(rng, n));
}

}  // namespace

TEST_CASE("normalize rescales and preserves symmetry") {
  const Distribution d = normalize({3.0, 3.0, 3.0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(d[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("normalize keeps an already normalized vector") {
  const Distribution d = normalize({0.6, 0.3, 0.1});
  CHECK(std::abs(d[0] - 0.6) <= 1e-15);
  CHECK(std::abs(d[1] - 0.3) <= 1e-15);
  CHECK(std::abs(d[2] - 0.1) <= 1e-15);
}

TEST_CASE("normalize rejects zero entries") {
  CHECK_THROWS_WITH_AS(normalize({1.0, 0.0, 1.0}), doctest::Contains("positivity"), Error);
  try {
    normalize({1.0, 0.0, 1.0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroEntry);
  }
}

TEST_CASE("normalize rejects bad input") {
  try {
    normalize({1.0});
    FAIL("expected LengthTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthTooSmall);
  }
  try {
    normalize({1.0, std::nan("")});
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
  try {
    normalize({1.0, -0.5, 0.5});
    FAIL("expected ZeroEntry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroEntry);
  }
}

TEST_CASE("from_probabilities enforces the sum invariant") {
  CHECK_NOTHROW(Distribution::from_probabilities({0.6, 0.3, 0.1}));
  try {
    Distribution::from_probabilities({0.6, 0.3, 0.2});
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
  }
}

TEST_CASE("kl divergence frozen values") {
  const Distribution p = Distribution::from_probabilities({0.5, 0.5});
  CHECK(divergence(DivergenceKind::KL, p, p) == 0.0);

  const Distribution t0 = Distribution::from_probabilities({0.6, 0.3, 0.1});
  const Distribution s0 = Distribution::from_probabilities({0.2, 0.5, 0.3});
  CHECK(divergence(DivergenceKind::KL, t0, s0) ==
        doctest::Approx(0.3960584572042576).epsilon(1e-12));
  CHECK(std::abs(divergence(DivergenceKind::KL, t0, s0) - 0.396058) <= 1e-6);
  CHECK(std::abs(divergence(DivergenceKind::TotalVariation, t0, s0) - 0.4) <= 1e-12);
}

TEST_CASE("divergence dimension mismatch") {
  const Distribution p = Distribution::from_probabilities({0.5, 0.5});
  const Distribution q = Distribution::from_probabilities({0.2, 0.5, 0.3});
  try {
    divergence(DivergenceKind::KL, p, q);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("divergence properties on random simplex pairs") {
  RngStream rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = trial % 3 == 0 ? 2 : (trial % 3 == 1 ? 3 : 10);
    const Distribution p = random_dist(rng, n);
    const Distribution q = random_dist(rng, n);
    double linf = 0.0;
    for (std::size_t i = 0; i < n; ++i) linf = std::max(linf, std::abs(p[i] - q[i]));
    for (DivergenceKind kind : kAllKinds) {
      const double d = divergence(kind, p, q);
      REQUIRE(d >= 0.0);
      REQUIRE(divergence(kind, p, p) <= 1e-15);
      if (linf > 1e-6) REQUIRE(d > 0.0);  // zero only at equality
    }
  }
}

TEST_CASE("convexity in the second argument, all kinds") {
  RngStream rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = trial % 2 == 0 ? 3 : 5;
    const Distribution p = random_dist(rng, n);
    const Distribution q1 = random_dist(rng, n);
    const Distribution q2 = random_dist(rng, n);
    const double lam = rng.next_unit();
    const Distribution mix = convex_combine(lam, q1, q2);
    for (DivergenceKind kind : kAllKinds) {
      const double lhs = divergence(kind, p, mix);
      const double rhs =
          lam * divergence(kind, p, q1) + (1.0 - lam) * divergence(kind, p, q2);
      REQUIRE(lhs <= rhs + 1e-10);
    }
  }
}

TEST_CASE("mixture contraction kernel, all kinds") {
  RngStream rng(402);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = trial % 2 == 0 ? 3 : 10;
    const Distribution p = random_dist(rng, n);
    const Distribution q = random_dist(rng, n);
    const double alpha = rng.next_unit();
    const Distribution mix = convex_combine(alpha, p, q);
    for (DivergenceKind kind : kAllKinds) {
      REQUIRE(divergence(kind, p, mix) <=
              (1.0 - alpha) * divergence(kind, p, q) + 1e-10);
    }
  }
}

TEST_CASE("convex_combine frozen values") {
  const Distribution p = Distribution::from_probabilities({0.6, 0.3, 0.1});
  const Distribution q = Distribution::from_probabilities({0.2, 0.5, 0.3});

  const Distribution full = convex_combine(1.0, p, q);
  CHECK(full.probs() == p.probs());  // bit-for-bit

  const Distribution mixed = convex_combine(0.3, p, q);
  CHECK(std::abs(mixed[0] - 0.32) <= 1e-12);
  CHECK(std::abs(mixed[1] - 0.44) <= 1e-12);
  CHECK(std::abs(mixed[2] - 0.24) <= 1e-12);

  const Distribution half = convex_combine(0.5, p, p);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(half[i] - p[i]) <= 1e-15);

  try {
    convex_combine(1.5, p, q);
    FAIL("expected LambdaOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LambdaOutOfRange);
  }
  try {
    convex_combine(0.5, p, Distribution::from_probabilities({0.5, 0.5}));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("normalize and convex_combine outputs satisfy the invariants") {
  RngStream rng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 9;
    const Distribution a = random_dist(rng, n);
    const Distribution b = random_dist(rng, n);
    const Distribution c = convex_combine(rng.next_unit(), a, b);
    double sum = 0.0;
    for (double x : c.probs()) {
      REQUIRE(x > 0.0);
      sum += x;
    }
    REQUIRE(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("expected_divergence over contexts") {
  const Distribution t0 = Distribution::from_probabilities({0.6, 0.3, 0.1});
  const Distribution s0 = Distribution::from_probabilities({0.2, 0.5, 0.3});

  const auto teacher = ConditionalModel::single(t0);
  CHECK(expected_divergence(DivergenceKind::KL, teacher, teacher) == 0.0);
  CHECK(expected_divergence(DivergenceKind::KL, teacher, ConditionalModel::single(s0)) ==
        doctest::Approx(0.3960584572042576).epsilon(1e-12));

  // Two equally weighted contexts average the per-context divergences.
  const Distribution u = Distribution::uniform(3);
  const auto two_teacher = ConditionalModel::from_contexts(
      {{0.5, t0}, {0.5, u}});
  const auto two_model = ConditionalModel::from_contexts(
      {{0.5, s0}, {0.5, s0}});
  const double a = divergence(DivergenceKind::KL, t0, s0);
  const double b = divergence(DivergenceKind::KL, u, s0);
  CHECK(expected_divergence(DivergenceKind::KL, two_teacher, two_model) ==
        doctest::Approx((a + b) / 2.0).epsilon(1e-15));

  const auto mismatched = ConditionalModel::from_contexts(
      {{0.25, s0}, {0.75, s0}});
  try {
    expected_divergence(DivergenceKind::KL, two_teacher, mismatched);
    FAIL("expected ContextWeightMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ContextWeightMismatch);
  }
  try {
    expected_divergence(DivergenceKind::KL, teacher, two_model);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("conditional model validation") {
  const Distribution d2 = Distribution::from_probabilities({0.5, 0.5});
  const Distribution d3 = Distribution::from_probabilities({0.2, 0.5, 0.3});
  CHECK_THROWS_AS(ConditionalModel::from_contexts({{0.5, d2}, {0.5, d3}}), Error);
  CHECK_THROWS_AS(ConditionalModel::from_contexts({{0.7, d2}, {0.7, d2}}), Error);
}
