#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace metadistill {

/// Deterministic splitmix64 stream. Used everywhere instead of <random>
/// engines so that traces and axiom reports are bit-identical for a given
/// seed regardless of standard-library implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1); never returns 0 or 1 exactly.
  double next_unit() {
    const std::uint64_t bits = next_u64() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Derive an independent child stream; mixing is order-sensitive so
  /// derive(s, a, b) != derive(s, b, a).
  static RngStream derive(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    RngStream mixer(base);
    std::uint64_t s = mixer.next_u64();
    s ^= 0x632BE59BD9B4E019ull + a;
    RngStream mixer2(s);
    s = mixer2.next_u64() ^ (0x9E3779B97F4A7C15ull * (b + 1));
    return RngStream(s);
  }

 private:
  std::uint64_t state_;
};

/// Symmetric Dirichlet(1) sample via normalized exponentials, with entries
/// floored by rejection at `floor` to preserve strict positivity.
inline std::vector<double> sample_simplex(RngStream& rng, std::size_t n,
                                          double floor = 1e-9) {
  std::vector<double> x(n);
  for (;;) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = -std::log(rng.next_unit());
      sum += x[i];
    }
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] /= sum;
      if (x[i] < floor) ok = false;
    }
    if (ok) return x;
  }
}

/// Random simplex-tangent direction with unit L1 norm (sums to zero).
inline std::vector<double> sample_tangent(RngStream& rng, std::size_t n) {
  std::vector<double> d(n);
  for (;;) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = rng.next_in(-1.0, 1.0);
      mean += d[i];
    }
    mean /= static_cast<double>(n);
    double l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] -= mean;
      l1 += std::abs(d[i]);
    }
    if (l1 < 1e-12) continue;  // degenerate draw
    for (std::size_t i = 0; i < n; ++i) d[i] /= l1;
    return d;
  }
}

}  // namespace metadistill
