#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ergocert {

/// Seeded generator used for every random model family.
///
/// The engine is std::mt19937_64 (the 64-bit Mersenne Twister, seeded with
/// its standard single-value seeding). Doubles are drawn as
/// (next() >> 11) * 2^-53 and integers below n as floor(uniform() * n), so
/// the stream is reproducible across standard libraries and languages.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform on {0, ..., n - 1}; n must be positive.
  std::size_t below(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ergocert
