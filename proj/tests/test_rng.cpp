#include <doctest.h>

#include <cstdint>

#include "ergocert/rng.hpp"

using ergocert::Rng;

TEST_CASE("engine is the standard 64-bit Mersenne Twister") {
  // Published check value: the 10000th output for the default seed 5489.
  Rng rng(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.next();
  CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("first outputs for the default seed") {
  Rng rng(5489);
  CHECK(rng.next() == 14514284786278117030ULL);
  CHECK(rng.next() == 4620546740167642908ULL);
  CHECK(rng.next() == 13109570281517897720ULL);
}

TEST_CASE("derived draws follow the documented formulas") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t raw = a.next();
    const double u = b.uniform();
    CHECK(u == static_cast<double>(raw >> 11) * 0x1.0p-53);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng c(7), d(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    CHECK(d.below(13) == static_cast<std::size_t>(u * 13));
  }
}

TEST_CASE("same seed, same stream; different seed, different stream") {
  Rng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);
}
