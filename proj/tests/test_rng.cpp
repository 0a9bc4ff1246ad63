#include <catch_amalgamated.hpp>

#include <cmath>

#include "microxi/rng.hpp"

using microxi::Philox4x32;
using microxi::SeededStream;

TEST_CASE("philox known-answer vectors", "[rng]") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::encrypt(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::encrypt(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::encrypt(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams replay bit for bit", "[rng]") {
  SeededStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto u = a.next_u64();
    CHECK(u == b.next_u64());
    differs = differs || (u != c.next_u64());
  }
  CHECK(differs);
  auto s1 = a.substream(3);
  auto s2 = b.substream(3);
  CHECK(s1.uniform() == s2.uniform());
}

TEST_CASE("uniform stays in (0, 1]", "[rng]") {
  SeededStream s(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
  }
}

TEST_CASE("complex gaussian moments", "[rng]") {
  SeededStream s(2024, 0);
  const int n = 1000000;
  double mr = 0, mi = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const auto g = microxi::complex_gaussian(s);
    mr += g.real();
    mi += g.imag();
    m2 += std::norm(g);
  }
  mr /= n;
  mi /= n;
  m2 /= n;
  CHECK(std::abs(mr) < 4.0 / std::sqrt(n));
  CHECK(std::abs(mi) < 4.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 0.01);
}

TEST_CASE("distinct stream indices are uncorrelated", "[rng]") {
  SeededStream a(99, 0), b(99, 1);
  const int n = 10000;
  std::complex<double> cross = 0;
  double na = 0, nb = 0;
  for (int i = 0; i < n; ++i) {
    const auto x = microxi::complex_gaussian(a);
    const auto y = microxi::complex_gaussian(b);
    cross += x * std::conj(y);
    na += std::norm(x);
    nb += std::norm(y);
  }
  CHECK(std::abs(cross) / std::sqrt(na * nb) < 0.05);
}

TEST_CASE("uniform sphere", "[rng]") {
  SeededStream s(5, 0);
  SECTION("dim 1 has unit modulus") {
    for (int i = 0; i < 100; ++i) CHECK(std::abs(std::abs(microxi::uniform_sphere(s, 1)[0]) - 1.0) < 1e-15);
  }
  SECTION("norm and coordinate second moment") {
    const int reps = 100000;
    double sum = 0, sum2 = 0;
    std::complex<double> phase_mean = 0;
    for (int i = 0; i < reps; ++i) {
      const auto x = microxi::uniform_sphere(s, 8);
      double norm2 = 0;
      for (const auto& v : x) norm2 += std::norm(v);
      REQUIRE(std::abs(std::sqrt(norm2) - 1.0) < 1e-14);
      const double p = std::norm(x[0]);
      sum += p;
      sum2 += p * p;
      phase_mean += x[0] * x[0];
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
    CHECK(std::abs(mean - 0.125) < 3 * se);
    // rotation invariance: E x_1^2 vanishes
    CHECK(std::abs(phase_mean / double(reps)) < 4.0 * std::sqrt(sum2 / reps / reps));
  }
  SECTION("dim 0 is rejected") { CHECK_THROWS_AS(microxi::uniform_sphere(s, 0), microxi::Error); }
}
