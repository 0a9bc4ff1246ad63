#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "microxi/isometry.hpp"
#include "microxi/spectrum.hpp"

using namespace microxi;

namespace {
ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}
}  // namespace

TEST_CASE("eigenangles of small matrices", "[spectrum]") {
  UnitaryMatrix d = UnitaryMatrix::Zero(2, 2);
  d(0, 0) = cplx(0, 1);
  d(1, 1) = -1.0;
  const auto s = eigenangles(d);
  REQUIRE(s.n() == 2);
  CHECK(std::abs(s.angles()[0] - std::numbers::pi / 2) < 1e-14);
  CHECK(std::abs(s.angles()[1] - std::numbers::pi) < 1e-14);

  UnitaryMatrix one(1, 1);
  one(0, 0) = std::polar(1.0, 4.0);
  CHECK(std::abs(eigenangles(one).angles()[0] - 4.0) < 1e-14);
}

TEST_CASE("rejections", "[spectrum]") {
  UnitaryMatrix a = UnitaryMatrix::Identity(2, 2);
  a(1, 1) = cplx(0, 1);
  CHECK(kind_of([&] { eigenangles(a); }) == ErrorKind::AngleCollision);
  UnitaryMatrix b = UnitaryMatrix::Zero(2, 2);
  b(0, 0) = b(1, 1) = cplx(0, 1);
  CHECK(kind_of([&] { eigenangles(b); }) == ErrorKind::AngleCollision);
  UnitaryMatrix c = UnitaryMatrix::Zero(2, 2);
  c(0, 0) = 2.0;
  c(1, 1) = cplx(0, 1);
  CHECK(kind_of([&] { eigenangles(c); }) == ErrorKind::EigensolverFailure);
}

TEST_CASE("indexing and counting", "[spectrum]") {
  VirtualIsometryChain chain(19, 0);
  chain.extend_to(64);
  const auto u = chain.matrix(64);
  const auto s = eigenangles(u);
  const long long n = 64;
  CHECK(s.tolerance() < 1e-8);
  for (std::size_t i = 1; i < s.n(); ++i) CHECK(s.angles()[i] > s.angles()[i - 1]);

  double sum = 0;
  for (double t : s.angles()) sum += t;
  const double det_arg = std::arg(u.determinant());
  const double diff = std::remainder(sum - det_arg, kTwoPi);
  CHECK(std::abs(diff) < 1e-8);

  CHECK(s.y(1) > 0);
  CHECK(s.y(0) < 0);
  for (long long k : {-200LL, -65LL, -1LL, 0LL, 1LL, 5LL, 63LL, 64LL, 130LL})
    CHECK(std::abs(s.y(k + n) - s.y(k) - double(n)) < 1e-11);
  CHECK(std::abs(s.y(1) - 64.0 * s.angles()[0] / kTwoPi) < 1e-13);

  CHECK(s.counting(0.5 * s.y(1)) == 0);
  CHECK(s.counting(64.0) == 64);
  CHECK(s.counting(0.5 * (s.y(3) + s.y(4))) == 3);
  CHECK(s.counting(0.5 * (s.y(-2) + s.y(-1))) == -2);
  CHECK(s.counting(0.5 * (s.y(0) + s.y(1))) == 0);
  CHECK(s.counting(128.0 + 0.5 * (s.y(3) + s.y(4))) == 131);
  CHECK(kind_of([&] { s.counting(s.y(5)); }) == ErrorKind::BoundaryHit);
}

TEST_CASE("rotation covariance", "[spectrum]") {
  VirtualIsometryChain chain(23, 0);
  chain.extend_to(32);
  const auto u = chain.matrix(32);
  const double phi = 0.37;
  const auto a = eigenangles(u);
  const auto b = eigenangles(u * std::polar(1.0, phi));
  std::vector<double> shifted;
  for (double t : a.angles()) shifted.push_back(std::fmod(t + phi, kTwoPi));
  std::sort(shifted.begin(), shifted.end());
  for (std::size_t i = 0; i < shifted.size(); ++i) CHECK(std::abs(shifted[i] - b.angles()[i]) < 1e-10);
}

TEST_CASE("csv round trip", "[spectrum]") {
  VirtualIsometryChain chain(29, 0);
  chain.extend_to(10);
  const auto s = eigenangles(chain.matrix(10));
  std::stringstream io;
  s.write_csv(io, 29);
  const auto t = Spectrum::read_csv(io);
  CHECK(t.angles() == s.angles());
  std::stringstream bad("angle\n1.0\n");
  CHECK_THROWS_AS(Spectrum::read_csv(bad), Error);
}

TEST_CASE("mean count equals interval length", "[spectrum][statistical]") {
  const int reps = 2000;
  const double a = -3.2, b = 4.9;
  double sum = 0, sum2 = 0;
  for (int r = 0; r < reps; ++r) {
    VirtualIsometryChain chain(31, r);
    chain.extend_to(24);
    const auto s = eigenangles(chain.matrix(24));
    const double c = double(s.counting(b) - s.counting(a));
    sum += c;
    sum2 += c * c;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - (b - a)) < 4 * se);
}
