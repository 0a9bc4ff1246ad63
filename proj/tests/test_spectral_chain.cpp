#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "microxi/isometry.hpp"
#include "microxi/spectral_chain.hpp"
#include "microxi/spectrum.hpp"

using namespace microxi;

TEST_CASE("secular update reproduces dense eigenangles", "[spectral_chain]") {
  VirtualIsometryChain chain(101, 3);
  chain.extend();
  double worst = 0.0;
  for (std::size_t n = 1; n < 48; ++n) {
    const UnitaryMatrix u = chain.matrix(n);
    Eigen::ComplexEigenSolver<UnitaryMatrix> es(u);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto angle = [&](std::size_t i) {
      double a = std::arg(es.eigenvalues()(i));
      return a < 0 ? a + kTwoPi : a;
    };
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return angle(a) < angle(b); });
    std::vector<double> poles;
    for (auto i : order) poles.push_back(angle(i));

    chain.extend();
    const auto& x = chain.sphere_vectors()[n];
    Eigen::VectorXcd head(n);
    for (std::size_t i = 0; i < n; ++i) head(i) = x[i];
    std::vector<double> w(n + 1);
    w[0] = std::norm(1.0 - x[n]);
    for (std::size_t k = 0; k < n; ++k) {
      const auto v = es.eigenvectors().col(order[k]).normalized();
      w[k + 1] = std::norm(v.dot(head));
    }
    const auto roots = secular_update(poles, w, 2.0 * x[n].imag());
    const auto dense = eigenangles(chain.matrix(n + 1));
    REQUIRE(roots.size() == n + 1);
    for (std::size_t k = 0; k <= n; ++k) worst = std::max(worst, std::abs(roots[k] - dense.angles()[k]));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("new angles interlace the old ones", "[spectral_chain]") {
  SpectralChain c(7, 0);
  c.extend_to(200);
  auto before = c.angles();
  c.extend();
  const auto& after = c.angles();
  REQUIRE(after.size() == before.size() + 1);
  CHECK(after[0] > 0.0);
  CHECK(after[0] < before[0]);
  for (std::size_t k = 0; k < before.size(); ++k) {
    CHECK(after[k + 1] > before[k]);
    if (k + 1 < before.size()) CHECK(after[k + 1] < before[k + 1]);
  }
  CHECK(after.back() < kTwoPi);
}

namespace {
double trace_power_sq(const std::vector<double>& angles, int j) {
  cplx t = 0.0;
  for (double a : angles) t += std::polar(1.0, j * a);
  return std::norm(t);
}
}  // namespace

TEST_CASE("spectral chain has Haar trace moments", "[spectral_chain][statistical]") {
  const int reps = 3000, n = 40;
  for (int j : {1, 3, 55}) {
    double sum = 0, sum2 = 0;
    for (int r = 0; r < reps; ++r) {
      SpectralChain c(900 + j, r);
      c.extend_to(n);
      const double v = trace_power_sq(c.angles(), j);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
    INFO("j=" << j << " mean=" << mean);
    CHECK(std::abs(mean - std::min(j, n)) < 4 * se);
  }
}

TEST_CASE("Verblunsky spectra", "[spectral_chain]") {
  SeededStream s(55, 0);
  const std::size_t n = 37;
  const auto alpha = cue_verblunsky(n, s);
  for (std::size_t k = 0; k + 1 < n; ++k) CHECK(std::abs(alpha[k]) < 1.0);
  CHECK(std::abs(std::abs(alpha.back()) - 1.0) < 1e-15);
  const auto roots = prufer_roots(alpha, 0.0, kTwoPi);
  REQUIRE(roots.size() == n);
  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double next = k + 1 < n ? roots[k + 1] : roots[0] + kTwoPi;
    scale = std::max(scale, std::abs(szego_phi(alpha, std::polar(1.0, 0.5 * (roots[k] + next)))));
  }
  for (double t : roots) CHECK(std::abs(szego_phi(alpha, std::polar(1.0, t))) < 1e-11 * scale);
  // Phi_n is the monic characteristic polynomial: Phi_n(0) = (-1)^n prod e^{i theta}
  cplx prod = 1.0;
  for (double t : roots) prod *= -std::polar(1.0, t);
  CHECK(std::abs(szego_phi(alpha, 0.0) - prod) < 1e-11);
}

TEST_CASE("cue spectra have Haar trace moments", "[spectral_chain][statistical]") {
  const int reps = 4000, n = 20;
  for (int j : {1, 5, 20, 31}) {
    double sum = 0, sum2 = 0;
    for (int r = 0; r < reps; ++r) {
      SeededStream s(4242 + j, r);
      const double v = trace_power_sq(cue_spectrum(n, s).angles(), j);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
    INFO("j=" << j << " mean=" << mean);
    CHECK(std::abs(mean - std::min(j, n)) < 4 * se);
  }
}

TEST_CASE("window points agree with the full spectrum", "[spectral_chain]") {
  const std::size_t n = 256;
  SeededStream a(8, 1), b(8, 1);
  const auto full = cue_spectrum(n, a);
  const auto win = cue_window_points(n, 10.0, b);
  std::vector<double> expect;
  for (long long k = -static_cast<long long>(n); k <= static_cast<long long>(n); ++k) {
    const double y = full.y(k);
    if (std::abs(y) <= 10.0) expect.push_back(y);
  }
  REQUIRE(win.size() == expect.size());
  for (std::size_t i = 0; i < win.size(); ++i) CHECK(std::abs(win[i] - expect[i]) < 1e-9);
  CHECK_THROWS_AS(cue_window_points(n, 200.0, b), Error);
}
