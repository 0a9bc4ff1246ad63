#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "microxi/charpoly.hpp"
#include "microxi/formulas.hpp"
#include "microxi/linstats.hpp"
#include "microxi/sinekernel.hpp"
#include "microxi/spectral_chain.hpp"
#include "microxi/stats.hpp"
#include "microxi/xinf.hpp"

using namespace microxi;

namespace {
constexpr double pi = std::numbers::pi;
const cplx I{0.0, 1.0};

template <class F>
bool kind_of(F f, ErrorKind k) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind() == k;
  }
  return false;
}

TestFunction sum(const TestFunction& f, const TestFunction& g) {
  TestFunction h;
  h.eval = [a = f.eval, b = g.eval](double x) { return a(x) + b(x); };
  h.fourier = [a = f.fourier, b = g.fourier](double k) { return a(k) + b(k); };
  h.integral = f.integral + g.integral;
  h.tag = Smoothness::HHalf;
  h.width = std::min(f.width, g.width);
  return h;
}

double l2_x(const TestFunction& f) {
  return quad::integrate_real_line([&](double x) { return std::norm(f.eval(x)); }, 1e-13, 1e-12, 8000).value;
}
double l2_k(const TestFunction& f) {
  return quad::integrate_real_line([&](double k) { return std::norm(f.fourier(k)); }, 1e-13, 1e-12, 8000).value;
}

cplx random_off_axis(SeededStream& s) {
  const double im = (0.3 + 1.5 * s.uniform()) * (s.uniform() < 0.5 ? -1.0 : 1.0);
  return {4.0 * s.uniform() - 2.0, im};
}
}  // namespace

TEST_CASE("linear statistics of samples", "[linstats]") {
  SeededStream st(1, 0);
  const auto s = sample_via_dpp(6.0, 0, st);
  CHECK(linear_statistic(s, zero_function()) == cplx(0.0));

  const auto g = gaussian_bump(0.5);
  cplx direct = 0.0;
  for (double y : s.points) direct += g.eval(y);
  CHECK(std::abs(linear_statistic(s, g) - (direct - g.integral)) < 1e-14);

  CHECK(kind_of([&] { linear_statistic(s, gaussian_bump(3.0)); }, ErrorKind::SupportExceedsWindow));
  CHECK(kind_of([&] { linear_statistic(s, stieltjes_function(I)); }, ErrorKind::SupportExceedsWindow));
  CHECK(kind_of([] { indicator(1.0, 1.0); }, ErrorKind::InvalidArgument));
}

TEST_CASE("linear statistics over dpp replicas", "[linstats][mc]") {
  const DppSampler sampler(8.0);
  const auto f = gaussian_bump(1.0);
  std::vector<double> xs;
  for (std::size_t r = 0; r < 10000; ++r) {
    SeededStream st(2, r);
    xs.push_back(linear_statistic(sampler.sample(st), f).real());
  }
  const auto m = mean_estimate(xs);
  CHECK(std::abs(m.value) < 3 * m.standard_error);

  // Var X_f = int min(1, |k|/2pi) |f^|^2, never above the blue noise value.
  const auto v = variance_estimate(xs);
  const double exact = sine_kernel_variance(f);
  const double blue = blue_noise_cov(f, f).real();
  CHECK(std::abs(v.value - exact) < 4 * v.standard_error);
  CHECK(exact <= blue);
  CHECK(blue - exact < 0.05 * blue);
}

TEST_CASE("H^1/2 norm", "[linstats]") {
  CHECK(h_half_norm(zero_function()) == 0.0);
  // e^{-x^2}
  const auto f = gaussian_bump(1.0 / std::sqrt(2.0));
  const double a = h_half_norm(f);
  const auto fine = quad::integrate_real_line(
      [&](double k) { return std::norm(f.fourier(k)) * std::sqrt(1 + k * k); }, 1e-14, 1e-14, 20000);
  CHECK(std::abs(a - std::sqrt(fine.value)) < 1e-6);
  CHECK(a > 0.0);
  CHECK(std::isfinite(a));
  double prev = 0.0;
  for (double L : {1.0, 2.0, 4.0}) {
    const double h = h_half_norm(rescale(f, L));
    CHECK(h > prev);
    prev = h;
  }
}

TEST_CASE("blue noise covariance", "[linstats]") {
  const auto fi = stieltjes_function(I);
  CHECK(std::abs(blue_noise_cov(fi, fi) - 0.25) < 1e-8);
  CHECK(std::abs(blue_noise_cov(zero_function(), fi)) == 0.0);

  const auto a = gaussian_bump(0.7), b = stieltjes_function(cplx(0.5, 1.2)), c = gaussian_bump(1.3);
  CHECK(std::abs(blue_noise_cov(sum(a, b), c) - (blue_noise_cov(a, c) + blue_noise_cov(b, c))) < 1e-8);

  SeededStream s(3, 0);
  for (int t = 0; t < 20; ++t) {
    const cplx z1 = random_off_axis(s), z2 = random_off_axis(s);
    const auto f1 = stieltjes_function(z1), f2 = stieltjes_function(z2);
    if (std::abs(std::conj(z2) - z1) > 1e-3)
      CHECK(std::abs(g_cov(z1, z2, true) - blue_noise_cov(f1, f2)) < 1e-7 * std::max(1.0, std::abs(g_cov(z1, z2, true))));
    if (z1 != z2)
      CHECK(std::abs(g_cov(z1, z2, false) - blue_noise_cov(f1, f2, false)) <
            1e-7 * std::max(1.0, std::abs(g_cov(z1, z2, false))));
  }
}

TEST_CASE("Stieltjes transform pair", "[linstats]") {
  CHECK(stieltjes_fourier(I, 1.0) == cplx(0.0));
  CHECK(std::abs(stieltjes_fourier(I, -1.0) - (-I * std::sqrt(2 * pi) * std::exp(-1.0))) < 1e-15);
  CHECK(kind_of([] { stieltjes_fourier(2.0, 1.0); }, ErrorKind::RealPole));
  CHECK(kind_of([] { stieltjes_function(0.0); }, ErrorKind::RealPole));

  // (2 pi)^{-1/2} int f^(k) e^{ikx} dk at x = 0 gives 1/z
  for (cplx z : {I, cplx(0.4, -0.8)}) {
    const auto inv = quad::integrate_real_line([&](double k) { return stieltjes_fourier(z, k); }, 1e-13, 1e-12);
    CHECK(std::abs(inv.value / std::sqrt(2 * pi) - 1.0 / z) < 1e-9);
  }
}

TEST_CASE("Gaussian process covariances", "[linstats]") {
  CHECK(std::abs(g_cov(I, I, true) - 0.25) < 1e-15);
  CHECK(g_cov(I, 2.0 * I, false) == cplx(0.0));
  CHECK(kind_of([] { g_cov(I, I, false); }, ErrorKind::CoincidentPoints));
  CHECK(kind_of([] { g_cov(I, -I, true); }, ErrorKind::CoincidentPoints));
  CHECK(kind_of([] { g_cov(1.0, I, true); }, ErrorKind::RealPoint));

  CHECK(std::abs(f_abs_sq(I) - (1 - std::exp(-4 * pi)) / 4) < 1e-15);
  CHECK(f_cov(I, 2.0 * I) == cplx(0.0));
  CHECK(kind_of([] { f_cov(-I, -I); }, ErrorKind::CoincidentPoints));

  // F = xi'/xi - 2 i pi 1_{Im < 0}: its covariances follow from the moments.
  SeededStream s(4, 0);
  for (int t = 0; t < 20; ++t) {
    const cplx z1 = random_off_axis(s), z2 = random_off_axis(s);
    const cplx c1 = z1.imag() < 0 ? 2.0 * I * pi : 0.0, c2 = z2.imag() < 0 ? 2.0 * I * pi : 0.0;
    CHECK(std::abs(f_cov(z1, z2) - (m2(z1, z2) - c1 * c2)) < 1e-12);
    CHECK(std::abs(f_abs_sq(z1) - (m2_conj(z1, z1) - std::norm(c1)).real()) < 1e-12);
  }

  const cplx z1(0.3, 0.7), z2(-0.5, -0.4);
  double prev = 1e300;
  for (double L : {4.0, 16.0, 64.0}) {
    const double d = std::abs(L * L * f_cov(L * z1, L * z2) - g_cov(z1, z2, false));
    CHECK((d < prev || d < 1e-14));
    prev = d;
  }
  CHECK(prev < 1e-12);
}

TEST_CASE("empirical cumulants", "[linstats]") {
  CHECK(kind_of([] { empirical_cumulant(std::vector<double>(79, 1.0), 3); }, ErrorKind::TooFewSamples));
  const std::vector<double> constant(200, 3.5);
  CHECK(empirical_cumulant(constant, 1).value == Catch::Approx(3.5));
  for (int p = 2; p <= 4; ++p) CHECK(std::abs(empirical_cumulant(constant, p).value) < 1e-12);

  SeededStream s(5, 0);
  std::vector<double> g, e;
  for (int i = 0; i < 20000; ++i) {
    g.push_back(standard_normal(s));
    e.push_back(-std::log(s.uniform()));
  }
  for (int p = 3; p <= 4; ++p) {
    const auto c = empirical_cumulant(g, p);
    CHECK(std::abs(c.value) < 3 * c.standard_error);
  }
  // Exponential(1): kappa_p = (p - 1)!
  const double fact[] = {1, 1, 1, 2, 6};
  for (int p = 1; p <= 4; ++p) {
    const auto c = empirical_cumulant(e, p);
    CHECK(std::abs(c.value - fact[p]) < 3 * c.standard_error);
  }
}

TEST_CASE("mesoscopic statistics approach blue noise", "[linstats][mc]") {
  // f = exp(-2 x^2), spread by L = 16; the window holds 6 standard deviations.
  const auto f = rescale(gaussian_bump(0.5), 16.0);
  std::vector<double> xs;
  for (std::size_t r = 0; r < 2000; ++r) {
    SeededStream st(6, r);
    xs.push_back(linear_statistic(sample_via_coupling(256, 48.0, st), f).real());
  }
  const auto c2 = empirical_cumulant(xs, 2), c3 = empirical_cumulant(xs, 3), c4 = empirical_cumulant(xs, 4);
  CHECK(std::abs(c3.value) < 3 * c3.standard_error);
  CHECK(std::abs(c4.value) < 3 * c4.standard_error);
  CHECK(std::abs(c2.value - blue_noise_cov(f, f).real()) < 3 * c2.standard_error);
}

TEST_CASE("rescaling", "[linstats]") {
  const auto f = gaussian_bump(0.8);
  const auto same = rescale(f, 1.0);
  for (double x : {-1.0, 0.0, 0.3, 2.0}) {
    CHECK(same.eval(x) == f.eval(x));
    CHECK(same.fourier(x) == f.fourier(x));
  }
  CHECK(same.integral == f.integral);

  for (double L : {0.5, 3.0}) {
    const auto g = rescale(f, L);
    CHECK(l2_x(g) == Catch::Approx(l2_k(g)).epsilon(1e-9));
    CHECK(g.integral == L * f.integral);
  }
  CHECK(l2_x(indicator(-1, 2)) == Catch::Approx(l2_k(indicator(-1, 2))).epsilon(1e-5));

  const cplx z(0.3, -0.9);
  const auto fz = rescale(stieltjes_function(z), 2.5);
  const auto flz = stieltjes_function(2.5 * z);
  for (double t : {-3.0, 0.0, 1.7}) CHECK(std::abs(fz.eval(t) - 2.5 * flz.eval(t)) < 1e-15);
  for (double k : {-2.0, 0.5}) CHECK(std::abs(fz.fourier(k) - 2.5 * flz.fourier(k)) < 1e-14);
  CHECK(kind_of([&] { rescale(f, 0.0); }, ErrorKind::InvalidArgument));
}

TEST_CASE("counting-function representation of linear statistics", "[linstats]") {
  // sum f(y) - int f = (1/pi) int Im log xi_n(y) f'(y) dy on a Haar spectrum.
  SeededStream st(7, 0);
  const auto spec = cue_spectrum(128, st);
  const double sigma = 1.5;
  const auto f = gaussian_bump(sigma);
  auto fprime = [&](double x) { return -x / (sigma * sigma) * f.eval(x).real(); };

  std::vector<double> cuts{-15.0};
  double lhs = -f.integral.real();
  for (long long k = -40; k <= 40; ++k) {
    const double y = spec.y(k);
    if (std::abs(y) < 15.0) {
      cuts.push_back(y);
      lhs += f.eval(y).real();
    }
  }
  cuts.push_back(15.0);
  std::sort(cuts.begin(), cuts.end());
  double rhs = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto g = [&](double y) { return log_xi_principal(spec, y).imag() * fprime(y); };
    rhs += quad::integrate(g, cuts[i], cuts[i + 1], 1e-13, 1e-12).value;
  }
  CHECK(std::abs(lhs - rhs / pi) < 1e-8);
}

TEST_CASE("indicator counts converge to the sine process in n", "[linstats][mc]") {
  const std::size_t R = 100000;
  const DppSampler sampler(1.25);
  std::vector<double> dpp;
  for (std::size_t r = 0; r < R; ++r) {
    SeededStream st(8, r);
    dpp.push_back(sampler.sample(st).count(-1.25, 1.25));
  }
  auto ks_at = [&](std::size_t n) {
    std::vector<double> c;
    for (std::size_t r = 0; r < R; ++r) {
      SeededStream st(9 + n, r);
      c.push_back(static_cast<double>(sample_via_coupling(n, 2.5, st).count(0.0, 2.5)));
    }
    return ks_distance(dpp, c);
  };
  const double coarse = ks_at(10), fine = ks_at(160);
  CHECK(fine < coarse);
  // 95% two-sample critical value 1.36 sqrt(2/R)
  CHECK(fine < 1.36 * std::sqrt(2.0 / R));
}

TEST_CASE("Stieltjes statistics and xi'/xi", "[linstats]") {
  SeededStream st(10, 0);
  const auto s = sample_via_coupling(512, 40.0, st);
  for (cplx z : {cplx(0.5, 1.0), cplx(-1.0, -0.5), cplx(2.0, -2.0)}) {
    const auto f = stieltjes_function(z);
    const auto w = windowed_statistic(s, f);
    const cplx x = w.value - w.remainder;
    CHECK(std::abs(x - (logderiv_xi_inf(s, z).value - m1(z))) < 1e-12);
    // remainder int_{|y| > A} f_z vanishes like 2|z|/A
    CHECK(std::abs(w.remainder) < 3 * std::abs(z) / s.window_radius);
    CHECK(std::abs(windowed_statistic(s.restrict_to(10.0), f).remainder) > std::abs(w.remainder));
  }
}
