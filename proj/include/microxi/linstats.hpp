#pragma once

// Linear statistics X_f = sum_k f(y_k) - int f, the H^{1/2} machinery around
// them, and the covariances of their mesoscopic (blue noise) limits.
// Fourier convention: f^(k) = (2 pi)^{-1/2} int f(x) e^{-ikx} dx.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>

#include "microxi/errors.hpp"
#include "microxi/quadrature.hpp"
#include "microxi/rng.hpp"
#include "microxi/sinekernel.hpp"
#include "microxi/stats.hpp"

namespace microxi {

enum class Smoothness { Integrable, HHalf, SmoothCompact };

struct TestFunction {
  std::function<cplx(double)> eval;
  std::function<cplx(double)> fourier;
  cplx integral = 0.0;
  Smoothness tag = Smoothness::Integrable;
  double width = 1.0;  // length scale in x, used to scale quadratures
  // int_{-A}^{A} f, for functions whose sum only converges symmetrically.
  std::function<cplx(double)> window_integral;
};

inline TestFunction zero_function() {
  return {[](double) { return cplx{0.0}; }, [](double) { return cplx{0.0}; }, 0.0, Smoothness::SmoothCompact, 1.0, {}};
}

// exp(-x^2 / (2 sigma^2))
inline TestFunction gaussian_bump(double sigma) {
  if (!(sigma > 0)) fail(ErrorKind::InvalidArgument, "gaussian_bump: sigma must be positive");
  TestFunction f;
  f.eval = [sigma](double x) { return cplx{std::exp(-0.5 * x * x / (sigma * sigma))}; };
  f.fourier = [sigma](double k) { return cplx{sigma * std::exp(-0.5 * sigma * sigma * k * k)}; };
  f.integral = sigma * std::sqrt(2.0 * std::numbers::pi);
  f.tag = Smoothness::HHalf;
  f.width = sigma;
  return f;
}

// Indicator of [a, b]
inline TestFunction indicator(double a, double b) {
  if (!(b > a)) fail(ErrorKind::InvalidArgument, "indicator: need a < b");
  TestFunction f;
  f.eval = [a, b](double x) { return cplx{x >= a && x <= b ? 1.0 : 0.0}; };
  f.fourier = [a, b](double k) {
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    if (std::abs(k) < 1e-12) return cplx{c * (b - a)};
    return c * (std::exp(cplx{0.0, -k * a}) - std::exp(cplx{0.0, -k * b})) / cplx{0.0, k};
  };
  f.integral = b - a;
  f.tag = Smoothness::Integrable;
  f.width = b - a;
  return f;
}

// f^_z(k) = -i sqrt(2 pi) sgn(Im z) e^{-izk} 1_{k Im z < 0}
inline cplx stieltjes_fourier(cplx z, double k) {
  if (z.imag() == 0.0) fail(ErrorKind::RealPole, "stieltjes_fourier: Im z = 0");
  if (k * z.imag() >= 0.0) return 0.0;
  const double s = z.imag() > 0 ? 1.0 : -1.0;
  return cplx{0.0, -s * std::sqrt(2.0 * std::numbers::pi)} * std::exp(cplx{0.0, -1.0} * z * k);
}

// f_z(x) = 1/(z - x). Not integrable: int f_z is the symmetric limit -i pi sgn(Im z).
inline TestFunction stieltjes_function(cplx z) {
  if (z.imag() == 0.0) fail(ErrorKind::RealPole, "stieltjes_function: Im z = 0");
  TestFunction f;
  f.eval = [z](double x) { return 1.0 / (z - x); };
  f.fourier = [z](double k) { return stieltjes_fourier(z, k); };
  f.integral = cplx{0.0, z.imag() > 0 ? -std::numbers::pi : std::numbers::pi};
  f.tag = Smoothness::HHalf;
  f.width = std::abs(z.imag());
  f.window_integral = [z](double A) { return std::log((z + A) / (z - A)); };
  return f;
}

// x -> f(x / L), with f^ -> L f^(L k)
inline TestFunction rescale(const TestFunction& f, double L) {
  if (!(L > 0)) fail(ErrorKind::InvalidArgument, "rescale: L must be positive");
  TestFunction g;
  g.eval = [e = f.eval, L](double x) { return e(x / L); };
  g.fourier = [h = f.fourier, L](double k) { return L * h(L * k); };
  g.integral = L * f.integral;
  g.tag = f.tag;
  g.width = f.width * L;
  if (f.window_integral) g.window_integral = [w = f.window_integral, L](double A) { return L * w(A / L); };
  return g;
}

namespace linstats_detail {
// int over the real line of g(k), substituted k = u / width so narrow spectra are resolved.
template <class G>
auto fourier_integral(const TestFunction& f, G g, double tol = 1e-12) {
  const double s = 1.0 / f.width;
  auto h = [&](double u) { return g(s * u) * s; };
  return quad::integrate_real_line(h, tol, 1e-12, 8000);
}
}  // namespace linstats_detail

// int_{|x| > A} |f| relative to int |f|
inline double mass_outside(const TestFunction& f, double A) {
  auto absf = [&](double x) { return std::abs(f.eval(x)); };
  const auto inside = quad::integrate(absf, -A, A, 1e-14, 1e-12, 8000);
  const auto right = quad::integrate_to_infinity(absf, A, 1e-14, 1e-10, 8000);
  const auto left = quad::integrate_from_infinity(absf, -A, 1e-14, 1e-10, 8000);
  const double out = right.value + left.value;
  if (!std::isfinite(out) || !right.converged || !left.converged) return std::numeric_limits<double>::infinity();
  const double total = inside.value + out;
  return total > 0 ? out / total : 0.0;
}

// sum_{points} f(y) - int f; f must be negligible outside the window.
inline cplx linear_statistic(const PointSample& sample, const TestFunction& f) {
  if (mass_outside(f, sample.window_radius) >= 1e-6)
    fail(ErrorKind::SupportExceedsWindow, "linear_statistic: test function mass outside window");
  cplx s = 0.0;
  for (double y : sample.points) s += f.eval(y);
  return s - f.integral;
}

struct WindowedStatistic {
  cplx value;      // sum over the window minus int_{-A}^{A} f
  cplx remainder;  // int f - int_{-A}^{A} f, the analytic part left out
};

inline WindowedStatistic windowed_statistic(const PointSample& sample, const TestFunction& f) {
  if (!f.window_integral) fail(ErrorKind::InvalidArgument, "windowed_statistic: no window integral");
  cplx s = 0.0;
  for (double y : sample.points) s += f.eval(y);
  const cplx w = f.window_integral(sample.window_radius);
  return {s - w, f.integral - w};
}

inline double h_half_norm(const TestFunction& f) {
  auto g = [&](double k) { return std::norm(f.fourier(k)) * std::sqrt(1.0 + k * k); };
  const auto r = linstats_detail::fourier_integral(f, g);
  if (!r.converged || !std::isfinite(r.value)) fail(ErrorKind::DivergentIntegral, "h_half_norm: integral did not converge");
  return std::sqrt(std::max(0.0, r.value));
}

// (1/2pi) int |k| f^(k) conj(g^(k)) dk, or with g^(-k) in place of conj(g^(k)).
inline cplx blue_noise_cov(const TestFunction& f, const TestFunction& g, bool conjugated = true) {
  auto h = [&](double k) {
    const cplx gk = conjugated ? std::conj(g.fourier(k)) : g.fourier(-k);
    return std::abs(k) * f.fourier(k) * gk;
  };
  TestFunction scale = f;
  scale.width = std::min(f.width, g.width);
  const auto r = linstats_detail::fourier_integral(scale, h);
  if (!r.converged || !std::isfinite(std::abs(r.value)))
    fail(ErrorKind::DivergentIntegral, "blue_noise_cov: integral did not converge");
  return r.value / (2.0 * std::numbers::pi);
}

// Var(X_f) for the sine process: int min(1, |k| / 2pi) |f^(k)|^2 dk.
inline double sine_kernel_variance(const TestFunction& f) {
  auto h = [&](double k) { return std::min(1.0, std::abs(k) / (2.0 * std::numbers::pi)) * std::norm(f.fourier(k)); };
  const auto r = linstats_detail::fourier_integral(f, h);
  if (!r.converged || !std::isfinite(r.value)) fail(ErrorKind::DivergentIntegral, "sine_kernel_variance: integral did not converge");
  return r.value;
}

namespace linstats_detail {
inline void off_axis(cplx z) {
  if (z.imag() == 0.0) fail(ErrorKind::RealPoint, "point on the real axis");
}
}  // namespace linstats_detail

// E[G(z1) G(z2)] or, conjugated, E[G(z1) conj(G(z2))].
inline cplx g_cov(cplx z1, cplx z2, bool conjugated) {
  linstats_detail::off_axis(z1);
  linstats_detail::off_axis(z2);
  if (!conjugated) {
    if (z1 == z2) fail(ErrorKind::CoincidentPoints, "g_cov: z1 = z2");
    if (z1.imag() * z2.imag() >= 0) return 0.0;
    return -1.0 / ((z2 - z1) * (z2 - z1));
  }
  const cplx d = std::conj(z2) - z1;
  if (d == cplx{0.0}) fail(ErrorKind::CoincidentPoints, "g_cov: z1 = conj(z2)");
  if (z1.imag() * z2.imag() <= 0) return 0.0;
  return -1.0 / (d * d);
}

// E[F(z1) F(z2)] for F = xi'/xi - 2 i pi 1_{Im z < 0}.
inline cplx f_cov(cplx z1, cplx z2) {
  linstats_detail::off_axis(z1);
  linstats_detail::off_axis(z2);
  if (z1 == z2) fail(ErrorKind::CoincidentPoints, "f_cov: z1 = z2");
  if (z1.imag() * z2.imag() >= 0) return 0.0;
  const cplx d = z1 - z2;
  const double s = d.imag() > 0 ? 1.0 : -1.0;
  return -(1.0 - std::exp(cplx{0.0, 2.0 * std::numbers::pi * s} * d)) / (d * d);
}

// E|F(z)|^2
inline double f_abs_sq(cplx z) {
  linstats_detail::off_axis(z);
  const double y = z.imag();
  return -std::expm1(-4.0 * std::numbers::pi * std::abs(y)) / (4.0 * y * y);
}

}  // namespace microxi
