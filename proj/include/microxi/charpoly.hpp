#pragma once

// Characteristic polynomial Z_n, the rescaled xi_n(z) = Z_n(e^{2 i pi z/n}) / Z_n(1),
// its product form, and the continuous logarithm on the cut plane.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "microxi/errors.hpp"
#include "microxi/quadrature.hpp"
#include "microxi/spectrum.hpp"

namespace microxi {

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Product accumulator with a separate binary exponent so that long products of
// factors of very different size neither overflow nor underflow.
class ScaledProduct {
 public:
  void multiply(cplx f) {
    m_ *= f;
    const double big = std::max(std::abs(m_.real()), std::abs(m_.imag()));
    if (big == 0.0) {
      zero_ = true;
      return;
    }
    int e = 0;
    std::frexp(big, &e);
    m_ = {std::ldexp(m_.real(), -e), std::ldexp(m_.imag(), -e)};
    exp_ += e;
  }
  cplx value() const {
    if (zero_) return 0.0;
    return {std::ldexp(m_.real(), static_cast<int>(exp_)), std::ldexp(m_.imag(), static_cast<int>(exp_))};
  }

 private:
  cplx m_ = 1.0;
  long exp_ = 0;
  bool zero_ = false;
};

// prod_k (1 - x e^{-i theta_k})
inline cplx eval_Z(const Spectrum& spec, cplx x) {
  ScaledProduct p;
  for (double t : spec.angles()) p.multiply(1.0 - x * std::polar(1.0, -t));
  return p.value();
}

// Each factor (1 - w_k(z)) / (1 - w_k(0)) is written as
// e^{i pi z/n} sin(pi (y_k - z)/n) / sin(pi y_k/n), which stays accurate when
// z is close to a point.
inline cplx eval_xi(const Spectrum& spec, cplx z) {
  const double nd = static_cast<double>(spec.n());
  ScaledProduct p;
  for (long long k = 1; k <= static_cast<long long>(spec.n()); ++k) {
    const double yk = spec.y(k);
    p.multiply(std::sin(kPi * (yk - z) / nd) / std::sin(kPi * yk / nd));
  }
  return p.value() * std::exp(kI * kPi * z);
}

// e^{i pi z} prod_{|k| <= A} (1 - z / y_k), factors grouped in pairs (k, -k).
inline cplx eval_xi_product(const Spectrum& spec, cplx z, long long A) {
  if (A < 2) fail(ErrorKind::InvalidArgument, "eval_xi_product: A must be at least 2");
  ScaledProduct p;
  p.multiply(1.0 - z / spec.y(0));
  for (long long k = 1; k <= A; ++k) p.multiply((1.0 - z / spec.y(k)) * (1.0 - z / spec.y(-k)));
  return p.value() * std::exp(kI * kPi * z);
}

// Truncation error of the symmetric product is a smooth series in 1/A when A
// runs over multiples of n; two Richardson steps over A, 2A, 4A remove the
// first two orders.
inline cplx eval_xi_product_extrapolated(const Spectrum& spec, cplx z, long long A) {
  const auto n = static_cast<long long>(spec.n());
  const long long a = std::max<long long>(n, ((A + n - 1) / n) * n);
  const cplx p1 = eval_xi_product(spec, z, a);
  const cplx p2 = eval_xi_product(spec, z, 2 * a);
  const cplx p4 = eval_xi_product(spec, z, 4 * a);
  const cplx r1 = 2.0 * p2 - p1;
  const cplx r2 = 2.0 * p4 - p2;
  return (4.0 * r2 - r1) / 3.0;
}

// xi_n'/xi_n(z) = i pi + (pi/n) sum_k cot(pi (z - y_k)/n)
inline cplx logderiv_xi(const Spectrum& spec, cplx z) {
  const double nd = static_cast<double>(spec.n());
  cplx s = 0.0;
  for (long long k = 1; k <= static_cast<long long>(spec.n()); ++k) {
    const cplx a = kPi * (z - spec.y(k)) / nd;
    s += std::cos(a) / std::sin(a);
  }
  return kI * kPi + (kPi / nd) * s;
}

// Sum of principal logarithms of (1 - w_k(z)) / (1 - w_k(0)); each term is
// continuous off the downward vertical rays below the points, so the sum is the
// branch of log xi_n that vanishes at 0 on the cut plane.
inline cplx log_xi_principal(const Spectrum& spec, cplx z) {
  const double nd = static_cast<double>(spec.n());
  cplx s = 0.0;
  for (double t : spec.angles()) {
    const cplx wz = std::exp(kI * (kTwoPi * z / nd - t));
    const cplx w0 = std::polar(1.0, -t);
    s += std::log(1.0 - wz) - std::log(1.0 - w0);
  }
  return s;
}

struct BranchPath {
  std::vector<cplx> waypoints;
};

// 0 -> i h -> Re z + i h -> z with h = max(1, 2 |Im z|).
inline BranchPath branch_path(cplx z) {
  const double h = std::max(1.0, 2.0 * std::abs(z.imag()));
  return {{cplx{0.0, 0.0}, cplx{0.0, h}, cplx{z.real(), h}, z}};
}

inline constexpr double kPathClearance = 1e-8;

// Integral of xi_n'/xi_n along the branch path.
inline cplx log_xi(const Spectrum& spec, cplx z, double tol = 1e-10) {
  if (z == cplx{0.0, 0.0}) return 0.0;
  const double nd = static_cast<double>(spec.n());
  const auto path = branch_path(z);
  // The last leg crosses the real axis at Re z when Im z < 0; it must not
  // pass through (or end on) a zero. No other leg gets near the real line.
  const double x = z.real();
  const double q = std::floor(x / nd);
  double nearest = 1e300;
  for (long long k = 1; k <= static_cast<long long>(spec.n()); ++k) {
    const double yk = spec.y(k) + q * nd;
    for (double c : {yk - nd, yk, yk + nd}) nearest = std::min(nearest, std::abs(c - x));
  }
  if (z.imag() <= 0.0 && nearest < kPathClearance)
    fail(ErrorKind::PathThroughZero, "log_xi: path passes within tolerance of a zero");
  cplx total = 0.0;
  for (std::size_t s = 0; s + 1 < path.waypoints.size(); ++s) {
    const cplx a = path.waypoints[s], b = path.waypoints[s + 1];
    if (a == b) continue;
    const cplx d = b - a;
    auto f = [&](double t) -> cplx {
      const cplx w = a + t * d;
      return logderiv_xi(spec, w) * d;
    };
    total += quad::integrate(f, 0.0, 1.0, tol / 3.0, 1e-13, 20000).value;
  }
  return total;
}

// Im log Z_n(1) with the principal branch of each factor.
inline double im_log_Z_at_one(const Spectrum& spec) {
  double s = 0.0;
  for (double t : spec.angles()) s += 0.5 * (t - kPi);
  return s;
}

}  // namespace microxi
