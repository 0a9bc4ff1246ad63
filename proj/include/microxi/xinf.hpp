#pragma once

// The limiting function xi_inf(z) = e^{i pi z} prod_k (1 - z/y_k) and its
// logarithmic derivative, truncated to a point sample's window.

#include <cmath>
#include <complex>
#include <vector>

#include "microxi/charpoly.hpp"
#include "microxi/errors.hpp"
#include "microxi/sinekernel.hpp"

namespace microxi {

struct TruncatedEvaluation {
  cplx value;
  double truncation_radius;
  double tail_estimate;
};

inline void check_inside_window(const PointSample& sample, cplx z) {
  if (!(std::abs(z) < 0.5 * sample.window_radius))
    fail(ErrorKind::WindowTooSmall, "|z| must be below half the window radius");
}

// Heuristic size of the omitted factors, c |z| log(2 + A) / A.
inline double truncation_tail(cplx z, double A, double c = 1.0) {
  return c * std::abs(z) * std::log(2.0 + A) / A;
}

// The sub-configuration that enters the paired product: y_0 and the pairs
// (y_k, y_{-k}) with both members in the window.
inline PointSample paired_points(const PointSample& sample) {
  const std::size_t first = sample.first_positive();
  if (first == 0) fail(ErrorKind::WindowTooSmall, "paired_points: no point y_0 in the window");
  const std::size_t pairs = std::min(sample.points.size() - first, first - 1);
  PointSample out = sample;
  out.points.assign(sample.points.begin() + static_cast<std::ptrdiff_t>(first - 1 - pairs),
                    sample.points.begin() + static_cast<std::ptrdiff_t>(first + pairs));
  return out;
}

// Factors paired as (y_k, y_{-k}) for k = 1..k_max, plus the lone y_0; points
// in the window without a partner are left out.
inline TruncatedEvaluation eval_xi_inf(const PointSample& sample, cplx z, double tail_constant = 1.0) {
  check_inside_window(sample, z);
  const auto& pts = sample.points;
  for (double y : pts)
    if (std::abs(z - y) <= 1e-12 * std::max(1.0, std::abs(y))) fail(ErrorKind::PointHit, "eval_xi_inf: z is a sample point");
  const std::size_t first = sample.first_positive();
  if (first == 0) fail(ErrorKind::WindowTooSmall, "eval_xi_inf: no point y_0 in the window");
  const std::size_t pairs = std::min(pts.size() - first, first - 1);
  ScaledProduct p;
  p.multiply(1.0 - z / pts[first - 1]);
  for (std::size_t k = 1; k <= pairs; ++k) p.multiply((1.0 - z / pts[first + k - 1]) * (1.0 - z / pts[first - 1 - k]));
  return {p.value() * std::exp(kI * kPi * z), sample.window_radius,
          truncation_tail(z, sample.window_radius, tail_constant)};
}

// i pi + sum over the window of 1/(z - y).
inline TruncatedEvaluation logderiv_xi_inf(const PointSample& sample, cplx z, double tail_constant = 1.0) {
  check_inside_window(sample, z);
  cplx s = kI * kPi;
  for (double y : sample.points) {
    if (z.imag() == 0.0 && z.real() == y) fail(ErrorKind::PointHit, "logderiv_xi_inf: z is a sample point");
    s += 1.0 / (z - y);
  }
  return {s, sample.window_radius, truncation_tail(z, sample.window_radius, tail_constant)};
}

// Tail constant c fitted from window halvings: the largest ratio of
// |f(A_j) - f(A_j / 2)| to |z| log(2 + A_j/2) / (A_j/2) over `halvings` steps.
template <class Eval>
double fit_tail_constant(const PointSample& sample, cplx z, Eval eval, int halvings = 3) {
  double c = 0.0;
  double radius = sample.window_radius;
  for (int h = 0; h < halvings; ++h) {
    const double half = 0.5 * radius;
    if (!(std::abs(z) < 0.5 * half)) break;
    const cplx big = eval(sample.restrict_to(radius), z).value;
    const cplx small = eval(sample.restrict_to(half), z).value;
    c = std::max(c, std::abs(big - small) / truncation_tail(z, half));
    radius = half;
  }
  return c;
}

}  // namespace microxi
