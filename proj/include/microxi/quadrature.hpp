#pragma once

// Adaptive Gauss-Kronrod quadrature (7/15 pair) for real- or complex-valued
// integrands, plus Gauss-Legendre rules for Nystrom discretizations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <queue>
#include <utility>
#include <vector>

namespace microxi::quad {

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  bool converged = false;
  int evaluations = 0;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082,
                                  0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975,
                                  0.417959183673469387755102040816327};

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class T, class F>
Segment<T> gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const T f1 = f(center - dx);
    const T f2 = f(center + dx);
    kronrod += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

// Globally adaptive: repeatedly bisects the segment with the largest error
// estimate until the summed estimate meets max(abs_tol, rel_tol * |I|).
template <class F>
auto integrate(F&& f, double a, double b, double abs_tol = 1e-10, double rel_tol = 1e-12,
               int max_segments = 4000) {
  using T = std::decay_t<decltype(f(a))>;
  Result<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment<T>> heap;
  auto first = detail::gk15<T>(f, a, b);
  heap.push(first);
  T total = first.value;
  double total_err = first.error;
  out.evaluations = 15;
  int segments = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) && segments < max_segments) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    auto left = detail::gk15<T>(f, worst.a, mid);
    auto right = detail::gk15<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    out.evaluations += 30;
    ++segments;
  }
  // Re-sum to shed accumulated cancellation error.
  T sum{};
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.error = err;
  out.converged = err <= std::max(abs_tol, rel_tol * std::abs(sum));
  return out;
}

// Integral over [a, inf) through x = a + t / (1 - t).
template <class F>
auto integrate_to_infinity(F&& f, double a, double abs_tol = 1e-10, double rel_tol = 1e-12,
                           int max_segments = 4000) {
  auto g = [&](double t) {
    const double s = 1.0 - t;
    return f(a + t / s) * (1.0 / (s * s));
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol, max_segments);
}

// Integral over (-inf, b] through x = b - t / (1 - t).
template <class F>
auto integrate_from_infinity(F&& f, double b, double abs_tol = 1e-10, double rel_tol = 1e-12,
                             int max_segments = 4000) {
  auto g = [&](double t) {
    const double s = 1.0 - t;
    return f(b - t / s) * (1.0 / (s * s));
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol, max_segments);
}

template <class F>
auto integrate_real_line(F&& f, double abs_tol = 1e-10, double rel_tol = 1e-12,
                         int max_segments = 4000) {
  auto left = integrate_from_infinity(f, 0.0, 0.5 * abs_tol, rel_tol, max_segments);
  auto right = integrate_to_infinity(f, 0.0, 0.5 * abs_tol, rel_tol, max_segments);
  left.value += right.value;
  left.error += right.error;
  left.converged = left.converged && right.converged;
  left.evaluations += right.evaluations;
  return left;
}

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b] (Newton iteration on P_n).
inline Rule gauss_legendre(int n, double a = -1.0, double b = 1.0) {
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

}  // namespace microxi::quad
