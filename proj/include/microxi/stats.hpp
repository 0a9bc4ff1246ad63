#pragma once

// Replica statistics: means, jackknife errors, k-statistics, two-sample KS.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "microxi/errors.hpp"
#include "microxi/rng.hpp"

namespace microxi {

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

struct ComplexEstimate {
  cplx value = 0.0;
  double standard_error = 0.0;  // sqrt(E|mean - truth|^2)
};

// For the mean the jackknife error reduces to s / sqrt(n).
inline ComplexEstimate mean_estimate(const std::vector<cplx>& xs) {
  ComplexEstimate out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  for (const auto& x : xs) out.value += x;
  out.value /= n;
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (const auto& x : xs) ss += std::norm(x - out.value);
  out.standard_error = std::sqrt(ss / (n * (n - 1.0)));
  return out;
}

inline Estimate mean_estimate(const std::vector<double>& xs) {
  std::vector<cplx> c(xs.begin(), xs.end());
  const auto e = mean_estimate(c);
  return {e.value.real(), e.standard_error};
}

namespace stats_detail {

struct PowerSums {
  double n = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0;

  PowerSums without(double d) const { return {n - 1, s1 - d, s2 - d * d, s3 - d * d * d, s4 - d * d * d * d}; }

  // Unbiased cumulant estimator of order p from sums taken about a fixed shift.
  double k_statistic(int p) const {
    const double mu = s1 / n;
    const double m2 = s2 / n - mu * mu;
    const double m3 = s3 / n - 3 * mu * s2 / n + 2 * mu * mu * mu;
    const double m4 = s4 / n - 4 * mu * s3 / n + 6 * mu * mu * s2 / n - 3 * mu * mu * mu * mu;
    switch (p) {
      case 1: return mu;
      case 2: return n * m2 / (n - 1);
      case 3: return n * n * m3 / ((n - 1) * (n - 2));
      default: return n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3));
    }
  }
};

inline PowerSums centered_sums(const std::vector<double>& xs, double shift) {
  PowerSums s;
  for (double x : xs) {
    const double d = x - shift;
    s.n += 1;
    s.s1 += d;
    s.s2 += d * d;
    s.s3 += d * d * d;
    s.s4 += d * d * d * d;
  }
  return s;
}

}  // namespace stats_detail

// k-statistic of order p (1..4) with a jackknife standard error; at least
// 10 * 2^p values are required.
inline Estimate empirical_cumulant(const std::vector<double>& xs, int p) {
  if (p < 1 || p > 4) fail(ErrorKind::InvalidArgument, "empirical_cumulant: order must be 1..4");
  if (xs.size() < static_cast<std::size_t>(10 << p)) fail(ErrorKind::TooFewSamples, "empirical_cumulant: too few samples");
  double shift = 0.0;
  for (double x : xs) shift += x;
  shift /= static_cast<double>(xs.size());
  const auto sums = stats_detail::centered_sums(xs, shift);
  Estimate out;
  out.value = sums.k_statistic(p) + (p == 1 ? shift : 0.0);
  std::vector<double> loo(xs.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    loo[i] = sums.without(xs[i] - shift).k_statistic(p);
    mean += loo[i];
  }
  const double n = static_cast<double>(xs.size());
  mean /= n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  out.standard_error = std::sqrt((n - 1.0) / n * ss);
  return out;
}

// Unbiased variance with its jackknife error.
inline Estimate variance_estimate(const std::vector<double>& xs) {
  if (xs.size() < 3) fail(ErrorKind::TooFewSamples, "variance_estimate: need at least 3 values");
  double shift = 0.0;
  for (double x : xs) shift += x;
  shift /= static_cast<double>(xs.size());
  const auto sums = stats_detail::centered_sums(xs, shift);
  Estimate out{sums.k_statistic(2), 0.0};
  const double n = static_cast<double>(xs.size());
  std::vector<double> loo(xs.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    loo[i] = sums.without(xs[i] - shift).k_statistic(2);
    mean += loo[i];
  }
  mean /= n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  out.standard_error = std::sqrt((n - 1.0) / n * ss);
  return out;
}

// sup_x |F_a(x) - F_b(x)| for the two empirical distribution functions.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::InvalidArgument, "ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) fail(ErrorKind::InvalidArgument, "quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace microxi
