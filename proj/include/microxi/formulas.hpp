#pragma once

// Closed-form expectations for ratios and logarithmic-derivative moments of
// xi_inf (and of xi_n where the finite-n value is exact).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "microxi/errors.hpp"
#include "microxi/rng.hpp"

namespace microxi {

namespace formulas_detail {
inline constexpr double pi = std::numbers::pi;
inline const cplx two_i_pi{0.0, 2.0 * std::numbers::pi};

inline void off_axis(cplx z, ErrorKind kind, const char* what) {
  if (z.imag() == 0.0) fail(kind, what);
}

inline double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }
}  // namespace formulas_detail

// E[xi(z') / xi(z)]
inline cplx expected_ratio(cplx z, cplx zp) {
  using namespace formulas_detail;
  off_axis(z, ErrorKind::RealDenominatorPoint, "expected_ratio: Im z = 0");
  if (z.imag() > 0) return 1.0;
  return std::exp(two_i_pi * (zp - z));
}

struct RatioQuery {
  std::vector<cplx> numerator;    // z'_1..z'_k
  std::vector<cplx> denominator;  // z_1..z_k

  std::size_t size() const { return denominator.size(); }
  bool denominators_distinct() const { return distinct(denominator); }
  bool numerators_distinct() const { return distinct(numerator); }

 private:
  static bool distinct(const std::vector<cplx>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        if (v[i] == v[j]) return false;
    return true;
  }
};

namespace formulas_detail {
inline void validate(const RatioQuery& q) {
  if (q.numerator.size() != q.denominator.size() || q.numerator.empty())
    fail(ErrorKind::InvalidArgument, "RatioQuery: lists must be non-empty and of equal length");
  for (auto z : q.denominator) off_axis(z, ErrorKind::RealDenominatorPoint, "RatioQuery: real denominator point");
  for (auto z : q.numerator) off_axis(z, ErrorKind::RealPoint, "RatioQuery: real numerator point");
  if (!q.denominators_distinct() || !q.numerators_distinct())
    fail(ErrorKind::DegenerateConfiguration, "RatioQuery: repeated points; use the perturbative limit");
  for (auto z : q.denominator)
    for (auto w : q.numerator)
      if (z == w) fail(ErrorKind::CoincidentPair, "RatioQuery: z_i = z'_j");
}

// det(E_ij / (u_i - v_j)) / det(1 / (u_i - v_j)) with E_ij = E[xi(z'_j)/xi(z_i)].
inline cplx cauchy_ratio(const RatioQuery& q, const std::vector<cplx>& u, const std::vector<cplx>& v) {
  const auto k = static_cast<Eigen::Index>(q.size());
  Eigen::MatrixXcd num(k, k), den(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const cplx c = 1.0 / (u[i] - v[j]);
      den(i, j) = c;
      num(i, j) = expected_ratio(q.denominator[i], q.numerator[j]) * c;
    }
  return num.determinant() / den.determinant();
}
}  // namespace formulas_detail

// E[prod_j xi(z'_j) / prod_i xi(z_i)] in the limit.
inline cplx expected_joint_ratio(const RatioQuery& q) {
  formulas_detail::validate(q);
  return formulas_detail::cauchy_ratio(q, q.denominator, q.numerator);
}

// The same expectation for xi_n: the determinant identity holds for the
// characteristic polynomial itself, with nodes e^{2 i pi z / n}.
inline cplx expected_joint_ratio_finite_n(const RatioQuery& q, std::size_t n) {
  using namespace formulas_detail;
  validate(q);
  if (n == 0) fail(ErrorKind::InvalidArgument, "expected_joint_ratio_finite_n: n must be positive");
  const double nd = static_cast<double>(n);
  auto node = [&](cplx z) { return std::exp(two_i_pi * z / nd); };
  std::vector<cplx> u, v;
  for (auto z : q.denominator) u.push_back(node(z));
  for (auto z : q.numerator) v.push_back(node(z));
  for (auto a : u)
    for (auto b : v)
      if (std::abs(a - b) <= 1e-14 * std::max(std::abs(a), 1.0))
        fail(ErrorKind::NodeCollision, "expected_joint_ratio_finite_n: z_i - z'_j is a multiple of n");
  return cauchy_ratio(q, u, v);
}

// Limit of g(eps) as eps -> 0 from g(eps), g(eps/2), g(eps/4), g(eps/8),
// assuming an expansion in integer powers of eps.
inline cplx richardson_limit(const std::function<cplx(double)>& g, double eps) {
  cplx t[4];
  for (int i = 0; i < 4; ++i) t[i] = g(eps / static_cast<double>(1 << i));
  for (int level = 1; level < 4; ++level) {
    const double f = static_cast<double>(1 << level);
    for (int i = 3; i >= level; --i) t[i] = (f * t[i] - t[i - 1]) / (f - 1.0);
  }
  return t[3];
}

// Degenerate queries (repeated z or z'): every point is moved by eps times a
// distinct offset and the result is extrapolated to eps = 0.
inline cplx expected_joint_ratio_perturbed(const RatioQuery& q, std::size_t n = 0, double eps = 1e-3) {
  const cplx dir = std::polar(1.0, 0.4);
  auto at = [&](double e) {
    RatioQuery p = q;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p.denominator[i] += e * static_cast<double>(i + 1) * dir;
      p.numerator[i] += e * static_cast<double>(i + 1) * std::conj(dir) * 0.7;
    }
    return n == 0 ? expected_joint_ratio(p) : expected_joint_ratio_finite_n(p, n);
  };
  return richardson_limit(at, eps);
}

// E|xi(z') / xi(z)|^2
inline double expected_abs_ratio_sq(cplx z, cplx zp) {
  using namespace formulas_detail;
  off_axis(z, ErrorKind::RealPoint, "expected_abs_ratio_sq: Im z = 0");
  off_axis(zp, ErrorKind::RealPoint, "expected_abs_ratio_sq: Im z' = 0");
  const double below = z.imag() < 0 ? 1.0 : 0.0;
  const double pre = std::exp(-4.0 * pi * (zp.imag() - z.imag()) * below);
  const double inner = -std::expm1(-4.0 * pi * zp.imag() * sgn(z.imag()));
  return pre * (1.0 + inner * std::norm(z - zp) / (4.0 * z.imag() * zp.imag()));
}

// E[xi'/xi(z)]
inline cplx m1(cplx z) {
  formulas_detail::off_axis(z, ErrorKind::RealPoint, "m1: Im z = 0");
  return z.imag() < 0 ? formulas_detail::two_i_pi : cplx{0.0};
}

// E[xi'/xi(z) xi'/xi(z')]
inline cplx m2(cplx z, cplx zp) {
  using namespace formulas_detail;
  off_axis(z, ErrorKind::RealPoint, "m2: Im z = 0");
  off_axis(zp, ErrorKind::RealPoint, "m2: Im z' = 0");
  if (z == zp) fail(ErrorKind::CoincidentPoints, "m2: z = z'");
  if (z.imag() < 0 && zp.imag() < 0) return -4.0 * pi * pi;
  if (z.imag() * zp.imag() < 0) {
    const cplx d = z - zp;
    return -(1.0 - std::exp(two_i_pi * d * sgn(d.imag()))) / (d * d);
  }
  return 0.0;
}

// E[xi'/xi(z) conj(xi'/xi(z'))]
inline cplx m2_conj(cplx z, cplx zp) {
  using namespace formulas_detail;
  off_axis(z, ErrorKind::RealPoint, "m2_conj: Im z = 0");
  off_axis(zp, ErrorKind::RealPoint, "m2_conj: Im z' = 0");
  const cplx d = z - std::conj(zp);
  if (d == cplx{0.0}) fail(ErrorKind::CoincidentWithConjugate, "m2_conj: z = conj(z')");
  cplx out = (z.imag() < 0 && zp.imag() < 0) ? cplx{4.0 * pi * pi} : cplx{0.0};
  if (z.imag() * zp.imag() > 0) out -= (1.0 - std::exp(two_i_pi * d * sgn(d.imag()))) / (d * d);
  return out;
}

inline constexpr std::size_t kMaxMomentOrder = 8;

// E[prod_j xi'/xi(z_j)] as a signed sum over permutations whose fixed points
// lie in A = {j : Im z_j < 0} and whose other cycles are 2-cycles joining A to
// its complement.
inline cplx logderiv_moment(const std::vector<cplx>& zs) {
  using namespace formulas_detail;
  const std::size_t k = zs.size();
  if (k == 0) return 1.0;
  if (k > kMaxMomentOrder) fail(ErrorKind::TooManyPoints, "logderiv_moment: at most 8 points");
  for (auto z : zs) off_axis(z, ErrorKind::RealPoint, "logderiv_moment: real point");
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (zs[i] == zs[j]) fail(ErrorKind::DuplicatePoints, "logderiv_moment: repeated point");

  std::vector<std::size_t> in_a, out_a;
  for (std::size_t j = 0; j < k; ++j) (zs[j].imag() < 0 ? in_a : out_a).push_back(j);
  // Every index outside A must be matched with a distinct index of A.
  if (out_a.size() > in_a.size()) return 0.0;

  const cplx minus_two_i_pi = -two_i_pi;
  cplx total = 0.0;
  std::vector<int> partner(k, -1);  // rho on A: -1 for a fixed point
  std::vector<bool> taken(k, false);
  // Backtracking over injective matchings out_a -> in_a; unmatched A indices
  // are fixed points. Each matched pair (a, b) is a 2-cycle.
  std::function<void(std::size_t)> rec = [&](std::size_t idx) {
    if (idx == out_a.size()) {
      std::size_t fixed = 0, cycles = 0;
      cplx term = 1.0;
      for (std::size_t a : in_a) {
        if (partner[a] < 0) {
          ++fixed;
          continue;
        }
        const auto b = static_cast<std::size_t>(partner[a]);
        ++cycles;
        // For a 2-cycle (a b): prod over j in {a, b} of 1/(z_{rho^-1 j} - z_j) = -1/(z_a - z_b)^2,
        // e^{2 i pi (z_b - z_a)} from the A-sum, and the G factor (1 - e^{2 i pi (z_a - z_b)}).
        const cplx d = zs[a] - zs[b];
        term *= -1.0 / (d * d) * std::exp(two_i_pi * (zs[b] - zs[a])) * (1.0 - std::exp(two_i_pi * d));
      }
      for (std::size_t f = 0; f < fixed; ++f) term *= minus_two_i_pi;
      total += (cycles % 2 == 0) ? term : -term;
      return;
    }
    const std::size_t b = out_a[idx];
    for (std::size_t a : in_a) {
      if (taken[a]) continue;
      taken[a] = true;
      partner[a] = static_cast<int>(b);
      rec(idx + 1);
      partner[a] = -1;
      taken[a] = false;
    }
  };
  rec(0);
  return (k % 2 == 0 ? 1.0 : -1.0) * total;
}

}  // namespace microxi
