#pragma once

// Spectra without dense eigensolvers.
//
// SpectralChain grows the virtual-isometry spectrum one dimension at a time:
// the new eigenangles are the roots of the secular equation of the rank-one
// multiplicative update, one root strictly between consecutive old angles.
//
// cue_spectrum draws a single Haar spectrum from independent Verblunsky
// coefficients (Killip-Nenciu) and locates the eigenangles through the Prufer
// phase of the Szego recursion, O(n^2) per spectrum.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "microxi/errors.hpp"
#include "microxi/isometry.hpp"
#include "microxi/rng.hpp"
#include "microxi/spectrum.hpp"

namespace microxi {

namespace detail {

struct SecularRest {
  double value = 0.0;
  double slope = 0.0;
};

// Solves w_l cot(dl/2) + w_r cot(dr/2) + rest + slope (d - d0) = c on the open
// interval, with d measured from the origin pole (dl = d + shift_l, dr = d + shift_r).
// The root lies in the half of the interval nearer the origin pole.
inline double solve_secular_model(double w_l, double w_r, double shift_l, double shift_r,
                                  double rest, double slope, double d0, double c, double lo,
                                  double hi, double start) {
  auto model = [&](double d, double& deriv) {
    const double cl = 1.0 / std::tan(0.5 * (d + shift_l));
    const double cr = 1.0 / std::tan(0.5 * (d + shift_r));
    deriv = -0.5 * w_l * (1.0 + cl * cl) - 0.5 * w_r * (1.0 + cr * cr) + slope;
    return w_l * cl + w_r * cr + rest + slope * (d - d0) - c;
  };
  double d = std::clamp(start, lo, hi);
  if (!(d > lo && d < hi)) d = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double deriv = 0.0;
    const double g = model(d, deriv);
    if (g == 0) return d;
    // Newton on d * g(d): the origin pole cancels and what is left is close
    // to linear, while plain Newton on a 1/d shape overshoots.
    const double step = d * g / (g + d * deriv);
    if (std::abs(step) <= 2e-16 * std::abs(d)) return d;
    if (g > 0)
      lo = d;
    else
      hi = d;
    double next = d - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 2e-16 * std::max(std::abs(lo), std::abs(hi))) return next;
    d = next;
  }
  return d;
}

}  // namespace detail

// New eigenangles after the rank-one update.
//   poles   : old angles, sorted in (0, 2 pi), size n (pole 0 is implicit)
//   weights : size n + 1; weights[0] belongs to the pole at 0, weights[k] to poles[k-1]
//   c       : right-hand side, twice the imaginary part of the last target coordinate
inline std::vector<double> secular_update(const std::vector<double>& poles,
                                          const std::vector<double>& weights, double c) {
  const std::size_t n = poles.size();
  if (weights.size() != n + 1) fail(ErrorKind::InvalidArgument, "secular_update: weight count");
  if (n == 0) return {2.0 * std::atan2(weights[0], c)};
  std::vector<double> p(n + 2);
  p[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) p[k + 1] = poles[k];
  p[n + 1] = kTwoPi;
  std::vector<double> ch(n + 1), sh(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    ch[k] = std::cos(0.5 * p[k]);
    sh[k] = std::sin(0.5 * p[k]);
  }

  // Smooth part of the secular function on interval j: every pole except the
  // two bounding ones (j and j+1, the latter being pole 0 again when j = n).
  auto rest_at = [&](double phi, std::size_t j) {
    detail::SecularRest r;
    const double cp = std::cos(0.5 * phi), sp = std::sin(0.5 * phi);
    auto accumulate = [&](std::size_t from, std::size_t to) {
      double v0 = 0.0, v1 = 0.0, s0 = 0.0, s1 = 0.0;
      std::size_t k = from;
      for (; k + 1 < to; k += 2) {
        const double sa = sp * ch[k] - cp * sh[k], ca = cp * ch[k] + sp * sh[k];
        const double sb = sp * ch[k + 1] - cp * sh[k + 1], cb = cp * ch[k + 1] + sp * sh[k + 1];
        const double ia = 1.0 / sa, ib = 1.0 / sb;
        v0 += weights[k] * ca * ia;
        v1 += weights[k + 1] * cb * ib;
        s0 += weights[k] * ia * ia;
        s1 += weights[k + 1] * ib * ib;
      }
      for (; k < to; ++k) {
        const double sa = sp * ch[k] - cp * sh[k], ca = cp * ch[k] + sp * sh[k];
        const double ia = 1.0 / sa;
        v0 += weights[k] * ca * ia;
        s0 += weights[k] * ia * ia;
      }
      r.value += v0 + v1;
      r.slope -= 0.5 * (s0 + s1);
    };
    if (j < n) {
      accumulate(0, j);
      accumulate(j + 2, n + 1);
    } else {
      accumulate(1, n);
    }
    return r;
  };

  std::vector<double> roots(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const std::size_t right = (j + 1) % (n + 1);
    const double gap = p[j + 1] - p[j];
    const double w_l = weights[j], w_r = weights[right];
    const double mid = 0.5 * gap;
    auto rest = rest_at(p[j] + mid, j);
    const double f_mid = w_l / std::tan(0.5 * mid) + w_r / std::tan(-0.5 * mid) + rest.value;
    // f decreases across the interval; the sign at the midpoint picks the
    // nearer pole as origin so small offsets keep full relative precision.
    const bool from_left = f_mid <= c;
    const double origin = from_left ? p[j] : p[j + 1];
    const double shift_l = from_left ? 0.0 : gap;
    const double shift_r = from_left ? -gap : 0.0;
    double lo = from_left ? 0.0 : -mid;
    double hi = from_left ? mid : 0.0;
    double d = from_left ? mid : -mid;
    if (f_mid == c) {
      roots[j] = p[j] + mid;
      continue;
    }
    double last_step = 1e300;
    for (int iter = 0; iter < 60; ++iter) {
      const double next = detail::solve_secular_model(w_l, w_r, shift_l, shift_r, rest.value,
                                                      rest.slope, d, c, lo, hi, d);
      const double step = std::abs(next - d);
      d = next;
      // Convergence is quadratic, so a relative step of 1e-11 leaves an error
      // far below rounding; a non-shrinking step means the rounding floor.
      if (step <= 1e-11 * std::abs(d) || step >= last_step || iter == 59) break;
      last_step = step;
      rest = rest_at(origin + d, j);
      // Keep an outer bracket from the true sign.
      const double hl = 0.5 * (d + shift_l), hr = 0.5 * (d + shift_r);
      const double f = w_l / std::tan(hl) + w_r / std::tan(hr) + rest.value;
      if (f > c)
        lo = std::max(lo, d);
      else if (f < c)
        hi = std::min(hi, d);
      else
        break;
    }
    roots[j] = origin + d;
  }
  return roots;
}

// Spectral version of the virtual-isometry chain. The sphere vector drawn at
// dimension n+1 is read as coordinates in the eigenbasis of diag(U_n, 1),
// which is again uniform on the sphere and independent of the past.
class SpectralChain {
 public:
  SpectralChain(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed), stream_index_(stream_index) {}

  std::size_t dim() const { return angles_.size(); }
  const std::vector<double>& angles() const { return angles_; }
  std::size_t redraws() const { return redraws_; }

  void extend() {
    SeededStream stream(master_seed_, stream_index_, static_cast<std::uint32_t>(dim() + 1));
    SphereVector x = uniform_sphere(stream, dim() + 1);
    while (std::abs(1.0 - x.back()) < kDegenerateTargetTol) {
      ++redraws_;
      x = uniform_sphere(stream, dim() + 1);
    }
    extend_with(x);
  }

  void extend_to(std::size_t n) {
    while (dim() < n) extend();
  }

  // x[k] (k < n) is the coordinate on the eigenvector of angles()[k];
  // x[n] is the coordinate on the new basis vector.
  void extend_with(const SphereVector& x) {
    const std::size_t n = dim();
    if (x.size() != n + 1) fail(ErrorKind::InvalidArgument, "spectral chain: wrong dimension");
    std::vector<double> w(n + 1);
    w[0] = std::norm(1.0 - x[n]);
    for (std::size_t k = 0; k < n; ++k) w[k + 1] = std::norm(x[k]);
    angles_ = secular_update(angles_, w, 2.0 * x[n].imag());
  }

  Spectrum spectrum() const { return Spectrum::from_angles(angles_); }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::vector<double> angles_;
  std::size_t redraws_ = 0;
};

// Verblunsky coefficients of a Haar CMV matrix of size n: alpha_k has
// |alpha_k|^2 = 1 - V^(1/(n-k-1)) with uniform phase; alpha_{n-1} is on the circle.
inline std::vector<cplx> cue_verblunsky(std::size_t n, SeededStream& stream) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "cue_verblunsky: n must be positive");
  std::vector<cplx> alpha(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = kTwoPi * stream.uniform();
    double r = 1.0;
    if (k + 1 < n) {
      const double v = stream.uniform();
      const double m = static_cast<double>(n - k - 1);
      r = std::sqrt(-std::expm1(std::log(v) / m));
    }
    alpha[k] = std::polar(r, phase);
  }
  return alpha;
}

// Monic orthogonal polynomial Phi_n(z) of the Szego recursion; for Haar
// Verblunsky data it is det(z - U).
inline cplx szego_phi(const std::vector<cplx>& alpha, cplx z) {
  cplx phi = 1.0, star = 1.0;
  for (const auto& a : alpha) {
    const cplx next = z * phi - std::conj(a) * star;
    star = star - a * z * phi;
    phi = next;
  }
  return phi;
}

// Phi_n and its derivative, differentiating the recursion term by term.
inline std::pair<cplx, cplx> szego_phi_deriv(const std::vector<cplx>& alpha, cplx z) {
  cplx phi = 1.0, star = 1.0, dphi = 0.0, dstar = 0.0;
  for (const auto& a : alpha) {
    const cplx ca = std::conj(a);
    const cplx next = z * phi - ca * star;
    const cplx dnext = phi + z * dphi - ca * dstar;
    dstar = dstar - a * (phi + z * dphi);
    star = star - a * z * phi;
    phi = next;
    dphi = dnext;
  }
  return {phi, dphi};
}

// xi_n and its logarithmic derivative straight from Verblunsky data, O(n) per
// point and no eigenangles needed. Phi_n(x) = det(x - U) differs from Z_n(x)
// by a constant factor, which cancels in xi_n.
class VerblunskyXi {
 public:
  explicit VerblunskyXi(std::vector<cplx> alpha)
      : alpha_(std::move(alpha)), n_(static_cast<double>(alpha_.size())), at_one_(szego_phi(alpha_, 1.0)) {}

  cplx node(cplx z) const { return std::exp(cplx{0.0, kTwoPi / n_} * z); }
  cplx xi(cplx z) const { return szego_phi(alpha_, node(z)) / at_one_; }
  cplx logderiv(cplx z) const {
    const cplx w = node(z);
    const auto [phi, dphi] = szego_phi_deriv(alpha_, w);
    return cplx{0.0, kTwoPi / n_} * w * dphi / phi;
  }
  std::size_t n() const { return alpha_.size(); }

 private:
  std::vector<cplx> alpha_;
  double n_;
  cplx at_one_;
};

struct PruferPhase {
  double psi;
  double dpsi;
  double dlogmod;  // d/dtheta log |Phi*_{n-1}(e^{i theta})|
};

// Continuous phase psi(theta) of z B(z) with B = Phi_{n-1} / Phi*_{n-1}, z = e^{i theta}.
inline PruferPhase prufer_phase(const std::vector<cplx>& alpha, double theta) {
  // Written out in real arithmetic: this is the inner loop of every Haar
  // spectrum draw.
  const double zr = std::cos(theta), zi = std::sin(theta);
  double br = zr, bi = zi;
  double psi = theta, dpsi = 1.0, dlogmod = 0.0;
  for (std::size_t k = 0; k + 1 < alpha.size(); ++k) {
    const double ar = alpha[k].real(), ai = alpha[k].imag();
    const double qr = 1.0 - (ar * br - ai * bi);
    const double qi = -(ar * bi + ai * br);
    const double q2 = qr * qr + qi * qi;
    // Phi*_{k+1} = Phi*_k q
    dlogmod -= dpsi * qi / q2;
    psi += theta - 2.0 * std::atan2(qi, qr);
    dpsi = 1.0 + dpsi * (1.0 - (ar * ar + ai * ai)) / q2;
    // b <- z b conj(q)^2 / |q|^2
    const double mr = (qr * qr - qi * qi) / q2, mi = -2.0 * qr * qi / q2;
    const double tr = br * mr - bi * mi, ti = br * mi + bi * mr;
    br = zr * tr - zi * ti;
    bi = zr * ti + zi * tr;
    const double fix = 1.5 - 0.5 * (br * br + bi * bi);
    br *= fix;
    bi *= fix;
  }
  return {psi, dpsi, dlogmod};
}

// Eigenangles in the open arc (lo, hi) with 0 <= lo < hi <= 2 pi.
//
// On the circle Phi_n = Phi*_{n-1} (B - conj(alpha_{n-1})), so the roots are
// those of the smooth real function |Phi*_{n-1}| sin((psi - target) / 2).
// The phase alone is a staircase (steep near each root, flat in between) and
// Newton on it stalls on the flat parts; the modulus factor restores a
// polynomial-like shape. The phase still provides an exact bracket.
inline std::vector<double> prufer_roots(const std::vector<cplx>& alpha, double lo, double hi) {
  const double base = -std::arg(alpha.back());
  const double spacing = kTwoPi / static_cast<double>(alpha.size());
  const auto a = prufer_phase(alpha, lo);
  const auto b = prufer_phase(alpha, hi);
  const double first = std::floor((a.psi - base) / kTwoPi) + 1.0;
  const double last = std::ceil((b.psi - base) / kTwoPi) - 1.0;
  std::vector<double> roots;
  double left = lo;
  for (double j = first; j <= last; j += 1.0) {
    const double target = base + kTwoPi * j;
    double bl = left, bh = hi;
    double t = roots.empty() ? lo + 0.5 * spacing : left + spacing;
    if (!(t > bl && t < bh)) t = 0.5 * (bl + bh);
    for (int iter = 0; iter < 200; ++iter) {
      const auto ev = prufer_phase(alpha, t);
      const double g = ev.psi - target;
      if (g == 0) break;
      const double half = 0.5 * g;
      const double step = std::abs(g) < kTwoPi
                              ? std::sin(half) / (ev.dlogmod * std::sin(half) + 0.5 * ev.dpsi * std::cos(half))
                              : g / ev.dpsi;
      if (std::abs(step) <= 1e-15 * std::max(1.0, t)) break;
      if (g < 0)
        bl = t;
      else
        bh = t;
      double next = t - step;
      if (!(next > bl && next < bh)) next = 0.5 * (bl + bh);
      if (bh - bl <= 4e-16 * std::max(1.0, t)) break;
      t = next;
    }
    roots.push_back(t);
    left = t;
  }
  return roots;
}

// One Haar-distributed spectrum of size n.
inline Spectrum cue_spectrum(std::size_t n, SeededStream& stream) {
  for (;;) {
    const auto alpha = cue_verblunsky(n, stream);
    auto roots = prufer_roots(alpha, 0.0, kTwoPi);
    if (roots.size() != n) fail(ErrorKind::EigensolverFailure, "cue_spectrum: root count");
    try {
      return Spectrum::from_angles(std::move(roots));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AngleCollision) throw;
    }
  }
}

// Rescaled points y = n theta / (2 pi) of a Haar spectrum lying in [-A, A],
// sorted; only the eigenangles inside the window are located.
inline std::vector<double> cue_window_points(std::size_t n, double A, SeededStream& stream) {
  const double nd = static_cast<double>(n);
  if (!(A > 0) || 2.0 * A >= nd) fail(ErrorKind::WindowTooLarge, "cue_window_points: A >= n/2");
  const auto alpha = cue_verblunsky(n, stream);
  const double cut = kTwoPi * A / nd;
  std::vector<double> ys;
  for (double t : prufer_roots(alpha, kTwoPi - cut, kTwoPi)) ys.push_back(nd * (t - kTwoPi) / kTwoPi);
  for (double t : prufer_roots(alpha, 0.0, cut)) ys.push_back(nd * t / kTwoPi);
  return ys;
}

}  // namespace microxi
