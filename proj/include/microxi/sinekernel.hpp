#pragma once

// Sine-kernel point samples: windows of rescaled unitary spectra (coupling
// route) and direct determinantal sampling (Nystrom + HKPV), plus counting
// statistics of the sine process.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "microxi/errors.hpp"
#include "microxi/isometry.hpp"
#include "microxi/quadrature.hpp"
#include "microxi/rng.hpp"
#include "microxi/spectral_chain.hpp"
#include "microxi/spectrum.hpp"

namespace microxi {

enum class Provenance { Coupling, Dpp };

struct PointSample {
  std::vector<double> points;  // strictly increasing, inside [-A, A]
  double window_radius = 0.0;
  Provenance provenance = Provenance::Dpp;
  std::size_t resolution = 0;  // n for coupling samples, mesh for dpp samples
  std::uint64_t seed = 0;

  // Position of y_1 (the first point > 0) in `points`; y_0 sits just before it.
  std::size_t first_positive() const {
    return static_cast<std::size_t>(std::upper_bound(points.begin(), points.end(), 0.0) - points.begin());
  }

  std::size_t count(double a, double b) const {
    const auto lo = std::lower_bound(points.begin(), points.end(), a);
    const auto hi = std::upper_bound(points.begin(), points.end(), b);
    return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
  }

  // Same configuration seen through the smaller window [-radius, radius].
  PointSample restrict_to(double radius) const {
    if (!(radius > 0) || radius > window_radius)
      fail(ErrorKind::InvalidArgument, "restrict_to: radius must lie in (0, A]");
    PointSample out = *this;
    out.window_radius = radius;
    out.points.clear();
    for (double y : points)
      if (std::abs(y) <= radius) out.points.push_back(y);
    return out;
  }

  void write_csv(std::ostream& out) const {
    out << "# provenance=" << (provenance == Provenance::Coupling ? "coupling" : "dpp")
        << (provenance == Provenance::Coupling ? ",n=" : ",mesh=") << resolution << ",seed=" << seed
        << ",window=" << std::setprecision(17) << window_radius << "\n";
    out << "y\n";
    for (double y : points) out << std::setprecision(17) << y << "\n";
  }

  static PointSample read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# provenance=", 0) != 0)
      fail(ErrorKind::ParseError, "sample csv: missing header");
    PointSample s;
    std::istringstream hdr(line.substr(2));
    std::string field;
    bool have_window = false;
    while (std::getline(hdr, field, ',')) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const auto key = field.substr(0, eq);
      const auto val = field.substr(eq + 1);
      if (key == "provenance") {
        if (val == "coupling")
          s.provenance = Provenance::Coupling;
        else if (val == "dpp")
          s.provenance = Provenance::Dpp;
        else
          fail(ErrorKind::ParseError, "sample csv: unknown provenance");
      } else if (key == "n" || key == "mesh") {
        s.resolution = std::stoull(val);
      } else if (key == "seed") {
        s.seed = std::stoull(val);
      } else if (key == "window") {
        s.window_radius = std::stod(val);
        have_window = true;
      }
    }
    if (!have_window) fail(ErrorKind::ParseError, "sample csv: missing window");
    if (!std::getline(in, line) || line != "y") fail(ErrorKind::ParseError, "sample csv: missing column header");
    while (std::getline(in, line))
      if (!line.empty()) s.points.push_back(std::stod(line));
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (std::abs(s.points[i]) > s.window_radius) fail(ErrorKind::ParseError, "sample csv: point outside window");
      if (i > 0 && !(s.points[i] > s.points[i - 1])) fail(ErrorKind::ParseError, "sample csv: points not increasing");
    }
    return s;
  }
};

inline void check_coupling_window(std::size_t n, double A) {
  if (!(A > 0)) fail(ErrorKind::InvalidArgument, "coupling sample: A must be positive");
  if (A > 0.25 * static_cast<double>(n)) fail(ErrorKind::WindowTooLarge, "coupling sample: A exceeds n/4");
}

inline PointSample sample_via_coupling(const Spectrum& spec, double A, std::uint64_t seed = 0) {
  check_coupling_window(spec.n(), A);
  PointSample s;
  s.window_radius = A;
  s.provenance = Provenance::Coupling;
  s.resolution = spec.n();
  s.seed = seed;
  for (long long k = 0; spec.y(k) >= -A; --k) s.points.push_back(spec.y(k));
  std::reverse(s.points.begin(), s.points.end());
  for (long long k = 1; spec.y(k) <= A; ++k) s.points.push_back(spec.y(k));
  return s;
}

inline PointSample sample_via_coupling(const VirtualIsometryChain& chain, std::size_t n, double A) {
  check_coupling_window(n, A);
  return sample_via_coupling(eigenangles(chain.matrix(n)), A, chain.master_seed());
}

// Coupling-route window of a Haar spectrum of size n, locating only the
// eigenangles inside the window.
inline PointSample sample_via_coupling(std::size_t n, double A, SeededStream& stream) {
  check_coupling_window(n, A);
  PointSample s;
  s.window_radius = A;
  s.provenance = Provenance::Coupling;
  s.resolution = n;
  s.seed = stream.master_seed();
  s.points = cue_window_points(n, A, stream);
  return s;
}

// Determinantal sampler for the sine kernel on [-A, A].
class DppSampler {
 public:
  explicit DppSampler(double A, std::size_t mesh = 0) : A_(A) {
    if (!(A > 0)) fail(ErrorKind::InvalidArgument, "DppSampler: A must be positive");
    const auto min_mesh = static_cast<std::size_t>(std::ceil(40.0 * A));
    mesh_ = mesh == 0 ? std::max<std::size_t>(256, min_mesh) : mesh;
    if (mesh_ < min_mesh) fail(ErrorKind::InvalidArgument, "DppSampler: mesh must be at least 40 A");

    const auto rule = quad::gauss_legendre(static_cast<int>(mesh_), -A, A);
    const auto m = static_cast<Eigen::Index>(mesh_);
    nodes_ = Eigen::Map<const Eigen::VectorXd>(rule.nodes.data(), m);
    sqrt_w_ = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), m).cwiseSqrt();
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) k(i, j) = sqrt_w_(i) * sine_kernel(nodes_(i) - nodes_(j)) * sqrt_w_(j);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
    if (eig.info() != Eigen::Success) fail(ErrorKind::SpectralFailure, "DppSampler: eigensolver failed");
    const auto& lam = eig.eigenvalues();
    if (lam.maxCoeff() > 1.0 + 1e-6) fail(ErrorKind::SpectralFailure, "DppSampler: eigenvalue above 1");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = m - 1; i >= 0; --i)
      if (lam(i) >= 1e-10) keep.push_back(i);
    const auto r = static_cast<Eigen::Index>(keep.size());
    lambda_.resize(r);
    vectors_.resize(m, r);
    for (Eigen::Index c = 0; c < r; ++c) {
      lambda_(c) = std::clamp(lam(keep[c]), 0.0, 1.0);
      vectors_.col(c) = eig.eigenvectors().col(keep[c]);
    }
    cos_nodes_ = (std::numbers::pi * nodes_.array()).cos();
    sin_nodes_ = (std::numbers::pi * nodes_.array()).sin();

    const auto cells = static_cast<Eigen::Index>(std::ceil(2.0 * A * kGridPerUnit));
    h_ = 2.0 * A / static_cast<double>(cells);
    grid_.resize(cells + 1, r);
    for (Eigen::Index g = 0; g <= cells; ++g) grid_.row(g) = eigenfunctions(-A + h_ * static_cast<double>(g));
  }

  double window_radius() const { return A_; }
  std::size_t mesh() const { return mesh_; }
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }

  // The count on the window is a sum of independent Bernoulli(lambda).
  double count_mean() const { return lambda_.sum(); }
  double count_variance() const { return (lambda_.array() * (1.0 - lambda_.array())).sum(); }

  // All retained eigenfunctions at x, normalized in L^2[-A, A]:
  // phi(x) = (1/lambda) sum_j w_j S(x - x_j) phi(x_j) with phi(x_j) = v_j / sqrt(w_j).
  Eigen::RowVectorXd eigenfunctions(double x) const {
    const Eigen::VectorXd s = kernel_row(x);
    return (s.transpose() * vectors_).cwiseQuotient(lambda_.transpose());
  }

  struct Diagnostics {
    std::size_t proposals = 0;
    std::size_t envelope_violations = 0;
  };

  PointSample sample(SeededStream& stream, Diagnostics* diag = nullptr) const {
    PointSample out;
    out.window_radius = A_;
    out.provenance = Provenance::Dpp;
    out.resolution = mesh_;
    out.seed = stream.master_seed();

    std::vector<Eigen::Index> chosen;
    for (Eigen::Index c = 0; c < lambda_.size(); ++c)
      if (stream.uniform() <= lambda_(c)) chosen.push_back(c);
    const auto k = static_cast<Eigen::Index>(chosen.size());
    if (k == 0) return out;

    Eigen::MatrixXd basis(vectors_.rows(), k);  // columns v_c / lambda_c
    Eigen::MatrixXd grid(grid_.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) {
      basis.col(c) = vectors_.col(chosen[c]) / lambda_(chosen[c]);
      grid.col(c) = grid_.col(chosen[c]);
    }

    // Density of the next point, up to normalization: |Phi(x)|^2 minus its
    // projection on the directions already used.
    Eigen::VectorXd density = grid.rowwise().squaredNorm();
    const double bound2 = 1.5 * (2.0 * std::numbers::pi) * (2.0 * std::numbers::pi) * density.maxCoeff();
    const double slack = h_ * h_ / 8.0 * bound2;
    Eigen::MatrixXd used(k, k);
    std::vector<double> env(static_cast<std::size_t>(density.size() - 1));

    for (Eigen::Index i = 0; i < k; ++i) {
      double total = 0.0;
      for (std::size_t c = 0; c < env.size(); ++c) {
        env[c] = std::max(density(c), density(c + 1)) + slack;
        total += env[c];
      }
      for (;;) {
        double u = stream.uniform() * total;
        std::size_t cell = 0;
        while (cell + 1 < env.size() && u > env[cell]) u -= env[cell++];
        const double x = -A_ + h_ * (static_cast<double>(cell) + stream.uniform());
        const Eigen::VectorXd phi = (kernel_row(x).transpose() * basis).transpose();
        const Eigen::VectorXd proj = used.leftCols(i).transpose() * phi;
        const double p = std::max(0.0, phi.squaredNorm() - proj.squaredNorm());
        if (diag) {
          ++diag->proposals;
          if (p > env[cell]) ++diag->envelope_violations;
        }
        if (stream.uniform() * env[cell] > p) continue;
        Eigen::VectorXd e = phi - used.leftCols(i) * proj;
        e /= e.norm();
        used.col(i) = e;
        density -= (grid * e).cwiseAbs2();
        density = density.cwiseMax(0.0);
        out.points.push_back(x);
        break;
      }
    }
    std::sort(out.points.begin(), out.points.end());
    return out;
  }

 private:
  static constexpr double kGridPerUnit = 8.0;

  static double sine_kernel(double d) {
    if (std::abs(d) < 1e-8) return 1.0 - (std::numbers::pi * d) * (std::numbers::pi * d) / 6.0;
    return std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
  }

  // sqrt(w_j) S(x - x_j), with sin(pi (x - x_j)) expanded so one sincos covers all nodes.
  Eigen::VectorXd kernel_row(double x) const {
    const double c = std::cos(std::numbers::pi * x), s = std::sin(std::numbers::pi * x);
    Eigen::VectorXd row(nodes_.size());
    for (Eigen::Index j = 0; j < nodes_.size(); ++j) {
      const double d = x - nodes_(j);
      row(j) = std::abs(d) < 1e-8 ? sine_kernel(d)
                                   : (s * cos_nodes_(j) - c * sin_nodes_(j)) / (std::numbers::pi * d);
      row(j) *= sqrt_w_(j);
    }
    return row;
  }

  double A_;
  std::size_t mesh_;
  double h_ = 0.0;
  Eigen::VectorXd nodes_, sqrt_w_, cos_nodes_, sin_nodes_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd vectors_;
  Eigen::MatrixXd grid_;
};

inline PointSample sample_via_dpp(double A, std::size_t mesh, SeededStream& stream) {
  return DppSampler(A, mesh).sample(stream);
}

// Var(X_I), |I| = L, from the Fourier side:
// (2/pi^2) [ int_0^1 sin^2(pi L k)/k dk + int_1^inf sin^2(pi L k)/k^2 dk ].
inline double exact_count_variance(double L) {
  if (!(L > 0)) fail(ErrorKind::InvalidArgument, "exact_count_variance: L must be positive");
  const double pi = std::numbers::pi;
  auto near = [&](double k) {
    const double s = std::sin(pi * L * k);
    return k == 0.0 ? 0.0 : s * s / k;
  };
  const double piece = std::min(1.0, 1.0 / L);
  double first = 0.0;
  for (double a = 0.0; a < 1.0; a += piece) first += quad::integrate(near, a, std::min(1.0, a + piece), 1e-13, 1e-13).value;

  // int_1^inf sin^2/k^2 = 1/2 - (1/2) int_1^inf cos(a k)/k^2 with a = 2 pi L; the
  // cosine integral is summed out to K and closed with its asymptotic tail.
  const double a = 2.0 * pi * L;
  const double K = 1.0 + std::max(50.0, 200.0 / a);
  const double step = std::max(2.0 / L, 1e-3);
  double osc = 0.0;
  auto far = [&](double k) { return std::cos(a * k) / (k * k); };
  for (double lo = 1.0; lo < K; lo += step) osc += quad::integrate(far, lo, std::min(K, lo + step), 1e-14, 1e-13).value;
  const double sK = std::sin(a * K), cK = std::cos(a * K);
  osc += -sK / (a * K * K) + 2.0 * cK / (a * a * K * K * K) + 6.0 * sK / (a * a * a * K * K * K * K);
  const double second = 0.5 - 0.5 * osc;
  return 2.0 / (pi * pi) * (first + second);
}

inline double count_variance_bound(double L) {
  if (!(L >= 0)) fail(ErrorKind::InvalidArgument, "count_variance_bound: L must be non-negative");
  return 2.0 + 2.0 / (std::numbers::pi * std::numbers::pi) * std::log1p(L);
}

// Bound on P(|X_I - E X_I| >= t).
inline double count_tail_bound(double t, double variance) {
  if (!(t >= 0)) fail(ErrorKind::InvalidArgument, "count_tail_bound: t must be non-negative");
  if (!(variance > 0)) fail(ErrorKind::InvalidArgument, "count_tail_bound: variance must be positive");
  return std::exp(-std::min(t * t / (4.0 * variance), 0.5 * t));
}

}  // namespace microxi
