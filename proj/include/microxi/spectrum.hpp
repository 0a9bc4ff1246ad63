#pragma once

// Eigenangles of a unitary matrix, periodically indexed, and the rescaled
// points y_k = n theta_k / (2 pi).

#include <Eigen/Eigenvalues>
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

namespace microxi {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kAngleCollisionTol = 1e-12;
inline constexpr double kModulusTol = 1e-8;

class Spectrum {
 public:
  Spectrum() = default;

  // Sorts and validates; angles are reduced into [0, 2 pi) first.
  static Spectrum from_angles(std::vector<double> angles, double tolerance = 0.0) {
    for (auto& a : angles) {
      if (!std::isfinite(a)) fail(ErrorKind::InvalidArgument, "non-finite eigenangle");
      a = std::fmod(a, kTwoPi);
      if (a < 0) a += kTwoPi;
    }
    std::sort(angles.begin(), angles.end());
    if (angles.empty()) fail(ErrorKind::InvalidArgument, "empty spectrum");
    if (angles.front() < kAngleCollisionTol || kTwoPi - angles.back() < kAngleCollisionTol)
      fail(ErrorKind::AngleCollision, "eigenangle within tolerance of 0");
    for (std::size_t i = 1; i < angles.size(); ++i)
      if (angles[i] - angles[i - 1] < kAngleCollisionTol)
        fail(ErrorKind::AngleCollision, "two eigenangles coincide within tolerance");
    Spectrum s;
    s.angles_ = std::move(angles);
    s.tolerance_ = tolerance;
    const double n = static_cast<double>(s.angles_.size());
    s.ybase_.reserve(s.angles_.size());
    for (double a : s.angles_) s.ybase_.push_back(n * a / kTwoPi);
    return s;
  }

  std::size_t n() const { return angles_.size(); }
  const std::vector<double>& angles() const { return angles_; }
  double tolerance() const { return tolerance_; }

  // theta_{k+n} = theta_k + 2 pi, theta_0 < 0 < theta_1.
  double theta(long long k) const {
    const auto [q, r] = split(k);
    return angles_[r] + kTwoPi * static_cast<double>(q);
  }

  double y(long long k) const {
    const auto [q, r] = split(k);
    return ybase_[r] + static_cast<double>(q) * static_cast<double>(n());
  }

  // Signed number of points y_k in (0, z] (z >= 0) or -(number in (z, 0]).
  long long counting(double z) const {
    const auto nn = static_cast<long long>(n());
    const double nd = static_cast<double>(nn);
    const auto q = static_cast<long long>(std::floor(z / nd));
    const double r = z - static_cast<double>(q) * nd;
    const double tol = kAngleCollisionTol * nd;
    for (double yb : ybase_)
      if (std::abs(yb - r) < tol || std::abs(yb - r - nd) < tol || std::abs(yb - r + nd) < tol)
        fail(ErrorKind::BoundaryHit, "counting: z coincides with a point");
    const auto below = std::upper_bound(ybase_.begin(), ybase_.end(), r) - ybase_.begin();
    // Points in (0, z] for z >= 0; the same formula gives minus the count in (z, 0] for z < 0.
    return q * nn + static_cast<long long>(below);
  }

  void write_csv(std::ostream& out, std::uint64_t seed) const {
    out << "# n=" << n() << ",seed=" << seed << ",tolerance=" << std::setprecision(17)
        << tolerance_ << "\n";
    out << "angle\n";
    for (double a : angles_) out << std::setprecision(17) << a << "\n";
  }

  static Spectrum read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# n=", 0) != 0)
      fail(ErrorKind::ParseError, "spectrum csv: missing header");
    std::size_t n = 0;
    double tol = 0.0;
    {
      std::istringstream hdr(line.substr(2));
      std::string field;
      while (std::getline(hdr, field, ',')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const auto key = field.substr(0, eq);
        const auto val = field.substr(eq + 1);
        if (key == "n") n = std::stoull(val);
        if (key == "tolerance") tol = std::stod(val);
      }
    }
    if (!std::getline(in, line) || line != "angle")
      fail(ErrorKind::ParseError, "spectrum csv: missing column header");
    std::vector<double> angles;
    while (std::getline(in, line))
      if (!line.empty()) angles.push_back(std::stod(line));
    if (angles.size() != n) fail(ErrorKind::ParseError, "spectrum csv: count mismatch");
    return from_angles(std::move(angles), tol);
  }

 private:
  std::pair<long long, std::size_t> split(long long k) const {
    const auto nn = static_cast<long long>(n());
    long long q = (k - 1) / nn;
    long long r = (k - 1) % nn;
    if (r < 0) {
      r += nn;
      --q;
    }
    return {q, static_cast<std::size_t>(r)};
  }

  std::vector<double> angles_;
  std::vector<double> ybase_;
  double tolerance_ = 0.0;
};

// Schur form of a unitary matrix is diagonal up to rounding; eigenvalues are
// renormalized onto the circle before taking arguments.
inline Spectrum eigenangles(const UnitaryMatrix& u) {
  if (u.rows() == 0 || u.rows() != u.cols())
    fail(ErrorKind::InvalidArgument, "eigenangles: matrix must be square and non-empty");
  Eigen::ComplexSchur<UnitaryMatrix> schur(u, false);
  if (schur.info() != Eigen::Success) fail(ErrorKind::EigensolverFailure, "Schur iteration failed");
  const auto& t = schur.matrixT();
  std::vector<double> angles;
  angles.reserve(u.rows());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const cplx lambda = t(i, i);
    const double mod = std::abs(lambda);
    worst = std::max(worst, std::abs(mod - 1.0));
    if (std::abs(mod - 1.0) > kModulusTol)
      fail(ErrorKind::EigensolverFailure, "eigenvalue off the unit circle");
    double a = std::arg(lambda / mod);
    if (a < 0) a += kTwoPi;
    angles.push_back(a);
  }
  return Spectrum::from_angles(std::move(angles), worst);
}

inline double y(const Spectrum& spec, long long k) { return spec.y(k); }
inline long long counting(const Spectrum& spec, double z) { return spec.counting(z); }

}  // namespace microxi
