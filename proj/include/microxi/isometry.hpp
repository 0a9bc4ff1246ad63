#pragma once

// Virtual isometries: U_n = R_n diag(U_{n-1}, 1), with R_n the rank-one
// unitary reflection sending e_n to a uniform sphere vector x_n.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "microxi/errors.hpp"
#include "microxi/rng.hpp"

namespace microxi {

using UnitaryMatrix = Eigen::MatrixXcd;
using SphereVector = std::vector<cplx>;

inline constexpr double kDegenerateTargetTol = 1e-12;

// R = I - u u* / gamma with u = e_n - x and gamma = 1 - conj(x_n).
inline UnitaryMatrix reflection_from_target(const SphereVector& x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n == 0) fail(ErrorKind::InvalidArgument, "reflection_from_target: empty vector");
  double norm2 = 0.0;
  for (const auto& v : x) norm2 += std::norm(v);
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
    fail(ErrorKind::InvalidArgument, "reflection_from_target: vector is not unit norm");
  const cplx xn = x.back();
  if (std::abs(1.0 - xn) < kDegenerateTargetTol)
    fail(ErrorKind::DegenerateTarget, "reflection_from_target: x is too close to e_n");
  Eigen::VectorXcd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = -x[i];
  u(n - 1) += 1.0;
  const cplx gamma = 1.0 - std::conj(xn);
  UnitaryMatrix r = UnitaryMatrix::Identity(n, n);
  r.noalias() -= (u * u.adjoint()) / gamma;
  return r;
}

// Computes R_n diag(prev, 1) in O(n^2) without forming R_n.
inline UnitaryMatrix apply_extension(const UnitaryMatrix& prev, const SphereVector& x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (prev.rows() != n - 1)
    fail(ErrorKind::InvalidArgument, "apply_extension: dimension mismatch");
  const cplx xn = x.back();
  if (std::abs(1.0 - xn) < kDegenerateTargetTol)
    fail(ErrorKind::DegenerateTarget, "apply_extension: x is too close to e_n");
  UnitaryMatrix m = UnitaryMatrix::Zero(n, n);
  if (n > 1) m.topLeftCorner(n - 1, n - 1) = prev;
  m(n - 1, n - 1) = 1.0;
  Eigen::VectorXcd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = -x[i];
  u(n - 1) += 1.0;
  const cplx gamma = 1.0 - std::conj(xn);
  const Eigen::RowVectorXcd row = (u.adjoint() * m) / gamma;
  m.noalias() -= u * row;
  return m;
}

inline double unitarity_residual(const UnitaryMatrix& u) {
  const auto n = u.rows();
  return (u.adjoint() * u - UnitaryMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

class VirtualIsometryChain {
 public:
  VirtualIsometryChain(std::uint64_t master_seed, std::uint64_t stream_index, bool cache = true)
      : master_seed_(master_seed), stream_index_(stream_index), cache_enabled_(cache) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::size_t max_dim() const { return vectors_.size(); }
  std::size_t redraws() const { return redraws_; }
  const std::vector<SphereVector>& sphere_vectors() const { return vectors_; }

  // Dimension n draws from substream n, so a restored chain continues exactly
  // where the original would have.
  void extend() {
    SeededStream stream(master_seed_, stream_index_, static_cast<std::uint32_t>(max_dim() + 1));
    extend(stream);
  }

  void extend(SeededStream& stream) {
    const std::size_t dim = max_dim() + 1;
    SphereVector x = uniform_sphere(stream, dim);
    while (std::abs(1.0 - x.back()) < kDegenerateTargetTol) {
      ++redraws_;
      x = uniform_sphere(stream, dim);
    }
    push(std::move(x));
  }

  void extend_to(std::size_t n) {
    while (max_dim() < n) extend();
  }

  // Appends a caller-supplied vector (replay, tests).
  void push(SphereVector x) {
    if (x.size() != max_dim() + 1)
      fail(ErrorKind::InvalidArgument, "chain push: vector has the wrong dimension");
    if (cache_enabled_) {
      top_ = apply_extension(top_ ? *top_ : UnitaryMatrix(0, 0), x);
    }
    vectors_.push_back(std::move(x));
  }

  UnitaryMatrix matrix(std::size_t n) const {
    if (n == 0 || n > max_dim()) fail(ErrorKind::OutOfRange, "chain_matrix: n out of range");
    if (cache_enabled_ && n == max_dim()) return *top_;
    return recompute(n);
  }

  UnitaryMatrix recompute(std::size_t n) const {
    if (n == 0 || n > max_dim()) fail(ErrorKind::OutOfRange, "chain_matrix: n out of range");
    UnitaryMatrix u(0, 0);
    for (std::size_t k = 0; k < n; ++k) u = apply_extension(u, vectors_[k]);
    return u;
  }

  nlohmann::json to_json() const {
    nlohmann::json vecs = nlohmann::json::array();
    for (const auto& x : vectors_) {
      nlohmann::json flat = nlohmann::json::array();
      for (const auto& v : x) {
        flat.push_back(v.real());
        flat.push_back(v.imag());
      }
      vecs.push_back(std::move(flat));
    }
    return {{"master_seed", master_seed_},
            {"stream_index", stream_index_},
            {"max_dim", max_dim()},
            {"sphere_vectors", std::move(vecs)}};
  }

  static VirtualIsometryChain from_json(const nlohmann::json& j, bool cache = true) {
    try {
      VirtualIsometryChain chain(j.at("master_seed").get<std::uint64_t>(),
                                 j.at("stream_index").get<std::uint64_t>(), cache);
      const auto& vecs = j.at("sphere_vectors");
      for (const auto& flat : vecs) {
        if (flat.size() % 2 != 0) fail(ErrorKind::ParseError, "odd-length sphere vector");
        SphereVector x(flat.size() / 2);
        for (std::size_t i = 0; i < x.size(); ++i)
          x[i] = {flat[2 * i].get<double>(), flat[2 * i + 1].get<double>()};
        chain.push(std::move(x));
      }
      if (chain.max_dim() != j.at("max_dim").get<std::size_t>())
        fail(ErrorKind::ParseError, "max_dim does not match the stored vectors");
      return chain;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::ParseError, e.what());
    }
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  bool cache_enabled_;
  std::vector<SphereVector> vectors_;
  std::optional<UnitaryMatrix> top_;
  std::size_t redraws_ = 0;
};

inline void extend_chain(VirtualIsometryChain& chain, SeededStream& stream) { chain.extend(stream); }

inline UnitaryMatrix chain_matrix(const VirtualIsometryChain& chain, std::size_t n) {
  return chain.matrix(n);
}

}  // namespace microxi
