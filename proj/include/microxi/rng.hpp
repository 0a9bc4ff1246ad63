#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (master_seed, stream_index, substream,
// block counter), so replicas can be generated in any order, on any number of
// workers, and still reproduce bit-for-bit.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "microxi/errors.hpp"

namespace microxi {

using cplx = std::complex<double>;

// Philox4x32-10 block cipher (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter encrypt(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

class SeededStream {
 public:
  SeededStream(std::uint64_t master_seed, std::uint64_t stream_index, std::uint32_t substream = 0)
      : master_seed_(master_seed), stream_index_(stream_index), substream_(substream) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::uint32_t substream_id() const { return substream_; }
  std::uint64_t counter() const { return block_; }

  // A fresh stream sharing seed and index; used to give each chain dimension
  // its own reproducible sequence.
  SeededStream substream(std::uint32_t id) const { return {master_seed_, stream_index_, id}; }

  std::uint64_t next_u64() {
    if (cached_) {
      cached_ = false;
      return cache_;
    }
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_), substream_,
                                  static_cast<std::uint32_t>(stream_index_),
                                  static_cast<std::uint32_t>(stream_index_ >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(master_seed_),
                              static_cast<std::uint32_t>(master_seed_ >> 32)};
    const auto out = Philox4x32::encrypt(ctr, key);
    ++block_;
    cache_ = (std::uint64_t{out[3]} << 32) | out[2];
    cached_ = true;
    return (std::uint64_t{out[1]} << 32) | out[0];
  }

  // Uniform on (0, 1]; never returns 0 so log() is always finite.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint32_t substream_;
  std::uint64_t block_ = 0;
  std::uint64_t cache_ = 0;
  bool cached_ = false;
};

// E|g|^2 = 1, real and imaginary parts independent N(0, 1/2).
inline cplx complex_gaussian(SeededStream& stream) {
  const double u1 = stream.uniform();
  const double u2 = stream.uniform();
  const double r = std::sqrt(-std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

inline double standard_normal(SeededStream& stream) {
  return std::sqrt(2.0) * complex_gaussian(stream).real();
}

// Uniform point on the unit sphere of C^dim.
inline std::vector<cplx> uniform_sphere(SeededStream& stream, std::size_t dim) {
  if (dim == 0) fail(ErrorKind::InvalidArgument, "uniform_sphere: dim must be positive");
  std::vector<cplx> x(dim);
  for (;;) {
    double norm2 = 0.0;
    for (auto& v : x) {
      v = complex_gaussian(stream);
      norm2 += std::norm(v);
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& v : x) v *= inv;
      return x;
    }
  }
}

}  // namespace microxi
