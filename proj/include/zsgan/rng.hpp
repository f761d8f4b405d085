#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "zsgan/matrix.hpp"

namespace zsgan {

/// Counter-based random stream: each draw is a pure function of (seed, counter),
/// so a stream can be copied, replayed, or split without changing the sequence.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  RngStream() = default;
  explicit RngStream(std::uint64_t s) : seed(mix(s ^ 0x5851f42d4c957f2dULL)) {}

  /// Independent child stream; draws from it do not advance this one.
  RngStream derive(std::uint64_t tag) const {
    RngStream child;
    child.seed = mix(seed + mix(tag ^ 0x9e3779b97f4a7c15ULL));
    return child;
  }

  std::uint64_t next_u64() { return mix(seed + ++counter * 0x9e3779b97f4a7c15ULL); }

  /// Uniform draw in [0, 1).
  double next_uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes two counter slots per draw.
  double next_gaussian() {
    const double u1 = next_uniform01();
    const double u2 = next_uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }
};

inline Matrix sample_gaussian(RngStream& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.next_gaussian();
  return m;
}

inline std::vector<double> sample_uniform01(RngStream& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.next_uniform01();
  return v;
}

}  // namespace zsgan
