#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace pidcnn {

/// Seedable generator with a platform-independent output stream.
///
/// The bit source is std::mt19937_64, whose sequence is fixed by the C++
/// standard. The distributions below are written out here (std::*_distribution
/// output is implementation-defined), so a seed produces the same numbers on
/// every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open();
  /// Uniform on the open interval (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }
  /// Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
  std::size_t below(std::size_t n);
  /// Standard normal via the Box-Muller transform.
  double normal();

  /// SplitMix64 mix of (seed, stream); independent child seeds.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pidcnn
