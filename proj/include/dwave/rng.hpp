#pragma once

#include <cstdint>
#include <optional>

#include "dwave/spectrum.hpp"

namespace dwave {

/// SplitMix64 in counter mode ("splitmix64-v1"): output k is
/// mix(seed + (k + 1) * 0x9E3779B97F4A7C15) with the standard SplitMix64
/// finalizer. Gaussians come from Box-Muller on 53-bit uniforms, both values of
/// each pair used in order. Fully specified so other implementations can replay it.
class SplitMix64 {
 public:
  static constexpr const char* kName = "splitmix64-v1";

  explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Circular complex Gaussian with E|z|^2 = 1.
  Complex complex_normal();

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_;
};

/// Per mode k (ascending): w_k then z_k, each a complex_normal draw.
StateVector random_state(std::uint64_t seed, std::size_t modes);

}  // namespace dwave
