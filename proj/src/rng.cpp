#include "dwave/rng.hpp"

#include <cmath>
#include <numbers>

namespace dwave {

std::uint64_t SplitMix64::next() {
  ++counter_;
  std::uint64_t z = seed_ + counter_ * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Complex SplitMix64::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex(re, im) / std::sqrt(2.0);
}

StateVector random_state(std::uint64_t seed, std::size_t modes) {
  SplitMix64 rng(seed);
  StateVector state = StateVector::zeros(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    state.first()[k] = rng.complex_normal();
    state.second()[k] = rng.complex_normal();
  }
  return state;
}

}  // namespace dwave
