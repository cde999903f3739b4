#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwave/dynamics.hpp"
#include "dwave/scenario.hpp"

namespace dwave {

using Evolver = std::function<Trajectory(const Spectrum&, const StateVector&, const SpeedProfile&, const Profile&,
                                         std::span<const double>, const IntegratorConfig&, unsigned)>;

struct VerifyOptions {
  /// Multiplies every numerical tolerance; 0 demands exact agreement.
  double tol_scale = 1.0;
  unsigned threads = 1;
  std::size_t random_scenarios = 100;
  /// Called with a stage name before each group of checks runs.
  std::function<void(const std::string&)> progress;
  /// Trajectory source for the dynamics and scattering checks.
  Evolver evolver = [](const Spectrum& s, const StateVector& x, const SpeedProfile& c, const Profile& b,
                       std::span<const double> t, const IntegratorConfig& cfg,
                       unsigned threads) { return evolve(s, x, c, b, t, cfg, threads); };
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   ///< worst value observed
  double threshold = 0.0;  ///< pass iff measured <= threshold
  std::string detail;
  std::optional<std::uint64_t> seed;  ///< scenario to replay for the worst case
};

/// Seeded scenario with three random modes, random speed and integrable damping
/// families and horizon 40; the same seed always yields the same scenario.
Scenario random_scenario(std::uint64_t seed);

std::vector<CheckResult> verify_all(const VerifyOptions& options = {});

/// "PASS name measured=... threshold=... [seed=...] detail".
std::string format_check(const CheckResult& check);

}  // namespace dwave
