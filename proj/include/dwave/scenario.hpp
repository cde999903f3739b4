#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dwave/coefficients.hpp"
#include "dwave/dynamics.hpp"
#include "dwave/spectrum.hpp"

namespace dwave {

enum class ExperimentKind { Sufficiency, Necessity, WaveSpeed, Verify, Profile };

std::string to_string(ExperimentKind kind);

/// Initial data: explicit per-mode pairs, or a seed for random_state().
struct InitialData {
  std::optional<StateVector> explicit_state;
  std::optional<std::uint64_t> seed;

  StateVector realize(const Spectrum& spectrum) const;
};

struct Scenario {
  std::string name;
  ExperimentKind kind = ExperimentKind::Verify;
  Spectrum spectrum{std::vector<double>{1.0}};
  SpeedProfile speed{family::Constant{1.0}};
  Profile damping{family::Constant{0.0}};
  InitialData initial;
  double t_max = 1.0;
  std::size_t samples = 2;

  double profile_tolerance = 1e-3;
  double max_truncation_time = 1e6;
  /// Fitting time for the necessity witness; defaults to t_max / 10.
  std::optional<double> anchor_time;
  IntegratorConfig integrator;

  double anchor() const { return anchor_time.value_or(t_max / 10.0); }
};

/// Grid over (amplitude, exponent) of a power-law speed profile.
struct SweepConfig {
  Scenario base;
  std::vector<double> amplitudes;
  std::vector<double> exponents;
};

/// Strict parsers: unknown fields and type mismatches raise ConfigError naming
/// the offending field path (e.g. "$.speed.exponent").
Profile parse_profile(const nlohmann::json& j, const std::string& path);
Spectrum parse_spectrum(const nlohmann::json& j, const std::string& path);
Scenario parse_scenario(const nlohmann::json& j, const std::string& path = "$");
SweepConfig parse_sweep(const nlohmann::json& j);

nlohmann::json profile_to_json(const Profile& profile);

/// Reads and parses a JSON file; ConfigError on I/O or syntax errors.
nlohmann::json read_json_file(const std::filesystem::path& file);
Scenario load_scenario(const std::filesystem::path& file);
SweepConfig load_sweep(const std::filesystem::path& file);

}  // namespace dwave
