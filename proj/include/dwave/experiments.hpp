#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dwave/coefficients.hpp"
#include "dwave/report.hpp"
#include "dwave/scenario.hpp"

namespace dwave {

/// Environment variable that overrides the default output directory.
inline constexpr const char* kOutDirEnv = "DWAVE_OUT_DIR";

struct RunOptions {
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
};

/// Precedence: explicit flag, then $DWAVE_OUT_DIR, then the working directory.
std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& flag);

/// Shortest decimal string that parses back to the same double.
std::string format_number(double x);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& file, const std::string& content);

inline const std::vector<std::string> kTimeSeriesColumns{"t", "D", "F", "y_gap", "c_est"};
inline const std::vector<std::string> kSweepColumns{"a", "p", "drift_kind", "D_final", "witness_sup"};

/// Evolves the scenario, extracts the scattering profile, builds the comparison
/// free wave and writes <name>.csv and <name>.report.json into options.out_dir.
/// Throws ConfigError for scenarios that cannot be run as configured and
/// NumericalError when integration fails.
RunReport run_scenario(const Scenario& scenario, const RunOptions& options = {});
RunReport run_scenario(const std::filesystem::path& config, const RunOptions& options = {});

struct SweepCell {
  double amplitude = 0.0;
  double exponent = 0.0;
  DriftKind drift = DriftKind::Indeterminate;
  std::optional<RunReport> report;
  std::string error;
  bool numerical_failure = false;
};

struct SweepResult {
  std::vector<SweepCell> cells;  ///< row-major: amplitude outer, exponent inner
  std::filesystem::path summary;
};

/// Runs one scenario per grid cell: sufficiency for convergent drift, necessity
/// otherwise. Cell failures are recorded, never propagated. Cells run on
/// options.threads workers; outputs do not depend on the thread count.
SweepResult sweep(const SweepConfig& config, const RunOptions& options = {});
SweepResult sweep(const std::filesystem::path& config, const RunOptions& options = {});

/// Small ready-made scenarios (three Dirichlet modes on [0, pi]).
std::vector<Scenario> builtin_scenarios();

}  // namespace dwave
