#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dwave {

struct RunReport {
  std::string scenario;
  std::string kind;
  std::string drift;  ///< to_string(DriftKind)
  std::map<std::string, double> scalars;
  std::map<std::string, bool> flags;
  /// File names relative to the directory holding the report.
  std::vector<std::string> csv_files;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> rng;

  /// Throws std::invalid_argument for non-finite values.
  void set_scalar(const std::string& key, double value);
  bool all_passed() const;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

nlohmann::json to_json(const RunReport& report);
/// Inverse of to_json; ConfigError on schema violations.
RunReport report_from_json(const nlohmann::json& j);

}  // namespace dwave
