#include "dwave/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "dwave/error.hpp"

namespace dwave {

using nlohmann::json;

void RunReport::set_scalar(const std::string& key, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("report scalar '" + key + "' is not finite");
  scalars[key] = value;
}

bool RunReport::all_passed() const {
  return std::all_of(flags.begin(), flags.end(), [](const auto& kv) { return kv.second; });
}

json to_json(const RunReport& report) {
  json j;
  j["scenario"] = report.scenario;
  j["kind"] = report.kind;
  j["drift"] = report.drift;
  j["scalars"] = json::object();
  for (const auto& [k, v] : report.scalars) j["scalars"][k] = v;
  j["flags"] = json::object();
  for (const auto& [k, v] : report.flags) j["flags"][k] = v ? "pass" : "fail";
  j["csv_files"] = report.csv_files;
  if (report.seed) j["seed"] = *report.seed;
  if (report.rng) j["rng"] = *report.rng;
  return j;
}

RunReport report_from_json(const json& j) {
  static const std::set<std::string> known{"scenario", "kind", "drift", "scalars", "flags", "csv_files", "seed", "rng"};
  if (!j.is_object()) throw ConfigError("$: report must be an object");
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ConfigError("$." + item.key() + ": unknown field");
  try {
    RunReport r;
    r.scenario = j.at("scenario").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.drift = j.at("drift").get<std::string>();
    for (const auto& [k, v] : j.at("scalars").items()) {
      if (!v.is_number()) throw ConfigError("$.scalars." + k + ": expected a number");
      r.set_scalar(k, v.get<double>());
    }
    for (const auto& [k, v] : j.at("flags").items()) {
      const auto s = v.get<std::string>();
      if (s != "pass" && s != "fail") throw ConfigError("$.flags." + k + ": expected \"pass\" or \"fail\"");
      r.flags[k] = s == "pass";
    }
    r.csv_files = j.at("csv_files").get<std::vector<std::string>>();
    if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("rng")) r.rng = j.at("rng").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("$: malformed report: ") + e.what());
  }
}

}  // namespace dwave
