#include "dwave/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "dwave/error.hpp"
#include "dwave/rng.hpp"

namespace dwave {

namespace {

using nlohmann::json;

// Tracks which keys of a JSON object were consumed so leftovers can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& field(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(sub(key) + ": missing required field");
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = field(key);
    if (!v.is_number()) throw ConfigError(sub(key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(sub(key) + ": must be finite");
    return x;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = field(key);
    if (!v.is_number_unsigned()) throw ConfigError(sub(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    const json& v = field(key);
    if (!v.is_string()) throw ConfigError(sub(key) + ": expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key) {
    const json& v = field(key);
    if (!v.is_boolean()) throw ConfigError(sub(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = field(key);
    if (!v.is_array()) throw ConfigError(sub(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(sub(key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::string sub(const std::string& key) const { return path_ + "." + key; }

  // Rejects unknown keys before any field is read, so typos are named directly.
  void only(std::initializer_list<const char*> allowed) const {
    for (const auto& item : j_.items())
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; }))
        throw ConfigError(sub(item.key()) + ": unknown field");
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(sub(item.key()) + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Re-raises construction errors from domain types as config errors at `path`.
template <class F>
auto at_path(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ExperimentKind parse_kind(const std::string& name, const std::string& path) {
  for (ExperimentKind k : {ExperimentKind::Sufficiency, ExperimentKind::Necessity, ExperimentKind::WaveSpeed,
                           ExperimentKind::Verify, ExperimentKind::Profile})
    if (to_string(k) == name) return k;
  throw ConfigError(path + ": unknown experiment kind '" + name +
                    "' (expected sufficiency, necessity, wave_speed, verify or profile)");
}

InitialData parse_initial(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  InitialData data;
  if (r.has("explicit") == r.has("random"))
    throw ConfigError(path + ": give exactly one of \"explicit\" or \"random\"");
  if (r.has("explicit")) {
    const json& rows = r.field("explicit");
    const std::string rows_path = r.sub("explicit");
    if (!rows.is_array() || rows.empty()) throw ConfigError(rows_path + ": expected a non-empty array");
    StateVector state = StateVector::zeros(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const std::string row_path = rows_path + "[" + std::to_string(k) + "]";
      const json& row = rows[k];
      if (!row.is_array() || row.size() != 4)
        throw ConfigError(row_path + ": expected [w_re, w_im, z_re, z_im]");
      std::array<double, 4> v{};
      for (std::size_t i = 0; i < 4; ++i) {
        if (!row[i].is_number()) throw ConfigError(row_path + ": entries must be numbers");
        v[i] = row[i].get<double>();
      }
      state.first()[k] = Complex(v[0], v[1]);
      state.second()[k] = Complex(v[2], v[3]);
    }
    if (!state.all_finite()) throw ConfigError(rows_path + ": entries must be finite");
    data.explicit_state = std::move(state);
  } else {
    ObjectReader rr(r.field("random"), r.sub("random"));
    data.seed = rr.unsigned_integer("seed");
    rr.finish();
  }
  r.finish();
  return data;
}

IntegratorConfig parse_integrator(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  IntegratorConfig config;
  config.rel_tol = r.number_or("rel_tol", config.rel_tol);
  config.abs_tol = r.number_or("abs_tol", config.abs_tol);
  config.max_step = r.number_or("max_step", config.max_step);
  if (r.has("breakpoint_splitting")) config.breakpoint_splitting = r.boolean("breakpoint_splitting");
  r.finish();
  at_path(path, [&] {
    config.validate();
    return 0;
  });
  return config;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Sufficiency: return "sufficiency";
    case ExperimentKind::Necessity: return "necessity";
    case ExperimentKind::WaveSpeed: return "wave_speed";
    case ExperimentKind::Verify: return "verify";
    case ExperimentKind::Profile: return "profile";
  }
  return "verify";
}

StateVector InitialData::realize(const Spectrum& spectrum) const {
  if (explicit_state) {
    require_matching(*explicit_state, spectrum);
    return *explicit_state;
  }
  if (seed) return random_state(*seed, spectrum.size());
  throw std::invalid_argument("initial data has neither explicit values nor a seed");
}

Profile parse_profile(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string name = r.string("family");
  Profile::Family fam;
  if (name == "constant") {
    r.only({"family", "value"});
    fam = family::Constant{r.number("value")};
  } else if (name == "piecewise_linear") {
    r.only({"family", "times", "values"});
    fam = family::PiecewiseLinear{r.numbers("times"), r.numbers("values")};
  } else if (name == "power") {
    r.only({"family", "c_inf", "amplitude", "exponent"});
    fam = family::PowerPerturbation{r.number("c_inf"), r.number("amplitude"), r.number("exponent")};
  } else if (name == "exponential") {
    r.only({"family", "c_inf", "amplitude", "rate"});
    fam = family::ExpPerturbation{r.number("c_inf"), r.number("amplitude"), r.number("rate")};
  } else if (name == "step") {
    r.only({"family", "jumps", "values"});
    fam = family::StepFunction{r.numbers("jumps"), r.numbers("values")};
  } else {
    throw ConfigError(r.sub("family") + ": unknown family '" + name +
                      "' (expected constant, piecewise_linear, power, exponential or step)");
  }
  r.finish();
  return at_path(path, [&] { return Profile(fam); });
}

json profile_to_json(const Profile& profile) {
  json j;
  j["family"] = profile.family_name();
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, family::Constant>) {
          j["value"] = f.value;
        } else if constexpr (std::is_same_v<F, family::PiecewiseLinear>) {
          j["times"] = f.times;
          j["values"] = f.values;
        } else if constexpr (std::is_same_v<F, family::PowerPerturbation>) {
          j["c_inf"] = f.c_inf;
          j["amplitude"] = f.amplitude;
          j["exponent"] = f.exponent;
        } else if constexpr (std::is_same_v<F, family::ExpPerturbation>) {
          j["c_inf"] = f.c_inf;
          j["amplitude"] = f.amplitude;
          j["rate"] = f.rate;
        } else {
          j["jumps"] = f.jumps;
          j["values"] = f.values;
        }
      },
      profile.family());
  return j;
}

Spectrum parse_spectrum(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  if (r.has("eigenvalues")) {
    auto values = r.numbers("eigenvalues");
    r.finish();
    return at_path(path, [&] { return Spectrum(std::move(values)); });
  }
  const std::string generator = r.string("generator");
  if (generator != "dirichlet_interval")
    throw ConfigError(r.sub("generator") + ": unknown generator '" + generator + "'");
  const std::uint64_t modes = r.unsigned_integer("modes");
  const double length = r.number("length");
  r.finish();
  return at_path(path, [&] { return Spectrum::dirichlet_interval(modes, length); });
}

Scenario parse_scenario(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  r.only({"name", "kind", "spectrum", "speed", "damping", "initial", "t_max", "samples", "profile_tolerance",
          "max_truncation_time", "anchor_time", "integrator"});
  Scenario s;
  s.name = r.string("name");
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
    throw ConfigError(r.sub("name") + ": must be a non-empty file-name-safe string");
  s.kind = parse_kind(r.string("kind"), r.sub("kind"));
  s.spectrum = parse_spectrum(r.field("spectrum"), r.sub("spectrum"));
  const Profile speed = parse_profile(r.field("speed"), r.sub("speed"));
  s.speed = at_path(r.sub("speed"), [&] { return SpeedProfile(speed); });
  if (r.has("damping")) s.damping = parse_profile(r.field("damping"), r.sub("damping"));
  s.initial = parse_initial(r.field("initial"), r.sub("initial"));
  if (s.initial.explicit_state && s.initial.explicit_state->size() != s.spectrum.size())
    throw ConfigError(r.sub("initial") + ": explicit data has " + std::to_string(s.initial.explicit_state->size()) +
                      " modes, spectrum has " + std::to_string(s.spectrum.size()));
  s.t_max = r.number("t_max");
  if (!(s.t_max > 0.0)) throw ConfigError(r.sub("t_max") + ": must be positive");
  const std::uint64_t samples = r.unsigned_integer("samples");
  if (samples < 2) throw ConfigError(r.sub("samples") + ": must be at least 2");
  s.samples = samples;
  s.profile_tolerance = r.number_or("profile_tolerance", s.profile_tolerance);
  if (!(s.profile_tolerance > 0.0)) throw ConfigError(r.sub("profile_tolerance") + ": must be positive");
  s.max_truncation_time = r.number_or("max_truncation_time", s.max_truncation_time);
  if (!(s.max_truncation_time > 0.0)) throw ConfigError(r.sub("max_truncation_time") + ": must be positive");
  if (r.has("anchor_time")) {
    s.anchor_time = r.number("anchor_time");
    if (!(*s.anchor_time > 0.0) || !(*s.anchor_time < s.t_max))
      throw ConfigError(r.sub("anchor_time") + ": must lie in (0, t_max)");
  }
  if (r.has("integrator")) s.integrator = parse_integrator(r.field("integrator"), r.sub("integrator"));
  r.finish();
  return s;
}

SweepConfig parse_sweep(const json& j) {
  ObjectReader r(j, "$");
  r.only({"base", "grid"});
  SweepConfig config{parse_scenario(r.field("base"), "$.base"), {}, {}};
  if (config.base.speed.family_name() != "power")
    throw ConfigError("$.base.speed.family: sweeps vary a power-law speed profile");
  ObjectReader grid(r.field("grid"), "$.grid");
  config.amplitudes = grid.numbers("amplitude");
  config.exponents = grid.numbers("exponent");
  grid.finish();
  if (config.amplitudes.empty() || config.exponents.empty())
    throw ConfigError("$.grid: amplitude and exponent lists must be non-empty");
  for (std::size_t i = 0; i < config.exponents.size(); ++i)
    if (!(config.exponents[i] > 0.0) || !std::isfinite(config.exponents[i]))
      throw ConfigError("$.grid.exponent[" + std::to_string(i) + "]: must be positive");
  for (std::size_t i = 0; i < config.amplitudes.size(); ++i)
    if (!std::isfinite(config.amplitudes[i]))
      throw ConfigError("$.grid.amplitude[" + std::to_string(i) + "]: must be finite");
  r.finish();
  return config;
}

json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& file) { return parse_scenario(read_json_file(file)); }

SweepConfig load_sweep(const std::filesystem::path& file) { return parse_sweep(read_json_file(file)); }

}  // namespace dwave
