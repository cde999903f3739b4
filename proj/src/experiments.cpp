#include "dwave/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "dwave/dynamics.hpp"
#include "dwave/error.hpp"
#include "dwave/rng.hpp"
#include "dwave/scattering.hpp"

namespace dwave {

namespace {

// Relative slack granted to comparisons against a-priori bounds for integrator error.
constexpr double kIntegratorBudget = 1e-8;
// The witness window is cut here; the sup over a shorter window is still a lower
// bound for the sup up to the antiphase time.
constexpr double kWitnessHorizon = 1e5;

struct Grid {
  std::vector<double> times;
  std::vector<std::size_t> sample_index;  ///< position of each configured sample
  std::size_t tenth_index = 0;
  std::size_t anchor_index = 0;
};

// Configured samples plus t_max/10 and the anchor, each gap refined to the
// wave-speed spacing so the running averages are resolved.
Grid build_grid(const Scenario& s) {
  std::vector<double> keys;
  for (std::size_t i = 0; i < s.samples; ++i)
    keys.push_back(i + 1 == s.samples ? s.t_max
                                      : s.t_max * static_cast<double>(i) / static_cast<double>(s.samples - 1));
  const double tenth = s.t_max / 10.0;
  const double anchor = s.anchor();
  keys.push_back(tenth);
  keys.push_back(anchor);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  const double spacing = wave_speed_sample_spacing(s.spectrum, s.speed);
  Grid g;
  g.times.push_back(keys.front());
  for (std::size_t i = 1; i < keys.size(); ++i) {
    const double a = keys[i - 1];
    const double b = keys[i];
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / spacing)));
    for (std::size_t j = 1; j < m; ++j) g.times.push_back(a + (b - a) * static_cast<double>(j) / static_cast<double>(m));
    g.times.push_back(b);
  }
  auto index_of = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(g.times.begin(), g.times.end(), t) - g.times.begin());
  };
  for (std::size_t i = 0; i < s.samples; ++i)
    g.sample_index.push_back(index_of(i + 1 == s.samples ? s.t_max
                                                        : s.t_max * static_cast<double>(i) /
                                                              static_cast<double>(s.samples - 1)));
  g.tenth_index = index_of(tenth);
  g.anchor_index = index_of(anchor);
  return g;
}

bool is_constant(const Profile& p) { return p.infimum() == p.supremum(); }

std::optional<double> try_energy_lower_bound(double f0, const SpeedProfile& c, const Profile& b) {
  try {
    return energy_lower_bound(f0, c, b);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

ScatteringProfile profile_or_config_error(const Scenario& s, const StateVector& initial) {
  try {
    return extract_profile(s.spectrum, initial, s.speed, s.damping, s.profile_tolerance, s.integrator,
                           s.max_truncation_time);
  } catch (const std::domain_error& e) {
    throw ConfigError("$.damping: " + std::string(e.what()));
  }
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

}  // namespace

std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& file, const std::string& content) {
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

RunReport run_scenario(const Scenario& s, const RunOptions& options) {
  const SpeedProfile& c = s.speed;
  const Profile& b = s.damping;
  const Spectrum& spectrum = s.spectrum;
  const StateVector initial = s.initial.realize(spectrum);
  const DriftClassification drift = c.classify_drift();

  if (s.kind == ExperimentKind::Sufficiency && !drift.convergent())
    throw ConfigError("$.speed: sufficiency experiments need convergent drift, got " + to_string(drift.kind));

  RunReport report;
  report.scenario = s.name;
  report.kind = to_string(s.kind);
  report.drift = to_string(drift.kind);
  if (s.initial.seed) {
    report.seed = *s.initial.seed;
    report.rng = SplitMix64::kName;
  }

  const Grid grid = build_grid(s);
  const Trajectory traj = evolve(spectrum, initial, c, b, grid.times, s.integrator, options.threads);
  const ScatteringProfile profile = profile_or_config_error(s, initial);

  const bool fit = s.kind == ExperimentKind::Necessity || !drift.convergent();
  const FreeSolution free = fit ? best_free_fit(traj.states[grid.anchor_index], s.anchor(), c.limit(), spectrum)
                                : reconstruct_free(profile, drift, c.limit(), spectrum);

  const double y0_norm = norm(diagonalize(initial, 0.0, c, spectrum));
  const double f0 = energy(initial, c.eval(0.0));

  // Per-sample series on the fine grid.
  const std::size_t n = grid.times.size();
  std::vector<double> D(n), F(n), gap(n), c_est(n);
  double kinetic = 0.0;
  double potential = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.times[i];
    const StateVector& x = traj.states[i];
    D[i] = discrepancy(x, free, t, spectrum);
    F[i] = energy(x, c.eval(t));
    gap[i] = norm(diagonalize(x, t, c, spectrum) - profile.limit);
    const double zz = norm(std::span<const Complex>(x.second()));
    const double ww = norm(std::span<const Complex>(x.first()));
    if (i == 0) {
      c_est[i] = ww > 0.0 ? zz / ww : kInfinity;
    } else {
      const StateVector& prev = traj.states[i - 1];
      const double h = 0.5 * (t - grid.times[i - 1]);
      const double zp = norm(std::span<const Complex>(prev.second()));
      const double wp = norm(std::span<const Complex>(prev.first()));
      kinetic += h * (zp * zp + zz * zz);
      potential += h * (wp * wp + ww * ww);
      c_est[i] = potential > 0.0 ? std::sqrt(kinetic / potential) : kInfinity;
    }
  }

  std::string csv = csv_line(kTimeSeriesColumns);
  for (std::size_t idx : grid.sample_index)
    csv += csv_line({format_number(grid.times[idx]), format_number(D[idx]), format_number(F[idx]),
                     format_number(gap[idx]), format_number(c_est[idx])});

  const std::size_t last = n - 1;
  const double d_final = D[last];
  const double d_tenth = D[grid.tenth_index];
  const double profile_norm = norm(profile.limit);
  const double f_min = *std::min_element(F.begin(), F.end());
  const std::optional<double> f_lower = try_energy_lower_bound(f0, c, b);

  report.set_scalar("D_final", d_final);
  report.set_scalar("D_tenth", d_tenth);
  report.set_scalar("profile_norm", profile_norm);
  report.set_scalar("tail_certificate", profile.tail_bound);
  report.set_scalar("truncation_time", profile.truncation_time);
  report.set_scalar("energy_initial", f0);
  report.set_scalar("energy_final", F[last]);
  report.set_scalar("energy_min", f_min);
  if (f_lower) report.set_scalar("energy_lower_bound", *f_lower);
  report.set_scalar("equipartition_defect", equipartition_defect(free, s.t_max, spectrum));
  report.set_scalar("equipartition_constant", equipartition_constant(free, spectrum));
  if (std::isfinite(c_est[last])) {
    report.set_scalar("wave_speed_estimate", c_est[last]);
    report.set_scalar("wave_speed_error", std::abs(c_est[last] - c.limit()));
  }

  const double slack = kIntegratorBudget * std::max(1.0, y0_norm);
  auto energy_flag = [&] {
    if (f_lower) report.flags["energy_lower_bound"] = f_min >= *f_lower * (1.0 - kIntegratorBudget);
  };

  switch (s.kind) {
    case ExperimentKind::Sufficiency: {
      const double certificate = sufficiency_certificate(profile, initial, c, b, spectrum, s.t_max);
      report.set_scalar("certificate_final", certificate);
      // Once D has reached integrator noise there is no decrease left to observe.
      report.flags["D_decreasing"] = d_final < d_tenth || d_tenth <= slack;
      report.flags["D_within_certificate"] = d_final <= certificate + slack;
      energy_flag();
      break;
    }
    case ExperimentKind::Necessity: {
      report.flags["drift_divergent"] = !drift.convergent();
      const double t_star = antiphase_time(c, s.anchor(), spectrum);
      bool witnessed = false;
      if (!drift.convergent() && std::isfinite(t_star)) {
        const double t_end = std::min(t_star, std::max(kWitnessHorizon, 2.0 * s.anchor()));
        const WitnessResult w = antiphase_witness(spectrum, initial, c, b, s.anchor(), t_end, s.integrator,
                                                  options.threads);
        report.set_scalar("antiphase_time", t_star);
        report.set_scalar("witness_end", t_end);
        report.set_scalar("witness_sup", w.sup_discrepancy);
        report.set_scalar("witness_argsup", w.argsup);
        witnessed = w.sup_discrepancy >= profile_norm;
      }
      report.flags["witness"] = witnessed;
      break;
    }
    case ExperimentKind::WaveSpeed:
      report.flags["wave_speed_identified"] =
          std::isfinite(c_est[last]) && std::abs(c_est[last] - c.limit()) <= 1e-2;
      break;
    case ExperimentKind::Verify: {
      double roundtrip = 0.0;
      double identity = 0.0;
      double freeze = 0.0;
      double energy_drift = 0.0;
      bool monotone = true;
      bool gronwall = true;
      const StateVector y_start = diagonalize(initial, 0.0, c, spectrum);
      StateVector y_prev = y_start;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.times[i];
        const StateVector& x = traj.states[i];
        const StateVector y = diagonalize(x, t, c, spectrum);
        const double x_norm = std::max(norm(x), 1e-300);
        roundtrip = std::max(roundtrip, norm(undiagonalize(y, t, c, spectrum) - x) / x_norm);
        const double cy = c.eval(t) * norm(y);
        identity = std::max(identity, std::abs(F[i] - cy * cy) / std::max(F[i], 1e-300));
        freeze = std::max(freeze, norm(y - y_start));
        energy_drift = std::max(energy_drift, std::abs(F[i] - f0));
        if (i > 0) {
          monotone = monotone && F[i] <= F[i - 1] * (1.0 + 1e-10);
          const double s0 = grid.times[i - 1];
          gronwall = gronwall && norm(y - y_prev) <= gronwall_tail_bound(y0_norm, c, b, s0, t) + slack &&
                     norm(y - y_start) <= gronwall_tail_bound(y0_norm, c, b, 0.0, t) + slack;
        }
        y_prev = y;
      }
      report.set_scalar("roundtrip_error", roundtrip);
      report.set_scalar("energy_identity_error", identity);
      report.flags["roundtrip"] = roundtrip <= 1e-13;
      report.flags["energy_identity"] = identity <= 1e-12;
      report.flags["gronwall"] = gronwall;
      energy_flag();
      const bool undamped = is_constant(b) && b.eval(0.0) == 0.0;
      if (is_constant(c) && undamped) {
        report.set_scalar("freeze_deviation", freeze);
        report.set_scalar("energy_deviation", energy_drift);
        report.flags["freeze"] = freeze <= slack;
        report.flags["energy_conserved"] = energy_drift <= kIntegratorBudget * std::max(f0, 1.0);
      } else if (is_constant(c) && b.infimum() >= 0.0) {
        report.flags["damped_monotone"] = monotone;
      }
      break;
    }
    case ExperimentKind::Profile: {
      bool nontrivial = profile_norm > 0.0;
      if (f_lower) {
        const double floor = std::sqrt(*f_lower) / c.supremum();
        report.set_scalar("profile_norm_floor", floor);
        nontrivial = nontrivial && profile_norm >= floor * (1.0 - kIntegratorBudget);
      }
      report.flags["profile_nontrivial"] = nontrivial;
      break;
    }
  }

  std::filesystem::create_directories(options.out_dir);
  const std::filesystem::path csv_path = options.out_dir / (s.name + ".csv");
  write_file_atomic(csv_path, csv);
  report.csv_files.push_back(csv_path.filename().generic_string());
  write_file_atomic(options.out_dir / (s.name + ".report.json"), to_json(report).dump(2) + "\n");
  return report;
}

RunReport run_scenario(const std::filesystem::path& config, const RunOptions& options) {
  return run_scenario(load_scenario(config), options);
}

SweepResult sweep(const SweepConfig& config, const RunOptions& options) {
  const auto& base_power = std::get<family::PowerPerturbation>(config.base.speed.family());
  SweepResult result;
  for (double a : config.amplitudes)
    for (double p : config.exponents) {
        SweepCell cell;
        cell.amplitude = a;
        cell.exponent = p;
        result.cells.push_back(std::move(cell));
      }

  const RunOptions cell_options{options.out_dir, 1};
  auto run_cell = [&](std::size_t i) {
    SweepCell& cell = result.cells[i];
    try {
      Scenario s = config.base;
      const std::size_t row = i / config.exponents.size();
      const std::size_t col = i % config.exponents.size();
      s.name = config.base.name + "_a" + std::to_string(row) + "_p" + std::to_string(col);
      s.speed = SpeedProfile(family::PowerPerturbation{base_power.c_inf, cell.amplitude, cell.exponent});
      cell.drift = s.speed.classify_drift().kind;
      s.kind = cell.drift == DriftKind::Convergent ? ExperimentKind::Sufficiency : ExperimentKind::Necessity;
      cell.report = run_scenario(s, cell_options);
    } catch (const NumericalError& e) {
      cell.error = e.what();
      cell.numerical_failure = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, result.cells.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++) run_cell(i);
      });
  }

  std::string table = csv_line(kSweepColumns);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepCell& cell : result.cells) {
    auto scalar = [&](const char* key) {
      if (!cell.report) return nan;
      auto it = cell.report->scalars.find(key);
      return it == cell.report->scalars.end() ? nan : it->second;
    };
    table += csv_line({format_number(cell.amplitude), format_number(cell.exponent), to_string(cell.drift),
                       format_number(scalar("D_final")), format_number(scalar("witness_sup"))});
  }
  std::filesystem::create_directories(options.out_dir);
  result.summary = options.out_dir / (config.base.name + "_sweep.csv");
  write_file_atomic(result.summary, table);
  return result;
}

SweepResult sweep(const std::filesystem::path& config, const RunOptions& options) {
  return sweep(load_sweep(config), options);
}

std::vector<Scenario> builtin_scenarios() {
  const Spectrum spectrum = Spectrum::dirichlet_interval(3, std::numbers::pi);
  auto make = [&](std::string name, ExperimentKind kind, Profile::Family c, Profile::Family b, std::uint64_t seed) {
    Scenario s;
    s.name = std::move(name);
    s.kind = kind;
    s.spectrum = spectrum;
    s.speed = SpeedProfile(std::move(c));
    s.damping = Profile(std::move(b));
    s.initial.seed = seed;
    s.t_max = 100.0;
    s.samples = 101;
    return s;
  };
  using namespace family;
  std::vector<Scenario> all{
      make("free-constant", ExperimentKind::Verify, Constant{1.5}, Constant{0.0}, 1),
      make("power-p2", ExperimentKind::Sufficiency, PowerPerturbation{1.0, 1.0, 2.0}, Constant{0.0}, 2),
      make("power-p2-damped", ExperimentKind::Sufficiency, PowerPerturbation{1.0, 1.0, 2.0},
           PowerPerturbation{0.0, 1.0, 2.0}, 3),
      make("exp-decay", ExperimentKind::WaveSpeed, ExpPerturbation{1.0, 0.5, 1.0}, ExpPerturbation{0.0, 0.2, 1.0}, 4),
      make("piecewise-ramp", ExperimentKind::Verify, PiecewiseLinear{{0.0, 1.0, 2.0}, {2.0, 3.0, 2.0}},
           Constant{0.0}, 5),
      make("step-jump", ExperimentKind::Verify, StepFunction{{1.0}, {1.0, 2.0}}, Constant{0.0}, 6),
      make("power-p1", ExperimentKind::Necessity, PowerPerturbation{1.0, 1.0, 1.0}, Constant{0.0}, 7),
      make("power-p0.5", ExperimentKind::Necessity, PowerPerturbation{1.0, 1.0, 0.5}, Constant{0.0}, 8),
  };
  // Slowly decaying tails need looser profile tolerances to keep T_trunc near 1e5.
  all[2].profile_tolerance = 1e-2;
  all[6].profile_tolerance = 1e-2;
  all[7].profile_tolerance = 0.5;
  return all;
}

}  // namespace dwave
