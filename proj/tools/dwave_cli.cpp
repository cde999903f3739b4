#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dwave/error.hpp"
#include "dwave/experiments.hpp"
#include "dwave/verify.hpp"

namespace {

enum Exit { kOk = 0, kInvariantFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

void print_report(const dwave::RunReport& r) {
  std::cout << r.scenario << " [" << r.kind << ", drift " << r.drift << "]\n";
  for (const auto& [k, v] : r.scalars) std::cout << "  " << k << " = " << dwave::format_number(v) << "\n";
  for (const auto& [k, v] : r.flags) std::cout << "  " << (v ? "PASS " : "FAIL ") << k << "\n";
  for (const auto& f : r.csv_files) std::cout << "  wrote " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulator for damped wave equations with time-dependent speed"};
  app.require_subcommand(1);

  std::optional<std::filesystem::path> out_dir;
  unsigned threads = 1;
  app.add_option("--out-dir", out_dir, "Directory for CSV and JSON outputs (overrides $DWAVE_OUT_DIR)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::filesystem::path config;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("config", config, "Scenario JSON file")->required();
  auto* sweep = app.add_subcommand("sweep", "Run an (amplitude, exponent) grid of power-law scenarios");
  sweep->add_option("config", config, "Sweep JSON file")->required();
  double tol_scale = 1.0;
  auto* verify = app.add_subcommand("verify", "Check every invariant on built-in and seeded fixtures");
  verify->add_option("--tol-scale", tol_scale, "Multiplier applied to all tolerances")->check(CLI::NonNegativeNumber);
  bool verbose = false;
  verify->add_flag("--verbose", verbose, "Report each stage and its duration on stderr");

  for (CLI::App* sub : {run, sweep, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const dwave::RunOptions options{dwave::resolve_out_dir(out_dir), threads};
  try {
    if (*run) {
      const dwave::RunReport report = dwave::run_scenario(config, options);
      print_report(report);
      return report.all_passed() ? kOk : kInvariantFailure;
    }
    if (*sweep) {
      const dwave::SweepResult result = dwave::sweep(config, options);
      int code = kOk;
      for (const auto& cell : result.cells) {
        std::cout << "a=" << dwave::format_number(cell.amplitude) << " p=" << dwave::format_number(cell.exponent)
                  << " " << dwave::to_string(cell.drift);
        if (cell.report) {
          std::cout << (cell.report->all_passed() ? " ok" : " invariant failure");
          if (!cell.report->all_passed() && code == kOk) code = kInvariantFailure;
        } else {
          std::cout << " error: " << cell.error;
          code = cell.numerical_failure ? kNumericalFailure : (code == kNumericalFailure ? code : kConfigError);
        }
        std::cout << "\n";
      }
      std::cout << "wrote " << result.summary.generic_string() << "\n";
      return code;
    }
    dwave::VerifyOptions vopt;
    vopt.tol_scale = tol_scale;
    vopt.threads = threads;
    auto last = std::chrono::steady_clock::now();
    std::string current;
    auto lap = [&](const std::string& next) {
      const auto now = std::chrono::steady_clock::now();
      if (!current.empty())
        std::cerr << "  " << current << ": " << std::chrono::duration<double>(now - last).count() << " s\n";
      current = next;
      last = now;
    };
    if (verbose) vopt.progress = lap;
    bool ok = true;
    for (const auto& check : dwave::verify_all(vopt)) {
      std::cout << dwave::format_check(check) << "\n";
      ok = ok && check.passed;
    }
    if (verbose) lap("");
    return ok ? kOk : kInvariantFailure;
  } catch (const dwave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const dwave::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}
