#include "dwave/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "dwave/error.hpp"

namespace dwave {

namespace {

constexpr Complex kI{0.0, 1.0};

// (e^{ix} - 1) / (ix), accurate for small x.
Complex phase_average(double x) {
  if (x == 0.0) return 1.0;
  const double half = std::sin(0.5 * x);
  return {std::sin(x) / x, 2.0 * half * half / x};
}

double linear_interp(double x0, double y0, double x1, double y1, double x) {
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace

StateVector diagonalize(const StateVector& state, double t, const SpeedProfile& c, const Spectrum& spectrum) {
  require_matching(state, spectrum);
  const double tau = c.antiderivative(t);
  const double speed = c.eval(t);
  StateVector y = StateVector::zeros(state.size());
  for (std::size_t k = 0; k < state.size(); ++k) {
    const Complex e = std::polar(1.0, tau * spectrum.frequency(k));
    const Complex w = state.first()[k];
    const Complex z = state.second()[k];
    y.first()[k] = 0.5 * std::conj(e) * (w - kI * z / speed);
    y.second()[k] = 0.5 * e * (w + kI * z / speed);
  }
  return y;
}

StateVector undiagonalize(const StateVector& y, double t, const SpeedProfile& c, const Spectrum& spectrum) {
  require_matching(y, spectrum);
  const double tau = c.antiderivative(t);
  const double speed = c.eval(t);
  StateVector x = StateVector::zeros(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    const Complex e = std::polar(1.0, tau * spectrum.frequency(k));
    const Complex forward = e * y.first()[k];
    const Complex backward = std::conj(e) * y.second()[k];
    x.first()[k] = forward + backward;
    x.second()[k] = kI * speed * (forward - backward);
  }
  return x;
}

double truncation_time(double y0_norm, const SpeedProfile& c, const Profile& b, double tol, double max_time) {
  if (!(tol > 0.0)) throw std::invalid_argument("extract_profile: tolerance must be positive");
  auto bound = [&](double T) { return gronwall_tail_bound(y0_norm, c, b, T, kInfinity); };
  if (bound(0.0) <= tol) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (bound(hi) > tol) {
    lo = hi;
    hi *= 2.0;
    if (hi > max_time)
      throw NumericalError("extract_profile: tail bound stays above tolerance up to t = " + std::to_string(max_time));
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (bound(mid) <= tol ? hi : lo) = mid;
  }
  return hi;
}

ScatteringProfile extract_profile(const Spectrum& spectrum, const StateVector& initial, const SpeedProfile& c,
                                  const Profile& b, double tol, const IntegratorConfig& config,
                                  double max_truncation_time) {
  const StateVector y0 = diagonalize(initial, 0.0, c, spectrum);
  const double y0_norm = norm(y0);
  const double T = truncation_time(y0_norm, c, b, tol, max_truncation_time);
  if (T == 0.0) return {y0, 0.0, gronwall_tail_bound(y0_norm, c, b, 0.0, kInfinity)};
  const std::vector<double> times{0.0, T};
  const Trajectory traj = evolve(spectrum, initial, c, b, times, config);
  return {diagonalize(traj.states.back(), T, c, spectrum), T, gronwall_tail_bound(y0_norm, c, b, T, kInfinity)};
}

FreeSolution::FreeSolution(double wave_speed, StateVector amplitudes)
    : wave_speed_(wave_speed), amplitudes_(std::move(amplitudes)) {
  if (!(wave_speed_ > 0.0) || !std::isfinite(wave_speed_))
    throw std::invalid_argument("free solution needs a positive wave speed");
}

FreeSolution reconstruct_free(const ScatteringProfile& profile, const DriftClassification& drift, double c_inf,
                              const Spectrum& spectrum) {
  if (!drift.convergent())
    throw std::domain_error("reconstruct_free: drift is " + to_string(drift.kind) +
                            "; no free solution approximates the wave");
  StateVector amplitudes = unitary_shift(profile.limit, Component::First, drift.limit, spectrum);
  amplitudes.second() = unitary_shift(profile.limit.second(), -drift.limit, spectrum);
  return FreeSolution(c_inf, std::move(amplitudes));
}

StateVector free_state(const FreeSolution& free, double t, const Spectrum& spectrum) {
  require_matching(free.amplitudes(), spectrum);
  const double speed = free.wave_speed();
  StateVector x = StateVector::zeros(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const Complex e = std::polar(1.0, speed * t * spectrum.frequency(k));
    const Complex forward = e * free.phi()[k];
    const Complex backward = std::conj(e) * free.psi()[k];
    x.first()[k] = forward + backward;
    x.second()[k] = kI * speed * (forward - backward);
  }
  return x;
}

double discrepancy(const StateVector& u_state, const FreeSolution& free, double t, const Spectrum& spectrum) {
  require_matching(u_state, spectrum);
  const StateVector gap = u_state - free_state(free, t, spectrum);
  return norm(gap.first()) + norm(gap.second());
}

FreeSolution best_free_fit(const StateVector& u_state, double t0, double c_star, const Spectrum& spectrum) {
  require_matching(u_state, spectrum);
  if (!(c_star > 0.0)) throw std::invalid_argument("best_free_fit: wave speed must be positive");
  StateVector amplitudes = StateVector::zeros(spectrum.size());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const Complex e = std::polar(1.0, c_star * t0 * spectrum.frequency(k));
    const Complex w = u_state.first()[k];
    const Complex z = u_state.second()[k];
    amplitudes.first()[k] = 0.5 * std::conj(e) * (w - kI * z / c_star);
    amplitudes.second()[k] = 0.5 * e * (w + kI * z / c_star);
  }
  return FreeSolution(c_star, std::move(amplitudes));
}

Complex time_average_cross(const FreeSolution& free, double T, const Spectrum& spectrum) {
  if (!(T > 0.0)) throw std::invalid_argument("time_average_cross: T must be positive");
  require_matching(free.amplitudes(), spectrum);
  Complex sum = 0.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double x = 2.0 * free.wave_speed() * T * spectrum.frequency(k);
    sum += free.phi()[k] * std::conj(free.psi()[k]) * phase_average(x);
  }
  return sum;
}

double cross_average_constant(const FreeSolution& free, const Spectrum& spectrum) {
  require_matching(free.amplitudes(), spectrum);
  double sum = 0.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k)
    sum += std::abs(free.phi()[k]) * std::abs(free.psi()[k]) / (free.wave_speed() * spectrum.frequency(k));
  return sum;
}

double equipartition_defect(const FreeSolution& free, double T, const Spectrum& spectrum) {
  const double c = free.wave_speed();
  return 4.0 * c * c * std::abs(time_average_cross(free, T, spectrum).real());
}

double equipartition_constant(const FreeSolution& free, const Spectrum& spectrum) {
  const double c = free.wave_speed();
  return 4.0 * c * c * cross_average_constant(free, spectrum);
}

double estimate_wave_speed(const Trajectory& trajectory, double T) {
  const auto& times = trajectory.times;
  if (!(T > 0.0)) throw std::invalid_argument("estimate_wave_speed: T must be positive");
  if (times.size() < 2 || T > times.back())
    throw std::invalid_argument("estimate_wave_speed: trajectory does not cover [0, T]");
  double kinetic = 0.0;
  double potential = 0.0;
  double prev_k = std::pow(norm(trajectory.states[0].second()), 2);
  double prev_p = std::pow(norm(trajectory.states[0].first()), 2);
  for (std::size_t i = 1; i < times.size() && times[i - 1] < T; ++i) {
    const double cur_k = std::pow(norm(trajectory.states[i].second()), 2);
    const double cur_p = std::pow(norm(trajectory.states[i].first()), 2);
    const double right = std::min(times[i], T);
    const double end_k = linear_interp(times[i - 1], prev_k, times[i], cur_k, right);
    const double end_p = linear_interp(times[i - 1], prev_p, times[i], cur_p, right);
    kinetic += 0.5 * (prev_k + end_k) * (right - times[i - 1]);
    potential += 0.5 * (prev_p + end_p) * (right - times[i - 1]);
    prev_k = cur_k;
    prev_p = cur_p;
  }
  if (!(potential > 0.0)) throw std::invalid_argument("estimate_wave_speed: trivial trajectory");
  return std::sqrt(kinetic / potential);
}

double wave_speed_sample_spacing(const Spectrum& spectrum, const SpeedProfile& c) {
  const double period = 2.0 * std::numbers::pi / (c.supremum() * spectrum.max_frequency());
  return std::min(0.05, period / 20.0);
}

double phase_profile_error(const ScatteringProfile& profile, const FreeSolution& free, double drift_value,
                           const Spectrum& spectrum) {
  require_matching(profile.limit, spectrum);
  require_matching(free.amplitudes(), spectrum);
  double forward = 0.0;
  double backward = 0.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const Complex e = std::polar(1.0, drift_value * spectrum.frequency(k));
    forward += std::norm(e * profile.limit.first()[k] - free.phi()[k]);
    backward += std::norm(std::conj(e) * profile.limit.second()[k] - free.psi()[k]);
  }
  return std::sqrt(forward) + std::sqrt(backward);
}

double sufficiency_certificate(const ScatteringProfile& profile, const StateVector& initial, const SpeedProfile& c,
                               const Profile& b, const Spectrum& spectrum, double t) {
  const DriftClassification drift = c.classify_drift();
  if (!drift.convergent()) throw std::domain_error("sufficiency_certificate: drift does not converge");
  const double y0_norm = norm(diagonalize(initial, 0.0, c, spectrum));
  const double s = std::min(t, profile.truncation_time);
  const double u = std::max(t, profile.truncation_time);
  const double tail = gronwall_tail_bound(y0_norm, c, b, s, u);
  const double amplitude = norm(profile.limit.first()) + norm(profile.limit.second());
  const double phase = std::min(2.0, std::abs(c.drift(t) - drift.limit) * spectrum.max_frequency());
  const double per_component = std::sqrt(2.0) * tail + phase * amplitude;
  return (1.0 + c.eval(t)) * per_component + std::abs(c.eval(t) - c.limit()) * amplitude;
}

double antiphase_time(const SpeedProfile& c, double t0, const Spectrum& spectrum) {
  const double target = std::numbers::pi / spectrum.min_frequency();
  const double f0 = c.drift(t0);
  auto moved = [&](double t) { return std::abs(c.drift(t) - f0) >= target; };
  double lo = t0;
  double hi = std::max(2.0 * t0, t0 + 1.0);
  while (!moved(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) return kInfinity;
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (moved(mid) ? hi : lo) = mid;
  }
  return hi;
}

WitnessResult antiphase_witness(const Spectrum& spectrum, const StateVector& initial, const SpeedProfile& c,
                                const Profile& b, double t0, double t_end, const IntegratorConfig& config,
                                unsigned threads) {
  if (!(t0 > 0.0) || !(t_end > t0) || !std::isfinite(t_end))
    throw std::invalid_argument("antiphase_witness: need 0 < t0 < t_end < inf");
  const Trajectory anchor = evolve(spectrum, initial, c, b, std::vector<double>{0.0, t0}, config, threads);
  const FreeSolution fit = best_free_fit(anchor.states[1], t0, c.limit(), spectrum);

  const double spacing = wave_speed_sample_spacing(spectrum, c);
  const auto steps = static_cast<std::size_t>(std::ceil((t_end - t0) / spacing));
  auto time_at = [&](std::size_t i) {
    return i == steps ? t_end : t0 + (t_end - t0) * static_cast<double>(i) / static_cast<double>(steps);
  };

  // Streams the interval in fixed-size chunks so memory does not grow with t_end.
  constexpr std::size_t kChunk = 4096;
  const std::size_t modes = spectrum.size();
  std::vector<ModeState> current(modes);
  for (std::size_t k = 0; k < modes; ++k) current[k] = {anchor.states[1].first()[k], anchor.states[1].second()[k]};
  std::vector<std::vector<ModeState>> chunk(modes, std::vector<ModeState>(kChunk));
  std::vector<std::exception_ptr> failures(modes);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(modes)));

  WitnessResult result{t0, t_end, discrepancy(anchor.states[1], fit, t0, spectrum), t0};
  for (std::size_t first = 1; first <= steps; first += kChunk) {
    const std::size_t count = std::min(kChunk, steps + 1 - first);
    auto run_mode = [&](std::size_t k) {
      try {
        ModeState state = current[k];
        for (std::size_t j = 0; j < count; ++j) {
          state = evolve_mode(spectrum.eigenvalue(k), state, c, b, time_at(first + j - 1), time_at(first + j), config);
          chunk[k][j] = state;
        }
        current[k] = state;
      } catch (const NumericalError& e) {
        failures[k] = std::make_exception_ptr(NumericalError("mode " + std::to_string(k) + ": " + e.what()));
      } catch (...) {
        failures[k] = std::current_exception();
      }
    };
    if (workers == 1) {
      for (std::size_t k = 0; k < modes; ++k) run_mode(k);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          for (std::size_t k = w; k < modes; k += workers) run_mode(k);
        });
    }
    for (const auto& failure : failures)
      if (failure) std::rethrow_exception(failure);

    StateVector state = StateVector::zeros(modes);
    for (std::size_t j = 0; j < count; ++j) {
      for (std::size_t k = 0; k < modes; ++k) {
        state.first()[k] = chunk[k][j].w;
        state.second()[k] = chunk[k][j].z;
      }
      const double t = time_at(first + j);
      const double d = discrepancy(state, fit, t, spectrum);
      if (d > result.sup_discrepancy) {
        result.sup_discrepancy = d;
        result.argsup = t;
      }
    }
  }
  return result;
}

}  // namespace dwave
