#include "dwave/dynamics.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dwave/error.hpp"

namespace dwave {

namespace {

namespace odeint = boost::numeric::odeint;

// (Re w, Im w, Re z, Im z). The system has real coefficients, so real and
// imaginary parts evolve independently.
using Vec = std::array<double, 4>;

struct ModeSystem {
  double sqrt_lambda;
  const Profile& c;
  const Profile& b;
  double eval_lo;
  double eval_hi;

  void operator()(const Vec& x, Vec& dxdt, double t) const {
    const double te = std::clamp(t, eval_lo, eval_hi);
    const double cv = c.eval(te);
    const double bv = b.eval(te);
    const double stiffness = cv * cv * sqrt_lambda;
    dxdt[0] = sqrt_lambda * x[2];
    dxdt[1] = sqrt_lambda * x[3];
    dxdt[2] = -stiffness * x[0] - bv * x[2];
    dxdt[3] = -stiffness * x[1] - bv * x[3];
  }
};

std::string where(double t) {
  std::ostringstream os;
  os.precision(17);
  os << t;
  return os.str();
}

template <class Controlled>
void integrate_segment(Controlled& stepper, const ModeSystem& system, Vec& x, double lo, double hi,
                       double& dt, const IntegratorConfig& config) {
  double t = lo;
  while (t < hi) {
    const double h = std::min({dt, hi - t, config.max_step});
    const bool reaches_end = h >= hi - t;
    double t_try = t;
    double h_try = h;
    const auto result = stepper.try_step(system, x, t_try, h_try);
    if (result == odeint::success) {
      t = reaches_end ? hi : t_try;
      dt = reaches_end ? std::max(dt, h_try) : h_try;
      for (double v : x)
        if (!std::isfinite(v)) throw NumericalError("non-finite state at t = " + where(t));
    } else {
      dt = h_try;
      if (dt < 1e-13 * std::max(1.0, std::abs(t)))
        throw NumericalError("step-size underflow at t = " + where(t));
    }
  }
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("integrator tolerances must be positive");
  if (!(max_step > 0.0) || !std::isfinite(max_step))
    throw std::invalid_argument("integrator max_step must be positive");
}

ModeState evolve_mode(double lambda, ModeState initial, const SpeedProfile& c, const Profile& b,
                      double t0, double t1, const IntegratorConfig& config) {
  config.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("evolve_mode: lambda must be positive");
  if (!(t0 >= 0.0) || !(t1 >= t0) || !std::isfinite(t1))
    throw std::invalid_argument("evolve_mode: need 0 <= t0 <= t1 < inf");
  if (t0 == t1) return initial;

  std::vector<double> cuts{t0};
  if (config.breakpoint_splitting) {
    for (const Profile* p : {static_cast<const Profile*>(&c), &b})
      for (double x : p->breakpoints())
        if (x > t0 && x < t1) cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  }
  cuts.push_back(t1);

  auto stepper = odeint::make_controlled<odeint::runge_kutta_fehlberg78<Vec>>(config.abs_tol, config.rel_tol);
  Vec x{initial.w.real(), initial.w.imag(), initial.z.real(), initial.z.imag()};
  const double sqrt_lambda = std::sqrt(lambda);
  double dt = std::min(config.max_step, t1 - t0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    // Inside [lo, hi) the coefficients are smooth; a stage landing on hi must
    // still see the left-hand value of a jump there.
    const bool closed_right = config.breakpoint_splitting && i + 2 < cuts.size();
    const double eval_hi = closed_right ? std::nextafter(hi, lo) : kInfinity;
    const double eval_lo = config.breakpoint_splitting ? lo : 0.0;
    const ModeSystem system{sqrt_lambda, c, b, eval_lo, eval_hi};
    integrate_segment(stepper, system, x, lo, hi, dt, config);
  }
  return {Complex(x[0], x[1]), Complex(x[2], x[3])};
}

Trajectory evolve(const Spectrum& spectrum, const StateVector& initial, const SpeedProfile& c,
                  const Profile& b, std::span<const double> sample_times, const IntegratorConfig& config,
                  unsigned threads) {
  require_matching(initial, spectrum);
  if (!initial.all_finite()) throw std::invalid_argument("evolve: initial state is not finite");
  if (sample_times.empty() || sample_times.front() != 0.0)
    throw std::invalid_argument("evolve: sample times must start at 0");
  for (std::size_t i = 1; i < sample_times.size(); ++i)
    if (!(sample_times[i] > sample_times[i - 1]) || !std::isfinite(sample_times[i]))
      throw std::invalid_argument("evolve: sample times must be strictly increasing and finite");
  config.validate();

  const std::size_t modes = spectrum.size();
  const std::size_t samples = sample_times.size();
  std::vector<std::vector<ModeState>> per_mode(modes, std::vector<ModeState>(samples));
  std::vector<std::exception_ptr> failures(modes);

  auto run_mode = [&](std::size_t k) {
    try {
      ModeState state{initial.first()[k], initial.second()[k]};
      per_mode[k][0] = state;
      for (std::size_t i = 1; i < samples; ++i) {
        state = evolve_mode(spectrum.eigenvalue(k), state, c, b, sample_times[i - 1], sample_times[i], config);
        per_mode[k][i] = state;
      }
    } catch (const NumericalError& e) {
      failures[k] = std::make_exception_ptr(NumericalError("mode " + std::to_string(k) + ": " + e.what()));
    } catch (...) {
      failures[k] = std::current_exception();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(modes)));
  if (workers == 1) {
    for (std::size_t k = 0; k < modes; ++k) run_mode(k);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < modes; k += workers) run_mode(k);
      });
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  Trajectory out{spectrum, {sample_times.begin(), sample_times.end()}, {}, c, b};
  out.states.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    StateVector s = StateVector::zeros(modes);
    for (std::size_t k = 0; k < modes; ++k) {
      s.first()[k] = per_mode[k][i].w;
      s.second()[k] = per_mode[k][i].z;
    }
    out.states.push_back(std::move(s));
  }
  return out;
}

ModeState closed_form_constant(double lambda, ModeState initial, double c0, double t) {
  if (!(c0 > 0.0)) throw std::invalid_argument("closed_form_constant: c0 must be positive");
  const double phase = c0 * std::sqrt(lambda) * t;
  const double cs = std::cos(phase);
  const double sn = std::sin(phase);
  return {initial.w * cs + initial.z / c0 * sn, -c0 * initial.w * sn + initial.z * cs};
}

double energy(const StateVector& state, double c_value) {
  double kinetic = 0.0;
  double potential = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k) {
    kinetic += std::norm(state.second()[k]);
    potential += std::norm(state.first()[k]);
  }
  return 0.5 * kinetic + 0.5 * c_value * c_value * potential;
}

double energy_lower_bound(double energy_at_start, const SpeedProfile& c, const Profile& b) {
  if (!(energy_at_start >= 0.0)) throw std::invalid_argument("energy_lower_bound: energy must be >= 0");
  const double exponent = -2.0 * b.l1_norm(0.0, kInfinity) - 2.0 / c.infimum() * c.total_variation(0.0, kInfinity);
  return energy_at_start * std::exp(exponent);
}

double gronwall_constant(const SpeedProfile& c) {
  const double c0 = c.infimum();
  const double cmax = c.supremum();
  const double norm_y = std::sqrt(2.0) * std::max(1.0, cmax);
  const double norm_y_inv = std::sqrt(2.0) / 2.0 * std::max(1.0, 1.0 / c0);
  return norm_y * norm_y_inv * std::max({cmax, 1.0 / c0, 1.0 / (c0 * c0)});
}

double gronwall_tail_bound(double y0_norm, const SpeedProfile& c, const Profile& b, double s, double t) {
  if (!(y0_norm >= 0.0)) throw std::invalid_argument("gronwall_tail_bound: norm must be >= 0");
  if (!(s <= t)) throw std::invalid_argument("gronwall_tail_bound: need s <= t");
  if (y0_norm == 0.0) return 0.0;
  const double k1 = gronwall_constant(c);
  const double local = c.outer_variation(s, t) + b.l1_norm(s, t);
  if (local == 0.0) return 0.0;
  const double growth = std::exp(k1 * c.total_variation(0.0, kInfinity) + b.l1_norm(0.0, kInfinity));
  return k1 * local * growth * y0_norm;
}

}  // namespace dwave
