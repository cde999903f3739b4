#pragma once

#include <span>
#include <vector>

#include "dwave/coefficients.hpp"
#include "dwave/spectrum.hpp"

namespace dwave {

struct IntegratorConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = 0.1;
  /// Restart the integrator at every breakpoint of c and b.
  bool breakpoint_splitting = true;

  void validate() const;
  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

/// One spectral mode: w is the coefficient of A^{1/2}u, z that of u'.
struct ModeState {
  Complex w;
  Complex z;
  friend bool operator==(const ModeState&, const ModeState&) = default;
};

/// Integrates w' = sqrt(lambda) z, z' = -c(t)^2 sqrt(lambda) w - b(t) z from t0 to t1
/// with an embedded Runge-Kutta-Fehlberg 7(8) pair.
/// Throws NumericalError on step-size underflow or non-finite values.
ModeState evolve_mode(double lambda, ModeState initial, const SpeedProfile& c, const Profile& b,
                      double t0, double t1, const IntegratorConfig& config = {});

struct Trajectory {
  Spectrum spectrum;
  std::vector<double> times;
  std::vector<StateVector> states;
  SpeedProfile speed;
  Profile damping;
};

/// Runs evolve_mode for every mode independently, chaining it from sample to
/// sample. Modes may be distributed over `threads` workers; the result does not
/// depend on the thread count.
Trajectory evolve(const Spectrum& spectrum, const StateVector& initial, const SpeedProfile& c,
                  const Profile& b, std::span<const double> sample_times,
                  const IntegratorConfig& config = {}, unsigned threads = 1);

/// Exact solution for constant speed c0 and no damping.
ModeState closed_form_constant(double lambda, ModeState initial, double c0, double t);

/// F = 1/2 ||z||^2 + 1/2 c^2 ||w||^2.
double energy(const StateVector& state, double c_value);

/// F(S) exp(-2 ||b||_{L1(0,inf)} - (2/c0) Var(c; [0, inf))), c0 = inf c.
/// Valid lower bound for F(t), t >= S.
double energy_lower_bound(double energy_at_start, const SpeedProfile& c, const Profile& b);

/// K1 = ||Y|| ||Y^{-1}|| max(C, 1/c0, 1/c0^2) with ||Y|| <= sqrt2 max(1, C),
/// ||Y^{-1}|| <= max(1, 1/c0)/sqrt2, where c0 = inf c and C = sup c.
/// See docs/gronwall_constant.md.
double gronwall_constant(const SpeedProfile& c);

/// K1 (Var(c;[s-,t+]) + ||b||_{L1(s,t)}) exp(K1 Var(c;[0,inf)) + ||b||_{L1(0,inf)}) ||y(0)||,
/// an a-priori bound on ||y(t) - y(s)|| in diagonal coordinates. t may be kInfinity.
double gronwall_tail_bound(double y0_norm, const SpeedProfile& c, const Profile& b, double s, double t);

}  // namespace dwave
