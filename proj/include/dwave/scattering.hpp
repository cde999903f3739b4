#pragma once

#include "dwave/coefficients.hpp"
#include "dwave/dynamics.hpp"
#include "dwave/spectrum.hpp"

namespace dwave {

/// y = Y(t)^{-1} x. Per mode, with E = exp(i tau(t) sqrt(lambda)):
///   y1 = (w - i z / c(t)) / (2E),  y2 = E (w + i z / c(t)) / 2.
StateVector diagonalize(const StateVector& state, double t, const SpeedProfile& c, const Spectrum& spectrum);

/// x = Y(t) y:  w = E y1 + y2/E,  z = i c(t) (E y1 - y2/E).
StateVector undiagonalize(const StateVector& y, double t, const SpeedProfile& c, const Spectrum& spectrum);

/// Approximation of lim y(t) with an a-priori error certificate.
struct ScatteringProfile {
  StateVector limit;            ///< y(T_trunc) in diagonal coordinates
  double truncation_time = 0.0; ///< T_trunc
  double tail_bound = 0.0;      ///< bound on ||y_inf - y(T_trunc)||
};

/// Smallest T (to bisection accuracy) with gronwall_tail_bound(y0, c, b, T, inf) <= tol.
/// Throws NumericalError when no T <= max_time qualifies.
double truncation_time(double y0_norm, const SpeedProfile& c, const Profile& b, double tol, double max_time);

ScatteringProfile extract_profile(const Spectrum& spectrum, const StateVector& initial, const SpeedProfile& c,
                                  const Profile& b, double tol, const IntegratorConfig& config = {},
                                  double max_truncation_time = 1e7);

/// v(t) with A^{1/2}v = e^{i c t A^{1/2}} phi + e^{-i c t A^{1/2}} psi.
class FreeSolution {
 public:
  FreeSolution(double wave_speed, StateVector amplitudes);

  double wave_speed() const { return wave_speed_; }
  const std::vector<Complex>& phi() const { return amplitudes_.first(); }
  const std::vector<Complex>& psi() const { return amplitudes_.second(); }
  const StateVector& amplitudes() const { return amplitudes_; }

 private:
  double wave_speed_;
  StateVector amplitudes_;
};

/// phi = e^{i f_inf A^{1/2}} y1_inf, psi = e^{-i f_inf A^{1/2}} y2_inf, speed c_inf.
/// Throws std::domain_error unless the drift converges: no free limit exists otherwise.
FreeSolution reconstruct_free(const ScatteringProfile& profile, const DriftClassification& drift, double c_inf,
                              const Spectrum& spectrum);

StateVector free_state(const FreeSolution& free, double t, const Spectrum& spectrum);

/// D(t) = ||w_u - w_v|| + ||z_u - z_v||.
double discrepancy(const StateVector& u_state, const FreeSolution& free, double t, const Spectrum& spectrum);

/// The free solution of speed c_star that coincides with u_state at t0.
FreeSolution best_free_fit(const StateVector& u_state, double t0, double c_star, const Spectrum& spectrum);

/// (1/T) int_0^T (e^{2 i c t A^{1/2}} phi, psi) dt in closed form.
Complex time_average_cross(const FreeSolution& free, double T, const Spectrum& spectrum);

/// sum_k |phi_k psi_k| / (c sqrt(lambda_k)); |time_average_cross(T)| <= this / T.
double cross_average_constant(const FreeSolution& free, const Spectrum& spectrum);

/// |c^2 <||A^{1/2}v||^2>_T - <||v'||^2>_T| = 4 c^2 |Re time_average_cross(T)|.
double equipartition_defect(const FreeSolution& free, double T, const Spectrum& spectrum);

/// 4 c sum_k |phi_k psi_k| / sqrt(lambda_k); equipartition_defect(T) <= this / T.
double equipartition_constant(const FreeSolution& free, const Spectrum& spectrum);

/// sqrt(<||u'||^2>_T / <||A^{1/2}u||^2>_T) with trapezoid averages on the samples.
/// Throws std::invalid_argument if the trajectory does not cover [0, T] or is trivial.
double estimate_wave_speed(const Trajectory& trajectory, double T);

/// Largest sample spacing the wave-speed estimate is designed for:
/// min(0.05, period of the fastest mode / 20).
double wave_speed_sample_spacing(const Spectrum& spectrum, const SpeedProfile& c);

/// ||e^{i d A^{1/2}} y1_inf - phi|| + ||e^{-i d A^{1/2}} y2_inf - psi||.
double phase_profile_error(const ScatteringProfile& profile, const FreeSolution& free, double drift_value,
                           const Spectrum& spectrum);

/// Upper bound on D(t) against reconstruct_free(profile): tail bound between
/// y(t) and y(T_trunc), phase mismatch |f(t) - f_inf| max sqrt(lambda), and the
/// speed mismatch |c(t) - c_inf|. Requires convergent drift.
double sufficiency_certificate(const ScatteringProfile& profile, const StateVector& initial, const SpeedProfile& c,
                               const Profile& b, const Spectrum& spectrum, double t);

/// First time found after t0 with |f(T) - f(t0)| = pi / min sqrt(lambda), or
/// kInfinity when the drift never moves that far.
double antiphase_time(const SpeedProfile& c, double t0, const Spectrum& spectrum);

struct WitnessResult {
  double anchor_time = 0.0;
  double end_time = 0.0;
  double sup_discrepancy = 0.0;
  double argsup = 0.0;
};

/// Fits the free solution of speed c_inf to u at t0 and returns sup D(t) over
/// [t0, t_end] on a grid of spacing wave_speed_sample_spacing.
WitnessResult antiphase_witness(const Spectrum& spectrum, const StateVector& initial, const SpeedProfile& c,
                                const Profile& b, double t0, double t_end, const IntegratorConfig& config = {},
                                unsigned threads = 1);

}  // namespace dwave
