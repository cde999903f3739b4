#pragma once

#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace dwave {

/// Right endpoint meaning "to infinity" for variation and L1 queries.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace family {

struct Constant {
  double value = 0.0;
  friend bool operator==(const Constant&, const Constant&) = default;
};

/// Linear interpolation through (times[i], values[i]); constant before the
/// first and after the last breakpoint.
struct PiecewiseLinear {
  std::vector<double> times;
  std::vector<double> values;
  friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;
};

/// c_inf + amplitude * (1 + t)^(-exponent)
struct PowerPerturbation {
  double c_inf = 0.0;
  double amplitude = 0.0;
  double exponent = 1.0;
  friend bool operator==(const PowerPerturbation&, const PowerPerturbation&) = default;
};

/// c_inf + amplitude * exp(-rate * t)
struct ExpPerturbation {
  double c_inf = 0.0;
  double amplitude = 0.0;
  double rate = 1.0;
  friend bool operator==(const ExpPerturbation&, const ExpPerturbation&) = default;
};

/// Right-continuous step function: values[0] on [0, jumps[0]), values[i] on
/// [jumps[i-1], jumps[i]), values.back() after the last jump.
struct StepFunction {
  std::vector<double> jumps;
  std::vector<double> values;
  friend bool operator==(const StepFunction&, const StepFunction&) = default;
};

}  // namespace family

enum class DriftKind { Convergent, DivergentToInfinity, DivergentToMinusInfinity, Indeterminate };

std::string to_string(DriftKind kind);
DriftKind drift_kind_from_string(const std::string& name);

struct DriftClassification {
  DriftKind kind = DriftKind::Indeterminate;
  /// Limit of the drift; meaningful only for Convergent.
  double limit = 0.0;
  std::string certificate;

  bool convergent() const { return kind == DriftKind::Convergent; }
  friend bool operator==(const DriftClassification&, const DriftClassification&) = default;
};

/// A coefficient c(t) or b(t) on [0, inf) drawn from a closed-form family.
/// Every query below is evaluated in closed form; nothing is sampled.
class Profile {
 public:
  using Family = std::variant<family::Constant, family::PiecewiseLinear,
                              family::PowerPerturbation, family::ExpPerturbation,
                              family::StepFunction>;

  Profile() : Profile(family::Constant{0.0}) {}
  Profile(Family family);  // NOLINT(google-explicit-constructor)
  template <class F>
    requires std::is_constructible_v<Family, F> && (!std::is_same_v<std::decay_t<F>, Family>)
  Profile(F f) : Profile(Family(std::move(f))) {}  // NOLINT(google-explicit-constructor)

  const Family& family() const { return family_; }
  std::string family_name() const;

  double eval(double t) const;
  double operator()(double t) const { return eval(t); }

  /// lim_{t -> inf} c(t); the constant extension value for piecewise families.
  double limit() const;
  double infimum() const;
  double supremum() const;

  /// Var(c; [s, t]) with t possibly kInfinity.
  double total_variation(double s, double t) const;
  /// Var(c; [s-, t+]): like total_variation but also counts jumps sitting on
  /// the endpoints s and t.
  double outer_variation(double s, double t) const;

  /// tau(t) = int_0^t c.
  double antiderivative(double t) const;
  /// f(t) = int_0^t (c - c_inf), evaluated without forming tau(t) - c_inf t.
  double drift(double t) const;
  DriftClassification classify_drift() const;

  /// int_s^t |c|; throws std::domain_error when t = inf and the tail is not integrable.
  double l1_norm(double s, double t) const;

  /// Times in (0, inf) where the profile is not smooth.
  std::vector<double> breakpoints() const;

  friend bool operator==(const Profile&, const Profile&) = default;

 private:
  Family family_;
};

/// A speed profile: a Profile whose infimum over [0, inf) is positive.
class SpeedProfile : public Profile {
 public:
  SpeedProfile(Family family);  // NOLINT(google-explicit-constructor)
  template <class F>
    requires std::is_constructible_v<Family, F> && (!std::is_same_v<std::decay_t<F>, Family>)
  SpeedProfile(F f) : SpeedProfile(Family(std::move(f))) {}  // NOLINT(google-explicit-constructor)
  explicit SpeedProfile(const Profile& profile);
};

/// The bump kernel rho(x) = 15/16 (1 - x^2)^2 on [-1, 1].
double mollifier_kernel(double x);
double mollifier_kernel_derivative(double x);

/// c_delta = c~ * rho_delta with c~(t) = c(0) for t < 0.
class MollifiedProfile {
 public:
  MollifiedProfile(Profile base, double delta);

  double eval(double t) const;
  double derivative(double t) const;
  double delta() const { return delta_; }
  const Profile& base() const { return base_; }

 private:
  template <class Weight>
  double convolve(double t, Weight&& weight) const;

  Profile base_;
  double delta_;
  std::vector<double> kinks_;
};

MollifiedProfile mollify(const Profile& profile, double delta);

}  // namespace dwave
