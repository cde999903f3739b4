#include "dwave/coefficients.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dwave {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_time(double t, const char* what) {
  if (std::isnan(t) || t < 0.0) throw std::invalid_argument(std::string(what) + ": time must be >= 0");
}

void require_interval(double s, double t, const char* what) {
  require_time(s, what);
  if (std::isinf(s) || std::isnan(t) || s > t)
    throw std::invalid_argument(std::string(what) + ": need 0 <= s <= t");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// c_inf + a g(t) with g decreasing from g(0) = 1 to 0. Shared by the power and
// exponential families.
struct MonotoneTail {
  double c_inf;
  double a;
  bool is_power;
  double param;  // exponent p or rate r

  double g(double t) const {
    if (std::isinf(t)) return 0.0;
    return is_power ? std::pow(1.0 + t, -param) : std::exp(-param * t);
  }

  // int_0^t g, t finite.
  double primitive(double t) const {
    if (is_power) {
      if (param == 1.0) return std::log1p(t);
      return -std::expm1((1.0 - param) * std::log1p(t)) / (param - 1.0);
    }
    return -std::expm1(-param * t) / param;
  }

  bool tail_integrable() const { return !is_power || param > 1.0; }

  // int_s^t g, t possibly infinite.
  double integral(double s, double t) const {
    if (std::isinf(t)) {
      if (!tail_integrable()) return kInfinity;
      return is_power ? std::pow(1.0 + s, 1.0 - param) / (param - 1.0) : std::exp(-param * s) / param;
    }
    if (is_power && param == 1.0) return std::log1p(t) - std::log1p(s);
    return primitive(t) - primitive(s);
  }

  // Time at which g equals level (0 < level < 1).
  double time_at_level(double level) const {
    return is_power ? std::pow(level, -1.0 / param) - 1.0 : -std::log(level) / param;
  }

  double signed_integral(double s, double t) const {
    if (std::isinf(t)) {
      if (c_inf != 0.0) return c_inf > 0 ? kInfinity : -kInfinity;
      if (a == 0.0) return 0.0;
      return a * integral(s, t);
    }
    return c_inf * (t - s) + (a == 0.0 ? 0.0 : a * integral(s, t));
  }

  double l1(double s, double t) const {
    if (std::isinf(t) && (c_inf != 0.0 || (a != 0.0 && !tail_integrable())))
      throw std::domain_error("l1_norm: profile is not integrable on [s, inf)");
    if (a == 0.0 || c_inf == 0.0 || (a > 0) == (c_inf > 0)) return std::abs(signed_integral(s, t));
    const double level = -c_inf / a;
    if (level >= 1.0) return std::abs(signed_integral(s, t));
    const double root = std::clamp(time_at_level(level), s, t);
    return std::abs(signed_integral(s, root)) + std::abs(signed_integral(root, t));
  }
};

MonotoneTail tail_of(const family::PowerPerturbation& f) {
  return {f.c_inf, f.amplitude, true, f.exponent};
}
MonotoneTail tail_of(const family::ExpPerturbation& f) {
  return {f.c_inf, f.amplitude, false, f.rate};
}

// Piecewise families: walk [s, t] through the breakpoints. Every sub-piece is
// linear (piecewise-linear) or constant (step).
template <class Piece>
void for_each_piece(const std::vector<double>& nodes, double s, double t, Piece&& piece) {
  double left = s;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), s);
  for (; it != nodes.end() && *it < t; ++it) {
    piece(left, *it);
    left = *it;
  }
  piece(left, t);
}

double pl_eval(const family::PiecewiseLinear& f, double t) {
  const auto& x = f.times;
  const auto& y = f.values;
  if (t <= x.front()) return y.front();
  if (t >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double u = (t - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + u * (y[i] - y[i - 1]);
}

double step_eval(const family::StepFunction& f, double t) {
  const auto it = std::upper_bound(f.jumps.begin(), f.jumps.end(), t);
  return f.values[static_cast<std::size_t>(it - f.jumps.begin())];
}

// Integral of |line| over [0, len] for a line running from ya to yb.
double abs_line_integral(double ya, double yb, double len) {
  if ((ya >= 0 && yb >= 0) || (ya <= 0 && yb <= 0)) return 0.5 * std::abs(ya + yb) * len;
  const double total = std::abs(ya) + std::abs(yb);
  return 0.5 * (ya * ya + yb * yb) / total * len;
}

void validate_breakpoints(const std::vector<double>& nodes, const char* what, bool strictly_positive) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x = nodes[i];
    if (!std::isfinite(x) || x < 0.0 || (strictly_positive && x == 0.0))
      throw std::invalid_argument(std::string(what) + ": breakpoint " + std::to_string(i) + " out of range");
    if (i > 0 && !(x > nodes[i - 1]))
      throw std::invalid_argument(std::string(what) + ": breakpoints must be strictly increasing");
  }
}

void validate_values(const std::vector<double>& values, const char* what) {
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": values must be finite");
}

void validate(const Profile::Family& family) {
  std::visit(
      overloaded{
          [](const family::Constant& f) {
            if (!std::isfinite(f.value)) throw std::invalid_argument("constant: value must be finite");
          },
          [](const family::PiecewiseLinear& f) {
            if (f.times.empty() || f.times.size() != f.values.size())
              throw std::invalid_argument("piecewise_linear: need equally many (>= 1) times and values");
            validate_breakpoints(f.times, "piecewise_linear", false);
            validate_values(f.values, "piecewise_linear");
          },
          [](const family::PowerPerturbation& f) {
            if (!std::isfinite(f.c_inf) || !std::isfinite(f.amplitude))
              throw std::invalid_argument("power: parameters must be finite");
            if (!(f.exponent > 0.0) || !std::isfinite(f.exponent))
              throw std::invalid_argument("power: exponent must be positive");
          },
          [](const family::ExpPerturbation& f) {
            if (!std::isfinite(f.c_inf) || !std::isfinite(f.amplitude))
              throw std::invalid_argument("exponential: parameters must be finite");
            if (!(f.rate > 0.0) || !std::isfinite(f.rate))
              throw std::invalid_argument("exponential: rate must be positive");
          },
          [](const family::StepFunction& f) {
            if (f.values.size() != f.jumps.size() + 1)
              throw std::invalid_argument("step: need exactly one more value than jumps");
            validate_breakpoints(f.jumps, "step", true);
            validate_values(f.values, "step");
          },
      },
      family);
}

}  // namespace

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::Convergent: return "Convergent";
    case DriftKind::DivergentToInfinity: return "DivergentToInfinity";
    case DriftKind::DivergentToMinusInfinity: return "DivergentToMinusInfinity";
    case DriftKind::Indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

DriftKind drift_kind_from_string(const std::string& name) {
  for (DriftKind k : {DriftKind::Convergent, DriftKind::DivergentToInfinity,
                      DriftKind::DivergentToMinusInfinity, DriftKind::Indeterminate})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown drift kind '" + name + "'");
}

Profile::Profile(Family family) : family_(std::move(family)) { validate(family_); }

std::string Profile::family_name() const {
  return std::visit(overloaded{
                        [](const family::Constant&) { return "constant"; },
                        [](const family::PiecewiseLinear&) { return "piecewise_linear"; },
                        [](const family::PowerPerturbation&) { return "power"; },
                        [](const family::ExpPerturbation&) { return "exponential"; },
                        [](const family::StepFunction&) { return "step"; },
                    },
                    family_);
}

double Profile::eval(double t) const {
  require_time(t, "eval");
  return std::visit(overloaded{
                        [](const family::Constant& f) { return f.value; },
                        [t](const family::PiecewiseLinear& f) { return pl_eval(f, t); },
                        [t](const family::PowerPerturbation& f) {
                          const MonotoneTail tail = tail_of(f);
                          return tail.c_inf + tail.a * tail.g(t);
                        },
                        [t](const family::ExpPerturbation& f) {
                          const MonotoneTail tail = tail_of(f);
                          return tail.c_inf + tail.a * tail.g(t);
                        },
                        [t](const family::StepFunction& f) { return step_eval(f, t); },
                    },
                    family_);
}

double Profile::limit() const {
  return std::visit(overloaded{
                        [](const family::Constant& f) { return f.value; },
                        [](const family::PiecewiseLinear& f) { return f.values.back(); },
                        [](const family::PowerPerturbation& f) { return f.c_inf; },
                        [](const family::ExpPerturbation& f) { return f.c_inf; },
                        [](const family::StepFunction& f) { return f.values.back(); },
                    },
                    family_);
}

double Profile::infimum() const {
  return std::visit(
      overloaded{
          [](const family::Constant& f) { return f.value; },
          [](const family::PiecewiseLinear& f) { return *std::min_element(f.values.begin(), f.values.end()); },
          [](const family::PowerPerturbation& f) { return std::min(f.c_inf, f.c_inf + f.amplitude); },
          [](const family::ExpPerturbation& f) { return std::min(f.c_inf, f.c_inf + f.amplitude); },
          [](const family::StepFunction& f) { return *std::min_element(f.values.begin(), f.values.end()); },
      },
      family_);
}

double Profile::supremum() const {
  return std::visit(
      overloaded{
          [](const family::Constant& f) { return f.value; },
          [](const family::PiecewiseLinear& f) { return *std::max_element(f.values.begin(), f.values.end()); },
          [](const family::PowerPerturbation& f) { return std::max(f.c_inf, f.c_inf + f.amplitude); },
          [](const family::ExpPerturbation& f) { return std::max(f.c_inf, f.c_inf + f.amplitude); },
          [](const family::StepFunction& f) { return *std::max_element(f.values.begin(), f.values.end()); },
      },
      family_);
}

double Profile::total_variation(double s, double t) const {
  require_interval(s, t, "total_variation");
  return std::visit(
      overloaded{
          [](const family::Constant&) { return 0.0; },
          [&](const family::PiecewiseLinear& f) {
            double var = 0.0;
            const double end = std::isinf(t) ? std::max(s, f.times.back()) : t;
            for_each_piece(f.times, s, end, [&](double a, double b) {
              var += std::abs(pl_eval(f, b) - pl_eval(f, a));
            });
            return var;
          },
          [&](const family::PowerPerturbation& f) {
            const MonotoneTail tail = tail_of(f);
            return std::abs(tail.a) * (tail.g(s) - tail.g(t));
          },
          [&](const family::ExpPerturbation& f) {
            const MonotoneTail tail = tail_of(f);
            return std::abs(tail.a) * (tail.g(s) - tail.g(t));
          },
          [&](const family::StepFunction& f) {
            double var = 0.0;
            for (std::size_t j = 0; j < f.jumps.size(); ++j)
              if (f.jumps[j] > s && f.jumps[j] <= t) var += std::abs(f.values[j + 1] - f.values[j]);
            return var;
          },
      },
      family_);
}

double Profile::outer_variation(double s, double t) const {
  require_interval(s, t, "outer_variation");
  if (const auto* f = std::get_if<family::StepFunction>(&family_)) {
    double var = 0.0;
    for (std::size_t j = 0; j < f->jumps.size(); ++j)
      if (f->jumps[j] >= s && f->jumps[j] <= t) var += std::abs(f->values[j + 1] - f->values[j]);
    return var;
  }
  return total_variation(s, t);
}

double Profile::antiderivative(double t) const {
  require_time(t, "antiderivative");
  if (std::isinf(t)) throw std::invalid_argument("antiderivative: time must be finite");
  return limit() * t + drift(t);
}

double Profile::drift(double t) const {
  require_time(t, "drift");
  if (std::isinf(t)) throw std::invalid_argument("drift: time must be finite");
  const double c_inf = limit();
  return std::visit(
      overloaded{
          [](const family::Constant&) { return 0.0; },
          [&](const family::PiecewiseLinear& f) {
            double sum = 0.0;
            for_each_piece(f.times, 0.0, t, [&](double a, double b) {
              sum += 0.5 * ((pl_eval(f, a) - c_inf) + (pl_eval(f, b) - c_inf)) * (b - a);
            });
            return sum;
          },
          [&](const family::PowerPerturbation& f) { return f.amplitude * tail_of(f).primitive(t); },
          [&](const family::ExpPerturbation& f) { return f.amplitude * tail_of(f).primitive(t); },
          [&](const family::StepFunction& f) {
            double sum = 0.0;
            for_each_piece(f.jumps, 0.0, t, [&](double a, double b) {
              sum += (step_eval(f, 0.5 * (a + b)) - c_inf) * (b - a);
            });
            return sum;
          },
      },
      family_);
}

DriftClassification Profile::classify_drift() const {
  return std::visit(
      overloaded{
          [](const family::Constant&) {
            return DriftClassification{DriftKind::Convergent, 0.0, "constant profile: drift vanishes identically"};
          },
          [this](const family::PiecewiseLinear& f) {
            const double area = drift(f.times.back());
            return DriftClassification{DriftKind::Convergent, area,
                                       "piecewise linear, constant after t = " + fmt(f.times.back()) +
                                           ": drift is the exact area " + fmt(area)};
          },
          [](const family::PowerPerturbation& f) {
            if (f.amplitude == 0.0)
              return DriftClassification{DriftKind::Convergent, 0.0, "power family with zero amplitude"};
            if (f.exponent > 1.0) {
              const double lim = f.amplitude / (f.exponent - 1.0);
              return DriftClassification{DriftKind::Convergent, lim,
                                         "power tail with exponent " + fmt(f.exponent) +
                                             " > 1: drift -> a/(p-1) = " + fmt(lim)};
            }
            const std::string why = "power tail with exponent " + fmt(f.exponent) + " <= 1 is not integrable";
            return DriftClassification{f.amplitude > 0 ? DriftKind::DivergentToInfinity
                                                       : DriftKind::DivergentToMinusInfinity,
                                       0.0, why};
          },
          [](const family::ExpPerturbation& f) {
            const double lim = f.amplitude / f.rate;
            return DriftClassification{DriftKind::Convergent, lim,
                                       "exponential tail: drift -> a/r = " + fmt(lim)};
          },
          [this](const family::StepFunction& f) {
            const double end = f.jumps.empty() ? 0.0 : f.jumps.back();
            const double area = drift(end);
            return DriftClassification{DriftKind::Convergent, area,
                                       "step function, constant after t = " + fmt(end) +
                                           ": drift is the exact area " + fmt(area)};
          },
      },
      family_);
}

double Profile::l1_norm(double s, double t) const {
  require_interval(s, t, "l1_norm");
  return std::visit(
      overloaded{
          [&](const family::Constant& f) {
            if (f.value == 0.0) return 0.0;
            if (std::isinf(t)) throw std::domain_error("l1_norm: nonzero constant is not integrable on [s, inf)");
            return std::abs(f.value) * (t - s);
          },
          [&](const family::PiecewiseLinear& f) {
            if (std::isinf(t) && f.values.back() != 0.0)
              throw std::domain_error("l1_norm: piecewise profile with nonzero tail is not integrable");
            const double end = std::isinf(t) ? std::max(s, f.times.back()) : t;
            double sum = 0.0;
            for_each_piece(f.times, s, end, [&](double a, double b) {
              sum += abs_line_integral(pl_eval(f, a), pl_eval(f, b), b - a);
            });
            return sum;
          },
          [&](const family::PowerPerturbation& f) { return tail_of(f).l1(s, t); },
          [&](const family::ExpPerturbation& f) { return tail_of(f).l1(s, t); },
          [&](const family::StepFunction& f) {
            if (std::isinf(t) && f.values.back() != 0.0)
              throw std::domain_error("l1_norm: step profile with nonzero tail is not integrable");
            const double end = std::isinf(t) ? std::max(s, f.jumps.empty() ? s : f.jumps.back()) : t;
            double sum = 0.0;
            for_each_piece(f.jumps, s, end, [&](double a, double b) {
              sum += std::abs(step_eval(f, 0.5 * (a + b))) * (b - a);
            });
            return sum;
          },
      },
      family_);
}

std::vector<double> Profile::breakpoints() const {
  std::vector<double> out;
  if (const auto* f = std::get_if<family::PiecewiseLinear>(&family_)) {
    for (double x : f->times)
      if (x > 0.0) out.push_back(x);
  } else if (const auto* g = std::get_if<family::StepFunction>(&family_)) {
    out = g->jumps;
  }
  return out;
}

SpeedProfile::SpeedProfile(Family family) : Profile(std::move(family)) {
  if (!(infimum() > 0.0))
    throw std::invalid_argument("speed profile " + family_name() + " must satisfy inf c > 0 (got " +
                                fmt(infimum()) + ")");
}

SpeedProfile::SpeedProfile(const Profile& profile) : SpeedProfile(profile.family()) {}

double mollifier_kernel(double x) {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  const double q = 1.0 - x * x;
  return 15.0 / 16.0 * q * q;
}

double mollifier_kernel_derivative(double x) {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  return -15.0 / 4.0 * x * (1.0 - x * x);
}

MollifiedProfile::MollifiedProfile(Profile base, double delta) : base_(std::move(base)), delta_(delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("mollify: delta must be positive");
  kinks_.push_back(0.0);
  for (double x : base_.breakpoints()) kinks_.push_back(x);
}

// int c~(u) weight((t - u)/delta) du over [t - delta, t + delta], split at the
// kinks of c~ so that each Gauss piece sees a smooth integrand.
template <class Weight>
double MollifiedProfile::convolve(double t, Weight&& weight) const {
  using boost::math::quadrature::gauss;
  const double lo = t - delta_;
  const double hi = t + delta_;
  auto integrand = [&](double u) { return base_.eval(std::max(u, 0.0)) * weight((t - u) / delta_); };
  double sum = 0.0;
  double left = lo;
  for (double k : kinks_) {
    if (k <= left) continue;
    if (k >= hi) break;
    sum += gauss<double, 20>::integrate(integrand, left, k);
    left = k;
  }
  sum += gauss<double, 20>::integrate(integrand, left, hi);
  return sum;
}

double MollifiedProfile::eval(double t) const {
  return convolve(t, mollifier_kernel) / delta_;
}

double MollifiedProfile::derivative(double t) const {
  return convolve(t, mollifier_kernel_derivative) / (delta_ * delta_);
}

MollifiedProfile mollify(const Profile& profile, double delta) { return MollifiedProfile(profile, delta); }

}  // namespace dwave
