#include "dwave/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dwave {

Spectrum::Spectrum(std::vector<double> eigenvalues) : eigenvalues_(std::move(eigenvalues)) {
  if (eigenvalues_.empty()) throw std::invalid_argument("spectrum needs at least one mode");
  for (std::size_t k = 0; k < eigenvalues_.size(); ++k) {
    const double lambda = eigenvalues_[k];
    if (!std::isfinite(lambda) || lambda <= 0.0)
      throw std::invalid_argument("eigenvalue " + std::to_string(k) + " must be positive and finite");
    if (k > 0 && !(lambda > eigenvalues_[k - 1]))
      throw std::invalid_argument("eigenvalues must be strictly increasing (index " +
                                  std::to_string(k) + ")");
  }
  frequencies_.reserve(eigenvalues_.size());
  for (double lambda : eigenvalues_) frequencies_.push_back(std::sqrt(lambda));
}

Spectrum Spectrum::dirichlet_interval(std::size_t modes, double length) {
  if (modes == 0) throw std::invalid_argument("dirichlet_interval: modes must be >= 1");
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("dirichlet_interval: length must be positive");
  std::vector<double> lambdas(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    const double root = static_cast<double>(k + 1) * std::numbers::pi / length;
    lambdas[k] = root * root;
  }
  return Spectrum(std::move(lambdas));
}

StateVector::StateVector(std::vector<Complex> first, std::vector<Complex> second)
    : first_(std::move(first)), second_(std::move(second)) {
  if (first_.size() != second_.size())
    throw std::invalid_argument("state components have different lengths");
}

StateVector StateVector::zeros(std::size_t modes) {
  return StateVector(std::vector<Complex>(modes), std::vector<Complex>(modes));
}

bool StateVector::all_finite() const {
  auto finite = [](Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); };
  for (std::size_t k = 0; k < size(); ++k)
    if (!finite(first_[k]) || !finite(second_[k])) return false;
  return true;
}

StateVector& StateVector::operator+=(const StateVector& other) {
  if (other.size() != size()) throw std::invalid_argument("state size mismatch");
  for (std::size_t k = 0; k < size(); ++k) {
    first_[k] += other.first_[k];
    second_[k] += other.second_[k];
  }
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& other) {
  if (other.size() != size()) throw std::invalid_argument("state size mismatch");
  for (std::size_t k = 0; k < size(); ++k) {
    first_[k] -= other.first_[k];
    second_[k] -= other.second_[k];
  }
  return *this;
}

StateVector& StateVector::operator*=(Complex factor) {
  for (std::size_t k = 0; k < size(); ++k) {
    first_[k] *= factor;
    second_[k] *= factor;
  }
  return *this;
}

StateVector operator+(StateVector lhs, const StateVector& rhs) { return lhs += rhs; }
StateVector operator-(StateVector lhs, const StateVector& rhs) { return lhs -= rhs; }
StateVector operator*(Complex factor, StateVector state) { return state *= factor; }

void require_matching(const StateVector& state, const Spectrum& spectrum) {
  if (state.size() != spectrum.size())
    throw std::invalid_argument("state has " + std::to_string(state.size()) +
                                " modes but spectrum has " + std::to_string(spectrum.size()));
}

std::vector<Complex> unitary_shift(std::span<const Complex> component, double s,
                                   const Spectrum& spectrum) {
  if (component.size() != spectrum.size())
    throw std::invalid_argument("unitary_shift: mode-count mismatch");
  if (!std::isfinite(s)) throw std::invalid_argument("unitary_shift: shift must be finite");
  std::vector<Complex> out(component.size());
  for (std::size_t k = 0; k < component.size(); ++k)
    out[k] = std::polar(1.0, s * spectrum.frequency(k)) * component[k];
  return out;
}

StateVector unitary_shift(const StateVector& state, Component which, double s,
                          const Spectrum& spectrum) {
  require_matching(state, spectrum);
  StateVector out = state;
  if (which == Component::First)
    out.first() = unitary_shift(state.first(), s, spectrum);
  else
    out.second() = unitary_shift(state.second(), s, spectrum);
  return out;
}

double norm(std::span<const Complex> component) {
  double sum = 0.0;
  for (Complex v : component) sum += std::norm(v);
  return std::sqrt(sum);
}

double norm(const StateVector& state) {
  double sum = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k)
    sum += std::norm(state.first()[k]) + std::norm(state.second()[k]);
  return std::sqrt(sum);
}

double weighted_norm(const StateVector& state, const Spectrum& spectrum, double order) {
  if (!(order >= 0.0)) throw std::invalid_argument("weighted_norm: order must be >= 0");
  require_matching(state, spectrum);
  if (order == 0.0) return norm(state);
  double sum = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k) {
    const double weight = 1.0 + std::pow(spectrum.eigenvalue(k), order);
    sum += weight * (std::norm(state.first()[k]) + std::norm(state.second()[k]));
  }
  return std::sqrt(sum);
}

StateVector spectral_project(const StateVector& state, const Spectrum& spectrum, double cutoff) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("spectral_project: cutoff must be positive");
  require_matching(state, spectrum);
  StateVector out = state;
  for (std::size_t k = 0; k < state.size(); ++k) {
    if (spectrum.eigenvalue(k) >= cutoff) {
      out.first()[k] = 0.0;
      out.second()[k] = 0.0;
    }
  }
  return out;
}

}  // namespace dwave
