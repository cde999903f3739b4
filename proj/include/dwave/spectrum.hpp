#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace dwave {

using Complex = std::complex<double>;

/// Finite model of a positive self-adjoint operator A: a strictly increasing
/// list of simple eigenvalues. Everything downstream is diagonal in this basis.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> eigenvalues);

  /// Dirichlet Laplacian on [0, length]: lambda_k = (k pi / length)^2, k = 1..modes.
  static Spectrum dirichlet_interval(std::size_t modes, double length);

  std::size_t size() const { return eigenvalues_.size(); }
  double eigenvalue(std::size_t k) const { return eigenvalues_[k]; }
  /// sqrt(lambda_k), the mode frequency of A^{1/2}.
  double frequency(std::size_t k) const { return frequencies_[k]; }
  double min_frequency() const { return frequencies_.front(); }
  double max_frequency() const { return frequencies_.back(); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const std::vector<double>& frequencies() const { return frequencies_; }

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<double> eigenvalues_;
  std::vector<double> frequencies_;
};

/// Per-mode complex pairs. In physical coordinates `first` holds the mode
/// coefficients of A^{1/2}u and `second` those of u'; in diagonal coordinates
/// they hold (y1, y2).
class StateVector {
 public:
  StateVector() = default;
  StateVector(std::vector<Complex> first, std::vector<Complex> second);

  static StateVector zeros(std::size_t modes);

  std::size_t size() const { return first_.size(); }
  const std::vector<Complex>& first() const { return first_; }
  const std::vector<Complex>& second() const { return second_; }
  std::vector<Complex>& first() { return first_; }
  std::vector<Complex>& second() { return second_; }

  bool all_finite() const;

  StateVector& operator+=(const StateVector& other);
  StateVector& operator-=(const StateVector& other);
  StateVector& operator*=(Complex factor);

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  std::vector<Complex> first_;
  std::vector<Complex> second_;
};

StateVector operator+(StateVector lhs, const StateVector& rhs);
StateVector operator-(StateVector lhs, const StateVector& rhs);
StateVector operator*(Complex factor, StateVector state);

enum class Component { First, Second };

/// Throws std::invalid_argument unless the state has one pair per mode.
void require_matching(const StateVector& state, const Spectrum& spectrum);

/// e^{i s A^{1/2}} applied to a single component vector.
std::vector<Complex> unitary_shift(std::span<const Complex> component, double s,
                                   const Spectrum& spectrum);

/// e^{i s A^{1/2}} applied to the selected component; the other is copied.
StateVector unitary_shift(const StateVector& state, Component which, double s,
                          const Spectrum& spectrum);

/// Euclidean norm of one component vector.
double norm(std::span<const Complex> component);

/// Plain H x H norm: (sum_k |first_k|^2 + |second_k|^2)^{1/2}.
double norm(const StateVector& state);

/// (sum_k (1 + lambda_k^J)(|first_k|^2 + |second_k|^2))^{1/2} for J > 0.
/// J = 0 is the plain norm (H_0 = H), not the doubled weight.
double weighted_norm(const StateVector& state, const Spectrum& spectrum, double order);

/// E([0, cutoff)): zeroes every mode with lambda_k >= cutoff.
StateVector spectral_project(const StateVector& state, const Spectrum& spectrum,
                             double cutoff);

}  // namespace dwave
