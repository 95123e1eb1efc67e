#ifndef EPAC_MODEL_HPP
#define EPAC_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "epac/errors.hpp"

namespace epac {

/// One-dimensional polynomial potential V(q) = sum_k c_k q^k together with
/// the particle mass and hbar. Coefficients are stored densely from order 0
/// upward; absent orders are zero. The potential must be confining:
/// degree >= 2 with a positive leading coefficient.
struct PolynomialPotential {
  std::vector<double> coeffs;  // c_0 .. c_K, energy / length^k
  double mass = 1.0;
  double hbar = 1.0;

  PolynomialPotential(std::vector<double> c, double m = 1.0, double hb = 1.0)
      : coeffs(std::move(c)), mass(m), hbar(hb) {
    while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
    if (coeffs.size() < 3 || coeffs.back() <= 0.0)
      throw DomainError("potential must have degree >= 2 with positive leading coefficient");
    if (!(mass > 0.0) || !(hbar > 0.0))
      throw DomainError("mass and hbar must be positive");
  }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  /// V(q), evaluated by Horner's rule.
  double operator()(double q) const {
    double v = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) v = v * q + coeffs[k];
    return v;
  }

  /// dV/dq
  double derivative(double q) const {
    double v = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) v = v * q + coeffs[k] * static_cast<double>(k);
    return v;
  }

  /// d^2V/dq^2
  double second_derivative(double q) const {
    double v = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 2;)
      v = v * q + coeffs[k] * static_cast<double>(k) * static_cast<double>(k - 1);
    return v;
  }

  /// The source-tilted potential V(q) - J q.
  PolynomialPotential tilted(double j) const {
    PolynomialPotential p = *this;
    p.coeffs[1] -= j;
    return p;
  }

  static PolynomialPotential harmonic(double omega, double m = 1.0, double hb = 1.0) {
    return PolynomialPotential({0.0, 0.0, 0.5 * m * omega * omega}, m, hb);
  }

  /// The asymmetric quartic benchmark well q^2/2 + q^3/10 + q^4/100.
  static PolynomialPotential asymmetric_quartic() {
    return PolynomialPotential({0.0, 0.0, 0.5, 0.1, 0.01});
  }
};

inline double evaluate_potential(const PolynomialPotential& p, double q) { return p(q); }

/// Thermodynamic state: inverse temperature with k_B = 1.
struct ThermoState {
  double beta;

  explicit ThermoState(double b) : beta(b) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and positive");
  }
};

}  // namespace epac

#endif  // EPAC_MODEL_HPP
