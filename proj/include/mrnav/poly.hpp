#pragma once

#include <vector>

namespace mrnav {

/// Dense univariate polynomial with real coefficients, stored lowest degree
/// first. Trailing exact zeros are trimmed on construction, so degree() is
/// the index of the last stored coefficient. The zero polynomial stores a
/// single 0 coefficient.
class Poly {
 public:
  Poly() : coeffs_{0.0} {}
  explicit Poly(std::vector<double> coeffs);

  static Poly zero() { return Poly(); }

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const;

  /// Horner evaluation at t.
  double eval(double t) const;

  Poly derivative() const;

  /// Antiderivative with zero constant term.
  Poly antiderivative() const;

  /// Exact value of the integral of p(t)^2 over [0, T] by term-wise
  /// integration: sum_{i,j} c_i c_j T^{i+j+1} / (i+j+1).
  double integral_of_square(double T) const;

  /// All real roots, in ascending order. Coefficients are normalized by
  /// max |c_k| and near-zero leading coefficients stripped before the
  /// companion-matrix eigendecomposition; real candidates are polished by
  /// Newton steps. Root multiplicities may collapse.
  /// Throws DegenerateInput when every coefficient is (near-)zero.
  std::vector<double> real_roots() const;

  /// The polynomial q(t) = p(t + dt), via an exact Taylor shift.
  Poly shifted(double dt) const;

  Poly operator+(const Poly& other) const;
  Poly operator-(const Poly& other) const;
  Poly operator*(const Poly& other) const;
  Poly scaled(double s) const;

 private:
  std::vector<double> coeffs_;
};

}  // namespace mrnav
