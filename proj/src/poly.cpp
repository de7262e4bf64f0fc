#include "mrnav/poly.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "mrnav/errors.hpp"

namespace mrnav {

namespace {

constexpr double kLeadingStripTol = 1e-12;  // relative to max |c_k|

double max_abs_coeff(const std::vector<double>& c) {
  double m = 0.0;
  for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

Poly::Poly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (coeffs_.empty()) coeffs_.push_back(0.0);
}

bool Poly::is_zero() const {
  return coeffs_.size() == 1 && coeffs_[0] == 0.0;
}

double Poly::eval(double t) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = acc * t + *it;
  return acc;
}

Poly Poly::derivative() const {
  if (coeffs_.size() <= 1) return Poly();
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k)
    d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Poly(std::move(d));
}

Poly Poly::antiderivative() const {
  if (is_zero()) return Poly();
  std::vector<double> a(coeffs_.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    a[k + 1] = coeffs_[k] / static_cast<double>(k + 1);
  return Poly(std::move(a));
}

double Poly::integral_of_square(double T) const {
  const std::size_t n = coeffs_.size();
  // powers[k] = T^k, up to 2*(n-1)+1
  std::vector<double> powers(2 * n, 1.0);
  for (std::size_t k = 1; k < powers.size(); ++k) powers[k] = powers[k - 1] * T;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (coeffs_[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (coeffs_[j] == 0.0) continue;
      total += coeffs_[i] * coeffs_[j] * powers[i + j + 1] /
               static_cast<double>(i + j + 1);
    }
  }
  return total;
}

std::vector<double> Poly::real_roots() const {
  const double scale = max_abs_coeff(coeffs_);
  if (scale <= 0.0 || !std::isfinite(scale))
    throw DegenerateInput("real_roots: all coefficients are (near-)zero");

  // Normalize and strip near-zero leading coefficients.
  std::vector<double> c(coeffs_.size());
  for (std::size_t k = 0; k < coeffs_.size(); ++k) c[k] = coeffs_[k] / scale;
  while (c.size() > 1 && std::abs(c.back()) < kLeadingStripTol) c.pop_back();

  const double remaining = max_abs_coeff(c);
  if (remaining < kLeadingStripTol)
    throw DegenerateInput("real_roots: all coefficients are (near-)zero");
  if (c.size() <= 1) return {};  // nonzero constant: no roots

  const int n = static_cast<int>(c.size()) - 1;
  if (n == 1) return {-c[0] / c[1]};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[i] / c[n];

  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
  const auto& ev = es.eigenvalues();

  Poly norm(c);
  Poly dnorm = norm.derivative();

  std::vector<double> roots;
  for (int i = 0; i < n; ++i) {
    const double re = ev(i).real();
    const double im = ev(i).imag();
    if (std::abs(im) > 1e-6 * std::max(1.0, std::abs(re))) continue;
    // Newton polish on the normalized polynomial.
    double x = re;
    for (int it = 0; it < 12; ++it) {
      const double f = norm.eval(x);
      const double fp = dnorm.eval(x);
      if (fp == 0.0) break;
      const double step = f / fp;
      x -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    if (std::isfinite(x)) roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

Poly Poly::shifted(double dt) const {
  if (dt == 0.0) return *this;
  const int n = static_cast<int>(coeffs_.size());
  std::vector<double> out(n, 0.0);
  // out[j] = sum_k c_k C(k, j) dt^{k-j}
  for (int k = 0; k < n; ++k) {
    if (coeffs_[k] == 0.0) continue;
    double term = coeffs_[k];  // C(k, j) dt^{k-j} accumulated from j = k down
    out[k] += term;
    for (int j = k - 1; j >= 0; --j) {
      term *= dt * static_cast<double>(j + 1) / static_cast<double>(k - j);
      out[j] += term;
    }
  }
  return Poly(std::move(out));
}

Poly Poly::operator+(const Poly& other) const {
  std::vector<double> out(std::max(coeffs_.size(), other.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out[k] += coeffs_[k];
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) out[k] += other.coeffs_[k];
  return Poly(std::move(out));
}

Poly Poly::operator-(const Poly& other) const {
  std::vector<double> out(std::max(coeffs_.size(), other.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) out[k] += coeffs_[k];
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) out[k] -= other.coeffs_[k];
  return Poly(std::move(out));
}

Poly Poly::operator*(const Poly& other) const {
  if (is_zero() || other.is_zero()) return Poly();
  std::vector<double> out(coeffs_.size() + other.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < other.coeffs_.size(); ++j)
      out[i + j] += coeffs_[i] * other.coeffs_[j];
  return Poly(std::move(out));
}

Poly Poly::scaled(double s) const {
  std::vector<double> out(coeffs_);
  for (double& v : out) v *= s;
  return Poly(std::move(out));
}

}  // namespace mrnav
