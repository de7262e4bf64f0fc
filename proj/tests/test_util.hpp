#pragma once

// Shared test utilities: Gauss-Legendre quadrature (the independent oracle
// for every closed-form integral) and a deterministic random source.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace testutil {

struct Quadrature {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights by Newton iteration on the Legendre
/// polynomial, good to machine precision for the orders used here.
inline Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[i] = x;
    q.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return q;
}

/// Integral of f over [a, b] with an n-point Gauss-Legendre rule.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, int n) {
  static thread_local int cached_n = 0;
  static thread_local Quadrature cached;
  if (cached_n != n) {
    cached = gauss_legendre(n);
    cached_n = n;
  }
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += cached.weights[i] * f(mid + half * cached.nodes[i]);
  return acc * half;
}

/// splitmix64-based uniform doubles; identical sequences across platforms.
class Rand {
 public:
  explicit Rand(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
  }

 private:
  std::uint64_t state_;
};

}  // namespace testutil
