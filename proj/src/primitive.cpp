#include "mrnav/primitive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mrnav/errors.hpp"

namespace mrnav {

BetaCoeffs beta_coefficients(const StateVec& x0, const Vec3& p_end, double T) {
  if (T <= 0.0) throw NonPositiveDuration(T);
  BetaCoeffs b;
  const double t2 = T * T;
  const double t5 = t2 * t2 * T;
  for (int d = 0; d < x0.dims; ++d) {
    const double delta =
        p_end[d] - (x0.pos[d] + x0.vel[d] * T + 0.5 * x0.acc[d] * t2);
    b.b1[d] = 20.0 * delta / t5;
    b.b2[d] = -20.0 * T * delta / t5;
    b.b3[d] = 10.0 * t2 * delta / t5;
  }
  return b;
}

QuinticTrajectory primitive_trajectory(const StateVec& x0, const Vec3& p_end,
                                       double T) {
  const BetaCoeffs b = beta_coefficients(x0, p_end, T);
  QuinticTrajectory traj;
  traj.dims = x0.dims;
  traj.duration = T;
  for (int d = 0; d < x0.dims; ++d) {
    traj.coeffs(0, d) = x0.pos[d];
    traj.coeffs(1, d) = x0.vel[d];
    traj.coeffs(2, d) = 0.5 * x0.acc[d];
    traj.coeffs(3, d) = b.b3[d] / 6.0;
    traj.coeffs(4, d) = b.b2[d] / 24.0;
    traj.coeffs(5, d) = b.b1[d] / 120.0;
  }
  return traj;
}

Poly duration_polynomial(const StateVec& x0, const Vec3& p_end) {
  double s_dd = 0.0, s_dv = 0.0, s_da = 0.0, s_vv = 0.0, s_va = 0.0,
         s_aa = 0.0;
  for (int d = 0; d < x0.dims; ++d) {
    const double delta = p_end[d] - x0.pos[d];
    const double v = x0.vel[d];
    const double a = x0.acc[d];
    s_dd += delta * delta;
    s_dv += delta * v;
    s_da += delta * a;
    s_vv += v * v;
    s_va += v * a;
    s_aa += a * a;
  }
  return Poly({-100.0 * s_dd, 160.0 * s_dv, -60.0 * (s_vv - s_da),
               -40.0 * s_va, -5.0 * s_aa, 0.0, 1.0});
}

double constant_accel_duration(const StateVec& x0, const Vec3& p_end,
                               const PrimitiveOptions& opts) {
  double best = 0.0;
  bool any = false;
  for (int d = 0; d < x0.dims; ++d) {
    const double dist = p_end[d] - x0.pos[d];
    const double v = x0.vel[d];
    const double a = x0.acc[d];
    double t_dim = -1.0;
    if (std::abs(a) > 1e-12) {
      // 0.5 a t^2 + v t - dist = 0
      const double disc = v * v + 2.0 * a * dist;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double r1 = (-v + sq) / a;
        const double r2 = (-v - sq) / a;
        double lo = std::min(r1, r2), hi = std::max(r1, r2);
        if (lo > 0.0)
          t_dim = lo;
        else if (hi > 0.0)
          t_dim = hi;
      }
    } else if (std::abs(v) > 1e-12) {
      const double t = dist / v;
      if (t > 0.0) t_dim = t;
    }
    if (t_dim <= 0.0 && std::abs(dist) > 1e-12 && opts.v_ref > 0.0)
      t_dim = std::abs(dist) / opts.v_ref;
    if (t_dim > 0.0) {
      best = std::max(best, t_dim);
      any = true;
    }
  }
  return any ? best : opts.t_min;
}

double average_cost(const QuinticTrajectory& traj) {
  if (traj.duration <= 0.0) throw NonPositiveDuration(traj.duration);
  double jerk_sq = 0.0;
  for (int d = 0; d < traj.dims; ++d) {
    const Poly jerk = traj.dim_poly(d).derivative().derivative().derivative();
    jerk_sq += jerk.integral_of_square(traj.duration);
  }
  return (jerk_sq + traj.duration) / traj.duration;
}

PrimitiveSolution solve_min_time(const StateVec& x0, const Vec3& p_end,
                                 const PrimitiveOptions& opts) {
  std::vector<double> candidates;
  try {
    for (double r : duration_polynomial(x0, p_end).real_roots())
      if (r >= opts.t_min && r <= opts.t_max) candidates.push_back(r);
  } catch (const DegenerateInput&) {
    // all-zero polynomial: fall through to the sampling branch
  }

  bool root_derived = !candidates.empty();
  if (!root_derived) {
    const double t_est = constant_accel_duration(x0, p_end, opts);
    const double lo = std::max((1.0 - opts.sample_spread) * t_est, opts.t_min);
    const double hi =
        std::max(std::min((1.0 + opts.sample_spread) * t_est, opts.t_max), lo);
    const int n = std::max(opts.sample_count, 1);
    for (int k = 0; k < n; ++k) {
      const double f = (n == 1) ? 0.5 : static_cast<double>(k) / (n - 1);
      candidates.push_back(lo + f * (hi - lo));
    }
  }
  std::sort(candidates.begin(), candidates.end());

  PrimitiveSolution best;
  best.avg_cost = std::numeric_limits<double>::infinity();
  for (double T : candidates) {
    QuinticTrajectory traj = primitive_trajectory(x0, p_end, T);
    const double cost = average_cost(traj);
    if (cost < best.avg_cost) {
      best.trajectory = std::move(traj);
      best.avg_cost = cost;
      best.root_derived = root_derived;
    }
  }
  return best;
}

}  // namespace mrnav
