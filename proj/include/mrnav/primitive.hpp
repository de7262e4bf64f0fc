#pragma once

#include <Eigen/Core>

#include "mrnav/poly.hpp"
#include "mrnav/types.hpp"

namespace mrnav {

/// Knobs for the minimum-time primitive solver, including the
/// constant-acceleration fallback sampling used when the duration
/// polynomial has no admissible positive root.
struct PrimitiveOptions {
  double t_min = 0.1;
  double t_max = 60.0;
  int sample_count = 64;
  double sample_spread = 0.5;
  double v_ref = 2.0;  // reference speed for degenerate fallback durations
};

/// Polynomial coefficients of the jerk-smooth primitive per dimension:
/// p(t) = b1 t^5/120 + b2 t^4/24 + b3 t^3/6 + a0 t^2/2 + v0 t + p0.
struct BetaCoeffs {
  Vec3 b1 = Vec3::Zero();
  Vec3 b2 = Vec3::Zero();
  Vec3 b3 = Vec3::Zero();
};

/// Closed-form coefficients for the free-end-state minimum-time problem with
/// only the end position constrained:
///   [b1; b2; b3] = (1/T^5) [20; -20 T; 10 T^2] (p_end - (p0 + v0 T + a0 T^2/2))
/// per dimension. Throws NonPositiveDuration.
BetaCoeffs beta_coefficients(const StateVec& x0, const Vec3& p_end, double T);

/// Quintic trajectory assembled from beta_coefficients for duration T.
/// Its state at t=0 reproduces x0 exactly and its position at T is p_end.
QuinticTrajectory primitive_trajectory(const StateVec& x0, const Vec3& p_end,
                                       double T);

/// Stationarity polynomial of the free-duration cost: positive real roots
/// are candidate optimal durations. All dimensions are lumped into shared
/// coefficients. With delta_i = p_end_i - p0_i the polynomial is
///   T^6 - 5 S_aa T^4 - 40 S_va T^3 - 60 (S_vv - S_da) T^2
///       + 160 S_dv T - 100 S_dd
/// where S_xy sums the per-dimension products.
Poly duration_polynomial(const StateVec& x0, const Vec3& p_end);

/// Duration estimate under a constant-acceleration assumption: per dimension
/// the smallest positive root of p0 + v0 t + a0 t^2 / 2 = p_end, falling back
/// to |p_end - p0| / v_ref for dimensions with no positive root; the result
/// is the maximum over dimensions, or t_min if every dimension degenerates.
double constant_accel_duration(const StateVec& x0, const Vec3& p_end,
                               const PrimitiveOptions& opts);

/// Time-averaged trajectory cost (integral of squared jerk plus elapsed
/// time, divided by the duration). Throws NonPositiveDuration.
double average_cost(const QuinticTrajectory& traj);

struct PrimitiveSolution {
  QuinticTrajectory trajectory;
  bool root_derived = false;  // true when T* came from the duration polynomial
  double avg_cost = 0.0;
};

/// Full minimum-time pipeline: duration-polynomial roots in [t_min, t_max]
/// scored by average cost; when no admissible root exists, durations are
/// sampled around the constant-acceleration estimate instead. Ties prefer
/// the smaller duration. Always returns a trajectory.
PrimitiveSolution solve_min_time(const StateVec& x0, const Vec3& p_end,
                                 const PrimitiveOptions& opts = {});

}  // namespace mrnav
