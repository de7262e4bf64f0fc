#pragma once

#include <vector>

#include "mrnav/compensator.hpp"
#include "mrnav/types.hpp"

namespace mrnav {

/// Weights of the condensed objective. k_p is the sharpness shared by both
/// exponential barrier families. unscaled_numerator switches the collision
/// integrand to the raw (not radii-scaled) relative-velocity numerator,
/// evaluated by quadrature instead of the closed form; kept for comparison.
struct CostWeights {
  double q_dynm = 1.0;
  double q_obs = 30000.0;
  double q_lim = 10.0;
  double k_t = 1.0;
  double k_p = 6.0;
  bool unscaled_numerator = false;
};

struct PeerInfo {
  PredictedTrajectory traj;
  RobotShape shape;
};

/// Everything one replan needs: own boundary data, shape (pad carries the
/// current tracking error), limits, weights, predicted peers and the
/// duration bracket with its warm start.
struct PlanContext {
  StateVec x0;
  Vec3 goal = Vec3::Zero();
  RobotShape shape;
  Limits limits;
  CostWeights weights;
  std::vector<PeerInfo> peers;
  double t_lo = 0.1;
  double t_hi = 60.0;
  double warm_start = 1.0;

  StateVec x_end() const { return StateVec::at_rest(goal, x0.dims); }
};

/// Boundary-value condensation: the unique quintic matching both endpoint
/// states for the given duration. c0..c2 come from x0; c3..c5 from the
/// closed-form solution of the 3x3 endpoint system. Throws
/// NonPositiveDuration for T <= 0 and SingularTransform for T < 1e-9.
QuinticTrajectory condense(const StateVec& x0, const StateVec& x_end, double T);

/// q_dynm times the integral of the squared jerk norm over [0, T]; exact.
double smoothness_cost(const QuinticTrajectory& traj, double q_dynm);

/// Exponential collision barrier against one predicted peer, integrated in
/// closed form: the radii-scaled relative-velocity numerator makes the
/// integrand an exact derivative of -exp(-k_p d)/k_p, accumulated in
/// magnitude over sign-consistent segments of d'. The pad inflates every
/// combined radius. With unscaled_numerator the literal integrand is
/// integrated numerically instead.
double collision_cost(const QuinticTrajectory& traj,
                      const PredictedTrajectory& peer,
                      const RobotShape& own_shape, const RobotShape& peer_shape,
                      double pad, double q_obs, double k_p,
                      bool unscaled_numerator = false);

/// Soft dynamic-limit barrier summed over velocity, acceleration and jerk;
/// the integrand is d/dt(|x|^2) exp(k_p(|x|^2 - tau^2)), so the closed form
/// is the endpoint difference of exp(k_p(|x|^2 - tau^2))/k_p. Exponent
/// arguments are clamped at +50.
double limits_cost(const QuinticTrajectory& traj, const Limits& limits,
                   double q_lim, double k_p);

/// Condensed objective at duration T: smoothness + collisions + limits
/// + k_t T^2.
double total_cost(double T, const PlanContext& ctx);

enum class PlanStatus { ok, bracket_collapse };

struct PlanResult {
  QuinticTrajectory trajectory;
  double t_star = 0.0;
  PlanStatus status = PlanStatus::ok;
};

/// Bounded derivative-free minimization of total_cost over the duration
/// bracket: a 16-point scan plus the warm-start point, then golden-section
/// refinement of the best bracket down to 1e-4 s. A collapsed bracket
/// returns the warm-start trajectory flagged.
PlanResult plan(const PlanContext& ctx);

}  // namespace mrnav
