#pragma once

#include <Eigen/Core>
#include <deque>
#include <limits>
#include <optional>

#include "mrnav/types.hpp"

namespace mrnav {

struct HorizonSample {
  double ts = 0.0;
  StateVec observed;
  StateVec predicted;
};

/// Ring of (observed, predicted) state pairs with strictly increasing
/// timestamps; the oldest sample is evicted at capacity.
class HorizonBuffer {
 public:
  explicit HorizonBuffer(int capacity = 10) : capacity_(capacity) {}

  /// Throws NonMonotoneTimestamp unless ts exceeds the newest stored one.
  void push(const StateVec& observed, const StateVec& predicted, double ts);

  int size() const { return static_cast<int>(samples_.size()); }
  int capacity() const { return capacity_; }
  const HorizonSample& operator[](int i) const { return samples_[i]; }
  const HorizonSample& newest() const { return samples_.back(); }

 private:
  int capacity_;
  std::deque<HorizonSample> samples_;
};

/// Quintic correction polynomial sharing the predicted trajectory's
/// duration. Fitted so that it vanishes at the current time and at T; its
/// value over (0, T] extrapolates the recent interaction-induced deviation.
struct CompensatorPoly {
  int dims = 3;
  double duration = 0.0;
  Eigen::Matrix<double, 6, 3> coeffs = Eigen::Matrix<double, 6, 3>::Zero();

  Vec3 position(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;
  StateVec state(double t) const;

  static CompensatorPoly zero(int dims, double duration) {
    CompensatorPoly c;
    c.dims = dims;
    c.duration = duration;
    return c;
  }
};

struct CompensatorOptions {
  /// Residual weighting of position, velocity, acceleration in the fit.
  Vec3 state_weights = Vec3(1.0, 0.1, 0.01);
  /// When the newest sample's position-residual norm exceeds this threshold,
  /// the t=0 constraint is relaxed to position-only so the trend can be
  /// fitted; otherwise all three state derivatives are pinned at both ends.
  double relax_threshold = 1e-3;
  /// Horizon length (samples kept per peer).
  int k_comp = 10;
  /// Cap on the fitted position correction over [0, T]: when the fit
  /// extrapolates beyond this the whole polynomial is scaled down, which
  /// preserves the boundary constraints. Infinity disables the cap.
  double max_correction = std::numeric_limits<double>::infinity();

  /// Simulation default: corrections capped near the robots' own scale.
  static CompensatorOptions sim_defaults() {
    CompensatorOptions c;
    c.max_correction = 0.5;
    return c;
  }
};

struct CompensatorFit {
  CompensatorPoly comp;
  bool singular = false;  // KKT system was rank-deficient; comp is zero
  bool relaxed = false;   // t=0 constraint was position-only
  double residual = 0.0;  // weighted fit residual at the solution
  // Lagrange multipliers (one column per dimension) and the pieces of the
  // KKT system needed to audit first-order optimality.
  Eigen::MatrixXd multipliers;
  Eigen::Matrix<double, 6, 6> normal_matrix;
  Eigen::Matrix<double, 6, 3> normal_rhs;
  Eigen::MatrixXd constraints;  // rows of the constraint Jacobian
};

/// Equality-constrained least squares over the horizon residuals
/// (observed - predicted): sample times are mapped so the newest sample
/// sits at local t=0 and older samples at negative local times; the
/// compensator is constrained to vanish at t=0 and t=T. Assembles the KKT
/// linear system per dimension and solves it with a rank-revealing
/// factorization. Requires at least 2 samples and T > 0.
CompensatorFit fit_compensator(const HorizonBuffer& buf, double T,
                               const CompensatorOptions& opts = {});

/// Peer trajectory prediction: a base quintic (optionally corrected by a
/// compensator) evaluated in local time, holding the terminal position with
/// zero velocity and acceleration beyond the end.
struct PredictedTrajectory {
  QuinticTrajectory base;
  double base_offset = 0.0;  // local time 0 maps to base time base_offset
  std::optional<CompensatorPoly> comp;

  /// Local time after which the endpoint hold applies.
  double hold_time() const { return base.duration - base_offset; }

  StateVec state(double t) const;
};

/// Combines a predicted primitive with its fitted compensator. Throws
/// DurationMismatch unless the durations agree.
PredictedTrajectory compose_prediction(const QuinticTrajectory& pred,
                                       const CompensatorPoly& comp);

}  // namespace mrnav
