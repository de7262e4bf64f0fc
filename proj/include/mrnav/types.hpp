#pragma once

#include <Eigen/Core>
#include <cmath>

#include "mrnav/poly.hpp"

namespace mrnav {

using Vec3 = Eigen::Vector3d;

/// Per-dimension kinematic state of one robot at an instant. Dimensions
/// beyond `dims` are kept at zero so 1-D and 2-D problems reuse the same
/// storage.
struct StateVec {
  int dims = 3;
  Vec3 pos = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  Vec3 acc = Vec3::Zero();

  static StateVec at_rest(const Vec3& p, int dims = 3) {
    StateVec s;
    s.dims = dims;
    s.pos = p;
    return s;
  }
};

/// Degree-5 position polynomial per dimension with a shared duration.
/// Column d of `coeffs` holds c0..c5 of dimension d, lowest degree first.
struct QuinticTrajectory {
  int dims = 3;
  double duration = 0.0;
  Eigen::Matrix<double, 6, 3> coeffs = Eigen::Matrix<double, 6, 3>::Zero();

  Vec3 position(double t) const { return eval_derivative<0>(t); }
  Vec3 velocity(double t) const { return eval_derivative<1>(t); }
  Vec3 acceleration(double t) const { return eval_derivative<2>(t); }
  Vec3 jerk(double t) const { return eval_derivative<3>(t); }

  StateVec state(double t) const {
    StateVec s;
    s.dims = dims;
    s.pos = position(t);
    s.vel = velocity(t);
    s.acc = acceleration(t);
    return s;
  }

  /// Position polynomial of one dimension.
  Poly dim_poly(int d) const {
    return Poly(std::vector<double>(coeffs.col(d).data(),
                                    coeffs.col(d).data() + 6));
  }

 private:
  template <int Order>
  Vec3 eval_derivative(double t) const {
    Vec3 out = Vec3::Zero();
    for (int d = 0; d < dims; ++d) {
      double acc = 0.0;
      for (int k = 5; k >= Order; --k) {
        double factor = 1.0;
        for (int m = 0; m < Order; ++m) factor *= static_cast<double>(k - m);
        acc = acc * t + factor * coeffs(k, d);
      }
      out[d] = acc;
    }
    return out;
  }
};

/// Axis-aligned prolate spheroid: lateral radii r1, vertical radius eta*r1,
/// plus the current tracking-error pad.
struct RobotShape {
  double r1 = 0.5;
  double eta = 3.0;
  double pad = 0.0;

  double radius(int axis) const { return axis == 2 ? eta * r1 : r1; }
  double volume() const {
    return 4.0 / 3.0 * M_PI * r1 * r1 * (eta * r1);
  }
};

/// Euclidean-norm magnitude limits on the first three position derivatives.
struct Limits {
  double vel = 2.0;
  double acc = 8.0;
  double jerk = 20.0;
};

/// Ellipsoid-scaled squared separation between two robots (the collision
/// measure: values > 1 mean no contact). Per-axis denominators combine both
/// robots' radii plus the pad.
inline double scaled_separation(const Vec3& pa, const Vec3& pb,
                                const RobotShape& sa, const RobotShape& sb,
                                double pad, int dims = 3) {
  double d = 0.0;
  for (int i = 0; i < dims; ++i) {
    const double r = sa.radius(i) + sb.radius(i) + pad;
    const double diff = pa[i] - pb[i];
    d += diff * diff / (r * r);
  }
  return d;
}

}  // namespace mrnav
