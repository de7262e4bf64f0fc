#include "mrnav/compensator.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "mrnav/errors.hpp"

namespace mrnav {

namespace {

using Row6 = Eigen::Matrix<double, 1, 6>;

Row6 basis_row(double t, int order) {
  // d^order/dt^order of [1, t, t^2, ..., t^5]
  Row6 row = Row6::Zero();
  for (int k = order; k <= 5; ++k) {
    double factor = 1.0;
    for (int m = 0; m < order; ++m) factor *= static_cast<double>(k - m);
    row(k) = factor * std::pow(t, static_cast<double>(k - order));
  }
  return row;
}

}  // namespace

void HorizonBuffer::push(const StateVec& observed, const StateVec& predicted,
                         double ts) {
  if (!samples_.empty() && ts <= samples_.back().ts)
    throw NonMonotoneTimestamp("push_observation: timestamp not increasing");
  samples_.push_back({ts, observed, predicted});
  if (static_cast<int>(samples_.size()) > capacity_) samples_.pop_front();
}

Vec3 CompensatorPoly::position(double t) const {
  Vec3 out = Vec3::Zero();
  for (int d = 0; d < dims; ++d) {
    double acc = 0.0;
    for (int k = 5; k >= 0; --k) acc = acc * t + coeffs(k, d);
    out[d] = acc;
  }
  return out;
}

Vec3 CompensatorPoly::velocity(double t) const {
  Vec3 out = Vec3::Zero();
  for (int d = 0; d < dims; ++d) {
    double acc = 0.0;
    for (int k = 5; k >= 1; --k) acc = acc * t + k * coeffs(k, d);
    out[d] = acc;
  }
  return out;
}

Vec3 CompensatorPoly::acceleration(double t) const {
  Vec3 out = Vec3::Zero();
  for (int d = 0; d < dims; ++d) {
    double acc = 0.0;
    for (int k = 5; k >= 2; --k)
      acc = acc * t + k * (k - 1) * coeffs(k, d);
    out[d] = acc;
  }
  return out;
}

StateVec CompensatorPoly::state(double t) const {
  StateVec s;
  s.dims = dims;
  s.pos = position(t);
  s.vel = velocity(t);
  s.acc = acceleration(t);
  return s;
}

CompensatorFit fit_compensator(const HorizonBuffer& buf, double T,
                               const CompensatorOptions& opts) {
  if (T <= 0.0) throw NonPositiveDuration(T);
  if (buf.size() < 2)
    throw DegenerateInput("fit_compensator: need at least 2 samples");

  const int dims = buf.newest().observed.dims;
  const int m = buf.size();
  const double t_newest = buf.newest().ts;

  CompensatorFit fit;
  fit.comp = CompensatorPoly::zero(dims, T);

  // Residual of the newest sample decides whether the t=0 constraint binds
  // all three derivatives or position only.
  const Vec3 newest_residual =
      buf.newest().observed.pos - buf.newest().predicted.pos;
  fit.relaxed = newest_residual.head(dims).norm() > opts.relax_threshold;

  // Constraint rows, shared across dimensions.
  std::vector<Row6> constraint_rows;
  if (fit.relaxed) {
    constraint_rows = {basis_row(0.0, 0), basis_row(T, 0), basis_row(T, 1),
                       basis_row(T, 2)};
  } else {
    constraint_rows = {basis_row(0.0, 0), basis_row(0.0, 1), basis_row(0.0, 2),
                       basis_row(T, 0),   basis_row(T, 1),   basis_row(T, 2)};
  }
  const int nc = static_cast<int>(constraint_rows.size());

  // Normal matrix and right-hand side per dimension; H is shared.
  Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 3> g = Eigen::Matrix<double, 6, 3>::Zero();
  for (int i = 0; i < m; ++i) {
    const double t_local = buf[i].ts - t_newest;  // newest at 0, older < 0
    for (int order = 0; order < 3; ++order) {
      const double w = opts.state_weights[order];
      if (w <= 0.0) continue;
      const Row6 row = basis_row(t_local, order);
      H += w * row.transpose() * row;
      for (int d = 0; d < dims; ++d) {
        double r = 0.0;
        switch (order) {
          case 0: r = buf[i].observed.pos[d] - buf[i].predicted.pos[d]; break;
          case 1: r = buf[i].observed.vel[d] - buf[i].predicted.vel[d]; break;
          case 2: r = buf[i].observed.acc[d] - buf[i].predicted.acc[d]; break;
        }
        g.col(d) += w * row.transpose() * r;
      }
    }
  }

  // KKT system [H A^T; A 0] [gamma; nu] = [g; 0], one solve per dimension.
  const int n = 6 + nc;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n, n);
  kkt.topLeftCorner(6, 6) = H;
  for (int c = 0; c < nc; ++c) {
    kkt.block(6 + c, 0, 1, 6) = constraint_rows[c];
    kkt.block(0, 6 + c, 6, 1) = constraint_rows[c].transpose();
  }
  fit.normal_matrix = H;
  fit.normal_rhs = g;
  fit.constraints.resize(nc, 6);
  for (int c = 0; c < nc; ++c) fit.constraints.row(c) = constraint_rows[c];

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) {
    fit.singular = true;
    return fit;  // zero compensator, flagged
  }

  fit.multipliers.resize(nc, dims);
  for (int d = 0; d < dims; ++d) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs.head(6) = g.col(d);
    const Eigen::VectorXd sol = lu.solve(rhs);
    fit.comp.coeffs.col(d) = sol.head(6);
    fit.multipliers.col(d) = sol.tail(nc);
  }

  // Extrapolation guard: scale the polynomial down when the correction
  // outgrows the cap; scaling keeps every boundary constraint satisfied.
  if (std::isfinite(opts.max_correction)) {
    double peak = 0.0;
    for (int k = 0; k <= 64; ++k)
      peak = std::max(peak, fit.comp.position(T * k / 64.0).norm());
    if (peak > opts.max_correction && peak > 0.0)
      fit.comp.coeffs *= opts.max_correction / peak;
  }

  // Weighted fit residual at the solution.
  double res = 0.0;
  for (int i = 0; i < m; ++i) {
    const double t_local = buf[i].ts - t_newest;
    const StateVec cmp = fit.comp.state(t_local);
    for (int d = 0; d < dims; ++d) {
      const double rp =
          cmp.pos[d] - (buf[i].observed.pos[d] - buf[i].predicted.pos[d]);
      const double rv =
          cmp.vel[d] - (buf[i].observed.vel[d] - buf[i].predicted.vel[d]);
      const double ra =
          cmp.acc[d] - (buf[i].observed.acc[d] - buf[i].predicted.acc[d]);
      res += opts.state_weights[0] * rp * rp + opts.state_weights[1] * rv * rv +
             opts.state_weights[2] * ra * ra;
    }
  }
  fit.residual = std::sqrt(res);
  return fit;
}

StateVec PredictedTrajectory::state(double t) const {
  const double hold = hold_time();
  StateVec s;
  if (t >= hold) {
    s = StateVec::at_rest(base.position(base.duration), base.dims);
  } else {
    s = base.state(t + base_offset);
  }
  if (comp && t >= 0.0 && t <= comp->duration) {
    const StateVec c = comp->state(t);
    s.pos += c.pos;
    s.vel += c.vel;
    s.acc += c.acc;
  }
  return s;
}

PredictedTrajectory compose_prediction(const QuinticTrajectory& pred,
                                       const CompensatorPoly& comp) {
  if (std::abs(pred.duration - comp.duration) >
      1e-9 * std::max(1.0, pred.duration))
    throw DurationMismatch("compose_prediction: durations differ");
  PredictedTrajectory out;
  out.base = pred;
  out.base_offset = 0.0;
  out.comp = comp;
  return out;
}

}  // namespace mrnav
