#include "mrnav/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrnav/errors.hpp"

namespace mrnav {

namespace {

constexpr double kExpClamp = 50.0;
constexpr int kScanPoints = 16;
constexpr double kRefineTol = 1e-4;
constexpr int kSegmentScan = 64;  // intervals for d' sign-change detection

double clamped_exp(double x) { return std::exp(std::min(x, kExpClamp)); }

/// Locates a root of f in [lo, hi] given f(lo) and f(hi) with opposite signs.
template <typename F>
double bisect(const F& f, double lo, double hi, double flo) {
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// |exp(-k d)| telescoping over the monotone segments of d on [a, b].
/// n = d'/2 is the sign object; d evaluated exactly at segment ends.
double segment_sum(const Poly& d_poly, const Poly& n_poly, double a, double b,
                   double k_p) {
  std::vector<double> cuts;
  cuts.push_back(a);
  const double h = (b - a) / kSegmentScan;
  auto n_at = [&](double t) { return n_poly.eval(t); };
  double prev_t = a;
  double prev_n = n_at(a);
  for (int i = 1; i <= kSegmentScan; ++i) {
    const double t = (i == kSegmentScan) ? b : a + i * h;
    const double nt = n_at(t);
    if ((prev_n < 0.0 && nt > 0.0) || (prev_n > 0.0 && nt < 0.0))
      cuts.push_back(bisect(n_at, prev_t, t, prev_n));
    else if (nt == 0.0 && t != b)
      cuts.push_back(t);
    prev_t = t;
    prev_n = nt;
  }
  cuts.push_back(b);

  double total = 0.0;
  double e_prev = std::exp(-k_p * d_poly.eval(cuts.front()));
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double e_next = std::exp(-k_p * d_poly.eval(cuts[i]));
    total += std::abs(e_next - e_prev) / k_p;
    e_prev = e_next;
  }
  return total;
}

/// Composite Simpson integration of f over [a, b].
template <typename F>
double simpson(const F& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i)
    acc += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

QuinticTrajectory condense(const StateVec& x0, const StateVec& x_end,
                           double T) {
  if (T <= 0.0) throw NonPositiveDuration(T);
  if (T < 1e-9) throw SingularTransform("condense: duration below 1e-9");

  QuinticTrajectory traj;
  traj.dims = x0.dims;
  traj.duration = T;
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
  for (int d = 0; d < x0.dims; ++d) {
    const double dp =
        x_end.pos[d] - (x0.pos[d] + x0.vel[d] * T + 0.5 * x0.acc[d] * T2);
    const double dv = x_end.vel[d] - (x0.vel[d] + x0.acc[d] * T);
    const double da = x_end.acc[d] - x0.acc[d];
    traj.coeffs(0, d) = x0.pos[d];
    traj.coeffs(1, d) = x0.vel[d];
    traj.coeffs(2, d) = 0.5 * x0.acc[d];
    traj.coeffs(3, d) = (10.0 * dp - 4.0 * dv * T + 0.5 * da * T2) / T3;
    traj.coeffs(4, d) = (-15.0 * dp + 7.0 * dv * T - da * T2) / T4;
    traj.coeffs(5, d) = (6.0 * dp - 3.0 * dv * T + 0.5 * da * T2) / T5;
  }
  return traj;
}

double smoothness_cost(const QuinticTrajectory& traj, double q_dynm) {
  if (q_dynm == 0.0) return 0.0;
  double acc = 0.0;
  for (int d = 0; d < traj.dims; ++d) {
    const Poly jerk = traj.dim_poly(d).derivative().derivative().derivative();
    acc += jerk.integral_of_square(traj.duration);
  }
  return q_dynm * acc;
}

double collision_cost(const QuinticTrajectory& traj,
                      const PredictedTrajectory& peer,
                      const RobotShape& own_shape, const RobotShape& peer_shape,
                      double pad, double q_obs, double k_p,
                      bool unscaled_numerator) {
  if (q_obs == 0.0) return 0.0;
  const double T = traj.duration;
  const double hold = std::clamp(peer.hold_time(), 0.0, T);

  if (unscaled_numerator) {
    // Literal integrand, numeric integration: 2 |sum dp_i dv_i| e^{-k_p d}.
    auto integrand = [&](double t) {
      const StateVec ps = peer.state(t);
      const Vec3 dp = traj.position(t) - ps.pos;
      const Vec3 dv = traj.velocity(t) - ps.vel;
      double num = 0.0;
      for (int i = 0; i < traj.dims; ++i) num += dp[i] * dv[i];
      const double d = scaled_separation(traj.position(t), ps.pos, own_shape,
                                         peer_shape, pad, traj.dims);
      return 2.0 * std::abs(num) * std::exp(-k_p * d);
    };
    double total = 0.0;
    if (hold > 0.0) total += simpson(integrand, 0.0, hold, 512);
    if (hold < T) total += simpson(integrand, hold, T, 512);
    return q_obs * total;
  }

  double total = 0.0;
  // Pieces: peer moving on [0, hold], held constant on [hold, T].
  for (int piece = 0; piece < 2; ++piece) {
    const double a = (piece == 0) ? 0.0 : hold;
    const double b = (piece == 0) ? hold : T;
    if (b - a <= 0.0) continue;
    Poly d_poly;
    for (int d = 0; d < traj.dims; ++d) {
      Poly rel = traj.dim_poly(d);
      if (piece == 0) {
        Poly peer_poly = peer.base.dim_poly(d).shifted(peer.base_offset);
        if (peer.comp) {
          peer_poly = peer_poly + Poly(std::vector<double>(
                                      peer.comp->coeffs.col(d).data(),
                                      peer.comp->coeffs.col(d).data() + 6));
        }
        rel = rel - peer_poly;
      } else {
        const double held = peer.base.position(peer.base.duration)[d];
        rel = rel - Poly({held});
      }
      const double r = own_shape.radius(d) + peer_shape.radius(d) + pad;
      d_poly = d_poly + (rel * rel).scaled(1.0 / (r * r));
    }
    const Poly n_poly = d_poly.derivative();
    total += segment_sum(d_poly, n_poly, a, b, k_p);
  }
  return q_obs * total;
}

double limits_cost(const QuinticTrajectory& traj, const Limits& limits,
                   double q_lim, double k_p) {
  if (q_lim == 0.0) return 0.0;
  const double T = traj.duration;
  const double taus[3] = {limits.vel, limits.acc, limits.jerk};
  double total = 0.0;
  for (int order = 1; order <= 3; ++order) {
    double n0 = 0.0, nT = 0.0;
    switch (order) {
      case 1:
        n0 = traj.velocity(0.0).squaredNorm();
        nT = traj.velocity(T).squaredNorm();
        break;
      case 2:
        n0 = traj.acceleration(0.0).squaredNorm();
        nT = traj.acceleration(T).squaredNorm();
        break;
      case 3:
        n0 = traj.jerk(0.0).squaredNorm();
        nT = traj.jerk(T).squaredNorm();
        break;
    }
    const double tau2 = taus[order - 1] * taus[order - 1];
    total += (clamped_exp(k_p * (nT - tau2)) - clamped_exp(k_p * (n0 - tau2))) /
             k_p;
  }
  return q_lim * total;
}

double total_cost(double T, const PlanContext& ctx) {
  const QuinticTrajectory traj = condense(ctx.x0, ctx.x_end(), T);
  double cost = smoothness_cost(traj, ctx.weights.q_dynm);
  for (const PeerInfo& peer : ctx.peers)
    cost += collision_cost(traj, peer.traj, ctx.shape, peer.shape,
                           ctx.shape.pad + peer.shape.pad, ctx.weights.q_obs,
                           ctx.weights.k_p, ctx.weights.unscaled_numerator);
  // The telescoped limit barrier is an endpoint difference and can turn
  // negative (start state further over the limit than the end state); a
  // barrier must never pay out, so its contribution saturates at zero.
  cost += std::clamp(
      limits_cost(traj, ctx.limits, ctx.weights.q_lim, ctx.weights.k_p), 0.0,
      1e12);
  cost += ctx.weights.k_t * T * T;
  return cost;
}

PlanResult plan(const PlanContext& ctx) {
  const double warm = std::clamp(ctx.warm_start, ctx.t_lo, ctx.t_hi);
  PlanResult result;
  if (ctx.t_hi - ctx.t_lo < kRefineTol) {
    result.trajectory = condense(ctx.x0, ctx.x_end(), warm);
    result.t_star = warm;
    result.status = PlanStatus::bracket_collapse;
    return result;
  }

  // Coarse scan; every local minimum of the scan profile plus the warm
  // start seeds a golden-section refinement.
  const double step = (ctx.t_hi - ctx.t_lo) / (kScanPoints - 1);
  double ts[kScanPoints];
  double cs[kScanPoints];
  for (int i = 0; i < kScanPoints; ++i) {
    ts[i] = (i == kScanPoints - 1) ? ctx.t_hi : ctx.t_lo + i * step;
    cs[i] = total_cost(ts[i], ctx);
  }
  double best_t = warm;
  double best_cost = total_cost(warm, ctx);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto refine = [&](double a, double b) {
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = total_cost(x1, ctx);
    double f2 = total_cost(x2, ctx);
    while (b - a > kRefineTol) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = total_cost(x1, ctx);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = total_cost(x2, ctx);
      }
    }
    const double t = (f1 <= f2) ? x1 : x2;
    const double c = std::min(f1, f2);
    if (c < best_cost) {
      best_cost = c;
      best_t = t;
    }
  };

  for (int i = 0; i < kScanPoints; ++i) {
    const bool left_higher = (i == 0) || cs[i - 1] >= cs[i];
    const bool right_higher = (i == kScanPoints - 1) || cs[i + 1] >= cs[i];
    if (left_higher && right_higher)
      refine(std::max(ctx.t_lo, ts[i] - step), std::min(ctx.t_hi, ts[i] + step));
  }
  refine(std::max(ctx.t_lo, warm - step), std::min(ctx.t_hi, warm + step));

  result.trajectory = condense(ctx.x0, ctx.x_end(), best_t);
  result.t_star = best_t;
  return result;
}

}  // namespace mrnav
