#include <doctest.h>

#include <cmath>
#include <functional>

#include "mrnav/errors.hpp"
#include "mrnav/optimizer.hpp"
#include "mrnav/primitive.hpp"
#include "test_util.hpp"

using namespace mrnav;

namespace {

StateVec random_state(testutil::Rand& rng, double p = 2.0, double v = 1.0,
                      double a = 1.0) {
  StateVec s;
  for (int d = 0; d < 3; ++d) {
    s.pos[d] = rng.uniform(-p, p);
    s.vel[d] = rng.uniform(-v, v);
    s.acc[d] = rng.uniform(-a, a);
  }
  return s;
}

QuinticTrajectory random_quintic(testutil::Rand& rng, double T) {
  QuinticTrajectory t;
  t.duration = T;
  for (int d = 0; d < 3; ++d)
    for (int k = 0; k < 6; ++k) t.coeffs(k, d) = rng.uniform(-1, 1);
  return t;
}

/// Independent quadrature oracle for the collision barrier: a dense scan
/// locates every sign change of d', then each monotone piece is integrated
/// with 256-point Gauss-Legendre.
double collision_oracle(const QuinticTrajectory& own,
                        const PredictedTrajectory& peer,
                        const RobotShape& own_shape,
                        const RobotShape& peer_shape, double pad, double q_obs,
                        double k_p) {
  const auto d_of = [&](double t) {
    return scaled_separation(own.position(t), peer.state(t).pos, own_shape,
                             peer_shape, pad, own.dims);
  };
  const auto half_dprime = [&](double t) {
    const StateVec ps = peer.state(t);
    const Vec3 dp = own.position(t) - ps.pos;
    const Vec3 dv = own.velocity(t) - ps.vel;
    double acc = 0.0;
    for (int i = 0; i < own.dims; ++i) {
      const double r = own_shape.radius(i) + peer_shape.radius(i) + pad;
      acc += dp[i] * dv[i] / (r * r);
    }
    return acc;
  };
  const std::function<double(double)> integrand = [&](double t) {
    return 2.0 * std::abs(half_dprime(t)) * std::exp(-k_p * d_of(t));
  };

  const double T = own.duration;
  const double hold = std::clamp(peer.hold_time(), 0.0, T);
  std::vector<double> cuts = {0.0};
  if (hold > 0.0 && hold < T) cuts.push_back(hold);
  // dense sign scan inside each piece
  std::vector<double> all_cuts = {0.0};
  for (std::size_t p = 0; p + 1 <= cuts.size(); ++p) {
    const double a = cuts[p];
    const double b = (p + 1 < cuts.size()) ? cuts[p + 1] : T;
    const int n = 4096;
    double prev_t = a, prev_v = half_dprime(a);
    for (int i = 1; i <= n; ++i) {
      const double t = a + (b - a) * i / n;
      const double v = half_dprime(t);
      if ((prev_v < 0 && v > 0) || (prev_v > 0 && v < 0)) {
        double lo = prev_t, hi = t, flo = prev_v;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = half_dprime(mid);
          if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        all_cuts.push_back(0.5 * (lo + hi));
      }
      prev_t = t;
      prev_v = v;
    }
    all_cuts.push_back(b);
  }

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < all_cuts.size(); ++i)
    total += testutil::integrate(integrand, all_cuts[i], all_cuts[i + 1], 256);
  return q_obs * total;
}

PredictedTrajectory static_peer(const Vec3& pos) {
  PredictedTrajectory p;
  p.base.duration = 0.0;
  for (int d = 0; d < 3; ++d) p.base.coeffs(0, d) = pos[d];
  return p;
}

PredictedTrajectory moving_peer(const StateVec& x0, const Vec3& goal) {
  PredictedTrajectory p;
  p.base = solve_min_time(x0, goal).trajectory;
  return p;
}

}  // namespace

TEST_CASE("condense endpoint exactness") {
  StateVec rest;
  const QuinticTrajectory zero = condense(rest, rest, 1.0);
  CHECK(zero.coeffs.norm() == 0.0);

  testutil::Rand rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const StateVec x0 = random_state(rng);
    const StateVec x1 = random_state(rng);
    const double T = (trial % 2) ? 2.0 : rng.uniform(0.2, 8.0);
    const QuinticTrajectory traj = condense(x0, x1, T);
    CHECK((traj.position(0) - x0.pos).norm() < 1e-9);
    CHECK((traj.velocity(0) - x0.vel).norm() < 1e-9);
    CHECK((traj.acceleration(0) - x0.acc).norm() < 1e-9);
    CHECK((traj.position(T) - x1.pos).norm() < 1e-9);
    CHECK((traj.velocity(T) - x1.vel).norm() < 1e-9);
    CHECK((traj.acceleration(T) - x1.acc).norm() < 1e-9);
  }
}

TEST_CASE("condense satisfies the endpoint linear system") {
  testutil::Rand rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const StateVec x0 = random_state(rng);
    const StateVec x1 = random_state(rng);
    const double T = rng.uniform(0.3, 6.0);
    const QuinticTrajectory traj = condense(x0, x1, T);
    const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
    for (int d = 0; d < 3; ++d) {
      const double c3 = traj.coeffs(3, d), c4 = traj.coeffs(4, d),
                   c5 = traj.coeffs(5, d);
      const double r0 =
          x1.pos[d] - (x0.pos[d] + x0.vel[d] * T + 0.5 * x0.acc[d] * T2);
      const double r1 = x1.vel[d] - (x0.vel[d] + x0.acc[d] * T);
      const double r2 = x1.acc[d] - x0.acc[d];
      CHECK(std::abs(c3 * T3 + c4 * T4 + c5 * T5 - r0) < 1e-10);
      CHECK(std::abs(3 * c3 * T2 + 4 * c4 * T3 + 5 * c5 * T4 - r1) < 1e-10);
      CHECK(std::abs(6 * c3 * T + 12 * c4 * T2 + 20 * c5 * T3 - r2) < 1e-10);
    }
  }
}

TEST_CASE("condense duration guards") {
  StateVec rest;
  CHECK_THROWS_AS(condense(rest, rest, 0.0), NonPositiveDuration);
  CHECK_THROWS_AS(condense(rest, rest, -2.0), NonPositiveDuration);
  CHECK_THROWS_AS(condense(rest, rest, 1e-10), SingularTransform);
}

TEST_CASE("smoothness cost cases") {
  QuinticTrajectory drift;
  drift.duration = 3.0;
  drift.coeffs(1, 0) = 2.0;
  CHECK(smoothness_cost(drift, 5.0) == 0.0);

  testutil::Rand rng(7);
  const QuinticTrajectory t = random_quintic(rng, 2.5);
  CHECK(smoothness_cost(t, 0.0) == 0.0);
  const double quad = testutil::integrate(
      [&](double x) { return t.jerk(x).squaredNorm(); }, 0.0, t.duration, 64);
  CHECK(smoothness_cost(t, 1.7) ==
        doctest::Approx(1.7 * quad).epsilon(1e-10));
}

TEST_CASE("collision cost of a distant peer decays below 1e-12") {
  StateVec x0;
  const QuinticTrajectory own = condense(x0, StateVec::at_rest(Vec3(1, 0, 0)), 3.0);
  RobotShape shape;  // r1=0.5, eta=3
  // separation > 20 (r + xi) along x
  const PredictedTrajectory peer = static_peer(Vec3(25.0, 0, 0));
  CHECK(collision_cost(own, peer, shape, shape, 0.0, 100.0, 1.0) < 1e-12);
}

TEST_CASE("static own and static peer give zero collision cost") {
  StateVec x0;
  x0.pos = Vec3(0.5, 0.5, 1.0);
  const QuinticTrajectory own = condense(x0, StateVec::at_rest(x0.pos), 2.0);
  RobotShape shape;
  const PredictedTrajectory peer = static_peer(Vec3(1.0, 0.5, 1.0));
  CHECK(collision_cost(own, peer, shape, shape, 0.0, 100.0, 10.0) ==
        doctest::Approx(0.0));
}

TEST_CASE("head-on approach matches 256-point quadrature") {
  StateVec x0;
  x0.dims = 1;
  const QuinticTrajectory own =
      condense(x0, StateVec::at_rest(Vec3(4.0, 0, 0), 1), 4.0);
  RobotShape shape;
  shape.r1 = 0.5;
  const PredictedTrajectory peer = static_peer(Vec3(6.0, 0, 0));
  const double closed = collision_cost(own, peer, shape, shape, 0.0, 100.0, 2.0);
  const double oracle = collision_oracle(own, peer, shape, shape, 0.0, 100.0, 2.0);
  CHECK(closed == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(closed > 0.0);
}

TEST_CASE("collision closed form matches the quadrature oracle on random cases") {
  testutil::Rand rng(11);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const StateVec x0 = random_state(rng);
    const StateVec x1 = random_state(rng);
    const double T = rng.uniform(0.8, 6.0);
    const QuinticTrajectory own = condense(x0, x1, T);
    StateVec px = random_state(rng);
    Vec3 pgoal(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
    const PredictedTrajectory peer = moving_peer(px, pgoal);
    RobotShape sa, sb;
    sa.r1 = rng.uniform(0.3, 0.6);
    sb.r1 = rng.uniform(0.3, 0.6);
    const double pad = rng.uniform(0.0, 0.2);
    const double k_p = rng.uniform(1.0, 6.0);
    const double closed =
        collision_cost(own, peer, sa, sb, pad, 10.0, k_p);
    const double oracle = collision_oracle(own, peer, sa, sb, pad, 10.0, k_p);
    if (oracle < 1e-9) continue;  // relative comparison needs signal
    ++checked;
    CHECK(closed == doctest::Approx(oracle).epsilon(1e-6));
  }
  CHECK(checked > 30);
}

TEST_CASE("unscaled-numerator mode stays within a factor of the scaled form") {
  // the literal integrand differs only by the per-axis radii scaling, so for
  // spherical shapes with equal radii r the two differ exactly by r^2
  StateVec x0;
  const QuinticTrajectory own =
      condense(x0, StateVec::at_rest(Vec3(3, 0, 0)), 3.0);
  RobotShape sphere;
  sphere.r1 = 0.5;
  sphere.eta = 1.0;
  const PredictedTrajectory peer = static_peer(Vec3(1.5, 0.4, 0));
  const double scaled = collision_cost(own, peer, sphere, sphere, 0.0, 1.0, 3.0,
                                       /*unscaled=*/false);
  const double literal = collision_cost(own, peer, sphere, sphere, 0.0, 1.0,
                                        3.0, /*unscaled=*/true);
  const double r = 1.0;  // combined radius 0.5+0.5
  CHECK(literal == doctest::Approx(scaled * r * r).epsilon(1e-4));
}

TEST_CASE("limits cost telescoping and quadrature agreement") {
  StateVec rest;
  const QuinticTrajectory easy =
      condense(rest, StateVec::at_rest(Vec3(1, 0, 0)), 4.0);
  Limits huge{100.0, 100.0, 1000.0};
  CHECK(std::abs(limits_cost(easy, huge, 10.0, 10.0)) < 1e-12);

  // rest-to-rest: velocity and acceleration terms telescope to zero, so the
  // whole cost equals the jerk endpoint difference
  Limits mid{2.0, 4.0, 10.0};
  const double k_p = 0.05;
  const double direct = limits_cost(easy, mid, 1.0, k_p);
  const double jerk_term =
      (std::exp(k_p * (easy.jerk(4.0).squaredNorm() - 100.0)) -
       std::exp(k_p * (easy.jerk(0.0).squaredNorm() - 100.0))) /
      k_p;
  CHECK(direct == doctest::Approx(jerk_term).epsilon(1e-12));

  testutil::Rand rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    // realistic trajectory via condensation; k_p sampled so the exponent
    // stays moderate and neither side saturates
    const StateVec x0 = random_state(rng, 1.0, 0.8, 0.8);
    const StateVec x1 = random_state(rng, 1.5, 0.8, 0.8);
    QuinticTrajectory t = condense(x0, x1, rng.uniform(1.0, 3.0));
    Limits tau{rng.uniform(1.0, 3.0), rng.uniform(2.0, 6.0),
               rng.uniform(4.0, 12.0)};
    double peak = 1.0;
    for (int i = 0; i <= 64; ++i) {
      const double x = t.duration * i / 64.0;
      peak = std::max({peak, t.velocity(x).squaredNorm(),
                       t.acceleration(x).squaredNorm(),
                       t.jerk(x).squaredNorm(), tau.jerk * tau.jerk});
    }
    const double kp = rng.uniform(0.5, 30.0) / peak;
    const double closed = limits_cost(t, tau, 3.0, kp);
    double quad = 0.0;
    for (int order = 1; order <= 3; ++order) {
      const double tau2 = (order == 1   ? tau.vel
                           : order == 2 ? tau.acc
                                        : tau.jerk);
      quad += testutil::integrate(
          [&](double x) {
            Vec3 v, dv;
            if (order == 1) {
              v = t.velocity(x);
              dv = t.acceleration(x);
            } else if (order == 2) {
              v = t.acceleration(x);
              dv = t.jerk(x);
            } else {
              v = t.jerk(x);
              // snap: derivative of the jerk polynomial
              for (int d = 0; d < 3; ++d) {
                const Poly snap = t.dim_poly(d)
                                      .derivative()
                                      .derivative()
                                      .derivative()
                                      .derivative();
                dv[d] = snap.eval(x);
              }
            }
            return 2.0 * v.dot(dv) *
                   std::exp(kp * (v.squaredNorm() - tau2 * tau2));
          },
          0.0, t.duration, 256);
    }
    CHECK(closed == doctest::Approx(3.0 * quad).epsilon(1e-6));
  }
}

TEST_CASE("total cost composition") {
  PlanContext ctx;
  ctx.x0.pos = Vec3(0, 0, 1);
  ctx.goal = Vec3(4, 0, 1);
  ctx.weights.q_dynm = 0.0;
  ctx.weights.q_lim = 0.0;
  ctx.weights.q_obs = 0.0;
  ctx.weights.k_t = 2.0;
  // pure time cost
  CHECK(total_cost(3.0, ctx) == doctest::Approx(18.0));
  CHECK(total_cost(1.0, ctx) < total_cost(2.0, ctx));

  // doubling q_obs doubles the collision share
  PlanContext near = ctx;
  near.weights.q_obs = 50.0;
  PeerInfo peer;
  peer.traj = static_peer(Vec3(2.0, 0.8, 1.0));
  near.peers.push_back(peer);
  const double base = total_cost(3.0, ctx);
  const double with_peer = total_cost(3.0, near);
  near.weights.q_obs = 100.0;
  const double with_double = total_cost(3.0, near);
  CHECK(with_double - base ==
        doctest::Approx(2.0 * (with_peer - base)).epsilon(1e-9));
}

TEST_CASE("plan picks t_lo under a pure time cost") {
  PlanContext ctx;
  ctx.x0.pos = Vec3(0, 0, 1);
  ctx.goal = Vec3(2, 0, 1);
  ctx.weights = CostWeights{0.0, 0.0, 0.0, 1.0, 10.0, false};
  ctx.t_lo = 0.4;
  ctx.t_hi = 10.0;
  ctx.warm_start = 5.0;
  const PlanResult res = plan(ctx);
  CHECK(res.status == PlanStatus::ok);
  CHECK(res.t_star == doctest::Approx(0.4).epsilon(1e-3));
}

TEST_CASE("plan keeps clear of a static peer straddling the path") {
  PlanContext ctx;
  ctx.x0.pos = Vec3(0, 0, 1);
  ctx.goal = Vec3(6, 0, 1);
  ctx.shape.r1 = 0.5;
  PeerInfo peer;
  peer.shape.r1 = 0.5;
  peer.traj = static_peer(Vec3(3.0, 1.0, 1.0));  // boundary just touches
  ctx.peers.push_back(peer);
  ctx.t_lo = 1.0;
  ctx.t_hi = 20.0;
  ctx.warm_start = 4.0;
  const PlanResult res = plan(ctx);
  double min_d = 1e300;
  for (int i = 0; i <= 1000 * res.t_star; ++i) {
    const double t = i * 1e-3;
    if (t > res.t_star) break;
    min_d = std::min(min_d, scaled_separation(res.trajectory.position(t),
                                              Vec3(3.0, 1.0, 1.0), ctx.shape,
                                              peer.shape, 0.0));
  }
  CHECK(min_d > 1.0 - 0.02);
}

TEST_CASE("plan matches a dense grid argmin on random contexts") {
  testutil::Rand rng(17);
  int hits = 0;
  for (int trial = 0; trial < 50; ++trial) {
    PlanContext ctx;
    // weight scales of the stated module defaults
    ctx.weights = CostWeights{1.0, 100.0, 10.0, 1.0, 10.0, false};
    ctx.x0 = random_state(rng, 2.0, 0.5, 0.5);
    ctx.goal = Vec3(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0, 2));
    ctx.t_lo = 0.3;
    ctx.t_hi = 12.0;
    ctx.warm_start = rng.uniform(0.5, 8.0);
    const int n_peers = static_cast<int>(rng.uniform(0, 2.99));
    for (int p = 0; p < n_peers; ++p) {
      PeerInfo peer;
      StateVec px = random_state(rng, 3.0, 0.5, 0.3);
      peer.traj = moving_peer(
          px, Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2)));
      ctx.peers.push_back(peer);
    }
    const PlanResult res = plan(ctx);

    const int grid_n = 2000;
    double best_t = ctx.t_lo, best_c = 1e300;
    for (int i = 0; i <= grid_n; ++i) {
      const double t = ctx.t_lo + (ctx.t_hi - ctx.t_lo) * i / grid_n;
      const double c = total_cost(t, ctx);
      if (c < best_c) {
        best_c = c;
        best_t = t;
      }
    }
    // within one grid step of the argmin, or at least as good as the grid
    const bool near = std::abs(res.t_star - best_t) <=
                      (ctx.t_hi - ctx.t_lo) / grid_n;
    const bool as_good =
        total_cost(res.t_star, ctx) <= best_c + 1e-9 * (1.0 + std::abs(best_c));
    if (near || as_good) ++hits;
  }
  CHECK(hits == 50);
}

TEST_CASE("plan flags a collapsed bracket") {
  PlanContext ctx;
  ctx.x0.pos = Vec3(0, 0, 1);
  ctx.goal = Vec3(1, 0, 1);
  ctx.t_lo = 2.0;
  ctx.t_hi = 2.0 + 1e-6;
  ctx.warm_start = 2.0;
  const PlanResult res = plan(ctx);
  CHECK(res.status == PlanStatus::bracket_collapse);
  CHECK(res.t_star == doctest::Approx(2.0));
  CHECK((res.trajectory.position(res.t_star) - ctx.goal).norm() < 1e-9);
}

TEST_CASE("plan is deterministic bit for bit") {
  testutil::Rand rng(19);
  PlanContext ctx;
  ctx.x0 = random_state(rng);
  ctx.goal = Vec3(3, 1, 1);
  PeerInfo peer;
  peer.traj = moving_peer(random_state(rng), Vec3(-2, 0, 1));
  ctx.peers.push_back(peer);
  const PlanResult a = plan(ctx);
  const PlanResult b = plan(ctx);
  CHECK(a.t_star == b.t_star);
  CHECK((a.trajectory.coeffs.array() == b.trajectory.coeffs.array()).all());
}

TEST_CASE("larger pads make the separation measure more conservative") {
  testutil::Rand rng(23);
  RobotShape sa, sb;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 pa(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
    const Vec3 pb(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
    const double xi1 = rng.uniform(0.0, 0.3);
    const double xi2 = xi1 + rng.uniform(0.0, 0.3);
    CHECK(scaled_separation(pa, pb, sa, sb, xi2) <=
          scaled_separation(pa, pb, sa, sb, xi1) + 1e-15);
  }
}

TEST_CASE("separation is symmetric when shapes match") {
  testutil::Rand rng(29);
  RobotShape s;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 pa(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
    const Vec3 pb(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-1, 1));
    CHECK(scaled_separation(pa, pb, s, s, 0.1) ==
          doctest::Approx(scaled_separation(pb, pa, s, s, 0.1)).epsilon(1e-15));
  }
}
