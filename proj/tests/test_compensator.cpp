#include <doctest.h>

#include <cmath>

#include "mrnav/compensator.hpp"
#include "mrnav/errors.hpp"
#include "mrnav/primitive.hpp"
#include "test_util.hpp"

using namespace mrnav;

namespace {

StateVec random_state(testutil::Rand& rng, double scale = 1.0) {
  StateVec s;
  for (int d = 0; d < 3; ++d) {
    s.pos[d] = scale * rng.uniform(-1, 1);
    s.vel[d] = scale * rng.uniform(-1, 1);
    s.acc[d] = scale * rng.uniform(-1, 1);
  }
  return s;
}

/// Quintic satisfying the relaxed constraint set exactly:
/// g(t) = alpha t (t-T)^3 + beta t^2 (t-T)^3, so g(0)=0 and
/// g(T)=g'(T)=g''(T)=0.
struct FeasibleQuintic {
  Poly p;
  Poly v;
  Poly a;
  FeasibleQuintic(double alpha, double beta, double T) {
    const Poly cubic = Poly({-T, 1}) * Poly({-T, 1}) * Poly({-T, 1});
    p = (Poly({0, alpha}) * cubic) + (Poly({0, 0, beta}) * cubic);
    v = p.derivative();
    a = v.derivative();
  }
  StateVec state(double t, int dim) const {
    StateVec s;
    s.pos[dim] = p.eval(t);
    s.vel[dim] = v.eval(t);
    s.acc[dim] = a.eval(t);
    return s;
  }
};

}  // namespace

TEST_CASE("push_observation ring and monotonicity") {
  HorizonBuffer buf(3);
  buf.push(StateVec{}, StateVec{}, 0.0);
  CHECK(buf.size() == 1);
  buf.push(StateVec{}, StateVec{}, 0.1);
  buf.push(StateVec{}, StateVec{}, 0.2);
  buf.push(StateVec{}, StateVec{}, 0.3);
  CHECK(buf.size() == 3);
  CHECK(buf[0].ts == doctest::Approx(0.1));  // oldest evicted
  CHECK_THROWS_AS(buf.push(StateVec{}, StateVec{}, 0.3),
                  NonMonotoneTimestamp);
  CHECK_THROWS_AS(buf.push(StateVec{}, StateVec{}, 0.2),
                  NonMonotoneTimestamp);
}

TEST_CASE("identical observed and predicted streams give an exactly zero fit") {
  testutil::Rand rng(17);
  HorizonBuffer buf(10);
  for (int i = 0; i < 10; ++i) {
    const StateVec s = random_state(rng);
    buf.push(s, s, 0.1 * i);
  }
  const CompensatorFit fit = fit_compensator(buf, 3.0);
  CHECK_FALSE(fit.singular);
  CHECK_FALSE(fit.relaxed);
  CHECK(fit.comp.coeffs.norm() == 0.0);
  CHECK(fit.residual == 0.0);
}

TEST_CASE("full-constraint mode pins the entire state at both ends") {
  // With all six boundary conditions active the only feasible quintic is
  // zero, whatever the residual stream looks like.
  testutil::Rand rng(23);
  HorizonBuffer buf(8);
  CompensatorOptions opts;
  opts.relax_threshold = 1e9;  // never relax
  for (int i = 0; i < 8; ++i)
    buf.push(random_state(rng), random_state(rng), 0.1 * i);
  const CompensatorFit fit = fit_compensator(buf, 2.0, opts);
  CHECK_FALSE(fit.relaxed);
  CHECK(fit.comp.coeffs.norm() < 1e-12);
}

TEST_CASE("relaxed fit recovers a feasible quintic residual exactly") {
  testutil::Rand rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const double T = rng.uniform(1.0, 5.0);
    FeasibleQuintic gx(rng.uniform(-0.2, 0.2), rng.uniform(-0.1, 0.1), T);
    HorizonBuffer buf(10);
    CompensatorOptions opts;
    opts.relax_threshold = -1.0;  // force the relaxed constraint set
    // samples at negative local times; newest at 0
    for (int i = 0; i < 10; ++i) {
      const double ts = -0.9 + 0.1 * i;
      StateVec pred;  // zero prediction; observation carries the quintic
      buf.push(gx.state(ts, 0), pred, ts);
    }
    const CompensatorFit fit = fit_compensator(buf, T, opts);
    REQUIRE_FALSE(fit.singular);
    CHECK(fit.relaxed);
    CHECK(fit.residual < 1e-8);
    for (double t : {-0.9, -0.45, 0.0, 0.3 * T, T}) {
      CHECK(fit.comp.position(t)[0] ==
            doctest::Approx(gx.p.eval(t)).epsilon(1e-8));
    }
    // boundary conditions: position at 0, full state at T
    CHECK(std::abs(fit.comp.position(0.0)[0]) < 1e-9);
    CHECK(fit.comp.state(T).pos.norm() < 1e-9);
    CHECK(fit.comp.state(T).vel.norm() < 1e-9);
    CHECK(fit.comp.state(T).acc.norm() < 1e-9);
  }
}

TEST_CASE("KKT first-order optimality and constraints on random buffers") {
  testutil::Rand rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const double T = rng.uniform(0.5, 6.0);
    HorizonBuffer buf(10);
    const int m = 2 + static_cast<int>(rng.uniform(0, 8.99));
    for (int i = 0; i < m; ++i)
      buf.push(random_state(rng, 0.5), random_state(rng, 0.5),
               -0.1 * (m - 1 - i));
    const CompensatorFit fit = fit_compensator(buf, T);
    REQUIRE_FALSE(fit.singular);

    // stationarity: H gamma - g + A^T nu = 0 per dimension
    for (int d = 0; d < 3; ++d) {
      const Eigen::Matrix<double, 6, 1> grad =
          fit.normal_matrix * fit.comp.coeffs.col(d) - fit.normal_rhs.col(d) +
          fit.constraints.transpose() * fit.multipliers.col(d);
      CHECK(grad.norm() < 1e-8);
    }

    // constraints hold: position at 0 (all modes), full state at T
    CHECK(fit.comp.position(0.0).norm() < 1e-9);
    CHECK(fit.comp.state(T).pos.norm() < 1e-9);
    CHECK(fit.comp.state(T).vel.norm() < 1e-9);
    CHECK(fit.comp.state(T).acc.norm() < 1e-9);
    if (!fit.relaxed) {
      CHECK(fit.comp.velocity(0.0).norm() < 1e-9);
      CHECK(fit.comp.acceleration(0.0).norm() < 1e-9);
    }

    // the fit never does worse than the zero compensator
    double zero_residual = 0.0;
    const CompensatorOptions opts;
    for (int i = 0; i < buf.size(); ++i) {
      for (int d = 0; d < 3; ++d) {
        const double rp = buf[i].observed.pos[d] - buf[i].predicted.pos[d];
        const double rv = buf[i].observed.vel[d] - buf[i].predicted.vel[d];
        const double ra = buf[i].observed.acc[d] - buf[i].predicted.acc[d];
        zero_residual += opts.state_weights[0] * rp * rp +
                         opts.state_weights[1] * rv * rv +
                         opts.state_weights[2] * ra * ra;
      }
    }
    CHECK(fit.residual <= std::sqrt(zero_residual) + 1e-12);
  }
}

TEST_CASE("fit is deterministic bit for bit") {
  testutil::Rand rng(37);
  HorizonBuffer buf(10);
  for (int i = 0; i < 10; ++i)
    buf.push(random_state(rng), random_state(rng), 0.1 * i);
  const CompensatorFit a = fit_compensator(buf, 2.5);
  const CompensatorFit b = fit_compensator(buf, 2.5);
  CHECK((a.comp.coeffs.array() == b.comp.coeffs.array()).all());
}

TEST_CASE("rank-deficient KKT flags singular and returns zero") {
  // all-zero residual weights make the normal matrix vanish; with fewer
  // constraints than coefficients the KKT system loses rank
  HorizonBuffer buf(10);
  testutil::Rand rng(43);
  for (int i = 0; i < 6; ++i)
    buf.push(random_state(rng), random_state(rng), -0.1 * (5 - i));
  CompensatorOptions opts;
  opts.state_weights = Vec3::Zero();
  opts.relax_threshold = -1.0;  // relaxed: 4 constraints on 6 coefficients
  const CompensatorFit fit = fit_compensator(buf, 2.0, opts);
  CHECK(fit.singular);
  CHECK(fit.comp.coeffs.norm() == 0.0);
}

TEST_CASE("fit_compensator preconditions") {
  HorizonBuffer buf(10);
  buf.push(StateVec{}, StateVec{}, 0.0);
  CHECK_THROWS_AS(fit_compensator(buf, 1.0), DegenerateInput);
  buf.push(StateVec{}, StateVec{}, 0.1);
  CHECK_THROWS_AS(fit_compensator(buf, 0.0), NonPositiveDuration);
}

TEST_CASE("compose_prediction identity and boundary behavior") {
  StateVec x0;
  x0.pos = Vec3(0.5, -1.0, 1.0);
  x0.vel = Vec3(0.2, 0.0, -0.1);
  const Vec3 goal(3.0, 2.0, 1.0);
  const QuinticTrajectory pred = solve_min_time(x0, goal).trajectory;

  // zero compensator: composition is the prediction everywhere
  const CompensatorPoly zero = CompensatorPoly::zero(3, pred.duration);
  const PredictedTrajectory composed = compose_prediction(pred, zero);
  for (double t : {0.0, 0.5, 0.9 * pred.duration}) {
    CHECK((composed.state(t).pos - pred.position(t)).norm() < 1e-12);
    CHECK((composed.state(t).vel - pred.velocity(t)).norm() < 1e-12);
  }

  // at t=0 the composition matches the broadcast state; at T the endpoint
  CHECK((composed.state(0.0).pos - x0.pos).norm() < 1e-12);
  CHECK((composed.state(pred.duration).pos - goal).norm() < 1e-9);

  // beyond T the terminal position holds with zero derivatives
  const StateVec held = composed.state(pred.duration + 5.0);
  CHECK((held.pos - goal).norm() < 1e-9);
  CHECK(held.vel.norm() == 0.0);
  CHECK(held.acc.norm() == 0.0);

  CompensatorPoly wrong = zero;
  wrong.duration = pred.duration + 1.0;
  CHECK_THROWS_AS(compose_prediction(pred, wrong), DurationMismatch);
}

TEST_CASE("composition with a fitted compensator stays pinned at both ends") {
  testutil::Rand rng(41);
  StateVec x0 = random_state(rng);
  const Vec3 goal(2.0, 1.0, 0.5);
  const QuinticTrajectory pred = solve_min_time(x0, goal).trajectory;

  HorizonBuffer buf(10);
  for (int i = 0; i < 10; ++i)
    buf.push(random_state(rng, 0.3), random_state(rng, 0.3),
             -0.1 * (9 - i));
  const CompensatorFit fit = fit_compensator(buf, pred.duration);
  REQUIRE_FALSE(fit.singular);
  const PredictedTrajectory composed = compose_prediction(pred, fit.comp);
  CHECK((composed.state(0.0).pos - pred.position(0.0)).norm() < 1e-9);
  CHECK((composed.state(pred.duration).pos - goal).norm() < 1e-8);
}
