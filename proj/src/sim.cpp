#include "mrnav/sim.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mrnav/errors.hpp"

namespace mrnav {

namespace {

double now_us() {
  return std::chrono::duration<double, std::micro>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double noise_uniform(std::uint64_t& state, double amp) {
  const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  return amp * (2.0 * u - 1.0);
}

QuinticTrajectory constant_trajectory(const Vec3& pos, int dims) {
  QuinticTrajectory t;
  t.dims = dims;
  t.duration = 0.0;
  for (int d = 0; d < dims; ++d) t.coeffs(0, d) = pos[d];
  return t;
}

}  // namespace

World make_world(const Scenario& scn, const RunConfig& cfg) {
  World world;
  const int n = static_cast<int>(scn.robots.size());
  world.agents.resize(n);
  std::uint64_t seed_stream = cfg.seed * 0x9e3779b97f4a7c15ULL + 1;
  for (int i = 0; i < n; ++i) {
    Agent& a = world.agents[i];
    const ScenarioRobot& r = scn.robots[i];
    a.state = StateVec::at_rest(r.start);
    a.goal = r.goal;
    a.shape = r.shape;
    a.limits = r.limits;
    a.buffers.assign(n, HorizonBuffer(cfg.compensator.k_comp));
    a.last_base_pred.assign(n, std::nullopt);
    a.last_pred_time.assign(n, 0.0);
    a.noise_state = seed_stream + 0x100000001b3ULL * (i + 1);
  }
  return world;
}

std::vector<Broadcast> make_snapshot(const World& world, Mode mode) {
  std::vector<Broadcast> snap(world.agents.size());
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    const Agent& a = world.agents[i];
    snap[i].state = a.state;
    snap[i].goal = a.goal;
    snap[i].shape = a.shape;
    snap[i].shape.pad = 0.0;  // the pad is private planning state
    if (mode == Mode::shared && a.has_plan) {
      snap[i].traj = a.plan;
      snap[i].traj_start = a.plan_start;
    }
  }
  return snap;
}

void agent_replan(World& world, int i, const std::vector<Broadcast>& snapshot,
                  const RunConfig& cfg, StageSample& timing) {
  Agent& self = world.agents[i];
  const double t = world.t;
  const double tick_start = now_us();

  // Refresh the tracking-error pad from the executed trajectory.
  if (self.has_plan) {
    const double tau =
        std::clamp(t - self.plan_start, 0.0, self.plan.duration);
    self.tracking.update(self.plan.state(tau), self.state);
    self.xi = std::clamp(self.tracking.tracking_error(), 0.0, self.shape.r1);
  }
  const double pad =
      std::clamp(self.xi + cfg.safety_pad, 0.0, self.shape.r1);

  PlanContext ctx;
  ctx.x0 = self.state;
  ctx.goal = self.goal;
  ctx.shape = self.shape;
  ctx.shape.pad = pad;
  ctx.limits = self.limits;
  ctx.weights = cfg.weights;
  ctx.peers.reserve(snapshot.size() - 1);

  for (std::size_t j = 0; j < snapshot.size(); ++j) {
    if (static_cast<int>(j) == i) continue;
    const Broadcast& peer = snapshot[j];
    PeerInfo info;
    info.shape = peer.shape;
    if (cfg.mode == Mode::shared) {
      if (peer.traj) {
        info.traj.base = *peer.traj;
        info.traj.base_offset = t - peer.traj_start;
      } else {
        info.traj.base = constant_trajectory(peer.state.pos, peer.state.dims);
      }
    } else {
      // Residual of the previous one-step-ahead prediction, then a fresh
      // primitive corrected by the fitted compensator.
      StateVec predicted = peer.state;
      if (self.last_base_pred[j])
        predicted =
            self.last_base_pred[j]->state(t - self.last_pred_time[j]);
      self.buffers[j].push(peer.state, predicted, t);

      double mark = now_us();
      // Peers run the same planner, so their durations carry the same
      // speed floor; predicting with the raw minimum-time duration would
      // systematically foresee them arriving early.
      PrimitiveOptions peer_opts = cfg.primitive;
      const double peer_dist = (peer.goal - peer.state.pos).norm();
      double floor_T =
          1.875 * peer_dist / (cfg.speed_floor_fraction * peer_opts.v_ref);
      // A peer crawling (or waiting) because of its own conflicts will not
      // match the minimum-time pace; its broadcast velocity betrays the
      // real one. Slow peers are predicted as crawlers, which keeps their
      // near-term occupancy where they actually are.
      if (peer_dist > 1e-6) {
        const double pace = std::clamp(
            peer.state.vel.dot((peer.goal - peer.state.pos) / peer_dist),
            0.15, peer_opts.v_ref);
        floor_T = std::max(floor_T, 0.8 * peer_dist / pace);
      }
      peer_opts.t_min = std::max(cfg.primitive.t_min, floor_T);
      const PrimitiveSolution prim =
          solve_min_time(peer.state, peer.goal, peer_opts);
      timing.primitive_us += now_us() - mark;
      ++timing.primitive_count;

      info.traj.base = prim.trajectory;
      mark = now_us();
      if (self.buffers[j].size() >= 2) {
        const CompensatorFit fit = fit_compensator(
            self.buffers[j], prim.trajectory.duration, cfg.compensator);
        if (!fit.singular) info.traj.comp = fit.comp;
      }
      timing.ls_us += now_us() - mark;
      ++timing.ls_count;

      PredictedTrajectory base_only;
      base_only.base = prim.trajectory;
      self.last_base_pred[j] = base_only;
      self.last_pred_time[j] = t;

      // Prediction quality pads this peer the same way tracking error pads
      // the pair: the recent one-step residuals measure it directly.
      double res_sq = 0.0;
      for (int k = 0; k < self.buffers[j].size(); ++k) {
        const HorizonSample& smp = self.buffers[j][k];
        res_sq += (smp.observed.pos - smp.predicted.pos).squaredNorm();
      }
      const double res_rms =
          std::sqrt(res_sq / std::max(1, self.buffers[j].size()));
      info.shape.pad = std::min(cfg.prediction_pad_gain * res_rms,
                                info.shape.r1);
    }
    ctx.peers.push_back(std::move(info));
  }

  // Bracket around the warm start; the first plan warms from the primitive.
  double warm;
  if (self.has_plan) {
    warm = std::max(cfg.primitive.t_min, self.t_star - 1.0 / cfg.replan_hz);
  } else {
    const double mark = now_us();
    warm = solve_min_time(self.state, self.goal, cfg.primitive)
               .trajectory.duration;
    timing.primitive_us += now_us() - mark;
    ++timing.primitive_count;
  }
  // Rest-to-rest quintics peak at 1.875 L / T, so flooring the duration
  // keeps the plan's speed near the velocity limit (the telescoping limit
  // barrier cannot: it only sees endpoint states). The ceiling is anchored
  // to the same geometry: a bracket tied to the previous T* ratchets upward
  // whenever conflicts pin T* to the top, and the resulting huge-T quintics
  // swing far off course before returning.
  const double dist = (self.goal - self.state.pos).norm();
  const double t_speed =
      1.875 * dist / (cfg.speed_floor_fraction * self.limits.vel);
  ctx.t_lo = std::max(cfg.primitive.t_min, t_speed);
  ctx.t_hi = std::min(cfg.primitive.t_max,
                      std::max(2.5 * ctx.t_lo, ctx.t_lo + 4.0));
  ctx.warm_start = std::clamp(warm, ctx.t_lo, ctx.t_hi);

  const double mark = now_us();
  try {
    const PlanResult res = plan(ctx);
    if (self.has_plan && self.t_star > 0.0 &&
        std::abs(res.t_star - self.t_star) > 0.5 * self.t_star)
      timing.t_star_jump = true;
    self.plan = res.trajectory;
    self.plan_start = t;
    self.t_star = res.t_star;
    self.has_plan = true;
  } catch (const Error&) {
    timing.planner_error = true;  // hold the previous trajectory
  }
  timing.opt_us += now_us() - mark;
  timing.total_us = now_us() - tick_start;
}

void plant_step(World& world, double dt, const PlantConfig& plant) {
  const double t_next = world.t + dt;
  for (Agent& a : world.agents) {
    if (!a.has_plan) continue;
    const double tau =
        std::clamp(t_next - a.plan_start, 0.0, a.plan.duration);
    const StateVec ref = a.plan.state(tau);
    if (plant.perfect) {
      a.state = ref;
      continue;
    }
    const double alpha = 1.0 - std::exp(-plant.lag_rate * dt);
    a.state.pos += alpha * (ref.pos - a.state.pos);
    a.state.vel += alpha * (ref.vel - a.state.vel);
    // Noise perturbs the acceleration state but must not accumulate: last
    // tick's perturbation is removed before the pull.
    a.state.acc -= a.last_noise;
    a.state.acc += alpha * (ref.acc - a.state.acc);
    a.last_noise = Vec3::Zero();
    if (plant.accel_noise > 0.0) {
      for (int d = 0; d < a.state.dims; ++d)
        a.last_noise[d] = noise_uniform(a.noise_state, plant.accel_noise);
      a.state.acc += a.last_noise;
    }
  }
  world.t = t_next;
}

std::vector<CollisionEvent> detect_collisions(const World& world) {
  std::vector<CollisionEvent> contacts;
  const int n = static_cast<int>(world.agents.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = scaled_separation(
          world.agents[i].state.pos, world.agents[j].state.pos,
          world.agents[i].shape, world.agents[j].shape, 0.0);
      if (d <= 1.0) contacts.push_back({world.t, i, j, d});
    }
  }
  return contacts;
}

bool progress_stalled(const std::deque<double>& goal_dist, int window_samples,
                      double eps) {
  if (static_cast<int>(goal_dist.size()) < window_samples) return false;
  return goal_dist.front() - goal_dist.back() < eps;
}

RunReport run(const Scenario& scn, const RunConfig& cfg) {
  const double wall_start = now_us();
  World world = make_world(scn, cfg);
  const int n = static_cast<int>(world.agents.size());

  RunReport report;
  report.n_robots = n;
  report.mode = cfg.mode;
  report.seed = cfg.seed;
  report.dt = 1.0 / cfg.sim_hz;
  report.min_scaled_separation = std::numeric_limits<double>::infinity();
  if (cfg.record_trajectories) report.samples.resize(n);

  const int ticks_per_replan = std::max(
      1, static_cast<int>(std::lround(cfg.sim_hz / cfg.replan_hz)));
  const int max_ticks =
      static_cast<int>(std::ceil(cfg.time_budget * cfg.sim_hz));
  const int deadlock_samples =
      std::max(2, static_cast<int>(std::lround(cfg.deadlock_window * cfg.sim_hz)));

  std::vector<StageSample> stage(n);
  std::vector<char> in_contact(n * n, 0);

  // Replan phases: spread across the period when staggered (per-robot
  // planners run asynchronously in practice), all on phase 0 otherwise.
  std::vector<int> replan_phase(n, 0);
  if (cfg.staggered)
    for (int i = 0; i < n; ++i)
      replan_phase[i] = (i * ticks_per_replan / n) % ticks_per_replan;

  std::vector<int> cohort;
  cohort.reserve(n);

  for (int tick = 0; tick <= max_ticks; ++tick) {
    world.t = tick * report.dt;

    cohort.clear();
    const int phase = tick % ticks_per_replan;
    for (int i = 0; i < n; ++i)
      if (replan_phase[i] == phase) cohort.push_back(i);

    if (!cohort.empty()) {
      const std::vector<Broadcast> snapshot = make_snapshot(world, cfg.mode);
      const int m = static_cast<int>(cohort.size());
      for (int k = 0; k < m; ++k) stage[k] = StageSample{};
      if (cfg.threads > 0) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(cfg.threads)
#endif
        for (int k = 0; k < m; ++k)
          agent_replan(world, cohort[k], snapshot, cfg, stage[k]);
      } else {
        for (int k = 0; k < m; ++k)
          agent_replan(world, cohort[k], snapshot, cfg, stage[k]);
      }
      for (int k = 0; k < m; ++k) {
        if (stage[k].primitive_count > 0)
          report.primitive_us.push_back(stage[k].primitive_us /
                                        stage[k].primitive_count);
        if (stage[k].ls_count > 0)
          report.ls_us.push_back(stage[k].ls_us / stage[k].ls_count);
        report.opt_us.push_back(stage[k].opt_us);
        report.total_us.push_back(stage[k].total_us);
        if (stage[k].planner_error) ++report.planner_errors;
        if (stage[k].t_star_jump) ++report.t_star_jumps;
      }
    }

    // Record, then scan separations / goals / deadlocks at this tick.
    if (cfg.record_trajectories) {
      for (int i = 0; i < n; ++i)
        report.samples[i].push_back(world.agents[i].state);
      report.sample_times.push_back(world.t);
    }

    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double d =
            scaled_separation(world.agents[i].state.pos,
                              world.agents[j].state.pos, world.agents[i].shape,
                              world.agents[j].shape, 0.0);
        report.min_scaled_separation = std::min(report.min_scaled_separation, d);
        char& contact = in_contact[i * n + j];
        if (d <= 1.0) {
          if (!contact) {
            report.collisions.push_back({world.t, i, j, d});
            world.agents[i].ever_collided = true;
            world.agents[j].ever_collided = true;
          }
          contact = 1;
        } else {
          contact = 0;
        }
      }
    }

    int at_goal_count = 0;
    for (Agent& a : world.agents) {
      const double gd = (a.state.pos - a.goal).norm();
      // arrival latches: a robot hovering at its goal under plant noise has
      // arrived, even when the wobble leaves the tolerance momentarily
      a.at_goal = a.at_goal || gd <= cfg.goal_tol;
      if (a.at_goal) ++at_goal_count;
      a.goal_dist.push_back(gd);
      if (static_cast<int>(a.goal_dist.size()) > deadlock_samples)
        a.goal_dist.pop_front();
      a.deadlocked =
          !a.at_goal &&
          progress_stalled(a.goal_dist, deadlock_samples, cfg.deadlock_eps);
    }

    report.ticks = tick + 1;
    if (at_goal_count == n) {
      report.makespan = world.t;
      break;
    }
    bool all_stuck = true;
    for (const Agent& a : world.agents)
      if (!a.at_goal && !a.deadlocked) all_stuck = false;
    if (all_stuck && at_goal_count < n) break;
    if (tick == max_ticks) break;

    plant_step(world, report.dt, cfg.plant);
  }

  report.robots_at_goal = 0;
  report.deadlocked_robots = 0;
  for (const Agent& a : world.agents) {
    if (a.at_goal) ++report.robots_at_goal;
    if (a.deadlocked) ++report.deadlocked_robots;
  }
  report.success =
      report.robots_at_goal == n && report.collisions.empty();
  report.wall_seconds = (now_us() - wall_start) * 1e-6;
  return report;
}

}  // namespace mrnav
