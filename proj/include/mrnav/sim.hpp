#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "mrnav/compensator.hpp"
#include "mrnav/optimizer.hpp"
#include "mrnav/primitive.hpp"
#include "mrnav/scenario.hpp"
#include "mrnav/tracking.hpp"
#include "mrnav/types.hpp"

namespace mrnav {

enum class Mode { shared, predicted };

/// Synthetic tracking plant: either exact (true state equals the planned
/// state each tick) or a first-order pull toward the planned state with
/// bounded seeded noise on the acceleration component.
struct PlantConfig {
  bool perfect = true;
  double lag_rate = 30.0;    // 1/s
  double accel_noise = 0.05;  // m/s^2, uniform bound
};

struct RunConfig {
  Mode mode = Mode::shared;
  double replan_hz = 10.0;
  double sim_hz = 100.0;
  double time_budget = 60.0;  // s
  double goal_tol = 0.1;      // m
  std::uint64_t seed = 0;     // plant noise streams
  PlantConfig plant;
  CostWeights weights;
  PrimitiveOptions primitive;
  CompensatorOptions compensator = CompensatorOptions::sim_defaults();
  int threads = 0;  // 0 = serial reference loop, >0 = OpenMP team size
  bool record_trajectories = true;
  double deadlock_window = 5.0;  // s
  double deadlock_eps = 0.05;    // m of goal progress per window
  /// Spread the agents' replan phases across the replan period (each agent
  /// still replans at replan_hz). Mirrors asynchronous per-robot planners
  /// and breaks the mutual-retiming standoff of perfectly synchronized
  /// symmetric agents. Off means everyone replans on tick 0 of each period.
  bool staggered = true;
  /// Lower bound on the planning duration so the condensed quintic's peak
  /// speed stays near the velocity limit (fraction of tau_1 targeted).
  double speed_floor_fraction = 0.9;
  /// Baseline inflation added to the tracking error before padding the
  /// collision ellipsoids. The barrier equilibrium settles just outside the
  /// padded surface, so this margin converts directly into true clearance.
  double safety_pad = 0.15;
  /// Predicted mode only: weight of the per-peer one-step prediction
  /// residual RMS added to that peer's pad (prediction quality feeds the
  /// same inflation pathway as the tracking error).
  double prediction_pad_gain = 3.0;
};

enum class AgentStatus { active, at_goal, deadlocked, collided };

struct Agent {
  StateVec state;
  Vec3 goal = Vec3::Zero();
  RobotShape shape;
  Limits limits;

  QuinticTrajectory plan;
  double plan_start = 0.0;
  double t_star = 0.0;
  bool has_plan = false;

  double xi = 0.0;
  TrackingHistory tracking;

  // predicted-mode memory, indexed by peer robot id
  std::vector<HorizonBuffer> buffers;
  std::vector<std::optional<PredictedTrajectory>> last_base_pred;
  std::vector<double> last_pred_time;

  std::uint64_t noise_state = 0;
  Vec3 last_noise = Vec3::Zero();  // acceleration perturbation of the last tick
  std::deque<double> goal_dist;
  bool at_goal = false;
  bool deadlocked = false;
  bool ever_collided = false;

  AgentStatus status() const {
    if (ever_collided) return AgentStatus::collided;
    if (at_goal) return AgentStatus::at_goal;
    if (deadlocked) return AgentStatus::deadlocked;
    return AgentStatus::active;
  }
};

struct World {
  double t = 0.0;
  std::vector<Agent> agents;
};

/// The per-tick broadcast: current state, goal and size always; the full
/// planned trajectory only in shared mode.
struct Broadcast {
  StateVec state;
  Vec3 goal = Vec3::Zero();
  RobotShape shape;
  std::optional<QuinticTrajectory> traj;
  double traj_start = 0.0;
};

struct CollisionEvent {
  double t = 0.0;
  int a = 0;
  int b = 0;
  double d = 0.0;
};

struct RunReport {
  int n_robots = 0;
  Mode mode = Mode::shared;
  std::uint64_t seed = 0;
  double dt = 0.01;
  int ticks = 0;

  bool success = false;
  double makespan = -1.0;  // first time all robots were at goal; -1 if never
  double min_scaled_separation = 0.0;  // true combined radii, zero pad
  std::vector<CollisionEvent> collisions;  // contact-entry events
  int robots_at_goal = 0;
  int deadlocked_robots = 0;
  int planner_errors = 0;
  int t_star_jumps = 0;  // replans where T* moved by more than 50%

  std::vector<std::vector<StateVec>> samples;  // [robot][tick]
  std::vector<double> sample_times;

  // wall-clock per-stage samples, microseconds
  std::vector<double> primitive_us;
  std::vector<double> ls_us;
  std::vector<double> opt_us;
  std::vector<double> total_us;
  double wall_seconds = 0.0;
};

World make_world(const Scenario& scn, const RunConfig& cfg);

std::vector<Broadcast> make_snapshot(const World& world, Mode mode);

/// One agent's replan against a frozen snapshot. Mutates only agents[i]
/// (and its timing slot), so disjoint agents may run concurrently.
struct StageSample {
  double primitive_us = 0.0;
  double ls_us = 0.0;
  double opt_us = 0.0;
  double total_us = 0.0;
  int primitive_count = 0;
  int ls_count = 0;
  bool planner_error = false;
  bool t_star_jump = false;
};
void agent_replan(World& world, int i, const std::vector<Broadcast>& snapshot,
                  const RunConfig& cfg, StageSample& timing);

/// Advances every agent's true state by dt along its plan through the
/// tracking plant. Sequential; noise streams are per-agent and seeded.
void plant_step(World& world, double dt, const PlantConfig& plant);

/// Pairs currently in contact: scaled separation with the true combined
/// radii (zero pad) at or below 1.
std::vector<CollisionEvent> detect_collisions(const World& world);

/// Deadlock criterion on a goal-distance history: the window is full and the
/// distance decreased by less than eps across it.
bool progress_stalled(const std::deque<double>& goal_dist, int window_samples,
                      double eps);

/// Full lockstep run: broadcast + replan at replan_hz, plant stepping and
/// event detection at sim_hz, until every robot is at its goal, the time
/// budget runs out, or every remaining robot is deadlocked.
RunReport run(const Scenario& scn, const RunConfig& cfg);

}  // namespace mrnav
