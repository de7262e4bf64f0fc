#include "mrnav/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mrnav/errors.hpp"

namespace mrnav {

const std::vector<RobotModel>& model_table() {
  static const std::vector<RobotModel> table = {
      {"hummingbird", 0.4, 2.0, 4.0, 20.0},
      {"firefly", 0.5, 2.0, 8.0, 20.0},
      {"neo", 0.6, 4.0, 12.0, 60.0},
  };
  return table;
}

const RobotModel* find_model(const std::string& name) {
  for (const auto& m : model_table())
    if (m.name == name) return &m;
  return nullptr;
}

namespace {

ScenarioRobot robot_from_model(const RobotModel& m) {
  ScenarioRobot r;
  r.model = m.name;
  r.shape.r1 = m.r1;
  r.shape.eta = m.eta;
  r.limits = {m.vel, m.acc, m.jerk};
  return r;
}

bool clear_of(const std::vector<ScenarioRobot>& robots, std::size_t count,
              const Vec3& pos, const RobotShape& shape, bool goals) {
  for (std::size_t j = 0; j < count; ++j) {
    const Vec3& other = goals ? robots[j].goal : robots[j].start;
    if (scaled_separation(pos, other, shape, robots[j].shape, 0.0) <= 1.0)
      return false;
  }
  return true;
}

Vec3 sample_position(Rng& rng, const Vec3& box, const RobotShape& shape) {
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    const double margin = std::min(shape.radius(i), 0.25 * box[i]);
    p[i] = rng.uniform(margin, box[i] - margin);
  }
  return p;
}

}  // namespace

namespace {

/// A parked robot on someone's straight corridor makes the scenario
/// unsolvable for a planner whose paths cannot leave the line, so corridors
/// must keep clearance from every other robot's endpoints.
bool corridor_clear(const Vec3& a, const Vec3& b, const RobotShape& shape,
                    const Vec3& point, const RobotShape& other,
                    double margin) {
  constexpr int kSamples = 33;
  for (int k = 0; k <= kSamples; ++k) {
    const Vec3 p = a + (b - a) * (static_cast<double>(k) / kSamples);
    if (scaled_separation(p, point, shape, other, 0.0) <= margin) return false;
  }
  return true;
}

bool goal_admissible(const std::vector<ScenarioRobot>& robots, std::size_t i,
                     const Vec3& goal, std::size_t assigned, double margin) {
  const ScenarioRobot& r = robots[i];
  for (std::size_t j = 0; j < robots.size(); ++j) {
    if (j == i) continue;
    // my corridor vs their parking spots
    if (!corridor_clear(r.start, goal, r.shape, robots[j].start,
                        robots[j].shape, margin))
      return false;
    if (j < assigned &&
        !corridor_clear(r.start, goal, r.shape, robots[j].goal,
                        robots[j].shape, margin))
      return false;
    // their corridor vs my new parking spot
    if (j < assigned &&
        !corridor_clear(robots[j].start, robots[j].goal, robots[j].shape, goal,
                        r.shape, margin))
      return false;
  }
  return true;
}

}  // namespace

Scenario generate_scenario(int n, double occupancy, const Vec3& box_ratio,
                           std::uint64_t seed,
                           const std::vector<RobotModel>& mix) {
  if (n < 1 || occupancy <= 0.0 || mix.empty())
    throw Error("generate_scenario: invalid arguments");

  Scenario scn;
  scn.seed = seed;
  scn.occupancy = occupancy;
  scn.robots.reserve(n);
  double total_volume = 0.0;
  for (int i = 0; i < n; ++i) {
    scn.robots.push_back(robot_from_model(mix[i % mix.size()]));
    total_volume += scn.robots.back().shape.volume();
  }

  const double ratio_volume = box_ratio.prod();
  const double scale = std::cbrt(total_volume / occupancy / ratio_volume);
  scn.box = box_ratio * scale;

  Rng rng(seed);
  // Dense crowds cannot satisfy the full static-solvability margin, so it
  // backs off with robot count (the planner still pads dynamically).
  const double corridor_margin = n <= 24 ? 1.15 : 1.02;
  const int per_slot_budget = 4000;
  // Greedy assignment wedges itself at this density, so stuck goal rounds
  // restart the whole goal set (and occasionally the starts).
  for (int round = 0; round < 8000; ++round) {
    if (round % 20 == 0) {
      bool starts_ok = true;
      for (std::size_t i = 0; i < scn.robots.size() && starts_ok; ++i) {
        ScenarioRobot& r = scn.robots[i];
        int attempts = 0;
        for (;;) {
          if (++attempts > per_slot_budget) {
            starts_ok = false;
            break;
          }
          const Vec3 p = sample_position(rng, scn.box, r.shape);
          if (clear_of(scn.robots, i, p, r.shape, /*goals=*/false)) {
            r.start = p;
            break;
          }
        }
      }
      if (!starts_ok) continue;
    }
    bool goals_ok = true;
    for (std::size_t i = 0; i < scn.robots.size() && goals_ok; ++i) {
      ScenarioRobot& r = scn.robots[i];
      int attempts = 0;
      for (;;) {
        if (++attempts > per_slot_budget) {
          goals_ok = false;
          break;
        }
        const Vec3 p = sample_position(rng, scn.box, r.shape);
        if (!clear_of(scn.robots, i, p, r.shape, /*goals=*/true)) continue;
        if (!goal_admissible(scn.robots, i, p, i, corridor_margin)) continue;
        r.goal = p;
        break;
      }
    }
    if (goals_ok) return scn;
  }
  throw PackingFailure("generate_scenario: packing failed");
}

Scenario circle_preset(int n, std::uint64_t seed, double radius,
                       const std::string& model) {
  const RobotModel* m = find_model(model);
  if (!m) throw Error("circle_preset: unknown model " + model);

  Scenario scn;
  scn.seed = seed;
  const double side = 2.0 * radius + 2.0;
  scn.box = Vec3(side, side, 2.5);
  const Vec3 center(side / 2.0, side / 2.0, 1.25);

  Rng rng(seed);
  double total_volume = 0.0;
  for (int k = 0; k < n; ++k) {
    ScenarioRobot r = robot_from_model(*m);
    const double theta = 2.0 * M_PI * k / n;
    const double jx = rng.uniform(-0.02, 0.02);
    const double jy = rng.uniform(-0.02, 0.02);
    r.start = center + Vec3(radius * std::cos(theta) + jx,
                            radius * std::sin(theta) + jy, 0.0);
    // Goal on the far side, shifted by one slot: opposing robots travel
    // parallel offset corridors instead of the same diameter, and the
    // pairwise crossings spread over a ring instead of one shared disc.
    const double phi = theta + M_PI + 2.0 * M_PI / n;
    r.goal = center + Vec3(radius * std::cos(phi), radius * std::sin(phi), 0.0);
    total_volume += r.shape.volume();
    scn.robots.push_back(r);
  }
  scn.occupancy = total_volume / scn.box.prod();
  return scn;
}

Scenario hetero_preset(std::uint64_t seed) {
  return generate_scenario(21, 0.2, Vec3(4.0, 4.0, 2.0), seed, model_table());
}

void save_scenario(const Scenario& scn, std::ostream& out) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "box %.17g %.17g %.17g\n", scn.box[0],
                scn.box[1], scn.box[2]);
  out << "# mrnav scenario\n" << buf;
  out << "seed " << scn.seed << "\n";
  std::snprintf(buf, sizeof(buf), "occupancy %.17g\n", scn.occupancy);
  out << buf;
  out << "robots " << scn.robots.size() << "\n";
  for (const auto& r : scn.robots) {
    std::snprintf(buf, sizeof(buf),
                  "robot %s %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g "
                  "%.17g %.17g %.17g\n",
                  r.model.c_str(), r.shape.r1, r.shape.eta, r.limits.vel,
                  r.limits.acc, r.limits.jerk, r.start[0], r.start[1],
                  r.start[2], r.goal[0], r.goal[1], r.goal[2]);
    out << buf;
  }
}

Scenario load_scenario(std::istream& in) {
  Scenario scn;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "box") {
      ls >> scn.box[0] >> scn.box[1] >> scn.box[2];
    } else if (key == "seed") {
      ls >> scn.seed;
    } else if (key == "occupancy") {
      ls >> scn.occupancy;
    } else if (key == "robots") {
      std::size_t n;
      ls >> n;
      scn.robots.reserve(n);
    } else if (key == "robot") {
      ScenarioRobot r;
      ls >> r.model >> r.shape.r1 >> r.shape.eta >> r.limits.vel >>
          r.limits.acc >> r.limits.jerk >> r.start[0] >> r.start[1] >>
          r.start[2] >> r.goal[0] >> r.goal[1] >> r.goal[2];
      if (!ls) throw Error("load_scenario: malformed robot line");
      scn.robots.push_back(r);
    }
  }
  if (scn.robots.empty()) throw Error("load_scenario: no robots");
  return scn;
}

void save_scenario_file(const Scenario& scn, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  save_scenario(scn, out);
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open: " + path);
  return load_scenario(in);
}

}  // namespace mrnav
