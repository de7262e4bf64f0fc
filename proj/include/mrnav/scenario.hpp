#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrnav/types.hpp"

namespace mrnav {

struct RobotModel {
  std::string name;
  double r1;
  double vel;
  double acc;
  double jerk;
  double eta = 3.0;
};

/// Built-in robot models (hummingbird, firefly, neo).
const std::vector<RobotModel>& model_table();
const RobotModel* find_model(const std::string& name);

struct ScenarioRobot {
  std::string model;
  RobotShape shape;
  Limits limits;
  Vec3 start = Vec3::Zero();
  Vec3 goal = Vec3::Zero();
};

struct Scenario {
  Vec3 box = Vec3(4.0, 4.0, 2.0);
  std::uint64_t seed = 0;
  double occupancy = 0.0;  // sum of ellipsoid volumes / box volume
  std::vector<ScenarioRobot> robots;
};

/// Random scenario at the requested occupancy: the box keeps the given
/// aspect ratio but is rescaled so the summed ellipsoid volume divided by
/// the box volume equals `occupancy` exactly. Starts and goals are
/// rejection-sampled to be pairwise non-overlapping (scaled separation > 1
/// with zero pad). Deterministic for a fixed seed. Throws PackingFailure
/// when rejection sampling exhausts its retry budget.
Scenario generate_scenario(int n, double occupancy, const Vec3& box_ratio,
                           std::uint64_t seed,
                           const std::vector<RobotModel>& mix);

/// Ring of robots evenly spaced on a circle with goals on the far side,
/// offset by half a slot so no two robots swap along the same line. The
/// seed adds a small start jitter that breaks the remaining symmetry.
Scenario circle_preset(int n, std::uint64_t seed, double radius = 6.0,
                       const std::string& model = "firefly");

/// 21 robots cycling the built-in model table at 20% occupancy.
Scenario hetero_preset(std::uint64_t seed);

void save_scenario(const Scenario& scn, std::ostream& out);
Scenario load_scenario(std::istream& in);
void save_scenario_file(const Scenario& scn, const std::string& path);
Scenario load_scenario_file(const std::string& path);

/// Deterministic uniform-double generator used everywhere randomness is
/// needed; identical output for identical seeds on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::uint64_t state_;
};

}  // namespace mrnav
