#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrnav/sim.hpp"

namespace mrnav {

struct StageStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

StageStats stage_stats(const std::vector<double>& samples);

/// Aggregate metrics of a run (and of seed sweeps): success, separation,
/// events, makespan and per-stage timing statistics.
struct Metrics {
  double success_fraction = 0.0;
  int runs = 0;
  int collision_events = 0;
  int deadlocked_robots = 0;
  double min_scaled_separation = 0.0;
  double mean_makespan = 0.0;  // over successful runs, -1 when none
  StageStats primitive;
  StageStats least_squares;
  StageStats optimization;
  StageStats total;
};

Metrics metrics(const RunReport& report);
Metrics aggregate(const std::vector<RunReport>& reports);

/// Deterministic per-run metrics (identical bytes for identical seeds):
/// wall-clock timing is deliberately excluded and written separately.
void write_metrics(const RunReport& report, std::ostream& out);

/// Wall-clock per-stage timing stats in microseconds.
void write_timing(const RunReport& report, std::ostream& out);

/// Executed trajectory samples: tick,robot_id,t,px,py,pz,vx,vy,vz,ax,ay,az
void write_trajectories_csv(const RunReport& report, std::ostream& out);

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

}  // namespace mrnav
