#include "mrnav/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "mrnav/errors.hpp"

namespace mrnav {

StageStats stage_stats(const std::vector<double>& samples) {
  StageStats s;
  s.count = static_cast<int>(samples.size());
  if (samples.empty()) return s;
  s.min = *std::min_element(samples.begin(), samples.end());
  s.max = *std::max_element(samples.begin(), samples.end());
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / samples.size();
  double var = 0.0;
  for (double v : samples) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / samples.size());
  return s;
}

Metrics metrics(const RunReport& report) {
  return aggregate({report});
}

Metrics aggregate(const std::vector<RunReport>& reports) {
  Metrics m;
  m.runs = static_cast<int>(reports.size());
  if (reports.empty()) return m;
  int successes = 0;
  double makespan_sum = 0.0;
  int makespan_count = 0;
  m.min_scaled_separation = reports.front().min_scaled_separation;
  std::vector<double> prim, ls, opt, total;
  for (const RunReport& r : reports) {
    if (r.success) {
      ++successes;
      makespan_sum += r.makespan;
      ++makespan_count;
    }
    m.collision_events += static_cast<int>(r.collisions.size());
    m.deadlocked_robots += r.deadlocked_robots;
    m.min_scaled_separation =
        std::min(m.min_scaled_separation, r.min_scaled_separation);
    prim.insert(prim.end(), r.primitive_us.begin(), r.primitive_us.end());
    ls.insert(ls.end(), r.ls_us.begin(), r.ls_us.end());
    opt.insert(opt.end(), r.opt_us.begin(), r.opt_us.end());
    total.insert(total.end(), r.total_us.begin(), r.total_us.end());
  }
  m.success_fraction = static_cast<double>(successes) / reports.size();
  m.mean_makespan = makespan_count ? makespan_sum / makespan_count : -1.0;
  m.primitive = stage_stats(prim);
  m.least_squares = stage_stats(ls);
  m.optimization = stage_stats(opt);
  m.total = stage_stats(total);
  return m;
}

void write_metrics(const RunReport& report, std::ostream& out) {
  char buf[256];
  out << "# mrnav run metrics\n";
  out << "mode " << mode_name(report.mode) << "\n";
  out << "robots " << report.n_robots << "\n";
  out << "seed " << report.seed << "\n";
  out << "ticks " << report.ticks << "\n";
  out << "success " << (report.success ? 1 : 0) << "\n";
  out << "robots_at_goal " << report.robots_at_goal << "\n";
  out << "collision_events " << report.collisions.size() << "\n";
  out << "deadlocked_robots " << report.deadlocked_robots << "\n";
  std::snprintf(buf, sizeof(buf), "makespan %.9f\n", report.makespan);
  out << buf;
  std::snprintf(buf, sizeof(buf), "min_scaled_separation %.12f\n",
                report.min_scaled_separation);
  out << buf;
  out << "planner_errors " << report.planner_errors << "\n";
  out << "t_star_jumps " << report.t_star_jumps << "\n";
  for (const CollisionEvent& e : report.collisions) {
    std::snprintf(buf, sizeof(buf), "collision t=%.9f pair=%d,%d d=%.9f\n",
                  e.t, e.a, e.b, e.d);
    out << buf;
  }
}

void write_timing(const RunReport& report, std::ostream& out) {
  char buf[256];
  out << "# mrnav stage timing (us per call)\n";
  const auto row = [&](const char* name, const StageStats& s) {
    std::snprintf(buf, sizeof(buf),
                  "%-14s mean %10.3f  std %10.3f  min %10.3f  max %10.3f  "
                  "n %d\n",
                  name, s.mean, s.stddev, s.min, s.max, s.count);
    out << buf;
  };
  row("jerk_smooth", stage_stats(report.primitive_us));
  row("least_squares", stage_stats(report.ls_us));
  row("optimization", stage_stats(report.opt_us));
  row("total", stage_stats(report.total_us));
  std::snprintf(buf, sizeof(buf), "wall_seconds %.3f\n", report.wall_seconds);
  out << buf;
}

void write_trajectories_csv(const RunReport& report, std::ostream& out) {
  out << "tick,robot_id,t,px,py,pz,vx,vy,vz,ax,ay,az\n";
  char buf[512];
  for (std::size_t tick = 0; tick < report.sample_times.size(); ++tick) {
    for (std::size_t r = 0; r < report.samples.size(); ++r) {
      const StateVec& s = report.samples[r][tick];
      std::snprintf(buf, sizeof(buf),
                    "%zu,%zu,%.9f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                    "%.9g\n",
                    tick, r, report.sample_times[tick], s.pos[0], s.pos[1],
                    s.pos[2], s.vel[0], s.vel[1], s.vel[2], s.acc[0], s.acc[1],
                    s.acc[2]);
      out << buf;
    }
  }
}

std::string mode_name(Mode mode) {
  return mode == Mode::shared ? "shared" : "predicted";
}

Mode parse_mode(const std::string& name) {
  if (name == "shared") return Mode::shared;
  if (name == "predicted") return Mode::predicted;
  throw Error("unknown mode: " + name);
}

}  // namespace mrnav
