// Stage timings and serial-vs-OpenMP comparison for the replanning kernel.
// The per-agent planning loop within a tick is data parallel (each agent
// mutates only its own slot against a frozen snapshot), so the OpenMP path
// must produce bit-identical worlds; this benchmark reports the wall-clock
// side of that story.

#include <chrono>
#include <cstdio>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mrnav/report.hpp"
#include "mrnav/scenario.hpp"
#include "mrnav/sim.hpp"

using namespace mrnav;

namespace {

double tick_ms(const Scenario& scn, const RunConfig& cfg, int reps) {
  World world = make_world(scn, cfg);
  const int n = static_cast<int>(world.agents.size());
  std::vector<StageSample> stage(n);
  double best = 1e300;
  for (int rep = 0; rep < reps; ++rep) {
    World w = world;
    w.t = 0.0;
    const auto snapshot = make_snapshot(w, cfg.mode);
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.threads > 0) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(cfg.threads)
#endif
      for (int i = 0; i < n; ++i) agent_replan(w, i, snapshot, cfg, stage[i]);
    } else {
      for (int i = 0; i < n; ++i) agent_replan(w, i, snapshot, cfg, stage[i]);
    }
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main() {
  std::printf("replan-tick wall time (best of 5), predicted mode\n");
  std::printf("%-8s %-10s %-12s %-12s %s\n", "robots", "serial_ms",
              "omp2_ms", "omp4_ms", "speedup4");
  for (int n : {4, 8, 16, 24}) {
    const Scenario scn = generate_scenario(
        n, 0.2, Vec3(4, 4, 2), 7, {*find_model("firefly")});
    RunConfig cfg;
    cfg.mode = Mode::predicted;
    const int reps = 5;
    cfg.threads = 0;
    const double serial = tick_ms(scn, cfg, reps);
    cfg.threads = 2;
    const double omp2 = tick_ms(scn, cfg, reps);
    cfg.threads = 4;
    const double omp4 = tick_ms(scn, cfg, reps);
    std::printf("%-8d %-10.2f %-12.2f %-12.2f %.2fx\n", n, serial, omp2, omp4,
                serial / omp4);
  }

  std::printf("\nper-stage timing over one 8-robot predicted run\n");
  const Scenario scn = generate_scenario(
      8, 0.2, Vec3(4, 4, 2), 11, {*find_model("firefly")});
  RunConfig cfg;
  cfg.mode = Mode::predicted;
  cfg.plant.perfect = false;
  cfg.time_budget = 20.0;
  cfg.record_trajectories = false;
  const RunReport report = run(scn, cfg);
  write_timing(report, std::cout);
  return 0;
}
