// mrnav command line: scenario generation, simulation runs, parameter
// sweeps and single-primitive inspection.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mrnav/errors.hpp"
#include "mrnav/report.hpp"
#include "mrnav/scenario.hpp"
#include "mrnav/sim.hpp"

namespace fs = std::filesystem;
using namespace mrnav;

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

Vec3 parse_triplet(const std::string& text) {
  Vec3 v;
  std::stringstream ss(text);
  std::string item;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, item, ',')) throw Error("expected X,Y,Z: " + text);
    v[i] = std::stod(item);
  }
  return v;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw Error("expected a comma-separated list: " + text);
  return out;
}

CostWeights load_weights_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open weights file: " + path);
  CostWeights w;
  std::string key;
  double value;
  while (in >> key >> value) {
    if (key == "q_dynm") w.q_dynm = value;
    else if (key == "q_obs") w.q_obs = value;
    else if (key == "q_lim") w.q_lim = value;
    else if (key == "k_t") w.k_t = value;
    else if (key == "k_p") w.k_p = value;
    else if (key == "unscaled_numerator") w.unscaled_numerator = value != 0.0;
    else throw Error("unknown weight key: " + key);
  }
  return w;
}

struct ScenarioArgs {
  int robots = 8;
  double occupancy = 0.2;
  std::string box = "4,4,2";
  std::string model = "firefly";
  std::string preset;
  std::uint64_t seed = 0;
  double radius = 6.0;

  Scenario build() const {
    if (preset == "circle8") return circle_preset(8, seed, radius);
    if (preset == "circle") return circle_preset(robots, seed, radius);
    if (preset == "hetero") return hetero_preset(seed);
    if (!preset.empty()) throw Error("unknown preset: " + preset);
    std::vector<RobotModel> mix;
    if (model == "mix") {
      mix = model_table();
    } else {
      const RobotModel* m = find_model(model);
      if (!m) throw Error("unknown model: " + model);
      mix = {*m};
    }
    return generate_scenario(robots, occupancy, parse_triplet(box), seed, mix);
  }
};

struct RunArgs {
  std::string scenario_file;
  ScenarioArgs scenario;
  std::string mode = "shared";
  std::uint64_t seed = 0;
  double replan_hz = 10.0;
  double sim_hz = 100.0;
  double time_budget = 60.0;
  double goal_tol = 0.1;
  std::string plant = "perfect";
  double lag_rate = 30.0;
  double accel_noise = 0.05;
  int threads = 0;
  double safety_pad = 0.15;
  double comp_cap = 0.5;
  std::string weights_file;
  CostWeights weights;
  std::string out_dir;
  bool no_csv = false;

  RunConfig config() const {
    RunConfig cfg;
    cfg.mode = parse_mode(mode);
    cfg.seed = seed;
    cfg.replan_hz = replan_hz;
    cfg.sim_hz = sim_hz;
    cfg.time_budget = time_budget;
    cfg.goal_tol = goal_tol;
    if (plant == "perfect") {
      cfg.plant.perfect = true;
    } else if (plant == "lag") {
      cfg.plant.perfect = false;
      cfg.plant.lag_rate = lag_rate;
      cfg.plant.accel_noise = accel_noise;
    } else {
      throw Error("unknown plant: " + plant);
    }
    cfg.threads = threads;
    cfg.safety_pad = safety_pad;
    cfg.compensator.max_correction = comp_cap;
    cfg.weights =
        weights_file.empty() ? weights : load_weights_file(weights_file);
    cfg.record_trajectories = !no_csv;
    return cfg;
  }
};

void add_weight_flags(CLI::App* cmd, CostWeights& w) {
  cmd->add_option("--q-dynm", w.q_dynm, "smoothness weight");
  cmd->add_option("--q-obs", w.q_obs, "collision barrier weight");
  cmd->add_option("--q-lim", w.q_lim, "dynamic-limit barrier weight");
  cmd->add_option("--k-t", w.k_t, "duration cost weight");
  cmd->add_option("--k-p", w.k_p, "barrier sharpness");
  cmd->add_flag("--unscaled-numerator", w.unscaled_numerator,
                "use the raw collision numerator with quadrature");
}

void add_scenario_flags(CLI::App* cmd, ScenarioArgs& s) {
  cmd->add_option("--robots", s.robots, "robot count");
  cmd->add_option("--occupancy", s.occupancy, "ellipsoid volume fraction");
  cmd->add_option("--box", s.box, "box aspect ratio X,Y,Z");
  cmd->add_option("--model", s.model,
                  "robot model (hummingbird|firefly|neo|mix)");
  cmd->add_option("--preset", s.preset, "preset (circle8|circle|hetero)");
  cmd->add_option("--radius", s.radius, "circle preset radius (m)");
}

int run_once(const RunArgs& args, std::ostream& log) {
  Scenario scn;
  if (!args.scenario_file.empty()) {
    scn = load_scenario_file(args.scenario_file);
  } else {
    ScenarioArgs sa = args.scenario;
    sa.seed = args.scenario.seed ? args.scenario.seed : args.seed;
    scn = sa.build();
  }
  const RunConfig cfg = args.config();
  const RunReport report = run(scn, cfg);

  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    {
      std::ofstream out(fs::path(args.out_dir) / "metrics.txt");
      write_metrics(report, out);
    }
    {
      std::ofstream out(fs::path(args.out_dir) / "timing.txt");
      write_timing(report, out);
    }
    if (cfg.record_trajectories) {
      std::ofstream out(fs::path(args.out_dir) / "trajectories.csv");
      write_trajectories_csv(report, out);
    }
  } else {
    write_metrics(report, log);
  }
  write_timing(report, log);
  return report.success ? kExitSuccess : kExitRunFailure;
}

int cmd_sweep(const RunArgs& base, const std::string& robots_list,
              const std::string& modes_list, int seeds,
              const std::string& fixed_box, std::ostream& out) {
  std::vector<int> robot_counts = parse_int_list(robots_list);
  std::vector<std::string> modes;
  {
    std::stringstream ss(modes_list);
    std::string item;
    while (std::getline(ss, item, ',')) modes.push_back(item);
  }
  char buf[256];
  out << "mode robots seeds success collisions deadlocks mean_makespan_s "
         "opt_mean_us\n";
  for (const std::string& mode : modes) {
    for (int n : robot_counts) {
      std::vector<RunReport> reports;
      reports.reserve(seeds);
      for (int s = 0; s < seeds; ++s) {
        Scenario scn;
        if (!fixed_box.empty()) {
          const Vec3 box = parse_triplet(fixed_box);
          double volume = 0.0;
          const RobotModel* m = find_model(base.scenario.model);
          if (!m) throw Error("unknown model: " + base.scenario.model);
          RobotShape shape{m->r1, m->eta, 0.0};
          volume = n * shape.volume();
          scn = generate_scenario(n, volume / box.prod(), box,
                                  static_cast<std::uint64_t>(s + 1), {*m});
        } else {
          ScenarioArgs sa = base.scenario;
          sa.robots = n;
          sa.preset.clear();
          sa.seed = static_cast<std::uint64_t>(s + 1);
          scn = sa.build();
        }
        RunArgs ra = base;
        ra.mode = mode;
        ra.seed = static_cast<std::uint64_t>(s + 1);
        RunConfig cfg = ra.config();
        cfg.record_trajectories = false;
        reports.push_back(run(scn, cfg));
      }
      const Metrics m = aggregate(reports);
      std::snprintf(buf, sizeof(buf), "%s %d %d %.3f %d %d %.2f %.1f\n",
                    mode.c_str(), n, seeds, m.success_fraction,
                    m.collision_events, m.deadlocked_robots, m.mean_makespan,
                    m.optimization.mean);
      out << buf;
    }
  }
  return kExitSuccess;
}

int cmd_primitive(const std::string& p0s, const std::string& v0s,
                  const std::string& a0s, const std::string& pends, int bench,
                  std::ostream& out) {
  StateVec x0;
  x0.pos = parse_triplet(p0s);
  x0.vel = parse_triplet(v0s);
  x0.acc = parse_triplet(a0s);
  const Vec3 p_end = parse_triplet(pends);

  PrimitiveOptions opts;
  const PrimitiveSolution sol = solve_min_time(x0, p_end, opts);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "T_star %.9f\n", sol.trajectory.duration);
  out << buf;
  out << "branch " << (sol.root_derived ? "root" : "fallback") << "\n";
  std::snprintf(buf, sizeof(buf), "average_cost %.9f\n", sol.avg_cost);
  out << buf;
  for (int d = 0; d < 3; ++d) {
    std::snprintf(buf, sizeof(buf),
                  "coeffs_dim%d %.9g %.9g %.9g %.9g %.9g %.9g\n", d,
                  sol.trajectory.coeffs(0, d), sol.trajectory.coeffs(1, d),
                  sol.trajectory.coeffs(2, d), sol.trajectory.coeffs(3, d),
                  sol.trajectory.coeffs(4, d), sol.trajectory.coeffs(5, d));
    out << buf;
  }

  if (bench > 0) {
    Rng rng(123);
    std::vector<double> us;
    us.reserve(bench);
    for (int i = 0; i < bench; ++i) {
      StateVec x;
      Vec3 g;
      for (int d = 0; d < 3; ++d) {
        x.pos[d] = rng.uniform(-2, 2);
        x.vel[d] = rng.uniform(-1, 1);
        x.acc[d] = rng.uniform(-1, 1);
        g[d] = rng.uniform(-3, 3);
      }
      const auto t0 = std::chrono::steady_clock::now();
      volatile double sink = solve_min_time(x, g, opts).trajectory.duration;
      (void)sink;
      const auto t1 = std::chrono::steady_clock::now();
      us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    const StageStats s = stage_stats(us);
    std::snprintf(buf, sizeof(buf),
                  "bench jerk_smooth mean %.3f std %.3f min %.3f max %.3f "
                  "n %d\n",
                  s.mean, s.stddev, s.min, s.max, s.count);
    out << buf;
  }
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized multi-robot trajectory replanning sandbox"};
  app.require_subcommand(1);

  // scenario
  auto* scenario_cmd = app.add_subcommand("scenario", "generate a scenario file");
  ScenarioArgs scn_args;
  std::string scn_out = "scenario.txt";
  add_scenario_flags(scenario_cmd, scn_args);
  scenario_cmd->add_option("--seed", scn_args.seed, "scenario seed");
  scenario_cmd->add_option("--out", scn_out, "output file");

  // run
  auto* run_cmd = app.add_subcommand("run", "simulate one scenario");
  RunArgs run_args;
  run_cmd->add_option("--scenario", run_args.scenario_file, "scenario file");
  add_scenario_flags(run_cmd, run_args.scenario);
  run_cmd->add_option("--mode", run_args.mode, "shared|predicted");
  run_cmd->add_option("--seed", run_args.seed, "run seed");
  run_cmd->add_option("--replan-hz", run_args.replan_hz, "replanning rate");
  run_cmd->add_option("--sim-hz", run_args.sim_hz, "plant rate");
  run_cmd->add_option("--time-budget", run_args.time_budget, "seconds");
  run_cmd->add_option("--goal-tol", run_args.goal_tol, "goal tolerance (m)");
  run_cmd->add_option("--plant", run_args.plant, "perfect|lag");
  run_cmd->add_option("--lag-rate", run_args.lag_rate, "plant pull rate 1/s");
  run_cmd->add_option("--accel-noise", run_args.accel_noise,
                      "plant accel noise bound");
  run_cmd->add_option("--threads", run_args.threads,
                      "OpenMP planning threads (0 = serial)");
  run_cmd->add_option("--safety-pad", run_args.safety_pad,
                      "baseline collision pad added to xi (m)");
  run_cmd->add_option("--comp-cap", run_args.comp_cap,
                      "compensator correction cap (m)");
  run_cmd->add_option("--weights", run_args.weights_file, "weights file");
  add_weight_flags(run_cmd, run_args.weights);
  run_cmd->add_option("--out", run_args.out_dir, "output directory");
  run_cmd->add_flag("--no-csv", run_args.no_csv, "skip trajectory csv");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "seed sweeps over configs");
  RunArgs sweep_args;
  std::string sweep_robots = "2,4,8";
  std::string sweep_modes = "shared";
  std::string sweep_fixed_box;
  int sweep_seeds = 25;
  add_scenario_flags(sweep_cmd, sweep_args.scenario);
  sweep_cmd->add_option("--robots-list", sweep_robots, "robot counts, comma");
  sweep_cmd->add_option("--modes", sweep_modes, "modes, comma");
  sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per configuration");
  sweep_cmd->add_option("--fixed-box", sweep_fixed_box,
                        "fixed box X,Y,Z (density sweep)");
  sweep_cmd->add_option("--replan-hz", sweep_args.replan_hz, "replanning rate");
  sweep_cmd->add_option("--sim-hz", sweep_args.sim_hz, "plant rate");
  sweep_cmd->add_option("--time-budget", sweep_args.time_budget, "seconds");
  sweep_cmd->add_option("--plant", sweep_args.plant, "perfect|lag");
  sweep_cmd->add_option("--threads", sweep_args.threads, "OpenMP threads");
  sweep_cmd->add_option("--safety-pad", sweep_args.safety_pad,
                        "baseline collision pad added to xi (m)");
  sweep_cmd->add_option("--weights", sweep_args.weights_file, "weights file");
  add_weight_flags(sweep_cmd, sweep_args.weights);
  std::string sweep_out;
  sweep_cmd->add_option("--out", sweep_out, "also write table to DIR/sweep.txt");

  // primitive
  auto* prim_cmd = app.add_subcommand("primitive", "single jerk-smooth solve");
  std::string p0 = "0,0,0", v0 = "0,0,0", a0 = "0,0,0", pend = "1,0,0";
  int bench = 0;
  prim_cmd->add_option("--p0", p0, "start position X,Y,Z");
  prim_cmd->add_option("--v0", v0, "start velocity X,Y,Z");
  prim_cmd->add_option("--a0", a0, "start acceleration X,Y,Z");
  prim_cmd->add_option("--pend", pend, "goal position X,Y,Z");
  prim_cmd->add_option("--bench", bench, "time N random solves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitUsage;
  }

  try {
    if (scenario_cmd->parsed()) {
      save_scenario_file(scn_args.build(), scn_out);
      std::cout << "wrote " << scn_out << "\n";
      return kExitSuccess;
    }
    if (run_cmd->parsed()) return run_once(run_args, std::cout);
    if (sweep_cmd->parsed()) {
      if (!sweep_out.empty()) {
        fs::create_directories(sweep_out);
        std::ofstream file(fs::path(sweep_out) / "sweep.txt");
        std::stringstream ss;
        const int rc = cmd_sweep(sweep_args, sweep_robots, sweep_modes,
                                 sweep_seeds, sweep_fixed_box, ss);
        file << ss.str();
        std::cout << ss.str();
        return rc;
      }
      return cmd_sweep(sweep_args, sweep_robots, sweep_modes, sweep_seeds,
                       sweep_fixed_box, std::cout);
    }
    if (prim_cmd->parsed())
      return cmd_primitive(p0, v0, a0, pend, bench, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
