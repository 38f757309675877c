#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoscan/instance_io.hpp"
#include "autoscan/metrics.hpp"
#include "autoscan/render.hpp"
#include "autoscan/scene.hpp"
#include "autoscan/scheduler.hpp"
#include "autoscan/trace.hpp"

namespace autoscan {

struct RunResult {
  RunStats stats;
  MetricsReport metrics;
};

/// Simulate one configuration, optionally logging the event trace.
inline RunResult run_once(const SceneModel& scene, const Params& params,
                          const std::string& trace_path = "") {
  TraceWriter trace =
      trace_path.empty() ? TraceWriter() : TraceWriter(trace_path);
  Simulation sim(scene, params, &trace);
  RunResult result;
  result.stats = sim.run();
  result.metrics = compute_metrics(scene, sim.grid(), sim.records(),
                                   sim.robots(), result.stats, params);
  return result;
}

namespace detail {

inline int fail_input(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 2;
}

inline bool apply_overrides(Params& params,
                            const std::vector<std::string>& sets,
                            std::string& error) {
  for (const std::string& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      error = "--set expects key=value, got '" + kv + "'";
      return false;
    }
    try {
      params.set(kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const ConfigError& e) {
      error = e.what();
      return false;
    }
  }
  return true;
}

inline void append_csv_row(const std::filesystem::path& csv,
                           const std::string& row) {
  bool fresh = !std::filesystem::exists(csv) ||
               std::filesystem::file_size(csv) == 0;
  std::ofstream out(csv, std::ios::app);
  if (fresh) out << metrics_csv_header() << "\n";
  out << row << "\n";
}

}  // namespace detail

/// `run`: one simulation; writes <out>/<seed>/events.jsonl and metrics.json
/// and appends a row to <out>/runs.csv.
inline int cmd_run(const std::string& scene_path, std::uint64_t seed,
                   const std::string& out_dir,
                   const std::vector<std::string>& sets, bool overwrite) {
  if (!std::filesystem::exists(scene_path))
    return detail::fail_input("scene file not found: " + scene_path);
  SceneModel scene;
  try {
    scene = load_scene(scene_path);
  } catch (const std::exception& e) {
    return detail::fail_input(e.what());
  }
  Params params;
  params.seed = seed;
  std::string err;
  if (!detail::apply_overrides(params, sets, err))
    return detail::fail_input(err);

  std::filesystem::path run_dir =
      std::filesystem::path(out_dir) / std::to_string(seed);
  if (std::filesystem::exists(run_dir) && !overwrite)
    return detail::fail_input("output directory exists (use --overwrite): " +
                              run_dir.string());
  std::filesystem::create_directories(run_dir);

  RunResult result;
  try {
    result = run_once(scene, params, (run_dir / "events.jsonl").string());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::ofstream mj(run_dir / "metrics.json");
  mj << metrics_to_json(result.metrics).dump(2) << "\n";
  const std::string scene_name =
      std::filesystem::path(scene_path).stem().string();
  detail::append_csv_row(std::filesystem::path(out_dir) / "runs.csv",
                         metrics_csv_row(scene_name, params, result.metrics));

  std::cout << "scene=" << scene_name << " seed=" << seed
            << " t_c=" << result.metrics.t_c << " d_c=" << result.metrics.d_c
            << " o_comp=" << result.metrics.o_comp
            << " reason=" << result.stats.reason << "\n";
  return 0;
}

struct SweepCell {
  std::string name;
  Scheduling scheduling = Scheduling::TaskFlow;
  ModePolicy mode_policy = ModePolicy::Dynamic;
  std::string frozen_modes;
  ProfileOverride profile_override = ProfileOverride::None;
};

/// The full comparison grid: both schedulers, the dynamic policy plus three
/// frozen splits, and the two sensor-profile ablations next to the default.
inline std::vector<SweepCell> sweep_cells() {
  std::vector<SweepCell> cells;
  const Scheduling scheds[] = {Scheduling::TaskFlow, Scheduling::Synchronous};
  struct PolicyOpt {
    ModePolicy policy;
    const char* frozen;
    const char* tag;
  };
  const PolicyOpt policies[] = {{ModePolicy::Dynamic, "", "dynamic"},
                                {ModePolicy::Frozen, "EEER", "frozen3e1r"},
                                {ModePolicy::Frozen, "EERR", "frozen2e2r"},
                                {ModePolicy::Frozen, "ERRR", "frozen1e3r"}};
  struct OverrideOpt {
    ProfileOverride ov;
    const char* tag;
  };
  const OverrideOpt overrides[] = {{ProfileOverride::None, "default"},
                                   {ProfileOverride::AllReconstructor, "noex"},
                                   {ProfileOverride::AllExplorer, "nore"}};
  for (Scheduling s : scheds)
    for (const PolicyOpt& p : policies)
      for (const OverrideOpt& o : overrides) {
        SweepCell c;
        c.scheduling = s;
        c.mode_policy = p.policy;
        c.frozen_modes = p.frozen;
        c.profile_override = o.ov;
        c.name = std::string(to_string(s)) + "-" + p.tag + "-" + o.tag;
        cells.push_back(c);
      }
  return cells;
}

/// `sweep`: the whole grid x seeds on one scene. Per-run metrics land in
/// <out>/<cell>/<seed>/metrics.json, per-run rows in <out>/runs.csv, and
/// per-cell means in <out>/sweep.csv.
inline int cmd_sweep(const std::string& scene_path,
                     const std::vector<std::uint64_t>& seeds,
                     const std::string& out_dir,
                     const std::vector<std::string>& sets) {
  if (!std::filesystem::exists(scene_path))
    return detail::fail_input("scene file not found: " + scene_path);
  SceneModel scene;
  try {
    scene = load_scene(scene_path);
  } catch (const std::exception& e) {
    return detail::fail_input(e.what());
  }
  if (seeds.empty()) return detail::fail_input("sweep needs at least one seed");
  const std::string scene_name =
      std::filesystem::path(scene_path).stem().string();

  std::ofstream agg;
  std::filesystem::create_directories(out_dir);
  agg.open(std::filesystem::path(out_dir) / "sweep.csv");
  agg << "cell,seeds,o_comp,o_rms,d_c,t_c,d_lb,t_lb,reachable_known\n";

  for (const SweepCell& cell : sweep_cells()) {
    double o_comp = 0, o_rms = 0, d_c = 0, t_c = 0, d_lb = 0, t_lb = 0,
           reach = 0;
    int rms_runs = 0;
    for (std::uint64_t seed : seeds) {
      Params params;
      params.seed = seed;
      params.scheduling = cell.scheduling;
      params.mode_policy = cell.mode_policy;
      params.frozen_modes = cell.frozen_modes;
      params.profile_override = cell.profile_override;
      std::string err;
      if (!detail::apply_overrides(params, sets, err))
        return detail::fail_input(err);

      std::filesystem::path run_dir =
          std::filesystem::path(out_dir) / cell.name / std::to_string(seed);
      std::filesystem::create_directories(run_dir);
      RunResult result;
      try {
        result = run_once(scene, params);
      } catch (const std::exception& e) {
        std::cerr << "error: " << cell.name << " seed " << seed << ": "
                  << e.what() << "\n";
        return 1;
      }
      std::ofstream mj(run_dir / "metrics.json");
      mj << metrics_to_json(result.metrics).dump(2) << "\n";
      detail::append_csv_row(
          std::filesystem::path(out_dir) / "runs.csv",
          metrics_csv_row(scene_name, params, result.metrics));

      o_comp += result.metrics.o_comp;
      if (!std::isnan(result.metrics.o_rms)) {
        o_rms += result.metrics.o_rms;
        ++rms_runs;
      }
      d_c += result.metrics.d_c;
      t_c += result.metrics.t_c;
      d_lb += result.metrics.d_lb;
      t_lb += result.metrics.t_lb;
      reach += result.metrics.reachable_known;
    }
    const double n = (double)seeds.size();
    auto num = [](double v) { return nlohmann::json(v).dump(); };
    agg << cell.name << "," << seeds.size() << "," << num(o_comp / n) << ","
        << (rms_runs > 0 ? num(o_rms / rms_runs) : std::string()) << ","
        << num(d_c / n) << "," << num(t_c / n) << "," << num(d_lb / n) << ","
        << num(t_lb / n) << "," << num(reach / n) << "\n";
    std::cout << "cell " << cell.name << " done\n";
  }
  return 0;
}

/// `solve-instance`: run the assignment pipeline on a standalone instance
/// file and print the solution as JSON. With --oracle, also solve it
/// exhaustively and report the optimality gap. Instances default to an
/// unlimited hop length so every task gets routed.
inline int cmd_solve_instance(const std::string& instance_path,
                              std::uint64_t seed, bool with_oracle,
                              const std::vector<std::string>& sets) {
  if (!std::filesystem::exists(instance_path))
    return detail::fail_input("instance file not found: " + instance_path);
  TaskGraph graph;
  try {
    graph = load_instance(instance_path);
  } catch (const std::exception& e) {
    return detail::fail_input(e.what());
  }
  Params params;
  params.seed = seed;
  params.max_hop_distance = std::numeric_limits<double>::infinity();
  std::string err;
  if (!detail::apply_overrides(params, sets, err))
    return detail::fail_input(err);

  Rng rng(mix_seed(seed, 0x501eull));
  ModeSpeeds speeds{params.explorer_speed, params.recon_speed};
  SolveResult sol = solve_graph(graph, rng, params, speeds, nullptr);

  nlohmann::json out;
  out["modes"] = nlohmann::json::array();
  out["routes"] = nlohmann::json::array();
  for (std::size_t r = 0; r < sol.modes.size(); ++r) {
    out["modes"].push_back(to_string(sol.modes[r]));
    nlohmann::json route = nlohmann::json::array();
    for (int ti : sol.routes[r]) route.push_back(graph.tasks[ti].id);
    out["routes"].push_back(route);
  }
  out["e_d"] = sol.energy.e_d;
  out["e_c"] = sol.energy.e_c;
  out["total"] = sol.energy.total;
  out["feasible"] = sol.energy.feasible;

  if (with_oracle) {
    SolveResult opt;
    try {
      opt = exhaustive_solve(graph, params);
    } catch (const OracleTooLarge& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
    out["oracle_total"] = opt.energy.total;
    double gap = 0.0;
    if (opt.energy.total > 0.0)
      gap = (sol.energy.total - opt.energy.total) / opt.energy.total;
    else if (sol.energy.total > 0.0)
      gap = std::numeric_limits<double>::infinity();
    out["gap"] = gap;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

/// `render`: overhead SVG from a scene plus a recorded event trace.
inline int cmd_render(const std::string& scene_path,
                      const std::string& events_path,
                      const std::string& out_path) {
  if (!std::filesystem::exists(scene_path))
    return detail::fail_input("scene file not found: " + scene_path);
  if (!std::filesystem::exists(events_path))
    return detail::fail_input("trace file not found: " + events_path);
  try {
    SceneModel scene = load_scene(scene_path);
    std::vector<TraceEvent> events = read_trace(events_path);
    std::ofstream out(out_path);
    if (!out)
      return detail::fail_input("cannot write output file: " + out_path);
    out << render_svg(scene, events);
  } catch (const std::exception& e) {
    return detail::fail_input(e.what());
  }
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace autoscan
