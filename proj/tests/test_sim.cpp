#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "autoscan/cli.hpp"
#include "autoscan/config.hpp"
#include "autoscan/metrics.hpp"
#include "autoscan/render.hpp"
#include "autoscan/scene.hpp"
#include "autoscan/scheduler.hpp"
#include "autoscan/trace.hpp"

using namespace autoscan;

namespace {

std::string scenes_dir() { return AUTOSCAN_SCENES_DIR; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path tmp(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

// 10 m x 10 m room with boundary walls, one robot, no objects.
SceneModel empty_room() {
  SceneModel s;
  s.grid_width = 100;
  s.grid_height = 100;
  s.resolution = 0.1;
  s.occupied.assign(10000, 0);
  s.owner_.assign(10000, -1);
  for (int i = 0; i < 100; ++i) {
    s.occupied[0 * 100 + i] = s.occupied[99 * 100 + i] = 1;
    s.occupied[i * 100 + 0] = s.occupied[i * 100 + 99] = 1;
  }
  s.robot_starts.push_back({5.0, 5.0, 0.0});
  validate_scene(s);
  return s;
}

}  // namespace

TEST_CASE("identical runs produce byte-identical event logs") {
  SceneModel scene = load_scene(scenes_dir() + "/studio_s.scene");
  Params params;
  params.seed = 0;

  auto p1 = tmp("autoscan_run_a.jsonl"), p2 = tmp("autoscan_run_b.jsonl");
  RunResult a = run_once(scene, params, p1.string());
  RunResult b = run_once(scene, params, p2.string());

  std::string bytes_a = slurp(p1), bytes_b = slurp(p2);
  REQUIRE_FALSE(bytes_a.empty());
  CHECK(bytes_a == bytes_b);
  CHECK(a.stats.t_end == b.stats.t_end);
  CHECK(a.stats.tasks_completed == b.stats.tasks_completed);
  CHECK(a.metrics.o_comp == b.metrics.o_comp);
  CHECK(a.metrics.d_c == b.metrics.d_c);

  // A different seed changes the log (the solver annealer consumes it).
  Params other = params;
  other.seed = 12345;
  auto p3 = tmp("autoscan_run_c.jsonl");
  run_once(scene, other, p3.string());
  // Note: equality of logs across seeds is not required either way; what is
  // required is that the same seed never diverges. Clean up the files.
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
  std::filesystem::remove(p3);
}

TEST_CASE("time accounting conserves busy plus wait per robot") {
  SceneModel scene = load_scene(scenes_dir() + "/studio_s.scene");
  Params params;
  Simulation sim(scene, params, nullptr);
  RunStats stats = sim.run();

  REQUIRE(stats.reason == "complete");
  const auto& robots = sim.robots();
  double busy_sum = 0.0, wait_sum = 0.0, dist_sum = 0.0;
  int done = 0;
  for (const RobotState& r : robots) {
    CHECK(r.busy_time + r.wait_total ==
          Catch::Approx(stats.t_end).margin(1e-6));
    CHECK(r.drained());  // a complete run leaves no queued work
    busy_sum += r.busy_time;
    wait_sum += r.wait_total;
    dist_sum += r.odometer;
    done += r.completed_explore + r.completed_reconstruct;
  }
  CHECK(stats.total_busy == Catch::Approx(busy_sum));
  CHECK(stats.total_wait == Catch::Approx(wait_sum));
  CHECK(stats.total_distance == Catch::Approx(dist_sum));
  CHECK(stats.tasks_completed == done);
  CHECK(stats.tasks_completed <= stats.tasks_generated);

  MetricsReport m = compute_metrics(scene, sim.grid(), sim.records(), robots,
                                    stats, params);
  CHECK(m.d_c == Catch::Approx(dist_sum));
  CHECK(m.t_c == Catch::Approx(stats.t_end));
  CHECK(m.t_lb ==
        Catch::Approx(wait_sum / (robots.size() * stats.t_end)));
  CHECK(m.reachable_known == Catch::Approx(1.0));
}

TEST_CASE("synchronous scheduling drains every batch before re-planning") {
  SceneModel scene = load_scene(scenes_dir() + "/studio_s.scene");
  Params params;
  params.scheduling = Scheduling::Synchronous;
  auto path = tmp("autoscan_sync.jsonl");
  run_once(scene, params, path.string());
  std::vector<TraceEvent> events = read_trace(path.string());
  std::filesystem::remove(path);

  // Between consecutive assignment rounds, exactly the appended tasks finish
  // (minus any skipped as unreachable): the barrier semantics.
  std::vector<std::size_t> assigns;
  for (std::size_t i = 0; i < events.size(); ++i)
    if (events[i].kind == "assign") assigns.push_back(i);
  REQUIRE(assigns.size() >= 2);
  for (std::size_t k = 0; k + 1 < assigns.size(); ++k) {
    int appended = events[assigns[k]].data.at("appended").get<int>();
    int finished = 0, skipped = 0;
    for (std::size_t i = assigns[k] + 1; i < assigns[k + 1]; ++i) {
      if (events[i].kind == "task_done") ++finished;
      if (events[i].kind == "warning" &&
          events[i].data.value("reason", "") == "unreachable task")
        ++skipped;
    }
    CHECK(finished + skipped == appended);
  }
}

TEST_CASE("demand-driven scheduling wakes more often than the barrier") {
  SceneModel scene = load_scene(scenes_dir() + "/studio_s.scene");
  Params tf, sync;
  sync.scheduling = Scheduling::Synchronous;
  RunResult a = run_once(scene, tf);
  RunResult b = run_once(scene, sync);
  CHECK(a.stats.wakes > b.stats.wakes);
  CHECK(a.stats.reason == "complete");
  CHECK(b.stats.reason == "complete");
}

TEST_CASE("exceeding the simulation horizon raises a deadlock error") {
  SceneModel scene = load_scene(scenes_dir() + "/studio_s.scene");
  Params params;
  params.max_sim_time = 2.0;  // far below any realistic completion time
  Simulation sim(scene, params, nullptr);
  CHECK_THROWS_AS(sim.run(), DeadlockDetected);
}

TEST_CASE("a hopeless completion oracle trips the no-progress guard") {
  SceneModel scene = load_scene(scenes_dir() + "/studio_s.scene");
  Params params;
  params.noisy_oracle = true;
  params.oracle_jitter_sigma = 4.0;  // predictions land nowhere near truth
  auto path = tmp("autoscan_stall.jsonl");
  RunResult r = run_once(scene, params, path.string());
  CHECK(r.stats.reason == "stalled");

  std::vector<TraceEvent> events = read_trace(path.string());
  std::filesystem::remove(path);
  bool warned = false;
  for (const TraceEvent& e : events)
    if (e.kind == "warning" &&
        e.data.value("reason", "") == "no observation progress")
      warned = true;
  CHECK(warned);
}

TEST_CASE("an object-free room explores fully with zero reconstruction") {
  SceneModel scene = empty_room();
  Params params;
  RunResult r = run_once(scene, params);
  CHECK(r.stats.reason == "complete");
  CHECK(r.stats.mode_switches == 0);
  CHECK(r.metrics.reachable_known == Catch::Approx(1.0));
  CHECK(r.metrics.o_comp == 1.0);  // vacuous: no surfaces to reconstruct
  CHECK(std::isnan(r.metrics.o_rms));
  CHECK(r.stats.tasks_completed > 0);  // it did have to explore
}

TEST_CASE("a single box is found, reconstructed, and measured") {
  std::string json = R"({
    "resolution": 0.1,
    "size": [60, 60],
    "walls": [
      {"x": 0, "y": 0, "w": 60, "h": 1},
      {"x": 0, "y": 59, "w": 60, "h": 1},
      {"x": 0, "y": 0, "w": 1, "h": 60},
      {"x": 59, "y": 0, "w": 1, "h": 60}
    ],
    "objects": [
      {"id": 0, "class": "crate",
       "generator": {"kind": "box", "count": 128,
                     "center": [4.0, 4.0], "size": [0.6, 0.6, 0.9]}}
    ],
    "robots": [{"x": 1.0, "y": 1.0, "theta": 0.0}]
  })";
  auto sp = tmp("autoscan_onebox.scene");
  {
    std::ofstream out(sp);
    out << json;
  }
  SceneModel scene = load_scene(sp.string());
  std::filesystem::remove(sp);

  Params params;
  params.noise_free = true;
  RunResult r = run_once(scene, params);
  CHECK(r.stats.reason == "complete");
  REQUIRE(r.metrics.objects.size() == 1);
  CHECK(r.metrics.objects[0].observed);
  CHECK(r.metrics.o_comp >= 0.95);
  CHECK(r.metrics.o_rms == 0.0);  // noise-free reconstruction is exact
  int recon_done = 0;
  // mode_switches > 0 means the single robot actually swapped into the
  // reconstructor role at least once.
  CHECK(r.stats.mode_switches >= 1);
  (void)recon_done;
}

TEST_CASE("distance balance ratio on a two-robot hand case") {
  std::vector<RobotState> robots(2);
  robots[0].odometer = 2.0;
  robots[1].odometer = 4.0;
  robots[0].wait_total = 1.0;
  robots[1].wait_total = 3.0;
  RunStats stats;
  stats.t_end = 10.0;
  stats.total_wait = 4.0;
  MetricsReport m;
  efficiency_metrics(robots, stats, m);
  CHECK(m.d_c == Catch::Approx(6.0));
  // mean 3, population std 1 -> ratio 1/3
  CHECK(m.d_lb == Catch::Approx(1.0 / 3.0));
  CHECK(m.t_lb == Catch::Approx(4.0 / (2.0 * 10.0)));
  CHECK(m.t_c == Catch::Approx(10.0));
}

TEST_CASE("belief grids round-trip through run-length encoding") {
  OccupancyGrid grid(17, 9, 0.1);
  Rng rng(5);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 17; ++x) {
      double u = rng.uniform();
      grid.set({x, y},
               u < 0.3 ? CellState::Free
                       : (u < 0.4 ? CellState::Occupied : CellState::Unknown));
    }
  std::string rle = encode_grid_rle(grid);
  std::vector<CellState> cells = decode_grid_rle(rle, grid.size());
  REQUIRE(cells.size() == grid.size());
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 17; ++x)
      CHECK(cells[(std::size_t)y * 17 + x] == grid.at(x, y));

  CHECK_THROWS_AS(decode_grid_rle("abc", 4), ParseError);
  CHECK_THROWS_AS(decode_grid_rle("3U", 4), ParseError);  // wrong cell count
}

TEST_CASE("trace renders to a plausible SVG") {
  SceneModel scene = load_scene(scenes_dir() + "/studio_s.scene");
  Params params;
  auto path = tmp("autoscan_render.jsonl");
  run_once(scene, params, path.string());
  std::vector<TraceEvent> events = read_trace(path.string());
  std::filesystem::remove(path);

  std::string svg = render_svg(scene, events);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.rfind("</svg>") != std::string::npos);
  // every robot start appears as a marker of some sort
  CHECK(svg.size() > 1000);
}

TEST_CASE("the sweep grid covers 24 distinct configurations") {
  std::vector<SweepCell> cells = sweep_cells();
  CHECK(cells.size() == 24);
  std::set<std::string> names;
  for (const SweepCell& c : cells) CHECK(names.insert(c.name).second);
  int tf = 0, sync = 0, noex = 0, nore = 0;
  for (const SweepCell& c : cells) {
    (c.scheduling == Scheduling::TaskFlow ? tf : sync) += 1;
    if (c.profile_override == ProfileOverride::AllReconstructor) ++noex;
    if (c.profile_override == ProfileOverride::AllExplorer) ++nore;
  }
  CHECK(tf == 12);
  CHECK(sync == 12);
  CHECK(noex == 8);
  CHECK(nore == 8);
}

TEST_CASE("config rejects unknown keys and bad values") {
  Params params;
  CHECK_THROWS_AS(params.set("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(params.set("sa_iterations", "not_a_number"), ConfigError);
  CHECK_THROWS_AS(params.set("scheduling", "bogus"), ConfigError);
  REQUIRE_NOTHROW(params.set("scheduling", "synchronous"));
  CHECK(params.scheduling == Scheduling::Synchronous);
  REQUIRE_NOTHROW(params.set("mode_policy", "frozen"));
  CHECK(params.mode_policy == ModePolicy::Frozen);
  REQUIRE_NOTHROW(params.set("incompleteness_tau", "0.35"));
  CHECK(params.incompleteness_tau == Catch::Approx(0.35));
}

TEST_CASE("the run command validates its inputs") {
  CHECK(cmd_run("/does/not/exist.scene", 0, tmp("autoscan_cli_out").string(),
                {}, true) == 2);
  CHECK(cmd_run(scenes_dir() + "/studio_s.scene", 0,
                tmp("autoscan_cli_out").string(), {"nonsense=1"}, true) == 2);

  // A valid invocation produces the documented artifacts.
  auto out = tmp("autoscan_cli_ok");
  std::filesystem::remove_all(out);
  CHECK(cmd_run(scenes_dir() + "/studio_s.scene", 3, out.string(), {}, true) ==
        0);
  CHECK(std::filesystem::exists(out / "3" / "events.jsonl"));
  CHECK(std::filesystem::exists(out / "3" / "metrics.json"));
  CHECK(std::filesystem::exists(out / "runs.csv"));
  std::filesystem::remove_all(out);
}
