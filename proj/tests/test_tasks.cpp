#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "autoscan/completion.hpp"
#include "autoscan/config.hpp"
#include "autoscan/frontier.hpp"
#include "autoscan/grid.hpp"
#include "autoscan/reconstruction.hpp"
#include "autoscan/rng.hpp"
#include "autoscan/scene.hpp"
#include "oracles.hpp"

using namespace autoscan;

namespace {

// A partially revealed room: Free disc of the given radius around the
// center, Unknown elsewhere, boundary Occupied.
OccupancyGrid revealed_room(int w, int h, double res, double free_radius) {
  OccupancyGrid grid(w, h, res);
  Vec2 c{w * res / 2.0, h * res / 2.0};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
        grid.set({x, y}, CellState::Occupied);
        continue;
      }
      Vec2 p = grid.cell_center({x, y});
      double d = (p - c).norm();
      if (d <= free_radius) grid.set({x, y}, CellState::Free);
    }
  return grid;
}

std::vector<std::uint8_t> all_free_mask(const OccupancyGrid& grid) {
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (int y = 0; y < grid.height(); ++y)
    for (int x = 0; x < grid.width(); ++x)
      if (grid.at(x, y) == CellState::Free) mask[grid.index({x, y})] = 1;
  return mask;
}

// Random partially-known grid for property rounds.
OccupancyGrid random_grid(Rng& rng, int w, int h) {
  OccupancyGrid grid(w, h, 0.1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double u = rng.uniform();
      if (u < 0.45)
        grid.set({x, y}, CellState::Free);
      else if (u < 0.55)
        grid.set({x, y}, CellState::Occupied);
    }
  return grid;
}

}  // namespace

TEST_CASE("frontier cells match the direct definition") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    OccupancyGrid grid = random_grid(rng, 25, 18);
    // No thinning: unlimited count, spacing below the 1-cell floor.
    std::vector<Cell> got = extract_frontiers(grid, 1 << 20, 0.5);
    std::vector<Cell> want = oracles::frontier_cells(grid);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
  }
}

TEST_CASE("farthest-point thinning honors count and spacing") {
  OccupancyGrid grid = revealed_room(40, 40, 0.1, 1.4);
  std::vector<Cell> all = extract_frontiers(grid, 1 << 20, 0.5);
  REQUIRE(all.size() > 8);

  std::vector<Cell> few = extract_frontiers(grid, 6, 2.0);
  CHECK(few.size() <= 6);
  for (std::size_t i = 0; i < few.size(); ++i)
    for (std::size_t j = i + 1; j < few.size(); ++j)
      CHECK(cell_dist_sq(few[i], few[j]) >= 4.0);

  // Deterministic: repeated extraction is identical.
  CHECK(extract_frontiers(grid, 6, 2.0) == few);
}

TEST_CASE("candidates sit in the standoff band and can reveal unknowns") {
  OccupancyGrid grid = revealed_room(50, 50, 0.1, 1.8);
  std::vector<std::uint8_t> mask = all_free_mask(grid);
  std::vector<Cell> frontiers = extract_frontiers(grid, 40, 2.0);
  REQUIRE_FALSE(frontiers.empty());
  std::vector<Cell> robots{grid.world_to_cell({2.5, 2.5})};
  const double d_min = 0.3, d_max = 1.5;

  std::vector<CandidateViewpoint> cands =
      generate_candidates(grid, mask, frontiers, robots, d_min, d_max, false);
  REQUIRE_FALSE(cands.empty());

  // The standoff band constrains the viewpoint-to-frontier distance. The
  // relaxed rescue pass (near bound dropped) only fires for frontiers that
  // got zero candidates inside the band.
  const double lo_sq = (d_min / 0.1) * (d_min / 0.1);
  const double hi_sq = (d_max / 0.1) * (d_max / 0.1);
  std::set<int> banded;
  for (const CandidateViewpoint& v : cands)
    if (cell_dist_sq(v.cell, frontiers[v.frontier_index]) >= lo_sq)
      banded.insert(v.frontier_index);

  for (const CandidateViewpoint& v : cands) {
    CHECK(mask[grid.index(v.cell)]);
    double d_sq = cell_dist_sq(v.cell, frontiers[v.frontier_index]);
    CHECK(d_sq <= hi_sq);
    if (d_sq < lo_sq) CHECK(banded.count(v.frontier_index) == 0);
    CHECK(grid.at(v.reveal) == CellState::Unknown);
    // reveal is 4-adjacent to the frontier
    int man = std::abs(v.reveal.x - frontiers[v.frontier_index].x) +
              std::abs(v.reveal.y - frontiers[v.frontier_index].y);
    CHECK(man == 1);
    CHECK(v.d_r < kUnreachable);
    CHECK(v.validity == v.d_f - v.d_r);
  }

  // paper_sign flips the validity convention.
  std::vector<CandidateViewpoint> flipped =
      generate_candidates(grid, mask, frontiers, robots, d_min, d_max, true);
  REQUIRE(flipped.size() == cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i)
    CHECK(flipped[i].validity == -cands[i].validity);
}

TEST_CASE("pending reveal cells are not targeted again") {
  OccupancyGrid grid = revealed_room(50, 50, 0.1, 1.8);
  std::vector<std::uint8_t> mask = all_free_mask(grid);
  std::vector<Cell> frontiers = extract_frontiers(grid, 40, 2.0);
  std::vector<Cell> robots{grid.world_to_cell({2.5, 2.5})};
  std::vector<CandidateViewpoint> cands =
      generate_candidates(grid, mask, frontiers, robots, 0.3, 1.5, false);
  REQUIRE_FALSE(cands.empty());

  // Mark every currently chosen reveal cell as pending; regenerating must
  // avoid all of them.
  std::vector<std::uint8_t> pending(grid.size(), 0);
  for (const CandidateViewpoint& v : cands) pending[grid.index(v.reveal)] = 1;
  std::vector<CandidateViewpoint> again = generate_candidates(
      grid, mask, frontiers, robots, 0.3, 1.5, false, &pending);
  for (const CandidateViewpoint& v : again)
    CHECK_FALSE(pending[grid.index(v.reveal)]);
}

TEST_CASE("selection covers each frontier at most once per round") {
  Rng rng(4242);
  const double fov = deg2rad(70.0), d_max = 1.5;
  int rounds_with_tasks = 0;
  for (int round = 0; round < 200; ++round) {
    OccupancyGrid grid = random_grid(rng, 30, 30);
    std::vector<std::uint8_t> mask = all_free_mask(grid);
    std::vector<Cell> frontiers = extract_frontiers(grid, 40, 2.0);
    if (frontiers.empty()) continue;
    std::vector<Cell> robots;
    for (int k = 0; k < 2; ++k) {
      Cell c{(int)rng.index(30), (int)rng.index(30)};
      if (mask[grid.index(c)]) robots.push_back(c);
    }
    if (robots.empty()) robots.push_back(frontiers[0]);
    std::vector<CandidateViewpoint> cands =
        generate_candidates(grid, mask, frontiers, robots, 0.3, d_max, false);
    std::vector<ExplorationTask> tasks = select_exploration_viewpoints(
        grid, cands, frontiers, 6, fov, d_max);
    if (!tasks.empty()) ++rounds_with_tasks;

    const double hi_sq = (d_max / 0.1) * (d_max / 0.1);
    // Replay the cone-coverage rule: a later viewpoint must never target a
    // frontier already covered by an earlier one, and no two viewpoints may
    // share a cell.
    std::vector<std::uint8_t> covered(frontiers.size(), 0);
    std::set<std::pair<int, int>> cells_used;
    for (const ExplorationTask& t : tasks) {
      int fi = -1;
      for (std::size_t i = 0; i < frontiers.size(); ++i)
        if (frontiers[i] == t.target_frontier) fi = (int)i;
      REQUIRE(fi >= 0);
      CHECK_FALSE(covered[fi]);
      CHECK(cells_used.insert({t.cell.x, t.cell.y}).second);
      CHECK(grid.at(t.reveal) == CellState::Unknown);
      mark_cone_coverage(grid, t.cell, t.theta, fov, hi_sq, frontiers,
                         covered);
      covered[fi] = 1;
    }
  }
  CHECK(rounds_with_tasks > 50);  // the property must actually get exercised
}

TEST_CASE("queued viewpoints pre-cover their cones across wakes") {
  OccupancyGrid grid = revealed_room(50, 50, 0.1, 1.8);
  std::vector<std::uint8_t> mask = all_free_mask(grid);
  std::vector<Cell> frontiers = extract_frontiers(grid, 40, 2.0);
  std::vector<Cell> robots{grid.world_to_cell({2.5, 2.5})};
  const double fov = deg2rad(70.0), d_max = 1.5;
  std::vector<CandidateViewpoint> cands =
      generate_candidates(grid, mask, frontiers, robots, 0.3, d_max, false);
  std::vector<ExplorationTask> first =
      select_exploration_viewpoints(grid, cands, frontiers, 6, fov, d_max);
  REQUIRE_FALSE(first.empty());

  // Re-select with the first round still queued: no task may target a
  // frontier any queued cone already covers.
  std::vector<ExplorationTask> second = select_exploration_viewpoints(
      grid, cands, frontiers, 6, fov, d_max, &first);
  const double hi_sq = (d_max / 0.1) * (d_max / 0.1);
  std::vector<std::uint8_t> covered(frontiers.size(), 0);
  for (const ExplorationTask& p : first)
    mark_cone_coverage(grid, p.cell, p.theta, fov, hi_sq, frontiers, covered);
  for (const ExplorationTask& t : second) {
    int fi = -1;
    for (std::size_t i = 0; i < frontiers.size(); ++i)
      if (frontiers[i] == t.target_frontier) fi = (int)i;
    REQUIRE(fi >= 0);
    CHECK_FALSE(covered[fi]);
  }
  // In particular the identical pending set never reproduces itself.
  for (const ExplorationTask& t : second)
    for (const ExplorationTask& p : first)
      CHECK_FALSE((t.cell == p.cell && t.target_frontier == p.target_frontier));
}

TEST_CASE("incompleteness normalization and threshold") {
  std::vector<Vec3> observed{{0, 0, 0}};
  std::vector<Vec3> completion{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  std::vector<double> s = incompleteness_scores(observed, completion);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 0.5);
  CHECK(s[2] == 1.0);

  // No observations: everything missing.
  std::vector<double> empty_p = incompleteness_scores({}, completion);
  CHECK(empty_p == std::vector<double>{1.0, 1.0, 1.0});

  // Perfect coverage: zero max distance means all zeros.
  std::vector<double> perfect = incompleteness_scores(completion, completion);
  CHECK(perfect == std::vector<double>{0.0, 0.0, 0.0});

  // Strict-less completion test at the threshold.
  ObjectScanState st;
  st.mean_score = 0.2;
  CHECK_FALSE(is_complete(st, 0.2));
  st.mean_score = std::nextafter(0.2, 0.0);
  CHECK(is_complete(st, 0.2));
}

TEST_CASE("incompleteness matches the brute-force oracle bitwise") {
  Rng rng(31337);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> observed, completion;
    int n_obs = 1 + (int)rng.index(40);
    int n_comp = 1 + (int)rng.index(60);
    for (int i = 0; i < n_obs; ++i)
      observed.push_back(
          {rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0, 2)});
    for (int i = 0; i < n_comp; ++i)
      completion.push_back(
          {rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0, 2)});
    std::vector<double> lib = incompleteness_scores(observed, completion);
    std::vector<double> ref = oracles::incompleteness(observed, completion);
    REQUIRE(lib.size() == ref.size());
    for (std::size_t i = 0; i < lib.size(); ++i) CHECK(lib[i] == ref[i]);
  }
}

TEST_CASE("cone viewpoints aim back at the surface point") {
  OccupancyGrid grid(30, 30, 0.1);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x) grid.set({x, y}, CellState::Free);
  std::vector<std::uint8_t> mask(grid.size(), 1);
  ArmEnvelope arm;
  auto blocked = [](Cell) { return false; };

  Vec3 q{1.5, 1.5, 0.4};
  Vec3 n{0.0, 0.0, 1.0};
  const double beta = deg2rad(35.0), d_view = 0.8;
  std::vector<ViewCandidate> cands = candidate_viewpoints_for_point(
      q, n, grid, mask, arm, beta, d_view, 12, 3.0, blocked);
  REQUIRE_FALSE(cands.empty());
  CHECK(cands.size() <= 12);
  for (const ViewCandidate& v : cands) {
    // exactly d_view away from q, on the beta-cone around +z
    Vec3 d = v.position - q;
    CHECK(d.norm() == Catch::Approx(d_view));
    CHECK(d.z == Catch::Approx(d_view * std::cos(beta)));
    CHECK(v.position.z >= arm.z_min);
    CHECK(v.position.z <= arm.z_max);
    // camera orientation points back at q
    CHECK(wrap_angle(std::atan2(q.y - v.position.y, q.x - v.position.x)) ==
          Catch::Approx(v.theta));
    double horiz = std::hypot(q.x - v.position.x, q.y - v.position.y);
    CHECK(std::atan2(q.z - v.position.z, horiz) == Catch::Approx(v.phi));
    CHECK(mask[grid.index(v.base_cell)]);
  }

  // A normal pointing straight down yields nothing (below the arm z-floor).
  std::vector<ViewCandidate> below = candidate_viewpoints_for_point(
      q, {0.0, 0.0, -1.0}, grid, mask, arm, beta, d_view, 12, 3.0, blocked);
  CHECK(below.empty());
}

TEST_CASE("view coverage counts visible scores and reports indices") {
  OccupancyGrid grid(30, 30, 0.1);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x) grid.set({x, y}, CellState::Free);
  Params params;
  SensorProfile prof = reconstructor_profile(params);

  std::vector<Vec3> completion{{1.5, 1.5, 0.6}, {1.6, 1.5, 0.6},
                               {2.9, 2.9, 0.6}};
  std::vector<double> scores{0.9, 0.5, 1.0};
  ViewCandidate v;
  v.position = {1.0, 1.5, 0.6};
  v.theta = 0.0;  // looking along +x at the first two points
  v.phi = 0.0;
  auto blocked = [](Cell) { return false; };
  std::vector<int> covered;
  double cov = view_coverage(v, completion, scores, prof, blocked, grid,
                             &covered);
  CHECK(cov == Catch::Approx(1.4));
  CHECK(covered == std::vector<int>{0, 1});

  // An occupied cell between camera and points blocks them.
  grid.set({12, 15}, CellState::Occupied);
  auto blocked2 = [&](Cell c) { return grid.at(c) == CellState::Occupied; };
  cov = view_coverage(v, completion, scores, prof, blocked2, grid, &covered);
  CHECK(cov == 0.0);
  CHECK(covered.empty());
}

TEST_CASE("three clustered low-gain scans blacklist the region") {
  ObjectScanState st;
  const double radius = 0.5, min_gain = 0.01;
  update_history(st, {1.0, 1.0, 0.5}, 0.0, radius, min_gain);
  update_history(st, {1.1, 1.0, 0.5}, 0.005, radius, min_gain);
  CHECK(st.blacklist.empty());
  update_history(st, {1.0, 1.1, 0.5}, 0.0, radius, min_gain);
  REQUIRE(st.blacklist.size() == 1);
  CHECK(st.blacklist[0].radius == radius);
  // centroid of the three strikes
  CHECK(st.blacklist[0].center.x == Catch::Approx((1.0 + 1.1 + 1.0) / 3.0));
  CHECK(in_blacklist(st.blacklist, {1.03, 1.03, 0.5}));
  CHECK_FALSE(in_blacklist(st.blacklist, {3.0, 3.0, 0.5}));

  // A productive scan breaks the streak.
  ObjectScanState ok;
  update_history(ok, {1.0, 1.0, 0.5}, 0.0, radius, min_gain);
  update_history(ok, {1.1, 1.0, 0.5}, 0.5, radius, min_gain);  // good gain
  update_history(ok, {1.0, 1.1, 0.5}, 0.0, radius, min_gain);
  CHECK(ok.blacklist.empty());

  // Three low gains far apart never blacklist.
  ObjectScanState far;
  update_history(far, {1.0, 1.0, 0.5}, 0.0, radius, min_gain);
  update_history(far, {3.0, 1.0, 0.5}, 0.0, radius, min_gain);
  update_history(far, {5.0, 1.0, 0.5}, 0.0, radius, min_gain);
  CHECK(far.blacklist.empty());
}

namespace {

// One-object scene for reconstruction generation tests: open 4 m x 4 m room,
// box object in the middle.
struct ReconFixture {
  SceneModel scene;
  OccupancyGrid grid;
  std::vector<std::uint8_t> mask;
  std::vector<ObjectScanState> states;
  Params params;

  ReconFixture() : grid(40, 40, 0.1) {
    scene.grid_width = 40;
    scene.grid_height = 40;
    scene.resolution = 0.1;
    scene.occupied.assign(1600, 0);
    scene.owner_.assign(1600, -1);
    GroundTruthObject obj;
    obj.instance_id = 5;
    obj.class_label = "box";
    // A ring of surface points around (2,2) at z=0.6.
    for (int k = 0; k < 32; ++k) {
      double a = 2.0 * kPi * k / 32;
      obj.points.push_back({2.0 + 0.2 * std::cos(a), 2.0 + 0.2 * std::sin(a),
                            0.6});
      obj.normals.push_back({std::cos(a), std::sin(a), 0.0});
    }
    Cell fc = scene.world_to_cell({2.0, 2.0});
    obj.footprint_cells = {fc};
    scene.occupied[scene.index(fc)] = 1;
    scene.owner_[scene.index(fc)] = 5;
    scene.objects.push_back(obj);
    scene.robot_starts.push_back({0.5, 0.5, 0.0});

    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 40; ++x)
        grid.set({x, y}, scene.occupied[scene.index({x, y})]
                             ? CellState::Occupied
                             : CellState::Free);
    mask = all_free_mask(grid);

    ObjectScanState st;
    st.instance_id = 5;
    st.object_index = 0;
    st.completion.points = obj.points;
    st.completion.normals = obj.normals;
    st.scores.assign(32, 1.0);
    st.mean_score = 1.0;
    states.push_back(st);
  }
};

}  // namespace

TEST_CASE("reconstruction emits at most the per-object cap per round") {
  ReconFixture f;
  std::vector<ReconstructionTask> tasks = generate_reconstruction_tasks(
      f.states, f.grid, f.mask, f.scene, reconstructor_profile(f.params),
      ArmEnvelope{}, f.params);
  REQUIRE_FALSE(tasks.empty());
  CHECK((int)tasks.size() <= f.params.recon_tasks_per_object);
  for (const ReconstructionTask& t : tasks) {
    CHECK(t.target_instance == 5);
    CHECK(f.mask[f.grid.index(t.base_cell)]);
    CHECK(t.z >= ArmEnvelope{}.z_min);
    CHECK(t.z <= ArmEnvelope{}.z_max);
  }
  // Distinct source points within the round (no duplicate aim).
  std::set<std::pair<double, double>> sources;
  for (const ReconstructionTask& t : tasks)
    CHECK(sources.insert({t.source_point.x, t.source_point.y}).second);
}

TEST_CASE("objects with queued views or finished state generate nothing") {
  ReconFixture f;
  std::vector<int> busy{5};
  CHECK(generate_reconstruction_tasks(f.states, f.grid, f.mask, f.scene,
                                      reconstructor_profile(f.params),
                                      ArmEnvelope{}, f.params, &busy)
            .empty());

  // Complete objects are skipped too.
  f.states[0].mean_score = 0.0;
  std::fill(f.states[0].scores.begin(), f.states[0].scores.end(), 0.0);
  CHECK(generate_reconstruction_tasks(f.states, f.grid, f.mask, f.scene,
                                      reconstructor_profile(f.params),
                                      ArmEnvelope{}, f.params)
            .empty());

  // Unobserved objects (no completion yet) are skipped.
  ObjectScanState fresh;
  fresh.instance_id = 5;
  fresh.object_index = 0;
  std::vector<ObjectScanState> none{fresh};
  CHECK(generate_reconstruction_tasks(none, f.grid, f.mask, f.scene,
                                      reconstructor_profile(f.params),
                                      ArmEnvelope{}, f.params)
            .empty());
}

TEST_CASE("blacklisted regions stop producing views") {
  ReconFixture f;
  // Blacklist a sphere swallowing the whole ring (radius 1 around center).
  f.states[0].blacklist.push_back({{2.0, 2.0, 0.6}, 1.0});
  std::vector<ReconstructionTask> tasks = generate_reconstruction_tasks(
      f.states, f.grid, f.mask, f.scene, reconstructor_profile(f.params),
      ArmEnvelope{}, f.params);
  CHECK(tasks.empty());
}

TEST_CASE("refresh_scan_state rebuilds observed cloud and scores") {
  ReconFixture f;
  ObservationRecords records(f.scene);
  // Pretend the first 8 ring points were arm-scanned.
  for (int i = 0; i < 8; ++i) {
    records.objects[0].recon_count[i] = 1;
    ++records.objects[0].recon_total;
  }
  GroundTruthOracle oracle(f.scene);
  ObjectScanState st;
  st.instance_id = 5;
  st.object_index = 0;
  refresh_scan_state(st, f.scene.objects[0], records.objects[0], oracle, 32);
  CHECK(st.observed.size() == 8);
  CHECK(st.completion.points.size() == 32);
  CHECK(st.scores.size() == 32);
  CHECK(st.mean_score == Catch::Approx(mean_of(st.scores)));
  CHECK(st.mean_score > 0.0);
  CHECK(st.mean_score < 1.0);
  CHECK(st.refreshed_at == 8);
  // Observed points score zero; the far side scores high.
  double near_score = 1e9, far_score = -1e9;
  for (int i = 0; i < 32; ++i) {
    if (i < 8) near_score = std::min(near_score, st.scores[i]);
    else far_score = std::max(far_score, st.scores[i]);
  }
  CHECK(near_score == 0.0);
  CHECK(far_score == 1.0);
}
