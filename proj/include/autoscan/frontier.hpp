#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "autoscan/geometry.hpp"
#include "autoscan/grid.hpp"
#include "autoscan/pathing.hpp"
#include "autoscan/types.hpp"

namespace autoscan {

struct CandidateViewpoint {
  Cell cell;
  int frontier_index = -1;  // into the frontier list it was generated for
  Cell reveal;              // unknown neighbor of the frontier it can uncover
  double validity = 0.0;
  double d_r = 0.0;  // navigation distance to the nearest robot [m]
  double d_f = 0.0;  // Euclidean distance to the nearest unfree cell [m]
};

/// Both cells Free and every cell strictly between them Free: the sight
/// line used for candidate admission and coverage marking. Unknown space
/// blocks it, so a selected view is guaranteed to reveal new cells when it
/// looks past its frontier.
inline bool frontier_visible(const OccupancyGrid& grid, Cell a, Cell b) {
  return line_of_sight(
      a, b, [&](Cell c) { return grid.at(c) != CellState::Free; });
}

/// Free cells 4-adjacent to Unknown, thinned by farthest-point sampling to
/// at most `f_max` cells with pairwise spacing >= `min_spacing` cells.
inline std::vector<Cell> extract_frontiers(const OccupancyGrid& grid,
                                           int f_max, double min_spacing) {
  std::vector<Cell> raw;
  const int w = grid.width(), h = grid.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (grid.at(x, y) != CellState::Free) continue;
      static const int dx4[4] = {1, -1, 0, 0};
      static const int dy4[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        Cell n{x + dx4[k], y + dy4[k]};
        if (grid.in_bounds(n) && grid.at(n) == CellState::Unknown) {
          raw.push_back({x, y});
          break;
        }
      }
    }
  }
  if (raw.empty()) return raw;

  // Farthest-point sampling, seeded at the lexicographically smallest cell.
  const double min_sq = min_spacing * min_spacing;
  std::vector<Cell> picked;
  std::size_t seed = 0;
  for (std::size_t i = 1; i < raw.size(); ++i)
    if (raw[i] < raw[seed]) seed = i;
  picked.push_back(raw[seed]);
  std::vector<double> min_dist(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    min_dist[i] = cell_dist_sq(raw[i], picked[0]);

  while ((int)picked.size() < f_max) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < raw.size(); ++i) {
      if (min_dist[i] > min_dist[best] ||
          (min_dist[i] == min_dist[best] && raw[i] < raw[best]))
        best = i;
    }
    if (min_dist[best] < min_sq) break;  // spacing floor reached
    picked.push_back(raw[best]);
    for (std::size_t i = 0; i < raw.size(); ++i)
      min_dist[i] = std::min(min_dist[i], cell_dist_sq(raw[i], raw[best]));
  }
  return picked;
}

/// A candidate must be able to actually uncover something: some Unknown
/// 4-neighbor of the frontier with nothing but Free cells strictly in
/// between. Seeing the frontier's own (Free) cell is not enough — grazing
/// sight lines stop at the first boundary cell they enter and would leave
/// the cell behind the frontier unknown forever.
inline bool reveal_target(const OccupancyGrid& grid, Cell viewpoint,
                          Cell frontier, Cell& out,
                          const std::vector<std::uint8_t>* skip = nullptr) {
  static const int dx4[4] = {1, -1, 0, 0};
  static const int dy4[4] = {0, 0, 1, -1};
  for (int k = 0; k < 4; ++k) {
    Cell u{frontier.x + dx4[k], frontier.y + dy4[k]};
    if (!grid.in_bounds(u) || grid.at(u) != CellState::Unknown) continue;
    if (skip && (*skip)[grid.index(u)]) continue;
    if (line_of_sight(viewpoint, u, [&](Cell c) {
          return grid.at(c) != CellState::Free;
        })) {
      out = u;
      return true;
    }
  }
  return false;
}

/// Every navigable Free cell seeing a frontier (and one of its unknown
/// neighbors) within [d_min, d_max] becomes a candidate carrying d_r
/// (shortest-path distance to the nearest robot) and d_f (distance to the
/// nearest non-Free cell). validity = d_f - d_r by default; `paper_sign`
/// flips it to d_r - d_f. Frontiers that yield nothing inside the standoff
/// band get a second pass with the near bound dropped, so cells that are
/// only uncoverable from up close still get viewpoints. `pending` marks
/// unknown cells already targeted by queued-but-unfinished tasks; they are
/// not picked again, which keeps wakes from piling duplicate work onto the
/// queues.
inline std::vector<CandidateViewpoint> generate_candidates(
    const OccupancyGrid& grid, const std::vector<std::uint8_t>& nav_mask,
    const std::vector<Cell>& frontiers, const std::vector<Cell>& robot_cells,
    double d_min, double d_max, bool paper_sign,
    const std::vector<std::uint8_t>* pending = nullptr) {
  std::vector<CandidateViewpoint> out;
  if (frontiers.empty()) return out;
  const int w = grid.width(), h = grid.height();
  const double res = grid.resolution();

  PathField robot_dist = dijkstra_field(w, h, nav_mask, robot_cells, res);

  std::vector<std::uint8_t> unfree(grid.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      unfree[grid.index({x, y})] = grid.at(x, y) != CellState::Free;
  std::vector<double> edt_sq = squared_edt(w, h, unfree);

  const double lo_sq = (d_min / res) * (d_min / res);
  const double hi_sq = (d_max / res) * (d_max / res);

  std::vector<int> cand_count(frontiers.size(), 0);
  auto pass = [&](double lo_sq_pass, const std::vector<std::uint8_t>& active) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Cell c{x, y};
        std::size_t i = grid.index(c);
        if (!nav_mask[i]) continue;
        double d_r = robot_dist.distance(c);
        if (d_r == kUnreachable) continue;
        double d_f = edt_sq[i] >= kEdtNoSeed ? (double)(w + h) * res
                                             : std::sqrt(edt_sq[i]) * res;
        for (std::size_t fi = 0; fi < frontiers.size(); ++fi) {
          if (!active[fi]) continue;
          double d_sq = cell_dist_sq(c, frontiers[fi]);
          if (d_sq < lo_sq_pass || d_sq > hi_sq) continue;
          if (!frontier_visible(grid, c, frontiers[fi])) continue;
          Cell u;
          if (!reveal_target(grid, c, frontiers[fi], u, pending)) continue;
          CandidateViewpoint v;
          v.cell = c;
          v.frontier_index = (int)fi;
          v.reveal = u;
          v.d_r = d_r;
          v.d_f = d_f;
          v.validity = paper_sign ? d_r - d_f : d_f - d_r;
          out.push_back(v);
          ++cand_count[fi];
        }
      }
    }
  };

  std::vector<std::uint8_t> active(frontiers.size(), 1);
  pass(lo_sq, active);
  bool starved = false;
  for (std::size_t fi = 0; fi < frontiers.size(); ++fi) {
    active[fi] = cand_count[fi] == 0;
    starved = starved || active[fi];
  }
  if (starved && lo_sq > 0.0) pass(0.0, active);
  return out;
}

/// Marks `covered[fi] = 1` for every frontier inside the vision cone of a
/// view at `cell` facing `theta`: within `hi_sq` squared cell distance,
/// within fov/2 of the facing, and visible through Free space.
inline void mark_cone_coverage(const OccupancyGrid& grid, Cell cell,
                               double theta, double fov, double hi_sq,
                               const std::vector<Cell>& frontiers,
                               std::vector<std::uint8_t>& covered) {
  Vec2 vp = grid.cell_center(cell);
  for (std::size_t fi = 0; fi < frontiers.size(); ++fi) {
    if (covered[fi]) continue;
    if (cell_dist_sq(cell, frontiers[fi]) > hi_sq) continue;
    Vec2 gp = grid.cell_center(frontiers[fi]);
    double ang = std::atan2(gp.y - vp.y, gp.x - vp.x);
    if (frontiers[fi] != cell && angle_diff(ang, theta) > fov / 2.0 + 1e-12)
      continue;
    if (!frontier_visible(grid, cell, frontiers[fi])) continue;
    covered[fi] = 1;
  }
}

/// Greedy max-validity selection with one-cover-per-frontier semantics: each
/// pick covers every frontier visible inside its vision cone, and covered
/// frontiers leave the candidate pool. Stops at `k_max` viewpoints or when
/// no eligible candidate remains. `pending` views (queued but unfinished
/// exploration tasks) pre-cover the frontiers their cones will see, so a
/// wake never duplicates work that is already on some robot's queue.
inline std::vector<ExplorationTask> select_exploration_viewpoints(
    const OccupancyGrid& grid, const std::vector<CandidateViewpoint>& cands,
    const std::vector<Cell>& frontiers, int k_max, double fov, double d_max,
    const std::vector<ExplorationTask>* pending = nullptr) {
  std::vector<ExplorationTask> tasks;
  if (cands.empty() || k_max < 1) return tasks;
  const double res = grid.resolution();
  const double hi_sq = (d_max / res) * (d_max / res);
  std::vector<std::uint8_t> covered(frontiers.size(), 0);
  std::vector<std::uint8_t> eligible(cands.size(), 1);

  if (pending) {
    for (const ExplorationTask& p : *pending)
      mark_cone_coverage(grid, p.cell, p.theta, fov, hi_sq, frontiers,
                         covered);
    for (std::size_t i = 0; i < cands.size(); ++i)
      if (covered[cands[i].frontier_index]) eligible[i] = 0;
  }

  while ((int)tasks.size() < k_max) {
    int best = -1;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (!eligible[i]) continue;
      if (best < 0) {
        best = (int)i;
        continue;
      }
      const CandidateViewpoint& a = cands[i];
      const CandidateViewpoint& b = cands[best];
      if (a.validity > b.validity ||
          (a.validity == b.validity &&
           (a.cell < b.cell ||
            (a.cell == b.cell && a.frontier_index < b.frontier_index))))
        best = (int)i;
    }
    if (best < 0) break;

    const CandidateViewpoint& pick = cands[best];
    Vec2 vp = grid.cell_center(pick.cell);
    // Face the unknown cell the candidate was admitted for, so the final
    // scan is guaranteed to uncover it.
    Vec2 fp = grid.cell_center(pick.reveal);
    double theta = wrap_angle(std::atan2(fp.y - vp.y, fp.x - vp.x));

    ExplorationTask t;
    t.x = vp.x;
    t.y = vp.y;
    t.theta = theta;
    t.cell = pick.cell;
    t.target_frontier = frontiers[pick.frontier_index];
    t.reveal = pick.reveal;
    tasks.push_back(t);

    mark_cone_coverage(grid, pick.cell, theta, fov, hi_sq, frontiers,
                       covered);
    covered[pick.frontier_index] = 1;  // own target always covered

    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (!eligible[i]) continue;
      if (covered[cands[i].frontier_index] || cands[i].cell == pick.cell)
        eligible[i] = 0;
    }
  }
  return tasks;
}

}  // namespace autoscan
