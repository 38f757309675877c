#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "autoscan/geometry.hpp"

namespace autoscan {

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Grid path costs are carried as integer (straight, diagonal) step counts
/// and turned into meters only for comparisons/output. Integer bookkeeping
/// makes every algorithm that searches the same grid agree bitwise on
/// distances, independent of expansion order.
inline double steps_to_meters(int straight, int diagonal, double res) {
  return (straight + diagonal * kSqrt2) * res;
}

namespace detail {

struct HeapEntry {
  double f;
  int idx;
  int s, d;
  bool operator>(const HeapEntry& o) const {
    if (f != o.f) return f > o.f;
    return idx > o.idx;
  }
};

// 8-connected neighbors; diagonal moves require both orthogonal cells to be
// navigable (no corner cutting).
template <typename Fn>
inline void for_each_neighbor(int w, int h,
                              const std::vector<std::uint8_t>& mask, int x,
                              int y, Fn&& fn) {
  auto nav = [&](int cx, int cy) {
    return cx >= 0 && cx < w && cy >= 0 && cy < h &&
           mask[(std::size_t)cy * w + cx];
  };
  static const int dx8[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dy8[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  for (int k = 0; k < 8; ++k) {
    int nx = x + dx8[k], ny = y + dy8[k];
    if (!nav(nx, ny)) continue;
    bool diagonal = k >= 4;
    if (diagonal && (!nav(x, ny) || !nav(nx, y))) continue;
    fn(nx, ny, diagonal);
  }
}

}  // namespace detail

/// Shortest-path distance field (and tree) from a set of source cells over a
/// navigability mask. Unreached cells report kUnreachable.
struct PathField {
  int width = 0, height = 0;
  double resolution = 0.1;
  std::vector<int> straight, diagonal;  // -1 when unreached
  std::vector<int> parent;              // flat index of predecessor, -1 at sources

  bool reached(Cell c) const {
    return straight[(std::size_t)c.y * width + c.x] >= 0;
  }
  double distance(Cell c) const {
    std::size_t i = (std::size_t)c.y * width + c.x;
    if (straight[i] < 0) return kUnreachable;
    return steps_to_meters(straight[i], diagonal[i], resolution);
  }
  std::vector<Cell> path_to(Cell c) const {
    std::vector<Cell> out;
    if (!reached(c)) return out;
    int i = c.y * width + c.x;
    while (i >= 0) {
      out.push_back({i % width, i / width});
      i = parent[i];
    }
    std::reverse(out.begin(), out.end());
    return out;
  }
};

inline PathField dijkstra_field(int w, int h,
                                const std::vector<std::uint8_t>& mask,
                                const std::vector<Cell>& sources, double res) {
  PathField field;
  field.width = w;
  field.height = h;
  field.resolution = res;
  field.straight.assign((std::size_t)w * h, -1);
  field.diagonal.assign((std::size_t)w * h, -1);
  field.parent.assign((std::size_t)w * h, -1);
  std::vector<std::uint8_t> closed((std::size_t)w * h, 0);

  std::priority_queue<detail::HeapEntry, std::vector<detail::HeapEntry>,
                      std::greater<detail::HeapEntry>>
      open;
  for (Cell s : sources) {
    if (s.x < 0 || s.x >= w || s.y < 0 || s.y >= h) continue;
    std::size_t i = (std::size_t)s.y * w + s.x;
    if (!mask[i]) continue;
    field.straight[i] = 0;
    field.diagonal[i] = 0;
    open.push({0.0, (int)i, 0, 0});
  }

  while (!open.empty()) {
    detail::HeapEntry e = open.top();
    open.pop();
    if (closed[e.idx]) continue;
    closed[e.idx] = 1;
    int x = e.idx % w, y = e.idx / w;
    detail::for_each_neighbor(w, h, mask, x, y, [&](int nx, int ny,
                                                    bool diag) {
      int ni = ny * w + nx;
      if (closed[ni]) return;
      int ns = e.s + (diag ? 0 : 1);
      int nd = e.d + (diag ? 1 : 0);
      double g_new = steps_to_meters(ns, nd, res);
      if (field.straight[ni] >= 0 &&
          steps_to_meters(field.straight[ni], field.diagonal[ni], res) <=
              g_new)
        return;
      field.straight[ni] = ns;
      field.diagonal[ni] = nd;
      field.parent[ni] = e.idx;
      open.push({g_new, ni, ns, nd});
    });
  }
  return field;
}

/// A* over the same adjacency with the exact octile heuristic
/// h = (max - min) straights + min diagonals. Returns meters or kUnreachable.
/// Matches dijkstra_field distances exactly (same integer cost algebra).
inline double astar_distance(int w, int h,
                             const std::vector<std::uint8_t>& mask, Cell a,
                             Cell b, double res,
                             std::vector<Cell>* path_out = nullptr) {
  auto in = [&](Cell c) { return c.x >= 0 && c.x < w && c.y >= 0 && c.y < h; };
  if (!in(a) || !in(b)) return kUnreachable;
  std::size_t ai = (std::size_t)a.y * w + a.x, bi = (std::size_t)b.y * w + b.x;
  if (!mask[ai] || !mask[bi]) return kUnreachable;

  auto heuristic = [&](int x, int y) {
    int dx = std::abs(x - b.x), dy = std::abs(y - b.y);
    int mn = std::min(dx, dy), mx = std::max(dx, dy);
    return steps_to_meters(mx - mn, mn, res);
  };

  std::vector<int> gs((std::size_t)w * h, -1), gd((std::size_t)w * h, -1);
  std::vector<int> parent((std::size_t)w * h, -1);
  std::vector<std::uint8_t> closed((std::size_t)w * h, 0);
  std::priority_queue<detail::HeapEntry, std::vector<detail::HeapEntry>,
                      std::greater<detail::HeapEntry>>
      open;
  gs[ai] = 0;
  gd[ai] = 0;
  open.push({heuristic(a.x, a.y), (int)ai, 0, 0});

  while (!open.empty()) {
    detail::HeapEntry e = open.top();
    open.pop();
    if (closed[e.idx]) continue;
    closed[e.idx] = 1;
    if ((std::size_t)e.idx == bi) {
      if (path_out) {
        path_out->clear();
        int i = e.idx;
        while (i >= 0) {
          path_out->push_back({i % w, i / w});
          i = parent[i];
        }
        std::reverse(path_out->begin(), path_out->end());
      }
      return steps_to_meters(e.s, e.d, res);
    }
    int x = e.idx % w, y = e.idx / w;
    detail::for_each_neighbor(
        w, h, mask, x, y, [&](int nx, int ny, bool diag) {
          int ni = ny * w + nx;
          if (closed[ni]) return;
          int ns = e.s + (diag ? 0 : 1);
          int nd = e.d + (diag ? 1 : 0);
          double g_new = steps_to_meters(ns, nd, res);
          if (gs[ni] >= 0 && steps_to_meters(gs[ni], gd[ni], res) <= g_new)
            return;
          gs[ni] = ns;
          gd[ni] = nd;
          parent[ni] = e.idx;
          open.push({g_new + heuristic(nx, ny), ni, ns, nd});
        });
  }
  return kUnreachable;
}

/// Closest navigable cell (center) within `max_r` meters of `p`; ties keep
/// the first cell in row-major scan order. Returns false if none qualifies.
inline bool nearest_navigable(int w, int h,
                              const std::vector<std::uint8_t>& mask, Vec2 p,
                              double max_r, double res, Cell& out) {
  Cell pc{(int)std::floor(p.x / res), (int)std::floor(p.y / res)};
  int r_cells = (int)std::ceil(max_r / res) + 1;
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int y = pc.y - r_cells; y <= pc.y + r_cells; ++y) {
    for (int x = pc.x - r_cells; x <= pc.x + r_cells; ++x) {
      if (x < 0 || x >= w || y < 0 || y >= h) continue;
      if (!mask[(std::size_t)y * w + x]) continue;
      double cx = (x + 0.5) * res, cy = (y + 0.5) * res;
      double d_sq = (cx - p.x) * (cx - p.x) + (cy - p.y) * (cy - p.y);
      if (d_sq > max_r * max_r + 1e-12) continue;
      if (!found || d_sq < best) {
        best = d_sq;
        found = true;
        out = {x, y};
      }
    }
  }
  return found;
}

}  // namespace autoscan
