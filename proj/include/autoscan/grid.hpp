#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "autoscan/geometry.hpp"

namespace autoscan {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

/// 2D occupancy grid over a fixed-size scene. Cell (0,0) spans
/// [0,res)x[0,res); cell centers sit at ((x+.5)res, (y+.5)res).
/// Updates are monotone: a cell leaves Unknown exactly once and then
/// keeps its state, so replaying the same observations in any order
/// that respects first-sight yields the same map.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution)
      : width_(width),
        height_(height),
        resolution_(resolution),
        cells_(static_cast<std::size_t>(width) * height, CellState::Unknown) {}

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
  }

  CellState at(Cell c) const { return cells_[index(c)]; }
  CellState at(int x, int y) const { return cells_[index({x, y})]; }

  void set(Cell c, CellState s) { cells_[index(c)] = s; }

  /// Monotone update: only Unknown cells change.
  bool observe(Cell c, CellState s) {
    CellState& cur = cells_[index(c)];
    if (cur != CellState::Unknown || s == CellState::Unknown) return false;
    cur = s;
    return true;
  }

  Vec2 cell_center(Cell c) const {
    return {(c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_};
  }

  Cell world_to_cell(Vec2 p) const {
    return {static_cast<int>(std::floor(p.x / resolution_)),
            static_cast<int>(std::floor(p.y / resolution_))};
  }

  std::size_t count(CellState s) const {
    return static_cast<std::size_t>(
        std::count(cells_.begin(), cells_.end(), s));
  }

  std::size_t size() const { return cells_.size(); }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * width_ + c.x;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.1;
  std::vector<CellState> cells_;
};

/// Squared Euclidean distance transform (the two-pass parabola method of
/// Felzenszwalb & Huttenlocher): out[i] = min squared cell-distance to any
/// seed cell. Cells with no seed anywhere come out >= kEdtNoSeed. Squared
/// distances are integers in cell units, so finite results are exact.
constexpr double kEdtNoSeed = 1e17;

inline std::vector<double> squared_edt(int width, int height,
                                       const std::vector<std::uint8_t>& seed) {
  constexpr double kInf = 1e18;
  std::vector<double> dist(static_cast<std::size_t>(width) * height, kInf);
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (seed[i]) dist[i] = 0.0;

  auto transform_1d = [](const std::vector<double>& f, std::vector<double>& d,
                         std::vector<int>& v, std::vector<double>& z, int n) {
    auto intersect = [&f](int q, int p) {
      return ((f[q] + (double)q * q) - (f[p] + (double)p * p)) /
             (2.0 * q - 2.0 * p);
    };
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
      double s = intersect(q, v[k]);
      while (s <= z[k]) {
        --k;
        s = intersect(q, v[k]);
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
      while (z[k + 1] < q) ++k;
      double dq = (double)(q - v[k]);
      d[q] = dq * dq + f[v[k]];
    }
  };

  int n = std::max(width, height);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) f[x] = dist[(std::size_t)y * width + x];
    transform_1d(f, d, v, z, width);
    for (int x = 0; x < width; ++x) dist[(std::size_t)y * width + x] = d[x];
  }
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) f[y] = dist[(std::size_t)y * width + x];
    transform_1d(f, d, v, z, height);
    for (int y = 0; y < height; ++y) dist[(std::size_t)y * width + x] = d[y];
  }
  return dist;
}

/// Navigable-space mask: a cell is navigable iff it is Free and no Occupied
/// cell center lies within `radius` of its center. The radius test is done in
/// integer squared cell units, so it is exact.
inline std::vector<std::uint8_t> navigation_mask(const OccupancyGrid& grid,
                                                 double radius) {
  const int w = grid.width();
  const int h = grid.height();
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      mask[grid.index({x, y})] = grid.at(x, y) == CellState::Free ? 1 : 0;

  // Stamp an inflation disc around every occupied cell.
  const double r_cells = radius / grid.resolution();
  const int r_int = static_cast<int>(std::floor(r_cells + 1e-9));
  const long long r_sq_num =
      static_cast<long long>(std::floor(r_cells * r_cells + 1e-9));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (grid.at(x, y) != CellState::Occupied) continue;
      for (int dy = -r_int; dy <= r_int; ++dy) {
        for (int dx = -r_int; dx <= r_int; ++dx) {
          if ((long long)dx * dx + (long long)dy * dy > r_sq_num) continue;
          Cell c{x + dx, y + dy};
          if (grid.in_bounds(c)) mask[grid.index(c)] = 0;
        }
      }
    }
  }
  return mask;
}

/// 4-connected flood fill over `open` cells from the given starts.
inline std::vector<std::uint8_t> flood_fill(
    int width, int height, const std::vector<std::uint8_t>& open,
    const std::vector<Cell>& starts) {
  std::vector<std::uint8_t> reached(open.size(), 0);
  std::vector<Cell> stack;
  for (Cell s : starts) {
    if (s.x < 0 || s.x >= width || s.y < 0 || s.y >= height) continue;
    std::size_t i = (std::size_t)s.y * width + s.x;
    if (open[i] && !reached[i]) {
      reached[i] = 1;
      stack.push_back(s);
    }
  }
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  while (!stack.empty()) {
    Cell c = stack.back();
    stack.pop_back();
    for (int k = 0; k < 4; ++k) {
      Cell n{c.x + dx[k], c.y + dy[k]};
      if (n.x < 0 || n.x >= width || n.y < 0 || n.y >= height) continue;
      std::size_t i = (std::size_t)n.y * width + n.x;
      if (open[i] && !reached[i]) {
        reached[i] = 1;
        stack.push_back(n);
      }
    }
  }
  return reached;
}

}  // namespace autoscan
