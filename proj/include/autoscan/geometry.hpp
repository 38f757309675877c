#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace autoscan {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

/// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

/// Smallest absolute difference between two angles, in [0, pi].
inline double angle_diff(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 2.0 * kPi);
  return d > kPi ? 2.0 * kPi - d : d;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm_sq() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm_sq()); }
  Vec2 xy() const { return {x, y}; }
};

inline double dist_sq(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

/// Integer grid cell index. `x` is the column, `y` the row.
struct Cell {
  int x = 0;
  int y = 0;

  bool operator==(const Cell& o) const { return x == o.x && y == o.y; }
  bool operator!=(const Cell& o) const { return !(*this == o); }
  // Lexicographic (x, then y): the tie-break order used throughout.
  bool operator<(const Cell& o) const {
    return x != o.x ? x < o.x : y < o.y;
  }
};

inline double cell_dist_sq(const Cell& a, const Cell& b) {
  const double dx = double(a.x - b.x), dy = double(a.y - b.y);
  return dx * dx + dy * dy;
}

/// Visits every cell a segment between two cell centers touches
/// (supercover: at exact corner crossings both side cells are visited).
/// Integer arithmetic only, so results are exactly reproducible.
/// Endpoints are included. `visit` returns false to stop early.
inline void supercover_line(Cell a, Cell b,
                            const std::function<bool(Cell)>& visit) {
  int dx = b.x - a.x, dy = b.y - a.y;
  const int sx = dx > 0 ? 1 : -1;
  const int sy = dy > 0 ? 1 : -1;
  dx = std::abs(dx);
  dy = std::abs(dy);
  if (!visit(a)) return;
  int x = a.x, y = a.y;
  // Compares the next x/y boundary crossings of the ideal center-to-center
  // segment: (ix+0.5)/dx vs (iy+0.5)/dy, cross-multiplied to stay integral.
  int ix = 0, iy = 0;
  while (ix < dx || iy < dy) {
    const long long decide =
        (long long)(1 + 2 * ix) * dy - (long long)(1 + 2 * iy) * dx;
    if (decide == 0) {
      // Exact corner: visit both adjacent cells, then the diagonal one.
      if (!visit({x + sx, y})) return;
      if (!visit({x, y + sy})) return;
      x += sx;
      y += sy;
      ++ix;
      ++iy;
    } else if (decide < 0) {
      x += sx;
      ++ix;
    } else {
      y += sy;
      ++iy;
    }
    if (!visit({x, y})) return;
  }
}

/// True if no cell strictly between `a` and `b` is blocked.
inline bool line_of_sight(Cell a, Cell b,
                          const std::function<bool(Cell)>& blocked) {
  bool clear = true;
  supercover_line(a, b, [&](Cell c) {
    if (c == a || c == b) return true;
    if (blocked(c)) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

/// Walks a ray from a continuous origin along `dir` (unit) up to `max_range`
/// meters, visiting grid cells in order (Amanatides & Woo traversal).
/// `visit(cell, t)` gets the entry distance t; returning false stops the ray.
inline void traverse_ray(Vec2 origin, Vec2 dir, double max_range,
                         double resolution,
                         const std::function<bool(Cell, double)>& visit) {
  int cx = (int)std::floor(origin.x / resolution);
  int cy = (int)std::floor(origin.y / resolution);
  const int step_x = dir.x > 0 ? 1 : -1;
  const int step_y = dir.y > 0 ? 1 : -1;

  const double inf = std::numeric_limits<double>::infinity();
  double t_max_x = inf, t_delta_x = inf;
  double t_max_y = inf, t_delta_y = inf;
  if (dir.x != 0.0) {
    const double next_vx =
        (dir.x > 0 ? (cx + 1) * resolution : cx * resolution);
    t_max_x = (next_vx - origin.x) / dir.x;
    t_delta_x = resolution / std::fabs(dir.x);
  }
  if (dir.y != 0.0) {
    const double next_vy =
        (dir.y > 0 ? (cy + 1) * resolution : cy * resolution);
    t_max_y = (next_vy - origin.y) / dir.y;
    t_delta_y = resolution / std::fabs(dir.y);
  }

  double t = 0.0;
  if (!visit({cx, cy}, 0.0)) return;
  while (true) {
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      cx += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      cy += step_y;
    }
    if (t > max_range) return;
    if (!visit({cx, cy}, t)) return;
  }
}

}  // namespace autoscan
