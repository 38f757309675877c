#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoscan/config.hpp"
#include "autoscan/geometry.hpp"
#include "autoscan/grid.hpp"
#include "autoscan/rng.hpp"

namespace autoscan {

struct GroundTruthObject {
  int instance_id = -1;
  std::string class_label;
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit, one per point
  std::vector<Cell> footprint_cells;
};

struct RobotStart {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// The hidden ground truth: static occupancy plus labeled surface clouds.
/// `owner(cell)` reports which object's footprint covers a cell (-1 for
/// walls/none); the sensor uses it to let objects see their own points.
struct SceneModel {
  int grid_width = 0;
  int grid_height = 0;
  double resolution = 0.1;
  std::vector<std::uint8_t> occupied;  // w*h mask: walls + object footprints
  std::vector<int> owner_;             // w*h: instance_id or -1
  std::vector<GroundTruthObject> objects;
  std::vector<RobotStart> robot_starts;

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.x < grid_width && c.y >= 0 && c.y < grid_height;
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * grid_width + c.x;
  }
  bool is_occupied(Cell c) const { return in_bounds(c) && occupied[index(c)]; }
  int owner(Cell c) const { return in_bounds(c) ? owner_[index(c)] : -1; }
  Cell world_to_cell(Vec2 p) const {
    return {static_cast<int>(std::floor(p.x / resolution)),
            static_cast<int>(std::floor(p.y / resolution))};
  }
  Vec2 cell_center(Cell c) const {
    return {(c.x + 0.5) * resolution, (c.y + 0.5) * resolution};
  }
  double width_m() const { return grid_width * resolution; }
  double height_m() const { return grid_height * resolution; }
};

namespace detail {

constexpr std::uint64_t kObjectSampleSeed = 0x5CE11E5EEDull;

// Cells whose area overlaps [x0,x1]x[y0,y1] (open overlap, with a small
// epsilon so rectangle edges landing exactly on cell boundaries do not claim
// the neighboring cell).
inline void rect_cells(double x0, double y0, double x1, double y1, double res,
                       std::vector<Cell>& out) {
  int ix0 = static_cast<int>(std::floor((x0 + 1e-9) / res));
  int ix1 = static_cast<int>(std::floor((x1 - 1e-9) / res));
  int iy0 = static_cast<int>(std::floor((y0 + 1e-9) / res));
  int iy1 = static_cast<int>(std::floor((y1 - 1e-9) / res));
  for (int y = iy0; y <= iy1; ++y)
    for (int x = ix0; x <= ix1; ++x) out.push_back({x, y});
}

// Cells whose area intersects the disc (exact rect-disc test).
inline void disc_cells(double cx, double cy, double r, double res,
                       std::vector<Cell>& out) {
  int ix0 = static_cast<int>(std::floor((cx - r) / res));
  int ix1 = static_cast<int>(std::floor((cx + r) / res));
  int iy0 = static_cast<int>(std::floor((cy - r) / res));
  int iy1 = static_cast<int>(std::floor((cy + r) / res));
  for (int y = iy0; y <= iy1; ++y) {
    for (int x = ix0; x <= ix1; ++x) {
      double nx = std::clamp(cx, x * res, (x + 1) * res);
      double ny = std::clamp(cy, y * res, (y + 1) * res);
      double dx = nx - cx, dy = ny - cy;
      if (dx * dx + dy * dy <= r * r + 1e-12) out.push_back({x, y});
    }
  }
}

// Sample the surface of an upright prism over a CCW polygon footprint:
// side walls (outward normals) plus the top face (+z). Weighted by area.
inline void sample_prism(const std::vector<Vec2>& poly, double height,
                         int count, Rng& rng, std::vector<Vec3>& points,
                         std::vector<Vec3>& normals) {
  const std::size_t ne = poly.size();
  std::vector<double> cum;
  double total = 0.0;
  for (std::size_t i = 0; i < ne; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % ne];
    total += std::hypot(b.x - a.x, b.y - a.y) * height;
    cum.push_back(total);
  }
  double poly_area = 0.0;
  for (std::size_t i = 0; i < ne; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % ne];
    poly_area += a.x * b.y - b.x * a.y;
  }
  poly_area = 0.5 * std::abs(poly_area);
  total += poly_area;
  cum.push_back(total);

  double min_x = poly[0].x, max_x = poly[0].x;
  double min_y = poly[0].y, max_y = poly[0].y;
  for (const Vec2& v : poly) {
    min_x = std::min(min_x, v.x);
    max_x = std::max(max_x, v.x);
    min_y = std::min(min_y, v.y);
    max_y = std::max(max_y, v.y);
  }
  auto inside = [&poly, ne](double px, double py) {
    bool in = false;
    for (std::size_t i = 0, j = ne - 1; i < ne; j = i++) {
      if ((poly[i].y > py) != (poly[j].y > py) &&
          px < (poly[j].x - poly[i].x) * (py - poly[i].y) /
                       (poly[j].y - poly[i].y) +
                   poly[i].x)
        in = !in;
    }
    return in;
  };

  for (int s = 0; s < count; ++s) {
    double pick = rng.uniform() * total;
    std::size_t face = 0;
    while (face + 1 < cum.size() && pick > cum[face]) ++face;
    if (face < ne) {
      Vec2 a = poly[face], b = poly[(face + 1) % ne];
      double t = rng.uniform();
      double len = std::hypot(b.x - a.x, b.y - a.y);
      Vec2 n2{(b.y - a.y) / len, -(b.x - a.x) / len};
      points.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y),
                        rng.uniform() * height});
      normals.push_back({n2.x, n2.y, 0.0});
    } else {
      double px, py;
      do {
        px = min_x + rng.uniform() * (max_x - min_x);
        py = min_y + rng.uniform() * (max_y - min_y);
      } while (!inside(px, py));
      points.push_back({px, py, height});
      normals.push_back({0.0, 0.0, 1.0});
    }
  }
}

inline void sample_cylinder(double cx, double cy, double r, double height,
                            int count, Rng& rng, std::vector<Vec3>& points,
                            std::vector<Vec3>& normals) {
  double side = 2.0 * kPi * r * height;
  double top = kPi * r * r;
  for (int s = 0; s < count; ++s) {
    if (rng.uniform() * (side + top) < side) {
      double a = rng.uniform() * 2.0 * kPi;
      points.push_back(
          {cx + r * std::cos(a), cy + r * std::sin(a), rng.uniform() * height});
      normals.push_back({std::cos(a), std::sin(a), 0.0});
    } else {
      double a = rng.uniform() * 2.0 * kPi;
      double rr = r * std::sqrt(rng.uniform());
      points.push_back({cx + rr * std::cos(a), cy + rr * std::sin(a), height});
      normals.push_back({0.0, 0.0, 1.0});
    }
  }
}

}  // namespace detail

/// Throws ValidationError naming the first violated rule.
inline void validate_scene(const SceneModel& s) {
  if (s.resolution <= 0.0) throw ValidationError("resolution must be > 0");
  if (s.grid_width <= 0 || s.grid_height <= 0)
    throw ValidationError("grid dimensions must be positive");
  if (s.occupied.size() != static_cast<std::size_t>(s.grid_width) * s.grid_height)
    throw ValidationError("occupancy mask size mismatch");
  for (const GroundTruthObject& o : s.objects) {
    if (o.points.size() != o.normals.size())
      throw ValidationError("object " + std::to_string(o.instance_id) +
                            ": points/normals length mismatch");
    for (const Vec3& n : o.normals) {
      if (std::abs(n.norm() - 1.0) > 1e-6)
        throw ValidationError("object " + std::to_string(o.instance_id) +
                              ": normal not unit length");
    }
    for (const Vec3& p : o.points) {
      if (p.z < 0.0)
        throw ValidationError("object " + std::to_string(o.instance_id) +
                              ": point below ground (z < 0)");
      if (p.x < 0.0 || p.x > s.width_m() || p.y < 0.0 || p.y > s.height_m())
        throw ValidationError("object " + std::to_string(o.instance_id) +
                              ": point outside scene bounding box");
    }
    for (Cell c : o.footprint_cells) {
      if (!s.in_bounds(c))
        throw ValidationError("object " + std::to_string(o.instance_id) +
                              ": footprint cell out of bounds");
      if (!s.occupied[s.index(c)])
        throw ValidationError("object " + std::to_string(o.instance_id) +
                              ": footprint cell not occupied");
    }
  }
  if (s.robot_starts.empty()) throw ValidationError("no robots defined");
  for (std::size_t i = 0; i < s.robot_starts.size(); ++i) {
    const RobotStart& r = s.robot_starts[i];
    Cell c = s.world_to_cell({r.x, r.y});
    if (!s.in_bounds(c))
      throw ValidationError("robot " + std::to_string(i) +
                            ": start out of bounds");
    if (s.occupied[s.index(c)])
      throw ValidationError("robot " + std::to_string(i) +
                            ": start cell occupied");
  }
}

inline SceneModel load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scene file " + path + ": " + e.what());
  }

  SceneModel s;
  try {
    s.resolution = j.at("resolution").get<double>();
    s.grid_width = j.at("size").at(0).get<int>();
    s.grid_height = j.at("size").at(1).get<int>();
    if (s.grid_width <= 0 || s.grid_height <= 0 || s.resolution <= 0.0)
      throw ParseError("scene file " + path + ": non-positive size/resolution");
    s.occupied.assign(static_cast<std::size_t>(s.grid_width) * s.grid_height, 0);
    s.owner_.assign(s.occupied.size(), -1);

    if (j.contains("walls")) {
      for (const auto& w : j.at("walls")) {
        int x = w.at("x").get<int>(), y = w.at("y").get<int>();
        int cw = w.at("w").get<int>(), ch = w.at("h").get<int>();
        for (int yy = y; yy < y + ch; ++yy) {
          for (int xx = x; xx < x + cw; ++xx) {
            Cell c{xx, yy};
            if (!s.in_bounds(c))
              throw ParseError("scene file " + path +
                               ": wall cell out of bounds");
            s.occupied[s.index(c)] = 1;
          }
        }
      }
    }

    const std::filesystem::path base =
        std::filesystem::path(path).parent_path();
    if (j.contains("objects")) {
      for (const auto& jo : j.at("objects")) {
        GroundTruthObject o;
        o.instance_id = jo.at("id").get<int>();
        o.class_label = jo.at("class").get<std::string>();
        Rng rng(mix_seed(detail::kObjectSampleSeed,
                         static_cast<std::uint64_t>(o.instance_id)));
        if (jo.contains("points_file")) {
          std::ifstream pf(base / jo.at("points_file").get<std::string>());
          if (!pf)
            throw ParseError("scene file " + path + ": cannot open points_file " +
                             jo.at("points_file").get<std::string>());
          double x, y, z, nx, ny, nz;
          while (pf >> x >> y >> z >> nx >> ny >> nz) {
            o.points.push_back({x, y, z});
            o.normals.push_back({nx, ny, nz});
            Cell c{static_cast<int>(std::floor(x / s.resolution)),
                   static_cast<int>(std::floor(y / s.resolution))};
            o.footprint_cells.push_back(c);
          }
        } else {
          const auto& g = jo.at("generator");
          const std::string kind = g.at("kind").get<std::string>();
          int count = g.at("count").get<int>();
          double cx = g.at("center").at(0).get<double>();
          double cy = g.at("center").at(1).get<double>();
          if (kind == "box") {
            double sx = g.at("size").at(0).get<double>();
            double sy = g.at("size").at(1).get<double>();
            double sz = g.at("size").at(2).get<double>();
            double x0 = cx - sx / 2, y0 = cy - sy / 2;
            std::vector<Vec2> poly = {{x0, y0},
                                      {x0 + sx, y0},
                                      {x0 + sx, y0 + sy},
                                      {x0, y0 + sy}};
            detail::sample_prism(poly, sz, count, rng, o.points, o.normals);
            detail::rect_cells(x0, y0, x0 + sx, y0 + sy, s.resolution,
                               o.footprint_cells);
          } else if (kind == "cylinder") {
            double r = g.at("radius").get<double>();
            double h = g.at("height").get<double>();
            detail::sample_cylinder(cx, cy, r, h, count, rng, o.points,
                                    o.normals);
            detail::disc_cells(cx, cy, r, s.resolution, o.footprint_cells);
          } else if (kind == "lshape") {
            double sx = g.at("size").at(0).get<double>();
            double sy = g.at("size").at(1).get<double>();
            double sz = g.at("size").at(2).get<double>();
            double cutx = g.at("cut").at(0).get<double>();
            double cuty = g.at("cut").at(1).get<double>();
            if (cutx >= sx || cuty >= sy)
              throw ParseError("scene file " + path + ": lshape cut >= size");
            double x0 = cx - sx / 2, y0 = cy - sy / 2;
            // Notch removed from the (+x,+y) corner; CCW outline.
            std::vector<Vec2> poly = {{x0, y0},
                                      {x0 + sx, y0},
                                      {x0 + sx, y0 + sy - cuty},
                                      {x0 + sx - cutx, y0 + sy - cuty},
                                      {x0 + sx - cutx, y0 + sy},
                                      {x0, y0 + sy}};
            detail::sample_prism(poly, sz, count, rng, o.points, o.normals);
            detail::rect_cells(x0, y0, x0 + sx, y0 + sy - cuty, s.resolution,
                               o.footprint_cells);
            detail::rect_cells(x0, y0 + sy - cuty, x0 + sx - cutx, y0 + sy,
                               s.resolution, o.footprint_cells);
          } else {
            throw ParseError("scene file " + path + ": unknown generator kind " +
                             kind);
          }
        }
        std::sort(o.footprint_cells.begin(), o.footprint_cells.end());
        o.footprint_cells.erase(
            std::unique(o.footprint_cells.begin(), o.footprint_cells.end()),
            o.footprint_cells.end());
        for (Cell c : o.footprint_cells) {
          if (!s.in_bounds(c))
            throw ParseError("scene file " + path + ": object " +
                             std::to_string(o.instance_id) +
                             " footprint out of bounds");
          s.occupied[s.index(c)] = 1;
          s.owner_[s.index(c)] = o.instance_id;
        }
        s.objects.push_back(std::move(o));
      }
    }

    for (const auto& jr : j.at("robots")) {
      s.robot_starts.push_back({jr.at("x").get<double>(),
                                jr.at("y").get<double>(),
                                jr.at("theta").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scene file " + path + ": " + e.what());
  }

  validate_scene(s);
  return s;
}

}  // namespace autoscan
