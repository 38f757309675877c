#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "autoscan/config.hpp"
#include "autoscan/geometry.hpp"
#include "autoscan/grid.hpp"
#include "autoscan/scene.hpp"
#include "autoscan/types.hpp"

namespace autoscan {

struct SensorProfile {
  ScanMode mode = ScanMode::Explorer;
  double fov = deg2rad(70.0);
  double range = 4.5;
  double speed = 1.0;
  double sigma0 = 0.002;
  double sigma1 = 0.004;
  // Reconstructor-style cameras constrain the vertical view to
  // [phi - elev_aperture, phi + elev_aperture]; the Explorer head covers the
  // full vertical extent of desk-scale objects, so it goes unconstrained.
  bool constrain_elevation = false;
  double elev_aperture = deg2rad(30.0);
};

inline SensorProfile explorer_profile(const Params& p) {
  SensorProfile s;
  s.mode = ScanMode::Explorer;
  s.fov = p.explorer_fov;
  s.range = p.explorer_range;
  s.speed = p.explorer_speed;
  s.sigma0 = p.explorer_sigma0;
  s.sigma1 = p.explorer_sigma1;
  s.constrain_elevation = false;
  return s;
}

inline SensorProfile reconstructor_profile(const Params& p) {
  SensorProfile s;
  s.mode = ScanMode::Reconstructor;
  s.fov = p.recon_fov;
  s.range = p.recon_range;
  s.speed = p.recon_speed;
  s.sigma0 = p.recon_sigma0;
  s.sigma1 = p.recon_sigma1;
  s.constrain_elevation = true;
  s.elev_aperture = p.recon_elev_aperture;
  return s;
}

/// Profile a robot actually uses when acting in `role`, honoring the
/// profile-override ablations (which swap the hardware, not the task logic).
inline SensorProfile effective_profile(const Params& p, ScanMode role) {
  switch (p.profile_override) {
    case ProfileOverride::AllExplorer:
      return explorer_profile(p);
    case ProfileOverride::AllReconstructor:
      return reconstructor_profile(p);
    default:
      return role == ScanMode::Explorer ? explorer_profile(p)
                                        : reconstructor_profile(p);
  }
}

struct SensorPose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

/// Per-point observation bookkeeping for every ground-truth object.
/// `count` registers any sighting; `recon_count` only those made by a
/// reconstruction-task arm scan (the careful close-up pass whose coverage
/// drives the incompleteness loop). `revision` bumps on every new piece of
/// information and backs the simulator's stall detection.
struct ObservationRecords {
  struct PerObject {
    int instance_id = -1;
    std::vector<double> best_sigma;
    std::vector<std::uint32_t> count;
    std::vector<std::uint32_t> recon_count;
    std::size_t observed_total = 0;
    std::size_t recon_total = 0;
  };
  std::vector<PerObject> objects;  // parallel to SceneModel::objects
  std::uint64_t revision = 0;

  explicit ObservationRecords(const SceneModel& scene) {
    objects.reserve(scene.objects.size());
    for (const GroundTruthObject& o : scene.objects) {
      PerObject rec;
      rec.instance_id = o.instance_id;
      rec.best_sigma.assign(o.points.size(),
                            std::numeric_limits<double>::infinity());
      rec.count.assign(o.points.size(), 0);
      rec.recon_count.assign(o.points.size(), 0);
      objects.push_back(std::move(rec));
    }
  }
};

struct Observation {
  int object_index;
  int point_index;
  double sigma;
};

struct ScanResult {
  int newly_freed = 0;
  int newly_occupied = 0;
  std::vector<Observation> observed;
};

/// True iff `p` lies inside the camera frustum at `pose`: within range,
/// within the horizontal fov, and (when the profile constrains elevation)
/// within the vertical aperture around phi.
inline bool point_in_frustum(const SensorPose& pose,
                             const SensorProfile& profile, const Vec3& p) {
  const double dx = p.x - pose.x, dy = p.y - pose.y, dz = p.z - pose.z;
  const double d_sq = dx * dx + dy * dy + dz * dz;
  if (d_sq > profile.range * profile.range) return false;
  if (d_sq < 1e-18) return true;
  const double horiz = std::atan2(dy, dx);
  if (angle_diff(horiz, pose.theta) > profile.fov / 2.0 + 1e-12) return false;
  if (profile.constrain_elevation) {
    const double elev = std::atan2(dz, std::hypot(dx, dy));
    if (angle_diff(elev, pose.phi) > profile.elev_aperture + 1e-12)
      return false;
  }
  return true;
}

/// 2D sight line between cell centers on the ground-truth occupancy, with
/// cells of `self_instance` transparent (an object never occludes its own
/// surface points).
inline bool scene_line_of_sight(const SceneModel& scene, Cell from, Cell to,
                                int self_instance) {
  return line_of_sight(from, to, [&](Cell c) {
    return scene.is_occupied(c) && scene.owner(c) != self_instance;
  });
}

/// One scan: update the belief grid by raycasting across the horizontal fov
/// and record every ground-truth point visible in the frustum.
/// `recon_scan` tags observations made by reconstruction-task arm scans.
inline ScanResult raycast_scan(const SceneModel& scene, OccupancyGrid& grid,
                               ObservationRecords& records,
                               const SensorPose& pose,
                               const SensorProfile& profile,
                               bool recon_scan = false) {
  ScanResult result;
  const double res = grid.resolution();
  const double step = std::atan(res / profile.range);
  const int n_steps = std::max(1, (int)std::ceil(profile.fov / step));
  const Vec2 origin{pose.x, pose.y};

  for (int i = 0; i <= n_steps; ++i) {
    const double ang =
        pose.theta - profile.fov / 2.0 + profile.fov * i / n_steps;
    traverse_ray(origin, {std::cos(ang), std::sin(ang)}, profile.range, res,
                 [&](Cell c, double) {
                   if (!scene.in_bounds(c)) return false;
                   if (scene.is_occupied(c)) {
                     if (grid.observe(c, CellState::Occupied)) {
                       ++result.newly_occupied;
                       ++records.revision;
                     }
                     return false;
                   }
                   if (grid.observe(c, CellState::Free)) {
                     ++result.newly_freed;
                     ++records.revision;
                   }
                   return true;
                 });
  }

  const Cell sensor_cell = scene.world_to_cell(origin);
  for (std::size_t oi = 0; oi < scene.objects.size(); ++oi) {
    const GroundTruthObject& obj = scene.objects[oi];
    ObservationRecords::PerObject& rec = records.objects[oi];
    for (std::size_t pi = 0; pi < obj.points.size(); ++pi) {
      const Vec3& p = obj.points[pi];
      if (!point_in_frustum(pose, profile, p)) continue;
      const Cell pc = scene.world_to_cell({p.x, p.y});
      if (!scene_line_of_sight(scene, sensor_cell, pc, obj.instance_id))
        continue;
      const double dist = std::sqrt(dist_sq(p, {pose.x, pose.y, pose.z}));
      const double sigma = profile.sigma0 + profile.sigma1 * dist;
      bool news = false;
      if (rec.count[pi] == 0) {
        ++rec.observed_total;
        news = true;
      }
      ++rec.count[pi];
      if (recon_scan) {
        if (rec.recon_count[pi] == 0) {
          ++rec.recon_total;
          news = true;
        }
        ++rec.recon_count[pi];
      }
      if (sigma < rec.best_sigma[pi]) {
        rec.best_sigma[pi] = sigma;
        news = true;
      }
      if (news) ++records.revision;  // re-sightings are not new information
      result.observed.push_back({(int)oi, (int)pi, sigma});
    }
  }
  return result;
}

/// 360-degree start-up scan: `headings` evenly spaced Explorer-profile scans.
inline ScanResult initial_turnaround(const SceneModel& scene,
                                     OccupancyGrid& grid,
                                     ObservationRecords& records,
                                     const RobotStart& start,
                                     const SensorProfile& profile,
                                     double sensor_height, int headings) {
  ScanResult total;
  for (int k = 0; k < headings; ++k) {
    SensorPose pose{start.x, start.y, sensor_height,
                    wrap_angle(start.theta + 2.0 * kPi * k / headings), 0.0};
    ScanResult r = raycast_scan(scene, grid, records, pose, profile);
    total.newly_freed += r.newly_freed;
    total.newly_occupied += r.newly_occupied;
    total.observed.insert(total.observed.end(), r.observed.begin(),
                          r.observed.end());
  }
  return total;
}

}  // namespace autoscan
