#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoscan/config.hpp"
#include "autoscan/geometry.hpp"
#include "autoscan/grid.hpp"
#include "autoscan/scene.hpp"
#include "autoscan/scheduler.hpp"
#include "autoscan/sensor.hpp"

namespace autoscan {

struct ObjectMetric {
  int instance_id = -1;
  bool observed = false;
  int observed_points = 0;
  double completeness = 0.0;  // fraction of GT points near the reconstruction
  double rms = std::numeric_limits<double>::quiet_NaN();
};

struct MetricsReport {
  double o_comp = 0.0;
  double o_rms = std::numeric_limits<double>::quiet_NaN();
  double d_c = 0.0;
  double t_c = 0.0;
  double d_lb = 0.0;
  double t_lb = 0.0;
  double reachable_known = 0.0;
  std::vector<ObjectMetric> objects;
  int tasks_completed = 0;
  int mode_switches = 0;
  int wakes = 0;
  std::string reason;
};

namespace detail {

constexpr std::uint64_t kReconNoiseStream = 0x52eca11ull;

/// Reconstructed cloud for one object: every observed ground-truth point,
/// displaced along its normal by a zero-mean draw scaled with the best
/// sigma any scan achieved on it. One draw happens per point index whether
/// or not the point was seen, so the cloud of a given (seed, object) pair
/// never depends on which other points were observed.
inline std::vector<Vec3> reconstructed_cloud(
    const GroundTruthObject& obj, const ObservationRecords::PerObject& rec,
    std::uint64_t seed, bool noise_free) {
  std::vector<Vec3> cloud;
  Rng rng(mix_seed(mix_seed(seed, kReconNoiseStream),
                   (std::uint64_t)obj.instance_id));
  for (std::size_t i = 0; i < obj.points.size(); ++i) {
    double z = rng.normal();
    if (rec.count[i] == 0) continue;
    double disp = noise_free ? 0.0 : z * rec.best_sigma[i];
    cloud.push_back(obj.points[i] + obj.normals[i] * disp);
  }
  return cloud;
}

inline double nearest_dist(const Vec3& p, const std::vector<Vec3>& cloud) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& q : cloud) best = std::min(best, dist_sq(p, q));
  return std::sqrt(best);
}

}  // namespace detail

/// Surface completeness and accuracy against ground truth. Completeness is
/// pooled over every ground-truth point in the scene; accuracy averages the
/// per-object mean reconstruction-to-truth distance over observed objects.
inline void object_metrics(const SceneModel& scene,
                           const ObservationRecords& records,
                           const Params& params, MetricsReport& report) {
  std::size_t gt_total = 0, gt_close = 0;
  double rms_sum = 0.0;
  int rms_objects = 0;
  for (std::size_t oi = 0; oi < scene.objects.size(); ++oi) {
    const GroundTruthObject& obj = scene.objects[oi];
    const auto& rec = records.objects[oi];
    ObjectMetric m;
    m.instance_id = obj.instance_id;
    m.observed_points = (int)rec.observed_total;
    m.observed = rec.observed_total > 0;
    gt_total += obj.points.size();
    if (m.observed) {
      std::vector<Vec3> cloud = detail::reconstructed_cloud(
          obj, rec, params.seed, params.noise_free);
      std::size_t close = 0;
      for (const Vec3& g : obj.points)
        if (detail::nearest_dist(g, cloud) <= params.comp_threshold) ++close;
      m.completeness = obj.points.empty()
                           ? 0.0
                           : (double)close / (double)obj.points.size();
      gt_close += close;
      double acc = 0.0;
      for (const Vec3& o : cloud) acc += detail::nearest_dist(o, obj.points);
      m.rms = cloud.empty() ? 0.0 : acc / (double)cloud.size();
      rms_sum += m.rms;
      ++rms_objects;
    }
    report.objects.push_back(m);
  }
  report.o_comp = gt_total == 0 ? 1.0 : (double)gt_close / (double)gt_total;
  if (rms_objects > 0) report.o_rms = rms_sum / rms_objects;
}

/// Travel cost, makespan, and the two balance ratios (distance spread and
/// pooled idle fraction).
inline void efficiency_metrics(const std::vector<RobotState>& robots,
                               const RunStats& stats, MetricsReport& report) {
  report.t_c = stats.t_end;
  report.d_c = 0.0;
  for (const RobotState& r : robots) report.d_c += r.odometer;
  const double n = (double)robots.size();
  if (n > 0) {
    double mean = report.d_c / n;
    double var = 0.0;
    for (const RobotState& r : robots)
      var += (r.odometer - mean) * (r.odometer - mean);
    var /= n;
    report.d_lb = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
    report.t_lb =
        stats.t_end > 0.0 ? stats.total_wait / (n * stats.t_end) : 0.0;
  }
}

/// Fraction of ground-truth-free cells reachable from the robot starts that
/// the final belief grid has classified.
inline double reachable_coverage(const SceneModel& scene,
                                 const OccupancyGrid& grid) {
  const int w = scene.grid_width, h = scene.grid_height;
  std::vector<std::uint8_t> open((std::size_t)w * h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      open[scene.index({x, y})] = scene.is_occupied({x, y}) ? 0 : 1;
  std::vector<Cell> starts;
  for (const RobotStart& s : scene.robot_starts)
    starts.push_back(scene.world_to_cell({s.x, s.y}));
  std::vector<std::uint8_t> reach = flood_fill(w, h, open, starts);
  std::size_t reachable = 0, known = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!reach[scene.index({x, y})]) continue;
      ++reachable;
      if (grid.at({x, y}) != CellState::Unknown) ++known;
    }
  return reachable == 0 ? 1.0 : (double)known / (double)reachable;
}

inline MetricsReport compute_metrics(const SceneModel& scene,
                                     const OccupancyGrid& grid,
                                     const ObservationRecords& records,
                                     const std::vector<RobotState>& robots,
                                     const RunStats& stats,
                                     const Params& params) {
  MetricsReport report;
  object_metrics(scene, records, params, report);
  efficiency_metrics(robots, stats, report);
  report.reachable_known = reachable_coverage(scene, grid);
  report.tasks_completed = stats.tasks_completed;
  report.mode_switches = stats.mode_switches;
  report.wakes = stats.wakes;
  report.reason = stats.reason;
  return report;
}

inline nlohmann::json metrics_to_json(const MetricsReport& r) {
  nlohmann::json objects = nlohmann::json::array();
  for (const ObjectMetric& m : r.objects) {
    nlohmann::json jm{{"instance", m.instance_id},
                      {"observed", m.observed},
                      {"observed_points", m.observed_points},
                      {"completeness", m.completeness}};
    if (m.observed && !std::isnan(m.rms))
      jm["rms"] = m.rms;
    else
      jm["rms"] = nullptr;
    objects.push_back(jm);
  }
  nlohmann::json j{{"o_comp", r.o_comp},
                   {"d_c", r.d_c},
                   {"t_c", r.t_c},
                   {"d_lb", r.d_lb},
                   {"t_lb", r.t_lb},
                   {"reachable_known", r.reachable_known},
                   {"tasks_completed", r.tasks_completed},
                   {"mode_switches", r.mode_switches},
                   {"wakes", r.wakes},
                   {"reason", r.reason},
                   {"objects", objects}};
  if (std::isnan(r.o_rms))
    j["o_rms"] = nullptr;
  else
    j["o_rms"] = r.o_rms;
  return j;
}

inline std::string metrics_csv_header() {
  return "scene,seed,scheduling,mode_policy,frozen_modes,profile_override,"
         "o_comp,o_rms,d_c,t_c,d_lb,t_lb,reachable_known,tasks_completed,"
         "mode_switches,wakes,reason";
}

inline std::string metrics_csv_row(const std::string& scene_name,
                                   const Params& params,
                                   const MetricsReport& r) {
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  std::string row = scene_name + "," + std::to_string(params.seed) + "," +
                    to_string(params.scheduling) + "," +
                    to_string(params.mode_policy) + "," +
                    (params.frozen_modes.empty() ? "-" : params.frozen_modes) +
                    "," + to_string(params.profile_override) + "," +
                    num(r.o_comp) + ",";
  row += std::isnan(r.o_rms) ? "" : num(r.o_rms);
  row += "," + num(r.d_c) + "," + num(r.t_c) + "," + num(r.d_lb) + "," +
         num(r.t_lb) + "," + num(r.reachable_known) + "," +
         std::to_string(r.tasks_completed) + "," +
         std::to_string(r.mode_switches) + "," + std::to_string(r.wakes) +
         "," + r.reason;
  return row;
}

}  // namespace autoscan
