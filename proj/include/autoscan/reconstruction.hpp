#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "autoscan/completion.hpp"
#include "autoscan/config.hpp"
#include "autoscan/geometry.hpp"
#include "autoscan/grid.hpp"
#include "autoscan/pathing.hpp"
#include "autoscan/sensor.hpp"
#include "autoscan/types.hpp"

namespace autoscan {

struct ArmEnvelope {
  double z_min = 0.3;
  double z_max = 1.2;
  double radius = 0.9;
};

struct BlacklistSphere {
  Vec3 center;
  double radius = 0.5;
};

struct ScanHistoryEntry {
  Vec3 viewpoint;
  double gain = 0.0;  // absolute completeness increase the scan achieved
};

/// Rolling per-object reconstruction state: the (arm-)observed cloud P, the
/// oracle's completion C, normalized incompleteness scores over C, and the
/// scan history driving the three-strike blacklist.
struct ObjectScanState {
  int instance_id = -1;
  int object_index = -1;
  std::vector<Vec3> observed;  // P, at most N points
  Completion completion;       // C, exactly N points
  std::vector<double> scores;  // normalized incompleteness per C point
  double mean_score = 1.0;
  std::vector<ScanHistoryEntry> history;
  std::vector<BlacklistSphere> blacklist;
  std::size_t refreshed_at = 0;  // recon_total of the last refresh
};

/// Per-point incompleteness of the completion C against observations P:
/// S(q) = min_p |q-p|, normalized by the cloud's max. No observations means
/// everything is missing (all ones); a zero max means nothing is (all zeros).
inline std::vector<double> incompleteness_scores(
    const std::vector<Vec3>& observed, const std::vector<Vec3>& completion) {
  std::vector<double> scores(completion.size(), 1.0);
  if (completion.empty()) return scores;
  if (observed.empty()) return scores;
  double max_score = 0.0;
  for (std::size_t i = 0; i < completion.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : observed)
      best = std::min(best, dist_sq(completion[i], p));
    scores[i] = std::sqrt(best);
    max_score = std::max(max_score, scores[i]);
  }
  if (max_score == 0.0) {
    std::fill(scores.begin(), scores.end(), 0.0);
    return scores;
  }
  for (double& s : scores) s /= max_score;
  return scores;
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / (double)v.size();
}

/// Strict-less threshold test on the mean normalized incompleteness.
inline bool is_complete(const ObjectScanState& state, double tau) {
  return state.mean_score < tau;
}

struct ViewCandidate {
  Vec3 position;
  double theta = 0.0;
  double phi = 0.0;
  Cell base_cell;
};

/// Candidate camera poses for surface point q with normal n: M positions on
/// the bottom circle of the optic cone (apex q, axis n, half-angle beta,
/// slant distance d_view), each looking back at q. Survivors must fit the
/// arm envelope, park the base on a navigable cell within arm reach, keep
/// the base within `base_range_limit` of q (the doubled-range admission),
/// and hold 2D line of sight to q. `blocked` is the belief-grid occlusion
/// predicate (the target object's own cells must not block).
inline std::vector<ViewCandidate> candidate_viewpoints_for_point(
    const Vec3& q, const Vec3& n, const OccupancyGrid& grid,
    const std::vector<std::uint8_t>& nav_mask, const ArmEnvelope& arm,
    double beta, double d_view, int m_samples, double base_range_limit,
    const std::function<bool(Cell)>& blocked) {
  std::vector<ViewCandidate> out;
  Vec3 axis = n;
  double len = axis.norm();
  if (len < 1e-9) return out;
  axis = axis * (1.0 / len);

  Vec3 u{-axis.y, axis.x, 0.0};
  if (u.norm() < 1e-6) u = {1.0, 0.0, 0.0};
  u = u * (1.0 / u.norm());
  Vec3 w{axis.y * u.z - axis.z * u.y, axis.z * u.x - axis.x * u.z,
         axis.x * u.y - axis.y * u.x};

  const Cell q_cell = grid.world_to_cell({q.x, q.y});
  for (int i = 0; i < m_samples; ++i) {
    double psi = 2.0 * kPi * i / m_samples;
    Vec3 dir = axis * std::cos(beta) +
               (u * std::cos(psi) + w * std::sin(psi)) * std::sin(beta);
    Vec3 v = q + dir * d_view;
    if (v.z < arm.z_min || v.z > arm.z_max) continue;
    Cell vc = grid.world_to_cell({v.x, v.y});
    if (!grid.in_bounds(vc)) continue;
    if (grid.at(vc) == CellState::Occupied && blocked(vc)) continue;
    Cell base;
    if (!nearest_navigable(grid.width(), grid.height(), nav_mask, {v.x, v.y},
                           arm.radius, grid.resolution(), base))
      continue;
    Vec2 bc = grid.cell_center(base);
    double bq = std::hypot(bc.x - q.x, bc.y - q.y);
    if (bq > base_range_limit + 1e-12) continue;
    if (!line_of_sight(vc, q_cell, blocked)) continue;
    ViewCandidate cand;
    cand.position = v;
    cand.theta = wrap_angle(std::atan2(q.y - v.y, q.x - v.x));
    cand.phi = std::atan2(q.z - v.z, std::hypot(q.x - v.x, q.y - v.y));
    cand.base_cell = base;
    out.push_back(cand);
  }
  return out;
}

/// Sum of incompleteness scores over completion points visible from `v`
/// (camera frustum of `profile` plus 2D line of sight). Optionally reports
/// exactly which indices were counted, so callers can zero them.
inline double view_coverage(const ViewCandidate& v,
                            const std::vector<Vec3>& completion,
                            const std::vector<double>& scores,
                            const SensorProfile& profile,
                            const std::function<bool(Cell)>& blocked,
                            const OccupancyGrid& grid,
                            std::vector<int>* covered = nullptr) {
  SensorPose pose{v.position.x, v.position.y, v.position.z, v.theta, v.phi};
  const Cell vc = grid.world_to_cell({v.position.x, v.position.y});
  double total = 0.0;
  if (covered) covered->clear();
  for (std::size_t i = 0; i < completion.size(); ++i) {
    const Vec3& p = completion[i];
    if (!point_in_frustum(pose, profile, p)) continue;
    Cell pc = grid.world_to_cell({p.x, p.y});
    if (!line_of_sight(vc, pc, blocked)) continue;
    total += scores[i];
    if (covered) covered->push_back((int)i);
  }
  return total;
}

inline bool in_blacklist(const std::vector<BlacklistSphere>& blacklist,
                         const Vec3& p) {
  for (const BlacklistSphere& b : blacklist) {
    Vec3 d = p - b.center;
    if (d.norm_sq() <= b.radius * b.radius) return true;
  }
  return false;
}

inline bool contains_instance(const std::vector<int>& ids, int instance_id) {
  return std::find(ids.begin(), ids.end(), instance_id) != ids.end();
}

/// Rebuild P, C and the scores from the latest observation records.
inline void refresh_scan_state(ObjectScanState& state,
                               const GroundTruthObject& obj,
                               const ObservationRecords::PerObject& rec,
                               CompletionOracle& oracle, int n_completion) {
  state.observed.clear();
  for (std::size_t i = 0; i < obj.points.size(); ++i)
    if (rec.recon_count[i] > 0) state.observed.push_back(obj.points[i]);
  if ((int)state.observed.size() > n_completion) {
    std::vector<Vec3> thinned;
    thinned.reserve(n_completion);
    for (int i = 0; i < n_completion; ++i)
      thinned.push_back(
          state.observed[(std::size_t)i * state.observed.size() / n_completion]);
    state.observed.swap(thinned);
  }
  state.completion = oracle.complete(state.observed, state.instance_id,
                                     n_completion);
  state.scores =
      incompleteness_scores(state.observed, state.completion.points);
  state.mean_score = mean_of(state.scores);
  state.refreshed_at = rec.recon_total;
}

/// One generation round over all objects: incomplete objects in descending
/// mean-score order each contribute up to `cap` viewpoints; every pick aims
/// at the current highest-score unblacklisted point and zeroes what it
/// covers. Points whose candidate set is empty (unreachable or fully
/// blacklisted) drop out for the round. Objects named in `busy_instances`
/// (they already have queued, unfinished views) are skipped entirely:
/// re-aiming before the in-flight evidence lands only produces redundant
/// scans, so each object is driven by at most one view batch at a time.
inline std::vector<ReconstructionTask> generate_reconstruction_tasks(
    std::vector<ObjectScanState>& states, const OccupancyGrid& grid,
    const std::vector<std::uint8_t>& nav_mask, const SceneModel& scene,
    const SensorProfile& recon_profile, const ArmEnvelope& arm,
    const Params& params, const std::vector<int>* busy_instances = nullptr) {
  std::vector<ReconstructionTask> tasks;
  std::vector<int> order(states.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = (int)i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (states[a].mean_score != states[b].mean_score)
      return states[a].mean_score > states[b].mean_score;
    return states[a].instance_id < states[b].instance_id;
  });

  for (int si : order) {
    ObjectScanState& st = states[si];
    if (st.completion.points.empty()) continue;
    if (is_complete(st, params.incompleteness_tau)) continue;

    auto blocked = [&](Cell c) {
      return grid.in_bounds(c) && grid.at(c) == CellState::Occupied &&
             scene.owner(c) != st.instance_id;
    };

    if (busy_instances && contains_instance(*busy_instances, st.instance_id))
      continue;

    std::vector<double> working = st.scores;
    std::vector<std::uint8_t> eligible(working.size(), 1);
    int emitted = 0;
    while (emitted < params.recon_tasks_per_object &&
           mean_of(working) >= params.incompleteness_tau) {
      int qi = -1;
      for (std::size_t i = 0; i < working.size(); ++i) {
        if (!eligible[i] || working[i] <= 0.0) continue;
        if (qi < 0 || working[i] > working[qi]) qi = (int)i;
      }
      if (qi < 0) break;
      const Vec3& q = st.completion.points[qi];
      if (in_blacklist(st.blacklist, q)) {
        eligible[qi] = 0;
        continue;
      }
      std::vector<ViewCandidate> cands = candidate_viewpoints_for_point(
          q, st.completion.normals[qi], grid, nav_mask, arm,
          params.cone_half_angle, params.cone_view_dist, params.cone_samples,
          2.0 * recon_profile.range, blocked);
      cands.erase(std::remove_if(cands.begin(), cands.end(),
                                 [&](const ViewCandidate& c) {
                                   return in_blacklist(st.blacklist,
                                                       c.position);
                                 }),
                  cands.end());
      if (cands.empty()) {
        eligible[qi] = 0;
        continue;
      }
      int best = 0;
      std::vector<int> covered, best_covered;
      double best_cov = -1.0;
      for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        double cov = view_coverage(cands[ci], st.completion.points, working,
                                   recon_profile, blocked, grid, &covered);
        if (cov > best_cov) {
          best_cov = cov;
          best = (int)ci;
          best_covered = covered;
        }
      }
      const ViewCandidate& pick = cands[best];
      ReconstructionTask t;
      t.x = pick.position.x;
      t.y = pick.position.y;
      t.z = pick.position.z;
      t.theta = pick.theta;
      t.phi = pick.phi;
      t.target_instance = st.instance_id;
      t.source_point = q;
      t.base_cell = pick.base_cell;
      tasks.push_back(t);
      for (int ci : best_covered) working[ci] = 0.0;
      working[qi] = 0.0;
      eligible[qi] = 0;
      ++emitted;
    }
  }
  return tasks;
}

/// Record a finished reconstruction scan. Three consecutive scans clustered
/// within `radius` that each gained less than `min_gain` completeness
/// blacklist their neighborhood (centroid sphere of radius `radius`).
inline void update_history(ObjectScanState& state, const Vec3& viewpoint,
                           double gain, double radius, double min_gain) {
  state.history.push_back({viewpoint, gain});
  const std::size_t n = state.history.size();
  if (n < 3) return;
  const ScanHistoryEntry& a = state.history[n - 3];
  const ScanHistoryEntry& b = state.history[n - 2];
  const ScanHistoryEntry& c = state.history[n - 1];
  if (a.gain >= min_gain || b.gain >= min_gain || c.gain >= min_gain) return;
  const double r_sq = radius * radius;
  if ((a.viewpoint - b.viewpoint).norm_sq() > r_sq ||
      (a.viewpoint - c.viewpoint).norm_sq() > r_sq ||
      (b.viewpoint - c.viewpoint).norm_sq() > r_sq)
    return;
  Vec3 centroid = (a.viewpoint + b.viewpoint + c.viewpoint) * (1.0 / 3.0);
  state.blacklist.push_back({centroid, radius});
}

}  // namespace autoscan
