#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "autoscan/config.hpp"
#include "autoscan/geometry.hpp"
#include "autoscan/pathing.hpp"
#include "autoscan/rng.hpp"
#include "autoscan/types.hpp"

namespace autoscan {

struct ModeSpeeds {
  double explorer = 1.0;
  double reconstructor = 0.25;
  double of(ScanMode m) const {
    return m == ScanMode::Explorer ? explorer : reconstructor;
  }
};

/// A robot as the solver sees it: where its current queue ends, what mode it
/// is in, and how many queued-but-unfinished tasks it still carries.
struct RobotContext {
  int id = 0;
  ScanMode mode = ScanMode::Explorer;
  Vec2 end_pos;
  Cell end_cell;
  int rest_load = 0;
};

/// Assignment problem instance: new tasks, robot end nodes, and the metric
/// between all of them. Node indices 0..R-1 are robot end nodes, R..R+T-1
/// the tasks, and `dist` is row-major over that joint indexing.
struct TaskGraph {
  std::vector<TaskRef> tasks;
  std::vector<RobotContext> robots;
  std::vector<double> dist;

  int n_robots() const { return (int)robots.size(); }
  int n_tasks() const { return (int)tasks.size(); }
  int n_nodes() const { return n_robots() + n_tasks(); }
  int task_node(int task_index) const { return n_robots() + task_index; }
  double d(int a, int b) const {
    return dist[(std::size_t)a * n_nodes() + b];
  }
  double& d(int a, int b) { return dist[(std::size_t)a * n_nodes() + b]; }
};

/// Metric from grid geometry: one multi-source shortest-path field per node,
/// so every entry equals the true navigable distance (A* would return the
/// same values).
inline TaskGraph build_graph(const std::vector<TaskRef>& tasks,
                             const std::vector<RobotContext>& robots,
                             int width, int height,
                             const std::vector<std::uint8_t>& nav_mask,
                             double resolution) {
  TaskGraph g;
  g.tasks = tasks;
  g.robots = robots;
  const int n = g.n_nodes();
  g.dist.assign((std::size_t)n * n, kUnreachable);
  auto cell_of = [&](int node) {
    return node < g.n_robots() ? g.robots[node].end_cell
                               : g.tasks[node - g.n_robots()].cell;
  };
  for (int a = 0; a < n; ++a) {
    PathField field =
        dijkstra_field(width, height, nav_mask, {cell_of(a)}, resolution);
    for (int b = 0; b < n; ++b) g.d(a, b) = field.distance(cell_of(b));
  }
  return g;
}

/// Euclidean metric for instances given only as coordinates.
inline TaskGraph build_graph_euclidean(const std::vector<TaskRef>& tasks,
                                       const std::vector<RobotContext>& robots) {
  TaskGraph g;
  g.tasks = tasks;
  g.robots = robots;
  const int n = g.n_nodes();
  g.dist.assign((std::size_t)n * n, 0.0);
  auto pos_of = [&](int node) {
    return node < g.n_robots() ? g.robots[node].end_pos
                               : g.tasks[node - g.n_robots()].pos;
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Vec2 diff = pos_of(a) - pos_of(b);
      g.d(a, b) = diff.norm();
    }
  return g;
}

struct EnergyBreakdown {
  double e_d = 0.0;
  double e_c = 0.0;
  double total = 0.0;
  bool feasible = true;
};

/// Single-mode product constraint: every task routed to a robot must require
/// that robot's mode.
inline bool routes_feasible(const TaskGraph& g,
                            const std::vector<ScanMode>& modes,
                            const std::vector<std::vector<int>>& routes) {
  for (int r = 0; r < g.n_robots(); ++r)
    for (int ti : routes[r])
      if (g.tasks[ti].mode != modes[r]) return false;
  return true;
}

inline double capacity_energy(const TaskGraph& g,
                              const std::vector<std::vector<int>>& groups) {
  const int n_r = g.n_robots();
  if (n_r == 0) return 0.0;
  double avg = 0.0;
  std::vector<double> loads(n_r, 0.0);
  for (int r = 0; r < n_r; ++r) {
    loads[r] = (double)groups[r].size() + g.robots[r].rest_load;
    avg += loads[r];
  }
  avg /= n_r;
  double e = 0.0;
  for (double l : loads) e += (l - avg) * (l - avg);
  return e;
}

/// Exact objective of ordered routes: summed leg distances from each robot's
/// end node through its new tasks, plus the weighted load-balance penalty.
inline EnergyBreakdown energy_exact(const TaskGraph& g,
                                    const std::vector<ScanMode>& modes,
                                    const std::vector<std::vector<int>>& routes,
                                    double capacity_weight) {
  EnergyBreakdown e;
  e.feasible = routes_feasible(g, modes, routes);
  for (int r = 0; r < g.n_robots(); ++r) {
    int prev = r;
    for (int ti : routes[r]) {
      double leg = g.d(prev, g.task_node(ti));
      if (leg >= kUnreachable) e.feasible = false;
      e.e_d += leg;
      prev = g.task_node(ti);
    }
  }
  e.e_c = capacity_energy(g, routes);
  e.total = e.e_d + capacity_weight * e.e_c;
  if (!e.feasible) e.total = kUnreachable;
  return e;
}

/// Cheap surrogate used inside annealing: per cluster, travel time of every
/// member to the cluster centroid at the member's own speed, plus the end
/// node's travel time at the robot's speed. Empty clusters contribute
/// nothing.
inline EnergyBreakdown energy_approx(const TaskGraph& g,
                                     const std::vector<ScanMode>& modes,
                                     const std::vector<std::vector<int>>& groups,
                                     const ModeSpeeds& speeds,
                                     double capacity_weight) {
  EnergyBreakdown e;
  for (int r = 0; r < g.n_robots(); ++r) {
    if (groups[r].empty()) continue;
    Vec2 centroid{0.0, 0.0};
    for (int ti : groups[r]) centroid = centroid + g.tasks[ti].pos;
    centroid = centroid * (1.0 / (double)groups[r].size());
    for (int ti : groups[r]) {
      Vec2 diff = g.tasks[ti].pos - centroid;
      e.e_d += diff.norm() / speeds.of(g.tasks[ti].mode);
    }
    Vec2 diff = g.robots[r].end_pos - centroid;
    e.e_d += diff.norm() / speeds.of(modes[r]);
  }
  e.e_c = capacity_energy(g, groups);
  e.total = e.e_d + capacity_weight * e.e_c;
  return e;
}

/// Capacity-weighted soft clustering with hard mode compatibility: tasks go
/// to the compatible, reachable robot maximizing a Gaussian affinity to the
/// cluster centroid minus a load penalty. Centroids start at the robots' end
/// nodes; loads count carried-over tasks. Deterministic given `modes`.
inline std::vector<std::vector<int>> gmm_recluster(
    const TaskGraph& g, const std::vector<ScanMode>& modes,
    const Params& params, std::vector<int>* unplaced = nullptr) {
  const int n_r = g.n_robots();
  const int n_t = g.n_tasks();
  std::vector<std::vector<int>> groups(n_r);
  std::vector<Vec2> centroids(n_r);
  for (int r = 0; r < n_r; ++r) centroids[r] = g.robots[r].end_pos;
  const double inv_two_sigma_sq =
      1.0 / (2.0 * params.gmm_sigma * params.gmm_sigma);
  if (unplaced) unplaced->clear();

  for (int it = 0; it < params.gmm_iterations; ++it) {
    std::vector<double> load(n_r, 0.0);
    for (int r = 0; r < n_r; ++r)
      load[r] = (double)groups[r].size() + g.robots[r].rest_load;
    for (auto& grp : groups) grp.clear();
    if (unplaced) unplaced->clear();
    for (int ti = 0; ti < n_t; ++ti) {
      int best = -1;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int r = 0; r < n_r; ++r) {
        if (modes[r] != g.tasks[ti].mode) continue;
        if (g.d(r, g.task_node(ti)) >= kUnreachable) continue;
        Vec2 diff = g.tasks[ti].pos - centroids[r];
        double score = -diff.dot(diff) * inv_two_sigma_sq -
                       params.gmm_lambda_capacity * load[r];
        if (score > best_score) {
          best_score = score;
          best = r;
        }
      }
      if (best < 0) {
        if (unplaced) unplaced->push_back(ti);
        continue;
      }
      groups[best].push_back(ti);
    }
    for (int r = 0; r < n_r; ++r) {
      if (groups[r].empty()) continue;
      Vec2 mean{0.0, 0.0};
      for (int ti : groups[r]) mean = mean + g.tasks[ti].pos;
      centroids[r] = mean * (1.0 / (double)groups[r].size());
    }
  }
  return groups;
}

struct ClusterSeed {
  std::vector<ScanMode> modes;
  std::vector<std::vector<int>> groups;
};

/// Initial solution: modes split proportionally to the task mix (each
/// present type keeps at least one robot), k-means over task positions
/// seeded at the robot end nodes, clusters matched to mode-compatible robots
/// by centroid distance.
inline ClusterSeed initial_clustering(const TaskGraph& g, Rng& rng,
                                      const Params& params) {
  const int n_r = g.n_robots();
  const int n_t = g.n_tasks();
  ClusterSeed seed;
  seed.groups.assign(n_r, {});
  int n_exp_tasks = 0;
  for (const TaskRef& t : g.tasks)
    if (t.mode == ScanMode::Explorer) ++n_exp_tasks;
  const int n_rec_tasks = n_t - n_exp_tasks;

  int n_exp = n_t == 0 ? n_r
                       : (int)std::lround((double)n_r * n_exp_tasks / n_t);
  if (n_exp_tasks > 0) n_exp = std::max(n_exp, 1);
  if (n_rec_tasks > 0) n_exp = std::min(n_exp, n_r - 1);
  n_exp = std::clamp(n_exp, 0, n_r);
  if (n_r == 1)  // can't honor both types; majority wins, ties explore
    n_exp = n_exp_tasks >= n_rec_tasks ? 1 : 0;

  seed.modes.assign(n_r, ScanMode::Reconstructor);
  for (int r = 0; r < n_exp; ++r) seed.modes[r] = ScanMode::Explorer;
  rng.shuffle(seed.modes);

  if (n_t == 0) return seed;

  std::vector<Vec2> centroids(n_r);
  for (int r = 0; r < n_r; ++r) centroids[r] = g.robots[r].end_pos;
  std::vector<int> member(n_t, 0);
  for (int it = 0; it < params.kmeans_iterations; ++it) {
    for (int ti = 0; ti < n_t; ++ti) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < n_r; ++c) {
        Vec2 diff = g.tasks[ti].pos - centroids[c];
        double d2 = diff.dot(diff);
        if (d2 < best_d) {
          best_d = d2;
          best = c;
        }
      }
      member[ti] = best;
    }
    for (int c = 0; c < n_r; ++c) {
      Vec2 mean{0.0, 0.0};
      int count = 0;
      for (int ti = 0; ti < n_t; ++ti)
        if (member[ti] == c) {
          mean = mean + g.tasks[ti].pos;
          ++count;
        }
      if (count > 0) centroids[c] = mean * (1.0 / count);
    }
  }

  // Match clusters to robots: compatible-with-majority robots first, by end
  // node proximity to the cluster centroid.
  std::vector<int> cluster_robot(n_r, -1);
  std::vector<std::uint8_t> taken(n_r, 0);
  for (int c = 0; c < n_r; ++c) {
    int exp_members = 0, members = 0;
    for (int ti = 0; ti < n_t; ++ti)
      if (member[ti] == c) {
        ++members;
        if (g.tasks[ti].mode == ScanMode::Explorer) ++exp_members;
      }
    ScanMode majority = exp_members * 2 >= members ? ScanMode::Explorer
                                                   : ScanMode::Reconstructor;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 2 && best < 0; ++pass) {
      for (int r = 0; r < n_r; ++r) {
        if (taken[r]) continue;
        if (pass == 0 && seed.modes[r] != majority) continue;
        Vec2 diff = g.robots[r].end_pos - centroids[c];
        double d2 = diff.dot(diff);
        if (d2 < best_d) {
          best_d = d2;
          best = r;
        }
      }
    }
    cluster_robot[c] = best;
    taken[best] = 1;
  }

  for (int ti = 0; ti < n_t; ++ti) {
    int r = cluster_robot[member[ti]];
    if (seed.modes[r] == g.tasks[ti].mode) {
      seed.groups[r].push_back(ti);
      continue;
    }
    // Move to the nearest compatible, reachable cluster.
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_r; ++c) {
      int rr = cluster_robot[c];
      if (seed.modes[rr] != g.tasks[ti].mode) continue;
      if (g.d(rr, g.task_node(ti)) >= kUnreachable) continue;
      Vec2 diff = g.tasks[ti].pos - centroids[c];
      double d2 = diff.dot(diff);
      if (d2 < best_d) {
        best_d = d2;
        best = rr;
      }
    }
    if (best >= 0) seed.groups[best].push_back(ti);
  }
  return seed;
}

/// Per-task surcharge in the annealing objective for tasks the recluster
/// could not place (no robot of a matching mode can reach them). Orphaning
/// a task removes its travel cost from the energy, so without this a mode
/// vector that strands work would always look cheaper than one that serves
/// it; the constant merely has to dominate any realistic travel energy.
constexpr double kUnplacedPenalty = 1e6;

/// Simulated annealing over the robot-mode vector. Moves either swap the
/// modes of two differently-moded robots or flip one robot of the strict
/// majority mode; every move is followed by a fresh recluster. Geometric
/// cooling, best-seen solution returned.
inline ClusterSeed anneal(const TaskGraph& g, const ClusterSeed& init,
                          Rng& rng, const Params& params,
                          const ModeSpeeds& speeds) {
  const int n_r = g.n_robots();
  auto scored = [&](const std::vector<ScanMode>& modes,
                    std::vector<std::vector<int>>& groups_out) {
    std::vector<int> orphaned;
    groups_out = gmm_recluster(g, modes, params, &orphaned);
    return energy_approx(g, modes, groups_out, speeds, params.capacity_weight)
               .total +
           kUnplacedPenalty * (double)orphaned.size();
  };
  ClusterSeed cur = init;
  double cur_e = scored(cur.modes, cur.groups);
  ClusterSeed best = cur;
  double best_e = cur_e;
  double temp = cur_e > 0.0 ? cur_e / params.sa_temp_divisor : 1.0;

  for (int it = 0; it < params.sa_iterations; ++it) {
    int n_exp = 0;
    for (ScanMode m : cur.modes)
      if (m == ScanMode::Explorer) ++n_exp;
    const int n_rec = n_r - n_exp;
    const bool can_exchange = n_exp > 0 && n_rec > 0;
    const bool can_reassign = n_exp * 2 > n_r || n_rec * 2 > n_r;
    if (!can_exchange && !can_reassign) break;

    std::vector<ScanMode> next = cur.modes;
    bool do_exchange = can_exchange && can_reassign
                           ? rng.uniform() < 0.5
                           : can_exchange;
    if (do_exchange) {
      std::vector<int> exp_ids, rec_ids;
      for (int r = 0; r < n_r; ++r)
        (next[r] == ScanMode::Explorer ? exp_ids : rec_ids).push_back(r);
      int a = exp_ids[rng.index(exp_ids.size())];
      int b = rec_ids[rng.index(rec_ids.size())];
      std::swap(next[a], next[b]);
    } else {
      ScanMode majority =
          n_exp * 2 > n_r ? ScanMode::Explorer : ScanMode::Reconstructor;
      std::vector<int> ids;
      for (int r = 0; r < n_r; ++r)
        if (next[r] == majority) ids.push_back(r);
      int a = ids[rng.index(ids.size())];
      next[a] = majority == ScanMode::Explorer ? ScanMode::Reconstructor
                                               : ScanMode::Explorer;
    }

    std::vector<std::vector<int>> groups;
    double e = scored(next, groups);
    bool accept = e < cur_e;
    if (!accept && temp > 0.0) accept = rng.uniform() < std::exp((cur_e - e) / temp);
    if (accept) {
      cur.modes = std::move(next);
      cur.groups = std::move(groups);
      cur_e = e;
      if (cur_e < best_e) {
        best = cur;
        best_e = cur_e;
      }
    }
    temp *= params.sa_cooling;
  }
  return best;
}

/// Order one robot's cluster as an open path from its end node: exact
/// subset DP up to `dp_limit` tasks, nearest-neighbor plus first-improvement
/// 2-opt beyond.
inline std::vector<int> tsp_order(const TaskGraph& g, int robot,
                                  std::vector<int> cluster, int dp_limit) {
  const int m = (int)cluster.size();
  if (m <= 1) return cluster;
  auto leg = [&](int a_node, int task_index) {
    return g.d(a_node, g.task_node(cluster[task_index]));
  };
  auto between = [&](int ta, int tb) {
    return g.d(g.task_node(cluster[ta]), g.task_node(cluster[tb]));
  };

  if (m <= dp_limit) {
    const int full = 1 << m;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp((std::size_t)full * m, inf);
    std::vector<int> parent((std::size_t)full * m, -1);
    for (int j = 0; j < m; ++j) dp[(std::size_t)(1 << j) * m + j] = leg(robot, j);
    for (int mask = 1; mask < full; ++mask)
      for (int j = 0; j < m; ++j) {
        if (!(mask & (1 << j))) continue;
        double base = dp[(std::size_t)mask * m + j];
        if (base >= inf) continue;
        for (int k = 0; k < m; ++k) {
          if (mask & (1 << k)) continue;
          int nmask = mask | (1 << k);
          double cand = base + between(j, k);
          if (cand < dp[(std::size_t)nmask * m + k]) {
            dp[(std::size_t)nmask * m + k] = cand;
            parent[(std::size_t)nmask * m + k] = j;
          }
        }
      }
    int end = 0;
    double best = inf;
    for (int j = 0; j < m; ++j) {
      double c = dp[(std::size_t)(full - 1) * m + j];
      if (c < best) {
        best = c;
        end = j;
      }
    }
    std::vector<int> rev;
    int mask = full - 1, j = end;
    while (j >= 0) {
      rev.push_back(j);
      int p = parent[(std::size_t)mask * m + j];
      mask ^= 1 << j;
      j = p;
    }
    std::vector<int> ordered;
    for (auto it = rev.rbegin(); it != rev.rend(); ++it)
      ordered.push_back(cluster[*it]);
    return ordered;
  }

  // Nearest neighbor seed.
  std::vector<int> ordered;
  std::vector<std::uint8_t> used(m, 0);
  int prev_node = robot;
  for (int step = 0; step < m; ++step) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      if (used[j]) continue;
      double d = g.d(prev_node, g.task_node(cluster[j]));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = 1;
    ordered.push_back(best);
    prev_node = g.task_node(cluster[best]);
  }

  // 2-opt on the open path (segment reversal), first improvement.
  auto seg_cost = [&](const std::vector<int>& path) {
    double c = leg(robot, path[0]);
    for (int i = 0; i + 1 < m; ++i) c += between(path[i], path[i + 1]);
    return c;
  };
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < m - 1 && !improved; ++i)
      for (int j = i + 1; j < m && !improved; ++j) {
        std::vector<int> next = ordered;
        std::reverse(next.begin() + i, next.begin() + j + 1);
        if (seg_cost(next) + 1e-12 < seg_cost(ordered)) {
          ordered = std::move(next);
          improved = true;
        }
      }
  }
  std::vector<int> out;
  for (int j : ordered) out.push_back(cluster[j]);
  return out;
}

/// Truncate a route at the first over-long hop. Hop i is the leg arriving at
/// route[i]; hops with index < `first_checked` are exempt (a robot may
/// always leave its current region).
inline std::vector<int> apply_energy_constraint(const TaskGraph& g, int robot,
                                                const std::vector<int>& route,
                                                double max_hop,
                                                int first_checked,
                                                std::vector<int>* dropped) {
  std::vector<int> kept;
  int prev = robot;
  for (int i = 0; i < (int)route.size(); ++i) {
    double hop = g.d(prev, g.task_node(route[i]));
    if (i >= first_checked && hop > max_hop) {
      if (dropped)
        dropped->insert(dropped->end(), route.begin() + i, route.end());
      return kept;
    }
    kept.push_back(route[i]);
    prev = g.task_node(route[i]);
  }
  return kept;
}

struct SolveResult {
  std::vector<ScanMode> modes;
  std::vector<std::vector<int>> routes;  // ordered task indices per robot
  std::vector<int> dropped;              // truncated by the hop constraint
  std::vector<int> unplaced;             // no compatible robot could take them
  EnergyBreakdown energy;
};

struct OracleTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exhaustive reference solver: enumerates every mode vector and every
/// compatible task partition, ordering each cluster exactly. Guarded to stay
/// tractable.
inline SolveResult exhaustive_solve(const TaskGraph& g, const Params& params) {
  const int n_r = g.n_robots();
  const int n_t = g.n_tasks();
  if (n_r > 3 || n_t > 7)
    throw OracleTooLarge("exhaustive solver limited to 3 robots / 7 tasks");
  SolveResult best;
  best.routes.assign(n_r, {});
  best.energy.total = std::numeric_limits<double>::infinity();
  best.energy.feasible = false;
  if (n_r == 0) return best;

  std::vector<int> owner(n_t, 0);
  for (int mode_bits = 0; mode_bits < (1 << n_r); ++mode_bits) {
    std::vector<ScanMode> modes(n_r);
    for (int r = 0; r < n_r; ++r)
      modes[r] = (mode_bits >> r) & 1 ? ScanMode::Explorer
                                      : ScanMode::Reconstructor;
    std::fill(owner.begin(), owner.end(), 0);
    while (true) {
      bool compatible = true;
      for (int ti = 0; ti < n_t && compatible; ++ti)
        compatible = modes[owner[ti]] == g.tasks[ti].mode;
      if (compatible) {
        std::vector<std::vector<int>> routes(n_r);
        for (int ti = 0; ti < n_t; ++ti) routes[owner[ti]].push_back(ti);
        for (int r = 0; r < n_r; ++r)
          routes[r] = tsp_order(g, r, routes[r], 12);
        EnergyBreakdown e =
            energy_exact(g, modes, routes, params.capacity_weight);
        if (e.feasible && e.total < best.energy.total) {
          best.modes = modes;
          best.routes = routes;
          best.energy = e;
        }
      }
      int i = 0;
      while (i < n_t && owner[i] == n_r - 1) owner[i++] = 0;
      if (i == n_t) break;
      ++owner[i];
    }
  }
  return best;
}

/// Full pipeline on a prepared graph. Frozen mode vectors skip annealing
/// but still recluster; the hop constraint can be disabled with an infinite
/// `max_hop_distance`.
inline SolveResult solve_graph(const TaskGraph& g, Rng& rng,
                               const Params& params, const ModeSpeeds& speeds,
                               const std::vector<ScanMode>* frozen_modes) {
  SolveResult res;
  const int n_r = g.n_robots();
  res.routes.assign(n_r, {});
  if (n_r == 0) return res;

  ClusterSeed seed;
  if (frozen_modes) {
    seed.modes = *frozen_modes;
    seed.groups = gmm_recluster(g, seed.modes, params, &res.unplaced);
  } else {
    seed = initial_clustering(g, rng, params);
    seed = anneal(g, seed, rng, params, speeds);
    seed.groups = gmm_recluster(g, seed.modes, params, &res.unplaced);
  }
  res.modes = seed.modes;

  for (int r = 0; r < n_r; ++r) {
    std::vector<int> ordered =
        tsp_order(g, r, seed.groups[r], params.tsp_dp_limit);
    res.routes[r] =
        apply_energy_constraint(g, r, ordered, params.max_hop_distance,
                                params.hop_check_start, &res.dropped);
  }
  res.energy = energy_exact(g, res.modes, res.routes, params.capacity_weight);
  return res;
}

}  // namespace autoscan
