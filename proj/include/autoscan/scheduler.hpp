#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoscan/assignment.hpp"
#include "autoscan/completion.hpp"
#include "autoscan/config.hpp"
#include "autoscan/frontier.hpp"
#include "autoscan/geometry.hpp"
#include "autoscan/grid.hpp"
#include "autoscan/pathing.hpp"
#include "autoscan/reconstruction.hpp"
#include "autoscan/rng.hpp"
#include "autoscan/scene.hpp"
#include "autoscan/sensor.hpp"
#include "autoscan/trace.hpp"
#include "autoscan/types.hpp"

namespace autoscan {

struct DeadlockDetected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Event ranks double as same-time tie-break order: waypoint arrivals land
/// before scans, scans before completions, and the center always acts last.
enum class EventKind : int {
  ArriveWaypoint = 0,
  ScanTick = 1,
  TaskDone = 2,
  QueueLow = 3,
  CenterWake = 4,
  Terminate = 5,
};

struct SimEvent {
  double t = 0.0;
  EventKind kind = EventKind::Terminate;
  int robot = -1;
  std::uint64_t seq = 0;
};

struct EventAfter {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.kind != b.kind) return (int)a.kind > (int)b.kind;
    if (a.robot != b.robot) return a.robot > b.robot;
    return a.seq > b.seq;
  }
};

struct QueuedTask {
  int id = -1;
  ScanMode mode = ScanMode::Explorer;
  ExplorationTask exp;
  ReconstructionTask rec;
};

struct PlanStep {
  double t = 0.0;
  EventKind kind = EventKind::ArriveWaypoint;
  Vec2 pos;
  double theta = 0.0;
  double leg = 0.0;
};

struct RobotState {
  int id = 0;
  Vec2 pos;
  double theta = 0.0;
  ScanMode mode = ScanMode::Explorer;
  std::vector<QueuedTask> queue;  // append-only; next_index is the cursor
  std::size_t next_index = 0;
  bool busy = false;
  std::vector<PlanStep> plan;
  std::size_t plan_cursor = 0;
  double task_started_at = 0.0;
  std::uint64_t revision_at_start = 0;
  double odometer = 0.0;
  double busy_time = 0.0;
  double wait_total = 0.0;
  double wait_since = 0.0;
  int switches = 0;
  int completed_explore = 0;
  int completed_reconstruct = 0;

  bool drained() const { return next_index == queue.size(); }
};

struct RunStats {
  double t_end = 0.0;
  std::string reason;
  int wakes = 0;
  int tasks_generated = 0;
  int tasks_completed = 0;
  int mode_switches = 0;
  double total_distance = 0.0;
  double total_wait = 0.0;
  double total_busy = 0.0;
};

/// Deterministic discrete-event simulation of the whole collaboration: task
/// generation and assignment at the center, per-robot execution with scan
/// side effects on a shared belief grid.
class Simulation {
 public:
  Simulation(const SceneModel& scene, const Params& params,
             TraceWriter* trace = nullptr)
      : scene_(scene),
        params_(params),
        trace_(trace),
        grid_(scene.grid_width, scene.grid_height, scene.resolution),
        records_(scene),
        oracle_(make_oracle(scene, params.noisy_oracle, params.seed,
                            params.oracle_jitter_sigma)),
        rng_(mix_seed(params.seed, 0xA551)) {
    if (params_.mode_policy == ModePolicy::Frozen) {
      if (params_.frozen_modes.size() != scene.robot_starts.size())
        throw ConfigError("frozen mode string must name every robot");
      for (char c : params_.frozen_modes)
        if (c != 'E' && c != 'R')
          throw ConfigError("frozen modes must be 'E' or 'R'");
    }
    states_.resize(scene.objects.size());
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      states_[i].instance_id = scene.objects[i].instance_id;
      states_[i].object_index = (int)i;
    }
    robots_.resize(scene.robot_starts.size());
    for (std::size_t i = 0; i < robots_.size(); ++i) {
      RobotState& r = robots_[i];
      r.id = (int)i;
      r.pos = {scene.robot_starts[i].x, scene.robot_starts[i].y};
      r.theta = wrap_angle(scene.robot_starts[i].theta);
      r.mode = params_.mode_policy == ModePolicy::Frozen
                   ? (params_.frozen_modes[i] == 'E' ? ScanMode::Explorer
                                                     : ScanMode::Reconstructor)
                   : ScanMode::Explorer;
    }
  }

  RunStats run() {
    for (RobotState& r : robots_) {
      ScanResult sr = initial_turnaround(
          scene_, grid_, records_, scene_.robot_starts[r.id],
          effective_profile(params_, r.mode), params_.sensor_height,
          params_.turnaround_headings);
      if (sr.newly_freed + sr.newly_occupied > 0) ++grid_version_;
    }
    wake_pending_ = true;
    schedule(0.0, EventKind::CenterWake, -1);

    while (running_) {
      if (events_.empty())
        throw DeadlockDetected("event queue drained before termination");
      SimEvent ev = events_.top();
      events_.pop();
      now_ = ev.t;
      if (now_ > params_.max_sim_time)
        throw DeadlockDetected("simulation exceeded time cap");
      switch (ev.kind) {
        case EventKind::ArriveWaypoint: handle_arrive(robots_[ev.robot]); break;
        case EventKind::ScanTick: handle_scan(robots_[ev.robot]); break;
        case EventKind::TaskDone: handle_task_done(robots_[ev.robot]); break;
        case EventKind::QueueLow: request_wake(); break;
        case EventKind::CenterWake: handle_wake(); break;
        case EventKind::Terminate: handle_terminate(); break;
      }
    }

    RunStats stats;
    stats.t_end = now_;
    stats.reason = reason_;
    stats.wakes = wakes_;
    stats.tasks_generated = tasks_generated_;
    stats.mode_switches = 0;
    for (const RobotState& r : robots_) {
      stats.tasks_completed += r.completed_explore + r.completed_reconstruct;
      stats.mode_switches += r.switches;
      stats.total_distance += r.odometer;
      stats.total_wait += r.wait_total;
      stats.total_busy += r.busy_time;
    }
    return stats;
  }

  const OccupancyGrid& grid() const { return grid_; }
  const ObservationRecords& records() const { return records_; }
  const std::vector<RobotState>& robots() const { return robots_; }
  const std::vector<ObjectScanState>& object_states() const { return states_; }
  double now() const { return now_; }

 private:
  void schedule(double t, EventKind kind, int robot) {
    events_.push({t, kind, robot, seq_++});
  }

  void emit(const std::string& kind, int robot, nlohmann::json data) {
    if (trace_) trace_->emit(now_, kind, robot, std::move(data));
  }

  const std::vector<std::uint8_t>& nav_mask() {
    if (nav_version_ != grid_version_) {
      nav_mask_ = navigation_mask(grid_, params_.robot_radius);
      nav_version_ = grid_version_;
    }
    return nav_mask_;
  }

  void apply_scan(const ScanResult& sr) {
    if (sr.newly_freed + sr.newly_occupied > 0) ++grid_version_;
  }

  bool all_idle_and_drained() const {
    for (const RobotState& r : robots_)
      if (r.busy || !r.drained()) return false;
    return true;
  }

  void request_wake() {
    if (terminate_pending_ || wake_pending_) return;
    if (params_.scheduling == Scheduling::TaskFlow) {
      wake_pending_ = true;
      schedule(std::max(now_, last_wake_ + params_.wake_cooldown),
               EventKind::CenterWake, -1);
    } else {
      if (!all_idle_and_drained()) return;
      wake_pending_ = true;
      schedule(now_, EventKind::CenterWake, -1);
    }
  }

  void terminate(const std::string& reason) {
    if (terminate_pending_) return;
    terminate_pending_ = true;
    reason_ = reason;
    schedule(now_, EventKind::Terminate, -1);
  }

  // --- task generation -----------------------------------------------------

  void refresh_states() {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      const auto& rec = records_.objects[i];
      if (rec.observed_total == 0) continue;
      if (!states_[i].completion.points.empty() &&
          states_[i].refreshed_at == rec.recon_total)
        continue;
      refresh_scan_state(states_[i], scene_.objects[i], rec, *oracle_,
                         params_.completion_points);
    }
  }

  std::vector<ExplorationTask> generate_exploration() {
    std::vector<ExplorationTask> tasks;
    std::vector<Cell> frontiers = extract_frontiers(
        grid_, params_.frontier_max, params_.frontier_spacing_cells);
    if (frontiers.empty()) return tasks;
    std::vector<Cell> robot_cells;
    for (const RobotState& r : robots_)
      robot_cells.push_back(grid_.world_to_cell(r.pos));
    SensorProfile exp_profile = effective_profile(params_, ScanMode::Explorer);
    const double d_max = std::min(params_.view_d_max, exp_profile.range);
    const auto& mask = nav_mask();

    std::vector<std::uint8_t> pending_reveals(grid_.size(), 0);
    std::vector<ExplorationTask> pending_views;
    for (const RobotState& r : robots_) {
      for (std::size_t i = r.next_index; i < r.queue.size(); ++i) {
        if (r.queue[i].mode != ScanMode::Explorer) continue;
        pending_reveals[grid_.index(r.queue[i].exp.reveal)] = 1;
        pending_views.push_back(r.queue[i].exp);
      }
    }

    std::vector<CandidateViewpoint> cands =
        generate_candidates(grid_, mask, frontiers, robot_cells,
                            params_.view_d_min, d_max,
                            params_.validity_paper_sign, &pending_reveals);
    tasks = select_exploration_viewpoints(grid_, cands, frontiers,
                                          params_.viewpoints_per_round,
                                          exp_profile.fov, d_max,
                                          &pending_views);
    return tasks;
  }

  void handle_wake() {
    wake_pending_ = false;
    last_wake_ = now_;
    ++wakes_;
    if (terminate_pending_) return;

    refresh_states();
    std::vector<ExplorationTask> exp = generate_exploration();
    SensorProfile recon_profile =
        effective_profile(params_, ScanMode::Reconstructor);
    ArmEnvelope arm{params_.arm_z_min, params_.arm_z_max, params_.arm_radius};
    std::vector<int> busy_instances;
    for (const RobotState& r : robots_)
      for (std::size_t i = r.next_index; i < r.queue.size(); ++i)
        if (r.queue[i].mode == ScanMode::Reconstructor)
          busy_instances.push_back(r.queue[i].rec.target_instance);
    std::vector<ReconstructionTask> rec = generate_reconstruction_tasks(
        states_, grid_, nav_mask(), scene_, recon_profile, arm, params_,
        &busy_instances);

    if (exp.empty() && rec.empty()) {
      if (all_idle_and_drained()) {
        terminate("complete");
      }
      return;
    }

    // Assemble the joint task list and robot end nodes.
    std::vector<QueuedTask> pool;
    std::vector<TaskRef> refs;
    for (ExplorationTask& t : exp) {
      QueuedTask qt;
      qt.id = next_task_id_++;
      qt.mode = ScanMode::Explorer;
      t.id = qt.id;
      qt.exp = t;
      TaskRef ref;
      ref.id = qt.id;
      ref.mode = qt.mode;
      ref.cell = t.cell;
      ref.pos = grid_.cell_center(t.cell);
      pool.push_back(qt);
      refs.push_back(ref);
    }
    for (ReconstructionTask& t : rec) {
      QueuedTask qt;
      qt.id = next_task_id_++;
      qt.mode = ScanMode::Reconstructor;
      t.id = qt.id;
      qt.rec = t;
      TaskRef ref;
      ref.id = qt.id;
      ref.mode = qt.mode;
      ref.cell = t.base_cell;
      ref.pos = grid_.cell_center(t.base_cell);
      pool.push_back(qt);
      refs.push_back(ref);
    }

    std::vector<RobotContext> contexts;
    for (const RobotState& r : robots_) {
      RobotContext c;
      c.id = r.id;
      c.rest_load = (int)(r.queue.size() - r.next_index);
      if (!r.drained()) {
        const QueuedTask& last = r.queue.back();
        c.mode = last.mode;
        c.end_cell = last.mode == ScanMode::Explorer ? last.exp.cell
                                                     : last.rec.base_cell;
      } else {
        c.mode = r.mode;
        c.end_cell = grid_.world_to_cell(r.pos);
      }
      c.end_pos = grid_.cell_center(c.end_cell);
      contexts.push_back(c);
    }

    TaskGraph graph = build_graph(refs, contexts, grid_.width(),
                                  grid_.height(), nav_mask(),
                                  grid_.resolution());
    ModeSpeeds speeds{effective_profile(params_, ScanMode::Explorer).speed,
                      effective_profile(params_, ScanMode::Reconstructor).speed};
    std::vector<ScanMode> frozen;
    if (params_.mode_policy == ModePolicy::Frozen)
      for (char ch : params_.frozen_modes)
        frozen.push_back(ch == 'E' ? ScanMode::Explorer
                                   : ScanMode::Reconstructor);
    SolveResult sol = solve_graph(
        graph, rng_, params_, speeds,
        params_.mode_policy == ModePolicy::Frozen ? &frozen : nullptr);

    int appended = 0;
    for (std::size_t r = 0; r < robots_.size(); ++r)
      for (int ti : sol.routes[r]) {
        robots_[r].queue.push_back(pool[ti]);
        ++appended;
      }
    tasks_generated_ += appended;
    emit("assign", -1,
         {{"generated", (int)pool.size()},
          {"appended", appended},
          {"dropped", (int)sol.dropped.size()},
          {"unplaced", (int)sol.unplaced.size()}});

    for (RobotState& r : robots_)
      if (!r.busy && !r.drained()) execute_next(r);

    // Nothing actually started anywhere: either nothing was appended or
    // every appended task failed pathing. Re-poll after the cooldown, and if
    // two such rounds see zero observation progress, give up loudly.
    if (all_idle_and_drained()) {
      if (records_.revision == barren_revision_) {
        emit("warning", -1, {{"reason", "no executable tasks"}});
        terminate("stalled");
        return;
      }
      barren_revision_ = records_.revision;
      wake_pending_ = true;
      schedule(now_ + params_.wake_cooldown, EventKind::CenterWake, -1);
      return;
    }
    // Idle robots that received nothing re-poll once the cooldown passes.
    if (params_.scheduling == Scheduling::TaskFlow)
      for (const RobotState& r : robots_)
        if (!r.busy && r.drained()) {
          request_wake();
          break;
        }
  }

  // --- task execution ------------------------------------------------------

  bool build_plan(RobotState& r, const QueuedTask& qt) {
    const auto& mask = nav_mask();
    Cell start = grid_.world_to_cell(r.pos);
    if (!grid_.in_bounds(start)) return false;
    if (!mask[grid_.index(start)] &&
        !nearest_navigable(grid_.width(), grid_.height(), mask, r.pos,
                           4.0 * params_.robot_radius, grid_.resolution(),
                           start))
      return false;

    Cell target;
    ReconstructionTask rec = qt.rec;
    if (qt.mode == ScanMode::Explorer) {
      target = qt.exp.cell;
    } else {
      if (!nearest_navigable(grid_.width(), grid_.height(), mask,
                             {rec.x, rec.y}, params_.arm_radius,
                             grid_.resolution(), target))
        return false;
      rec.base_cell = target;
    }

    std::vector<Cell> path;
    double dist = astar_distance(grid_.width(), grid_.height(), mask, start,
                                 target, grid_.resolution(), &path);
    if (dist >= kUnreachable) return false;

    const bool needs_switch = qt.mode != r.mode;
    const SensorProfile profile = effective_profile(params_, qt.mode);
    double t = now_ + (needs_switch ? params_.mode_switch_time : 0.0);

    r.plan.clear();
    r.plan_cursor = 0;
    Vec2 cur = r.pos;
    double since_scan = 0.0;
    for (const Cell& c : path) {
      Vec2 wp = grid_.cell_center(c);
      Vec2 diff = wp - cur;
      double leg = diff.norm();
      if (leg < 1e-12) continue;
      t += leg / profile.speed;
      double heading = wrap_angle(std::atan2(diff.y, diff.x));
      r.plan.push_back({t, EventKind::ArriveWaypoint, wp, heading, leg});
      if (qt.mode == ScanMode::Explorer) {
        since_scan += leg;
        if (since_scan >= params_.scan_interval - 1e-12) {
          r.plan.push_back({t, EventKind::ScanTick, wp, heading, 0.0});
          since_scan -= params_.scan_interval;
        }
      }
      cur = wp;
    }
    if (qt.mode == ScanMode::Explorer) {
      r.plan.push_back(
          {t, EventKind::ScanTick, cur, wrap_angle(qt.exp.theta), 0.0});
      r.plan.push_back(
          {t, EventKind::TaskDone, cur, wrap_angle(qt.exp.theta), 0.0});
    } else {
      t += params_.recon_scan_time;
      r.plan.push_back({t, EventKind::TaskDone, cur, r.theta, 0.0});
      r.queue[r.next_index].rec = rec;  // remember the recomputed base
    }

    if (needs_switch) {
      r.mode = qt.mode;
      ++r.switches;
    }
    for (const PlanStep& s : r.plan) schedule(s.t, s.kind, r.id);
    return true;
  }

  void execute_next(RobotState& r) {
    while (!r.drained()) {
      const QueuedTask& qt = r.queue[r.next_index];
      if (build_plan(r, qt)) {
        if (!r.busy) {
          r.wait_total += now_ - r.wait_since;
          r.busy = true;
        }
        r.task_started_at = now_;
        r.revision_at_start = records_.revision;
        if (r.next_index + 1 == r.queue.size())
          schedule(now_, EventKind::QueueLow, r.id);
        return;
      }
      emit("warning", r.id, {{"reason", "unreachable task"}, {"task", qt.id}});
      ++r.next_index;
    }
    if (r.busy) {
      r.busy = false;
      r.wait_since = now_;
    }
    schedule(now_, EventKind::QueueLow, r.id);
  }

  void handle_arrive(RobotState& r) {
    const PlanStep& s = r.plan[r.plan_cursor++];
    r.pos = s.pos;
    r.theta = s.theta;
    r.odometer += s.leg;
    emit("arrive_waypoint", r.id, {{"x", s.pos.x}, {"y", s.pos.y}});
  }

  void handle_scan(RobotState& r) {
    const PlanStep& s = r.plan[r.plan_cursor++];
    r.theta = s.theta;
    SensorPose pose{r.pos.x, r.pos.y, params_.sensor_height, r.theta, 0.0};
    ScanResult sr = raycast_scan(scene_, grid_, records_, pose,
                                 effective_profile(params_, r.mode), false);
    apply_scan(sr);
    emit("scan", r.id,
         {{"new_cells", (int)(sr.newly_freed + sr.newly_occupied)}});
  }

  void handle_task_done(RobotState& r) {
    const PlanStep& s = r.plan[r.plan_cursor++];
    r.pos = s.pos;
    const QueuedTask& qt = r.queue[r.next_index];

    nlohmann::json data{{"task", qt.id},
                        {"mode", to_string(qt.mode)},
                        {"x", r.pos.x},
                        {"y", r.pos.y}};
    if (qt.mode == ScanMode::Explorer) {
      ++r.completed_explore;
    } else {
      const ReconstructionTask& task = qt.rec;
      int oi = -1;
      for (std::size_t i = 0; i < scene_.objects.size(); ++i)
        if (scene_.objects[i].instance_id == task.target_instance) {
          oi = (int)i;
          break;
        }
      auto& rec_counts = records_.objects[oi];
      const double pts = (double)scene_.objects[oi].points.size();
      const double before = pts > 0.0 ? rec_counts.recon_total / pts : 0.0;
      SensorPose pose{task.x, task.y, task.z, task.theta, task.phi};
      ScanResult sr =
          raycast_scan(scene_, grid_, records_, pose,
                       effective_profile(params_, ScanMode::Reconstructor),
                       true);
      apply_scan(sr);
      const double after = pts > 0.0 ? rec_counts.recon_total / pts : 0.0;
      std::size_t spheres = states_[oi].blacklist.size();
      update_history(states_[oi], {task.x, task.y, task.z}, after - before,
                     params_.blacklist_radius, params_.blacklist_min_gain);
      if (states_[oi].blacklist.size() > spheres) {
        const BlacklistSphere& b = states_[oi].blacklist.back();
        emit("blacklist", r.id,
             {{"object", task.target_instance},
              {"x", b.center.x},
              {"y", b.center.y},
              {"z", b.center.z},
              {"radius", b.radius}});
      }
      data["object"] = task.target_instance;
      data["gain"] = after - before;
      ++r.completed_reconstruct;
    }
    r.busy_time += now_ - r.task_started_at;
    emit("task_done", r.id, data);

    if (records_.revision == r.revision_at_start) {
      if (++futile_streak_ >= std::max<int>(12, 3 * (int)robots_.size())) {
        emit("warning", -1, {{"reason", "no observation progress"}});
        terminate("stalled");
      }
    } else {
      futile_streak_ = 0;
    }

    ++r.next_index;
    if (!terminate_pending_) {
      r.busy = false;  // execute_next re-marks and settles wait accounting
      r.wait_since = now_;
      execute_next(r);
    } else {
      r.busy = false;
      r.wait_since = now_;
    }
  }

  void handle_terminate() {
    running_ = false;
    for (RobotState& r : robots_) {
      if (r.busy) {
        r.busy_time += now_ - r.task_started_at;
        r.busy = false;
      } else {
        r.wait_total += now_ - r.wait_since;
      }
      r.wait_since = now_;
    }
    emit("terminate", -1,
         {{"reason", reason_},
          {"width", grid_.width()},
          {"height", grid_.height()},
          {"grid_rle", encode_grid_rle(grid_)}});
  }

  const SceneModel& scene_;
  Params params_;
  TraceWriter* trace_;
  OccupancyGrid grid_;
  ObservationRecords records_;
  std::unique_ptr<CompletionOracle> oracle_;
  Rng rng_;
  std::vector<RobotState> robots_;
  std::vector<ObjectScanState> states_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventAfter> events_;
  std::vector<std::uint8_t> nav_mask_;
  std::uint64_t nav_version_ = (std::uint64_t)-1;
  std::uint64_t grid_version_ = 0;
  double now_ = 0.0;
  double last_wake_ = -1e18;
  std::uint64_t seq_ = 0;
  int next_task_id_ = 0;
  bool wake_pending_ = false;
  bool terminate_pending_ = false;
  bool running_ = true;
  int wakes_ = 0;
  int tasks_generated_ = 0;
  int futile_streak_ = 0;
  std::uint64_t barren_revision_ = (std::uint64_t)-1;
  std::string reason_;
};

}  // namespace autoscan
