#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "autoscan/geometry.hpp"

namespace autoscan {

enum class Scheduling { TaskFlow, Synchronous };
enum class ModePolicy { Dynamic, Frozen };
enum class ProfileOverride { None, AllExplorer, AllReconstructor };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat parameter table. Every value has a default and can be overridden from
/// a config file (`params` object) or `--set key=value` on the command line.
struct Params {
  std::uint64_t seed = 0;

  // Sensor profiles.
  double explorer_fov = deg2rad(70.0);
  double explorer_range = 4.5;
  double explorer_speed = 1.0;
  double explorer_sigma0 = 0.002;
  double explorer_sigma1 = 0.004;
  double recon_fov = deg2rad(50.0);
  double recon_range = 1.5;
  double recon_speed = 0.25;
  double recon_sigma0 = 0.001;
  double recon_sigma1 = 0.002;
  double recon_elev_aperture = deg2rad(30.0);
  double sensor_height = 1.0;  // explorer head height [m]

  // Navigation.
  double robot_radius = 0.2;

  // Exploration task generation.
  int frontier_max = 40;
  double frontier_spacing_cells = 2.0;
  double view_d_min = 1.0;
  double view_d_max = 4.0;
  int viewpoints_per_round = 6;
  bool validity_paper_sign = false;  // score = d_r - d_f instead of d_f - d_r

  // Reconstruction task generation.
  double incompleteness_tau = 0.2;
  int completion_points = 2048;
  double cone_half_angle = deg2rad(35.0);
  double cone_view_dist = 0.8;
  int cone_samples = 12;
  double arm_z_min = 0.3;
  double arm_z_max = 1.2;
  double arm_radius = 0.9;
  double blacklist_radius = 0.5;
  double blacklist_min_gain = 0.01;
  int recon_tasks_per_object = 4;
  bool noisy_oracle = false;
  double oracle_jitter_sigma = 0.02;

  // Task assignment.
  int sa_iterations = 300;
  double sa_cooling = 0.95;
  double sa_temp_divisor = 10.0;
  double gmm_sigma = 2.0;
  double gmm_lambda_capacity = 0.5;
  int gmm_iterations = 10;
  int kmeans_iterations = 20;
  double capacity_weight = 1.0;
  int tsp_dp_limit = 12;
  double max_hop_distance = 8.0;
  int hop_check_start = 1;

  // Scheduler.
  Scheduling scheduling = Scheduling::TaskFlow;
  ModePolicy mode_policy = ModePolicy::Dynamic;
  std::string frozen_modes;  // e.g. "EEER" when mode_policy == Frozen
  ProfileOverride profile_override = ProfileOverride::None;
  double mode_switch_time = 3.0;
  double scan_interval = 1.0;
  double recon_scan_time = 4.0;
  double wake_cooldown = 1.0;
  int turnaround_headings = 8;
  double max_sim_time = 1e6;  // guard: exceeded => deadlock error

  // Metrics.
  double comp_threshold = 0.02;
  bool noise_free = false;

  void set(const std::string& key, const std::string& value);
};

namespace detail {

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("not a boolean: " + v);
}

}  // namespace detail

inline Scheduling scheduling_from_string(const std::string& v) {
  if (v == "taskflow") return Scheduling::TaskFlow;
  if (v == "synchronous") return Scheduling::Synchronous;
  throw ConfigError("unknown scheduling: " + v +
                    " (expected taskflow|synchronous)");
}

inline const char* to_string(Scheduling s) {
  return s == Scheduling::TaskFlow ? "taskflow" : "synchronous";
}

inline ModePolicy mode_policy_from_string(const std::string& v) {
  if (v == "dynamic") return ModePolicy::Dynamic;
  if (v == "frozen") return ModePolicy::Frozen;
  throw ConfigError("unknown mode_policy: " + v + " (expected dynamic|frozen)");
}

inline const char* to_string(ModePolicy p) {
  return p == ModePolicy::Dynamic ? "dynamic" : "frozen";
}

inline ProfileOverride profile_override_from_string(const std::string& v) {
  if (v == "none") return ProfileOverride::None;
  if (v == "all_explorer") return ProfileOverride::AllExplorer;
  if (v == "all_reconstructor") return ProfileOverride::AllReconstructor;
  throw ConfigError("unknown profile_override: " + v +
                    " (expected none|all_explorer|all_reconstructor)");
}

inline const char* to_string(ProfileOverride p) {
  switch (p) {
    case ProfileOverride::None: return "none";
    case ProfileOverride::AllExplorer: return "all_explorer";
    default: return "all_reconstructor";
  }
}

inline void Params::set(const std::string& key, const std::string& value) {
  static const auto parse_u64 = [](const std::string& v) {
    return (std::uint64_t)std::stoull(v);
  };
  static const auto parse_int = [](const std::string& v) {
    return std::stoi(v);
  };
  static const auto parse_dbl = [](const std::string& v) {
    return std::stod(v);
  };

  const std::map<std::string, std::function<void(Params&, const std::string&)>>
      setters = {
          {"seed", [](Params& p, const std::string& v) { p.seed = parse_u64(v); }},
          {"explorer_fov", [](Params& p, const std::string& v) { p.explorer_fov = parse_dbl(v); }},
          {"explorer_range", [](Params& p, const std::string& v) { p.explorer_range = parse_dbl(v); }},
          {"explorer_speed", [](Params& p, const std::string& v) { p.explorer_speed = parse_dbl(v); }},
          {"explorer_sigma0", [](Params& p, const std::string& v) { p.explorer_sigma0 = parse_dbl(v); }},
          {"explorer_sigma1", [](Params& p, const std::string& v) { p.explorer_sigma1 = parse_dbl(v); }},
          {"recon_fov", [](Params& p, const std::string& v) { p.recon_fov = parse_dbl(v); }},
          {"recon_range", [](Params& p, const std::string& v) { p.recon_range = parse_dbl(v); }},
          {"recon_speed", [](Params& p, const std::string& v) { p.recon_speed = parse_dbl(v); }},
          {"recon_sigma0", [](Params& p, const std::string& v) { p.recon_sigma0 = parse_dbl(v); }},
          {"recon_sigma1", [](Params& p, const std::string& v) { p.recon_sigma1 = parse_dbl(v); }},
          {"recon_elev_aperture", [](Params& p, const std::string& v) { p.recon_elev_aperture = parse_dbl(v); }},
          {"sensor_height", [](Params& p, const std::string& v) { p.sensor_height = parse_dbl(v); }},
          {"robot_radius", [](Params& p, const std::string& v) { p.robot_radius = parse_dbl(v); }},
          {"frontier_max", [](Params& p, const std::string& v) { p.frontier_max = parse_int(v); }},
          {"frontier_spacing_cells", [](Params& p, const std::string& v) { p.frontier_spacing_cells = parse_dbl(v); }},
          {"view_d_min", [](Params& p, const std::string& v) { p.view_d_min = parse_dbl(v); }},
          {"view_d_max", [](Params& p, const std::string& v) { p.view_d_max = parse_dbl(v); }},
          {"viewpoints_per_round", [](Params& p, const std::string& v) { p.viewpoints_per_round = parse_int(v); }},
          {"validity_paper_sign", [](Params& p, const std::string& v) { p.validity_paper_sign = detail::parse_bool(v); }},
          {"incompleteness_tau", [](Params& p, const std::string& v) { p.incompleteness_tau = parse_dbl(v); }},
          {"completion_points", [](Params& p, const std::string& v) { p.completion_points = parse_int(v); }},
          {"cone_half_angle", [](Params& p, const std::string& v) { p.cone_half_angle = parse_dbl(v); }},
          {"cone_view_dist", [](Params& p, const std::string& v) { p.cone_view_dist = parse_dbl(v); }},
          {"cone_samples", [](Params& p, const std::string& v) { p.cone_samples = parse_int(v); }},
          {"arm_z_min", [](Params& p, const std::string& v) { p.arm_z_min = parse_dbl(v); }},
          {"arm_z_max", [](Params& p, const std::string& v) { p.arm_z_max = parse_dbl(v); }},
          {"arm_radius", [](Params& p, const std::string& v) { p.arm_radius = parse_dbl(v); }},
          {"blacklist_radius", [](Params& p, const std::string& v) { p.blacklist_radius = parse_dbl(v); }},
          {"blacklist_min_gain", [](Params& p, const std::string& v) { p.blacklist_min_gain = parse_dbl(v); }},
          {"recon_tasks_per_object", [](Params& p, const std::string& v) { p.recon_tasks_per_object = parse_int(v); }},
          {"noisy_oracle", [](Params& p, const std::string& v) { p.noisy_oracle = detail::parse_bool(v); }},
          {"oracle_jitter_sigma", [](Params& p, const std::string& v) { p.oracle_jitter_sigma = parse_dbl(v); }},
          {"sa_iterations", [](Params& p, const std::string& v) { p.sa_iterations = parse_int(v); }},
          {"sa_cooling", [](Params& p, const std::string& v) { p.sa_cooling = parse_dbl(v); }},
          {"sa_temp_divisor", [](Params& p, const std::string& v) { p.sa_temp_divisor = parse_dbl(v); }},
          {"gmm_sigma", [](Params& p, const std::string& v) { p.gmm_sigma = parse_dbl(v); }},
          {"gmm_lambda_capacity", [](Params& p, const std::string& v) { p.gmm_lambda_capacity = parse_dbl(v); }},
          {"gmm_iterations", [](Params& p, const std::string& v) { p.gmm_iterations = parse_int(v); }},
          {"kmeans_iterations", [](Params& p, const std::string& v) { p.kmeans_iterations = parse_int(v); }},
          {"capacity_weight", [](Params& p, const std::string& v) { p.capacity_weight = parse_dbl(v); }},
          {"tsp_dp_limit", [](Params& p, const std::string& v) { p.tsp_dp_limit = parse_int(v); }},
          {"max_hop_distance", [](Params& p, const std::string& v) { p.max_hop_distance = parse_dbl(v); }},
          {"hop_check_start", [](Params& p, const std::string& v) { p.hop_check_start = parse_int(v); }},
          {"scheduling", [](Params& p, const std::string& v) { p.scheduling = scheduling_from_string(v); }},
          {"mode_policy", [](Params& p, const std::string& v) { p.mode_policy = mode_policy_from_string(v); }},
          {"frozen_modes", [](Params& p, const std::string& v) { p.frozen_modes = v; }},
          {"profile_override", [](Params& p, const std::string& v) { p.profile_override = profile_override_from_string(v); }},
          {"mode_switch_time", [](Params& p, const std::string& v) { p.mode_switch_time = parse_dbl(v); }},
          {"scan_interval", [](Params& p, const std::string& v) { p.scan_interval = parse_dbl(v); }},
          {"recon_scan_time", [](Params& p, const std::string& v) { p.recon_scan_time = parse_dbl(v); }},
          {"wake_cooldown", [](Params& p, const std::string& v) { p.wake_cooldown = parse_dbl(v); }},
          {"turnaround_headings", [](Params& p, const std::string& v) { p.turnaround_headings = parse_int(v); }},
          {"max_sim_time", [](Params& p, const std::string& v) { p.max_sim_time = parse_dbl(v); }},
          {"comp_threshold", [](Params& p, const std::string& v) { p.comp_threshold = parse_dbl(v); }},
          {"noise_free", [](Params& p, const std::string& v) { p.noise_free = detail::parse_bool(v); }},
      };

  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown parameter: " + key);
  try {
    it->second(*this, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": " + value);
  }
}

}  // namespace autoscan
