#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "autoscan/assignment.hpp"
#include "autoscan/types.hpp"

namespace autoscan {

/// Standalone assignment instance: robot end nodes (with carried loads) and
/// typed tasks, plus an optional explicit distance matrix. Without one the
/// metric is Euclidean.
///
/// {
///   "robots": [{"id": 0, "x": 1.0, "y": 2.0, "rest": 1}, ...],
///   "tasks":  [{"id": 0, "type": "explore", "x": 3.0, "y": 4.0}, ...],
///   "distances": [[0.0, ...], ...]            // optional, (R+T)^2
/// }
inline TaskGraph load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid instance JSON: " + std::string(e.what()));
  }

  std::vector<RobotContext> robots;
  for (const auto& jr : j.at("robots")) {
    RobotContext r;
    r.id = jr.value("id", (int)robots.size());
    r.end_pos = {jr.at("x").get<double>(), jr.at("y").get<double>()};
    r.rest_load = jr.value("rest", 0);
    r.mode = jr.value("mode", std::string("explorer")) == "reconstructor"
                 ? ScanMode::Reconstructor
                 : ScanMode::Explorer;
    robots.push_back(r);
  }
  if (robots.empty()) throw ParseError("instance has no robots");

  std::vector<TaskRef> tasks;
  for (const auto& jt : j.at("tasks")) {
    TaskRef t;
    t.id = jt.value("id", (int)tasks.size());
    t.pos = {jt.at("x").get<double>(), jt.at("y").get<double>()};
    std::string type = jt.at("type").get<std::string>();
    if (type == "explore")
      t.mode = ScanMode::Explorer;
    else if (type == "reconstruct")
      t.mode = ScanMode::Reconstructor;
    else
      throw ParseError("unknown task type: " + type);
    tasks.push_back(t);
  }

  TaskGraph g = build_graph_euclidean(tasks, robots);
  if (j.contains("distances")) {
    const auto& rows = j.at("distances");
    const int n = g.n_nodes();
    if ((int)rows.size() != n)
      throw ParseError("distance matrix must be (robots+tasks) square");
    for (int a = 0; a < n; ++a) {
      if ((int)rows[a].size() != n)
        throw ParseError("distance matrix must be (robots+tasks) square");
      for (int b = 0; b < n; ++b) g.d(a, b) = rows[a][b].get<double>();
    }
  }
  return g;
}

inline void save_instance(const TaskGraph& g, const std::string& path,
                          bool with_distances = false) {
  nlohmann::json j;
  j["robots"] = nlohmann::json::array();
  for (const RobotContext& r : g.robots)
    j["robots"].push_back({{"id", r.id},
                           {"x", r.end_pos.x},
                           {"y", r.end_pos.y},
                           {"rest", r.rest_load}});
  j["tasks"] = nlohmann::json::array();
  for (const TaskRef& t : g.tasks)
    j["tasks"].push_back(
        {{"id", t.id},
         {"type", t.mode == ScanMode::Explorer ? "explore" : "reconstruct"},
         {"x", t.pos.x},
         {"y", t.pos.y}});
  if (with_distances) {
    const int n = g.n_nodes();
    nlohmann::json rows = nlohmann::json::array();
    for (int a = 0; a < n; ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (int b = 0; b < n; ++b) row.push_back(g.d(a, b));
      rows.push_back(row);
    }
    j["distances"] = rows;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace autoscan
