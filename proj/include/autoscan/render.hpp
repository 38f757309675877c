#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "autoscan/scene.hpp"
#include "autoscan/trace.hpp"

namespace autoscan {

namespace detail {

inline const char* robot_color(int robot) {
  static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  if (robot < 0) return "#333333";
  return palette[robot % 8];
}

}  // namespace detail

/// Overhead SVG of a finished run: final belief grid, ground-truth object
/// footprints, per-robot travel polylines, task completion markers, and
/// blacklisted regions. Everything is derived from the scene plus the event
/// log alone.
inline std::string render_svg(const SceneModel& scene,
                              const std::vector<TraceEvent>& events) {
  const double scale = 60.0;  // px per meter
  const double w_px = scene.width_m() * scale;
  const double h_px = scene.height_m() * scale;
  auto px = [&](double x) { return x * scale; };
  auto py = [&](double y) { return h_px - y * scale; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_px
      << "\" height=\"" << h_px << "\" viewBox=\"0 0 " << w_px << " " << h_px
      << "\">\n";
  svg << "<rect width=\"" << w_px << "\" height=\"" << h_px
      << "\" fill=\"#c8c8c8\"/>\n";

  // Final belief grid, if the trace carries one.
  const double cell_px = scene.resolution * scale;
  for (const TraceEvent& e : events) {
    if (e.kind != "terminate" || !e.data.contains("grid_rle")) continue;
    std::vector<CellState> cells = decode_grid_rle(
        e.data["grid_rle"].get<std::string>(),
        (std::size_t)scene.grid_width * scene.grid_height);
    for (int y = 0; y < scene.grid_height; ++y)
      for (int x = 0; x < scene.grid_width; ++x) {
        CellState s = cells[scene.index({x, y})];
        if (s == CellState::Unknown) continue;
        const char* fill = s == CellState::Free ? "#ffffff" : "#404040";
        svg << "<rect x=\"" << px(x * scene.resolution) << "\" y=\""
            << py((y + 1) * scene.resolution) << "\" width=\"" << cell_px
            << "\" height=\"" << cell_px << "\" fill=\"" << fill << "\"/>\n";
      }
  }

  // Ground-truth object footprints.
  for (const GroundTruthObject& obj : scene.objects)
    for (const Cell& c : obj.footprint_cells)
      svg << "<rect x=\"" << px(c.x * scene.resolution) << "\" y=\""
          << py((c.y + 1) * scene.resolution) << "\" width=\"" << cell_px
          << "\" height=\"" << cell_px
          << "\" fill=\"#b8860b\" fill-opacity=\"0.55\"/>\n";

  // Travel polylines.
  int max_robot = -1;
  for (const TraceEvent& e : events) max_robot = std::max(max_robot, e.robot);
  for (int r = 0; r <= max_robot; ++r) {
    std::ostringstream pts;
    if (r < (int)scene.robot_starts.size())
      pts << px(scene.robot_starts[r].x) << "," << py(scene.robot_starts[r].y)
          << " ";
    for (const TraceEvent& e : events) {
      if (e.robot != r || e.kind != "arrive_waypoint") continue;
      pts << px(e.data["x"].get<double>()) << ","
          << py(e.data["y"].get<double>()) << " ";
    }
    std::string s = pts.str();
    if (s.empty()) continue;
    svg << "<polyline points=\"" << s << "\" fill=\"none\" stroke=\""
        << detail::robot_color(r) << "\" stroke-width=\"1.5\" "
        << "stroke-opacity=\"0.8\"/>\n";
  }

  // Task completions and blacklist regions.
  for (const TraceEvent& e : events) {
    if (e.kind == "task_done") {
      bool recon = e.data.value("mode", "") == "reconstructor";
      svg << "<circle cx=\"" << px(e.data["x"].get<double>()) << "\" cy=\""
          << py(e.data["y"].get<double>()) << "\" r=\"" << (recon ? 4 : 3)
          << "\" fill=\"" << (recon ? "none" : detail::robot_color(e.robot))
          << "\" stroke=\"" << detail::robot_color(e.robot)
          << "\" stroke-width=\"1.5\"/>\n";
    } else if (e.kind == "blacklist") {
      svg << "<circle cx=\"" << px(e.data["x"].get<double>()) << "\" cy=\""
          << py(e.data["y"].get<double>()) << "\" r=\""
          << e.data["radius"].get<double>() * scale
          << "\" fill=\"none\" stroke=\"#cc0000\" stroke-width=\"1.5\" "
          << "stroke-dasharray=\"4 3\"/>\n";
    }
  }

  // Start markers.
  for (std::size_t r = 0; r < scene.robot_starts.size(); ++r)
    svg << "<rect x=\"" << px(scene.robot_starts[r].x) - 4 << "\" y=\""
        << py(scene.robot_starts[r].y) - 4
        << "\" width=\"8\" height=\"8\" fill=\"" << detail::robot_color((int)r)
        << "\" stroke=\"#000\"/>\n";

  for (const TraceEvent& e : events)
    if (e.kind == "terminate")
      svg << "<text x=\"6\" y=\"16\" font-family=\"monospace\" font-size=\""
          << "13\">t=" << e.t << "s " << e.data.value("reason", "")
          << "</text>\n";

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace autoscan
