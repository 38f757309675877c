#pragma once

#include <cstdint>
#include <string>

#include "autoscan/geometry.hpp"

namespace autoscan {

enum class ScanMode : std::uint8_t { Explorer = 0, Reconstructor = 1 };

inline const char* to_string(ScanMode m) {
  return m == ScanMode::Explorer ? "explorer" : "reconstructor";
}

/// A 2D scan pose for an Explorer: stand at (x,y), face theta, sweep the
/// head sensor toward the frontier that motivated the viewpoint.
struct ExplorationTask {
  int id = -1;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;   // [0, 2*pi)
  Cell cell;            // grid cell of (x,y)
  Cell target_frontier; // representative frontier this viewpoint serves
  Cell reveal;          // unknown cell the final scan will uncover
};

/// A 5-DOF arm viewpoint for a Reconstructor: camera at (x,y,z), yaw theta,
/// pitch phi, aimed at an incomplete surface point of `target_instance`.
struct ReconstructionTask {
  int id = -1;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;  // [0, 2*pi)
  double phi = 0.0;    // [-pi/2, pi/2]
  int target_instance = -1;
  Vec3 source_point;   // the surface point the view was generated for
  Cell base_cell;      // navigable cell the robot parks on (graph node)
};

/// Assignment-facing view of a task: position used for travel distances plus
/// the mode required to execute it.
struct TaskRef {
  int id = -1;
  ScanMode mode = ScanMode::Explorer;
  Cell cell;       // graph node cell (task cell or recon base cell)
  Vec2 pos;        // continuous position used by centroid approximations
};

}  // namespace autoscan
