#pragma once

#include <map>
#include <vector>

#include "motrl/geometry.hpp"

namespace motrl {

// Boxes of one identity keyed by frame index; std::map keeps frames ordered.
struct Trajectory {
  long long object_id = 0;
  std::map<long long, BBox> boxes;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Frames present in both trajectories, ascending.
std::vector<long long> common_frames(const Trajectory& a, const Trajectory& b);

}  // namespace motrl
