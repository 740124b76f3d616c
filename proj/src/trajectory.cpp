#include "motrl/trajectory.hpp"

namespace motrl {

std::vector<long long> common_frames(const Trajectory& a, const Trajectory& b) {
  std::vector<long long> out;
  auto ia = a.boxes.begin();
  auto ib = b.boxes.begin();
  while (ia != a.boxes.end() && ib != b.boxes.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      out.push_back(ia->first);
      ++ia;
      ++ib;
    }
  }
  return out;
}

}  // namespace motrl
