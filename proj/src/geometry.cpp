#include "motrl/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "motrl/error.hpp"

namespace motrl {

bool is_valid(const BBox& b) noexcept {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
         std::isfinite(b.y2) && b.x1 <= b.x2 && b.y1 <= b.y2;
}

bool is_valid(const BBoxXYWH& b) noexcept {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) &&
         std::isfinite(b.h) && b.w >= 0.0 && b.h >= 0.0;
}

BBox xywh_to_xyxy(const BBoxXYWH& b) {
  if (!is_valid(b)) {
    throw InputError("xywh box must be finite with nonnegative width and height");
  }
  return {b.x, b.y, b.x + b.w, b.y + b.h};
}

BBoxXYWH xyxy_to_xywh(const BBox& b) {
  if (!is_valid(b)) {
    throw InputError("corner box must be finite with x1 <= x2 and y1 <= y2");
  }
  return {b.x1, b.y1, b.x2 - b.x1, b.y2 - b.y1};
}

Point center(const BBox& b) noexcept {
  return {(b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0};
}

double diagonal(const BBox& b) noexcept { return std::hypot(b.width(), b.height()); }

double iou(const BBox& a, const BBox& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) {
    return 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

double mean_l1(const BBox& a, const BBox& b) noexcept {
  return (std::abs(a.x1 - b.x1) + std::abs(a.y1 - b.y1) + std::abs(a.x2 - b.x2) +
          std::abs(a.y2 - b.y2)) /
         4.0;
}

double euclidean(const Point& p, const Point& q) noexcept {
  return std::hypot(p.x - q.x, p.y - q.y);
}

bool point_in_box(const Point& p, const BBox& b) noexcept {
  return b.x1 <= p.x && p.x <= b.x2 && b.y1 <= p.y && p.y <= b.y2;
}

BBox translated(const BBox& b, double dx, double dy) noexcept {
  return {b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy};
}

BBox scaled(const BBox& b, double factor) noexcept {
  return {b.x1 * factor, b.y1 * factor, b.x2 * factor, b.y2 * factor};
}

}  // namespace motrl
