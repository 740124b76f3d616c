#pragma once

#include <cmath>

namespace motrl {

// Axis-aligned box in corner form (x1, y1) top-left, (x2, y2) bottom-right.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }

  friend bool operator==(const BBox&, const BBox&) = default;
};

// Top-left corner plus size, the MOTChallenge storage layout.
struct BBoxXYWH {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BBoxXYWH&, const BBoxXYWH&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Per-frame displacement of a box center.
struct MotionVector {
  double dx = 0.0;
  double dy = 0.0;

  double norm() const noexcept { return std::hypot(dx, dy); }
  double dot(const MotionVector& o) const noexcept { return dx * o.dx + dy * o.dy; }
};

inline MotionVector operator-(const Point& a, const Point& b) noexcept {
  return {a.x - b.x, a.y - b.y};
}

bool is_valid(const BBox& b) noexcept;
bool is_valid(const BBoxXYWH& b) noexcept;

// Both conversions throw InputError on invalid input.
BBox xywh_to_xyxy(const BBoxXYWH& b);
BBoxXYWH xyxy_to_xywh(const BBox& b);

Point center(const BBox& b) noexcept;
double diagonal(const BBox& b) noexcept;

/// Intersection over union in [0, 1]. Two boxes whose union has zero area
/// score 0 rather than 0/0.
double iou(const BBox& a, const BBox& b) noexcept;

/// Mean absolute difference over the four corner coordinates.
double mean_l1(const BBox& a, const BBox& b) noexcept;

double euclidean(const Point& p, const Point& q) noexcept;

// Closed on every side: points on the border are inside.
bool point_in_box(const Point& p, const BBox& b) noexcept;

BBox translated(const BBox& b, double dx, double dy) noexcept;
BBox scaled(const BBox& b, double factor) noexcept;

}  // namespace motrl
