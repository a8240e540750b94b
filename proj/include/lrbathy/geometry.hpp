#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace lrb {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Closed axis-aligned rectangle in the (u,v) parameter plane.
struct Box {
  double umin = 0.0;
  double umax = 0.0;
  double vmin = 0.0;
  double vmax = 0.0;

  double width() const { return umax - umin; }
  double height() const { return vmax - vmin; }
  double area() const { return width() * height(); }
  double center_u() const { return 0.5 * (umin + umax); }
  double center_v() const { return 0.5 * (vmin + vmax); }

  bool contains(double u, double v) const {
    return u >= umin && u <= umax && v >= vmin && v <= vmax;
  }
  bool contains(const Box& o) const {
    return o.umin >= umin && o.umax <= umax && o.vmin >= vmin && o.vmax <= vmax;
  }
  /// True when the open interiors intersect.
  bool interior_overlaps(const Box& o) const {
    return umin < o.umax && o.umin < umax && vmin < o.vmax && o.vmin < vmax;
  }
  bool closed_overlaps(const Box& o) const {
    return umin <= o.umax && o.umin <= umax && vmin <= o.vmax && o.vmin <= vmax;
  }

  Box expanded(double du, double dv) const { return {umin - du, umax + du, vmin - dv, vmax + dv}; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Intersection of two boxes; empty (negative extent) boxes are clamped to zero area.
inline Box intersect(const Box& a, const Box& b) {
  Box r{std::max(a.umin, b.umin), std::min(a.umax, b.umax), std::max(a.vmin, b.vmin),
        std::min(a.vmax, b.vmax)};
  if (r.umax < r.umin) r.umax = r.umin;
  if (r.vmax < r.vmin) r.vmax = r.vmin;
  return r;
}

inline bool boxes_intersect(const Box& a, const Box& b) {
  return a.umin <= b.umax && b.umin <= a.umax && a.vmin <= b.vmax && b.vmin <= a.vmax;
}

/// Bounding box of the x,y coordinates of a point set. Empty input gives an all-zero box.
inline Box bounding_box(std::span<const Point3> pts) {
  if (pts.empty()) return {};
  Box b{pts[0].x, pts[0].x, pts[0].y, pts[0].y};
  for (const auto& p : pts) {
    b.umin = std::min(b.umin, p.x);
    b.umax = std::max(b.umax, p.x);
    b.vmin = std::min(b.vmin, p.y);
    b.vmax = std::max(b.vmax, p.y);
  }
  return b;
}

}  // namespace lrb
