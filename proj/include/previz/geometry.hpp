#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "previz/errors.hpp"

// Planar scene geometry. Conventions used throughout:
//   - x grows to the right, y grows upward in top view, z is height.
//   - yaw is measured in radians, counter-clockwise from +x.
//   - facing(yaw) = (cos yaw, sin yaw); an object's depth extends along its
//     facing axis, its width extends along the perpendicular.
namespace previz {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2& o) const = default;

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
  Vec2 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Vec3& o) const = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{0.0, 0.0, 0.0};
  }
};

// Wraps an angle into [0, 2pi).
inline double normalize_yaw(double a) {
  if (!std::isfinite(a)) throw Error(ErrorCode::invalid_input, "normalize_yaw: non-finite angle");
  double r = a - kTwoPi * std::floor(a / kTwoPi);
  if (r >= kTwoPi) r -= kTwoPi;  // guard against rounding at the seam
  if (r < 0.0) r += kTwoPi;
  return r;
}

inline Vec2 facing_dir(double yaw) { return {std::cos(yaw), std::sin(yaw)}; }

// Signed smallest difference a-b wrapped into (-pi, pi].
inline double angle_diff(double a, double b) {
  double d = normalize_yaw(a - b);
  if (d > std::numbers::pi) d -= kTwoPi;
  return d;
}

// Axis-aligned rectangle, min/max corners.
struct Rect {
  Vec2 min;
  Vec2 max;

  double width() const { return max.x - min.x; }
  double depth() const { return max.y - min.y; }
  double area() const { return width() * depth(); }
  Vec2 center() const { return {(min.x + max.x) * 0.5, (min.y + max.y) * 0.5}; }
  bool contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  // Distance from an interior point to the nearest edge (negative outside).
  double inner_distance(const Vec2& p) const {
    return std::min(std::min(p.x - min.x, max.x - p.x), std::min(p.y - min.y, max.y - p.y));
  }
};

// Oriented footprint rectangle. half_depth extends along facing(yaw),
// half_width along the perpendicular.
struct Obb {
  Vec2 center;
  double yaw = 0.0;
  double half_depth = 0.0;
  double half_width = 0.0;

  static Obb from_dims(Vec2 center, double yaw, double width, double depth) {
    return {center, yaw, depth * 0.5, width * 0.5};
  }

  // Local frame: u along facing (depth axis), v along left-perpendicular.
  Vec2 to_local(const Vec2& p) const {
    Vec2 d = p - center;
    double c = std::cos(yaw), s = std::sin(yaw);
    return {d.x * c + d.y * s, -d.x * s + d.y * c};
  }
  Vec2 to_world(const Vec2& local) const {
    double c = std::cos(yaw), s = std::sin(yaw);
    return {center.x + local.x * c - local.y * s, center.y + local.x * s + local.y * c};
  }

  bool contains(const Vec2& p) const {
    Vec2 l = to_local(p);
    return std::abs(l.x) <= half_depth && std::abs(l.y) <= half_width;
  }

  // Euclidean distance from p to the rectangle (0 when inside).
  double distance(const Vec2& p) const {
    Vec2 l = to_local(p);
    double dx = std::max(std::abs(l.x) - half_depth, 0.0);
    double dy = std::max(std::abs(l.y) - half_width, 0.0);
    return std::sqrt(dx * dx + dy * dy);
  }

  std::array<Vec2, 4> corners() const {
    return {to_world({half_depth, half_width}), to_world({half_depth, -half_width}),
            to_world({-half_depth, -half_width}), to_world({-half_depth, half_width})};
  }

  Rect aabb() const {
    auto cs = corners();
    Rect r{cs[0], cs[0]};
    for (const auto& c : cs) {
      r.min.x = std::min(r.min.x, c.x);
      r.min.y = std::min(r.min.y, c.y);
      r.max.x = std::max(r.max.x, c.x);
      r.max.y = std::max(r.max.y, c.y);
    }
    return r;
  }

  bool inside(const Rect& bounds) const {
    for (const auto& c : corners())
      if (!bounds.contains(c)) return false;
    return true;
  }
};

namespace detail {
inline void project(const Obb& b, const Vec2& axis, double& lo, double& hi) {
  auto cs = b.corners();
  lo = hi = cs[0].dot(axis);
  for (const auto& c : cs) {
    double v = c.dot(axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}
}  // namespace detail

// Positive-area overlap test (separating axes). Rectangles that merely share
// an edge do not count as intersecting.
inline bool obb_intersects(const Obb& a, const Obb& b, double eps = 1e-9) {
  const Vec2 axes[4] = {facing_dir(a.yaw),
                        {-std::sin(a.yaw), std::cos(a.yaw)},
                        facing_dir(b.yaw),
                        {-std::sin(b.yaw), std::cos(b.yaw)}};
  for (const auto& axis : axes) {
    double alo, ahi, blo, bhi;
    detail::project(a, axis, alo, ahi);
    detail::project(b, axis, blo, bhi);
    if (std::min(ahi, bhi) - std::max(alo, blo) <= eps) return false;
  }
  return true;
}

// Distance between two footprint rectangles (0 when overlapping or touching).
inline double obb_distance(const Obb& a, const Obb& b) {
  if (obb_intersects(a, b, 0.0)) return 0.0;
  auto ca = a.corners();
  auto cb = b.corners();
  auto seg_dist = [](Vec2 p, Vec2 a0, Vec2 a1) {
    Vec2 d = a1 - a0;
    double len2 = d.dot(d);
    double t = len2 > 0.0 ? std::clamp((p - a0).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (p - (a0 + d * t)).norm();
  };
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, seg_dist(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, seg_dist(cb[i], ca[j], ca[(j + 1) % 4]));
    }
  return best;
}

// A footprint extruded over [z0, z1]; the solid shape of a placed object.
struct Box3 {
  Obb footprint;
  double z0 = 0.0;
  double z1 = 0.0;

  bool contains(const Vec3& p) const {
    return p.z >= z0 && p.z <= z1 && footprint.contains({p.x, p.y});
  }

  // Segment test, inclusive of boundary grazes (conservative for occlusion).
  bool intersects_segment(const Vec3& a, const Vec3& b) const {
    double c = std::cos(footprint.yaw), s = std::sin(footprint.yaw);
    auto local = [&](const Vec3& p) -> Vec3 {
      double dx = p.x - footprint.center.x, dy = p.y - footprint.center.y;
      return {dx * c + dy * s, -dx * s + dy * c, p.z};
    };
    Vec3 la = local(a), lb = local(b);
    Vec3 d = lb - la;
    double tmin = 0.0, tmax = 1.0;
    const double lo[3] = {-footprint.half_depth, -footprint.half_width, z0};
    const double hi[3] = {footprint.half_depth, footprint.half_width, z1};
    const double o[3] = {la.x, la.y, la.z};
    const double dir[3] = {d.x, d.y, d.z};
    for (int i = 0; i < 3; ++i) {
      if (std::abs(dir[i]) < 1e-12) {
        if (o[i] < lo[i] || o[i] > hi[i]) return false;
      } else {
        double t1 = (lo[i] - o[i]) / dir[i];
        double t2 = (hi[i] - o[i]) / dir[i];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
        if (tmin > tmax) return false;
      }
    }
    return true;
  }
};

}  // namespace previz
