#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "voxnav/geometry.hpp"

// Gravity-aligned oriented boxes and cuboid room layouts, plus the polygon
// geometry needed to intersect them. Boxes rotate about z only, so 3D IoU
// reduces to 2D convex polygon intersection times a z-interval overlap.

namespace voxnav {

struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();  // x: along the yaw axis
  double yaw = 0;                    // radians about +z, in [-pi/2, pi/2)

  double volume() const { return 8 * half_extents.x() * half_extents.y() * half_extents.z(); }

  /// Footprint corners in world xy, counter-clockwise.
  std::array<Eigen::Vector2d, 4> footprint() const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double hx = half_extents.x(), hy = half_extents.y();
    auto rot = [&](double lx, double ly) {
      return Eigen::Vector2d(center.x() + c * lx - s * ly, center.y() + s * lx + c * ly);
    };
    return {rot(-hx, -hy), rot(hx, -hy), rot(hx, hy), rot(-hx, hy)};
  }

  double z_lo() const { return center.z() - half_extents.z(); }
  double z_hi() const { return center.z() + half_extents.z(); }

  bool contains(const Vec3& p, double tol = 0) const {
    if (p.z() < z_lo() - tol || p.z() > z_hi() + tol) return false;
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double dx = p.x() - center.x(), dy = p.y() - center.y();
    const double lx = c * dx + s * dy;  // into box frame (inverse yaw)
    const double ly = -s * dx + c * dy;
    return std::abs(lx) <= half_extents.x() + tol && std::abs(ly) <= half_extents.y() + tol;
  }

  void validate() const {
    if (!(half_extents.x() > 0) || !(half_extents.y() > 0) || !(half_extents.z() > 0))
      throw std::invalid_argument("OrientedBox: half extents must be positive");
  }
};

/// Box with semantic identity, as produced by annotation and stored as scene
/// ground truth.
struct LabeledBox {
  OrientedBox geom;
  uint16_t class_id = 0;
  int32_t instance_id = -1;
};

/// Manhattan room model: one yaw-rotated rectangle footprint with flat floor
/// and ceiling. center.z is mid-height; width runs along the yaw axis.
struct RoomLayout {
  Vec3 center = Vec3::Zero();
  double width = 0;
  double length = 0;
  double height = 0;
  double rotation = 0;  // yaw, radians

  OrientedBox as_box() const {
    OrientedBox b;
    b.center = center;
    b.half_extents = Vec3(width / 2, length / 2, height / 2);
    b.yaw = rotation;
    return b;
  }

  double floor_z() const { return center.z() - height / 2; }
  double ceiling_z() const { return center.z() + height / 2; }

  void validate() const {
    if (!(width > 0) || !(length > 0) || !(height > 0))
      throw std::invalid_argument("RoomLayout: width, length, height must be positive");
  }
};

/// Wraps an angle into [-pi/2, pi/2), the canonical range for yaw-only boxes
/// (a box is unchanged by a half turn, so yaw is only defined mod pi).
inline double canonical_yaw(double yaw) {
  double y = std::fmod(yaw, M_PI);
  if (y >= M_PI / 2) y -= M_PI;
  if (y < -M_PI / 2) y += M_PI;
  return y;
}

namespace detail {

/// Sutherland-Hodgman: clip `poly` by the half-plane left of a->b.
inline std::vector<Eigen::Vector2d> clip_half_plane(const std::vector<Eigen::Vector2d>& poly,
                                                    const Eigen::Vector2d& a,
                                                    const Eigen::Vector2d& b) {
  std::vector<Eigen::Vector2d> out;
  const size_t n = poly.size();
  auto side = [&](const Eigen::Vector2d& p) {
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
  };
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& cur = poly[i];
    const Eigen::Vector2d& nxt = poly[(i + 1) % n];
    const double sc = side(cur), sn = side(nxt);
    if (sc >= 0) out.push_back(cur);
    if ((sc > 0 && sn < 0) || (sc < 0 && sn > 0)) {
      const double t = sc / (sc - sn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

inline double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  double acc = 0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    acc += p.x() * q.y() - q.x() * p.y();
  }
  return std::abs(acc) / 2;
}

}  // namespace detail

/// Area of the intersection of two box footprints.
inline double footprint_intersection_area(const OrientedBox& a, const OrientedBox& b) {
  const auto fa = a.footprint();
  const auto fb = b.footprint();
  std::vector<Eigen::Vector2d> poly(fa.begin(), fa.end());
  for (int i = 0; i < 4 && !poly.empty(); ++i)
    poly = detail::clip_half_plane(poly, fb[i], fb[(i + 1) % 4]);
  if (poly.size() < 3) return 0;
  return detail::polygon_area(poly);
}

/// 3D IoU of two gravity-aligned boxes. Exact up to clipping arithmetic.
inline double box_iou_3d(const OrientedBox& a, const OrientedBox& b) {
  const double zo = std::min(a.z_hi(), b.z_hi()) - std::max(a.z_lo(), b.z_lo());
  if (zo <= 0) return 0;
  const double inter = footprint_intersection_area(a, b) * zo;
  if (inter <= 0) return 0;
  const double uni = a.volume() + b.volume() - inter;
  return inter / uni;
}

inline double layout_iou(const RoomLayout& a, const RoomLayout& b) {
  return box_iou_3d(a.as_box(), b.as_box());
}

}  // namespace voxnav
