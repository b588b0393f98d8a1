#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "voxnav/boxes.hpp"
#include "voxnav/geometry.hpp"

// Oriented-box fitting. Gravity stays fixed: the box yaw comes from PCA of
// the points' horizontal spread, the z extent straight from min/max z.

namespace voxnav {

namespace detail {

/// Major eigenvector direction of the 2x2 symmetric matrix [[a,b],[b,c]].
/// Handles the near-isotropic and diagonal cases explicitly so axis-aligned
/// inputs give exactly axis-aligned results.
inline Eigen::Vector2d major_axis_2x2(double a, double b, double c) {
  if (std::abs(b) < 1e-12 * std::max({std::abs(a), std::abs(c), 1e-300})) {
    return a >= c ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
  }
  const double lam = 0.5 * ((a + c) + std::hypot(a - c, 2 * b));
  // Two algebraically equivalent eigenvector forms; pick the better
  // conditioned one.
  Eigen::Vector2d v1(b, lam - a), v2(lam - c, b);
  Eigen::Vector2d v = v1.norm() >= v2.norm() ? v1 : v2;
  return v.normalized();
}

}  // namespace detail

/// Fits a gravity-aligned box: yaw from horizontal PCA, extents from min/max
/// projections, so every input point ends up inside (within arithmetic
/// rounding). Throws on degenerate sets: fewer than 3 points, or horizontal
/// spread that is a point or a line (the box would have a zero extent).
inline OrientedBox fit_oriented_box(const std::vector<Vec3>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_oriented_box: needs at least 3 points");

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : points) mean += p.head<2>();
  mean /= static_cast<double>(points.size());

  double a = 0, b = 0, c = 0;
  for (const auto& p : points) {
    const double dx = p.x() - mean.x(), dy = p.y() - mean.y();
    a += dx * dx;
    b += dx * dy;
    c += dy * dy;
  }
  a /= points.size();
  b /= points.size();
  c /= points.size();

  const Eigen::Vector2d axis = detail::major_axis_2x2(a, b, c);
  const double yaw = canonical_yaw(std::atan2(axis.y(), axis.x()));

  const double cy = std::cos(yaw), sy = std::sin(yaw);
  double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo;
  double v_lo = u_lo, v_hi = -u_lo;
  double z_lo = u_lo, z_hi = -u_lo;
  for (const auto& p : points) {
    const double u = cy * p.x() + sy * p.y();   // box frame
    const double v = -sy * p.x() + cy * p.y();
    u_lo = std::min(u_lo, u);
    u_hi = std::max(u_hi, u);
    v_lo = std::min(v_lo, v);
    v_hi = std::max(v_hi, v);
    z_lo = std::min(z_lo, p.z());
    z_hi = std::max(z_hi, p.z());
  }

  constexpr double kDegenerate = 1e-12;
  if (u_hi - u_lo < kDegenerate || v_hi - v_lo < kDegenerate || z_hi - z_lo < kDegenerate)
    throw std::invalid_argument(
        "fit_oriented_box: degenerate point set (coincident or collinear)");

  OrientedBox box;
  const double uc = (u_lo + u_hi) / 2, vc = (v_lo + v_hi) / 2;
  box.center = Vec3(cy * uc - sy * vc, sy * uc + cy * vc, (z_lo + z_hi) / 2);
  box.half_extents = Vec3((u_hi - u_lo) / 2, (v_hi - v_lo) / 2, (z_hi - z_lo) / 2);
  box.yaw = yaw;
  return box;
}

}  // namespace voxnav
