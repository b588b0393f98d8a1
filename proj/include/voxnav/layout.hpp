#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "voxnav/boxes.hpp"
#include "voxnav/geometry.hpp"
#include "voxnav/obb.hpp"

// Cuboid room layout estimation from wall-labeled points, relative to the
// agent. The crop around a viewpoint usually contains walls of neighboring
// rooms too (seen through doorways), so the fit starts from the walls
// actually bounding the agent: the nearest wall points per azimuth sector.

namespace voxnav {

namespace detail {

struct SectorFilter {
  static constexpr int kSectors = 72;
  // Keep, per azimuth sector around the agent, every point within this much
  // of the sector's closest horizontal distance. A generous band keeps whole
  // wall columns (full height) rather than single samples.
  static constexpr double kBand = 0.3;

  /// Nearest-per-sector prefilter; returns indices into `pts`.
  static std::vector<int> select(const std::vector<Vec3>& pts, const Vec3& agent) {
    std::array<double, kSectors> nearest;
    nearest.fill(std::numeric_limits<double>::infinity());
    std::vector<int> sector_of(pts.size());
    std::vector<double> dist_of(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
      const double dx = pts[i].x() - agent.x(), dy = pts[i].y() - agent.y();
      const double az = std::atan2(dy, dx);  // [-pi, pi]
      int s = static_cast<int>(std::floor((az + M_PI) / (2 * M_PI) * kSectors));
      s = std::clamp(s, 0, kSectors - 1);
      sector_of[i] = s;
      dist_of[i] = std::hypot(dx, dy);
      nearest[s] = std::min(nearest[s], dist_of[i]);
    }
    std::vector<int> keep;
    for (size_t i = 0; i < pts.size(); ++i)
      if (dist_of[i] <= nearest[sector_of[i]] + kBand) keep.push_back(static_cast<int>(i));
    return keep;
  }
};

struct RectFit {
  double u_lo = 0, u_hi = 0, v_lo = 0, v_hi = 0;  // face positions in the yaw frame
  double sq_residual = 0;
};

/// For a fixed yaw, assign each point to its nearest face of the current
/// rectangle and move each face to the mean of its points; k-means style,
/// a few rounds. Returns face positions and the total squared residual.
inline RectFit fit_rect_at_yaw(const std::vector<Eigen::Vector2d>& uv, double yaw_cos,
                               double yaw_sin) {
  RectFit fit;
  std::vector<Eigen::Vector2d> f(uv.size());
  for (size_t i = 0; i < uv.size(); ++i)
    f[i] = {yaw_cos * uv[i].x() + yaw_sin * uv[i].y(),
            -yaw_sin * uv[i].x() + yaw_cos * uv[i].y()};
  double u_lo = f[0].x(), u_hi = f[0].x(), v_lo = f[0].y(), v_hi = f[0].y();
  for (const auto& p : f) {
    u_lo = std::min(u_lo, p.x());
    u_hi = std::max(u_hi, p.x());
    v_lo = std::min(v_lo, p.y());
    v_hi = std::max(v_hi, p.y());
  }
  for (int round = 0; round < 4; ++round) {
    double sum[4] = {0, 0, 0, 0};
    int cnt[4] = {0, 0, 0, 0};
    for (const auto& p : f) {
      const double d[4] = {std::abs(p.x() - u_lo), std::abs(p.x() - u_hi),
                           std::abs(p.y() - v_lo), std::abs(p.y() - v_hi)};
      const int face = static_cast<int>(std::min_element(d, d + 4) - d);
      sum[face] += face < 2 ? p.x() : p.y();
      ++cnt[face];
    }
    if (cnt[0]) u_lo = sum[0] / cnt[0];
    if (cnt[1]) u_hi = sum[1] / cnt[1];
    if (cnt[2]) v_lo = sum[2] / cnt[2];
    if (cnt[3]) v_hi = sum[3] / cnt[3];
  }
  fit.u_lo = u_lo;
  fit.u_hi = u_hi;
  fit.v_lo = v_lo;
  fit.v_hi = v_hi;
  for (const auto& p : f) {
    const double d[4] = {std::abs(p.x() - u_lo), std::abs(p.x() - u_hi),
                         std::abs(p.y() - v_lo), std::abs(p.y() - v_hi)};
    const double m = *std::min_element(d, d + 4);
    fit.sq_residual += m * m;
  }
  return fit;
}

}  // namespace detail

/// Fits the cuboid room around `agent` from wall-class points, or nullopt
/// when the walls don't enclose the agent (support missing in one of the
/// four horizontal quadrants). Least-squares point-to-nearest-face fit,
/// initialized from horizontal PCA, with a yaw sweep and an outlier trim.
inline std::optional<RoomLayout> fit_room_layout(const std::vector<Vec3>& wall_points,
                                                 const Vec3& agent) {
  if (wall_points.size() < 8) return std::nullopt;

  bool quadrant[4] = {false, false, false, false};
  for (const auto& p : wall_points) {
    const double dx = p.x() - agent.x(), dy = p.y() - agent.y();
    quadrant[(dx >= 0 ? 1 : 0) | (dy >= 0 ? 2 : 0)] = true;
  }
  if (!(quadrant[0] && quadrant[1] && quadrant[2] && quadrant[3])) return std::nullopt;

  const std::vector<int> keep = detail::SectorFilter::select(wall_points, agent);
  if (keep.size() < 8) return std::nullopt;

  std::vector<Eigen::Vector2d> uv;
  std::vector<double> zs;
  uv.reserve(keep.size());
  zs.reserve(keep.size());
  for (int i : keep) {
    uv.push_back(wall_points[i].head<2>());
    zs.push_back(wall_points[i].z());
  }

  // Initial yaw from the horizontal PCA frame of the selected boundary.
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : uv) mean += p;
  mean /= static_cast<double>(uv.size());
  double a = 0, b = 0, c = 0;
  for (const auto& p : uv) {
    a += (p.x() - mean.x()) * (p.x() - mean.x());
    b += (p.x() - mean.x()) * (p.y() - mean.y());
    c += (p.y() - mean.y()) * (p.y() - mean.y());
  }
  const Eigen::Vector2d axis = detail::major_axis_2x2(a, b, c);
  const double yaw0 = canonical_yaw(std::atan2(axis.y(), axis.x()));

  // Sweep yaw around the PCA estimate; the face fit per yaw is closed-form.
  double best_yaw = yaw0;
  detail::RectFit best;
  best.sq_residual = std::numeric_limits<double>::infinity();
  constexpr double kSweep = 12.0 * M_PI / 180, kStep = 0.25 * M_PI / 180;
  for (double d = -kSweep; d <= kSweep + 1e-12; d += kStep) {
    const double yaw = yaw0 + d;
    const auto fit = detail::fit_rect_at_yaw(uv, std::cos(yaw), std::sin(yaw));
    if (fit.sq_residual < best.sq_residual) {
      best = fit;
      best_yaw = yaw;
    }
  }

  // Trim stray points (doorway edges, slivers of neighboring rooms that
  // survived the sector filter) and refit once.
  {
    const double cy = std::cos(best_yaw), sy = std::sin(best_yaw);
    std::vector<double> res(uv.size());
    for (size_t i = 0; i < uv.size(); ++i) {
      const double u = cy * uv[i].x() + sy * uv[i].y();
      const double v = -sy * uv[i].x() + cy * uv[i].y();
      const double d[4] = {std::abs(u - best.u_lo), std::abs(u - best.u_hi),
                           std::abs(v - best.v_lo), std::abs(v - best.v_hi)};
      res[i] = *std::min_element(d, d + 4);
    }
    std::vector<double> sorted = res;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    const double cut = std::max(0.15, 3 * med);
    std::vector<Eigen::Vector2d> uv2;
    std::vector<double> zs2;
    for (size_t i = 0; i < uv.size(); ++i)
      if (res[i] <= cut) {
        uv2.push_back(uv[i]);
        zs2.push_back(zs[i]);
      }
    if (uv2.size() >= 8) {
      uv.swap(uv2);
      zs.swap(zs2);
      best = detail::fit_rect_at_yaw(uv, cy, sy);
    }
  }

  if (!(best.u_hi > best.u_lo) || !(best.v_hi > best.v_lo)) return std::nullopt;

  // Height from the wall points' z span, lightly trimmed against strays.
  std::sort(zs.begin(), zs.end());
  const size_t off = zs.size() / 200;  // 0.5% per side
  const double z_lo = zs[off], z_hi = zs[zs.size() - 1 - off];
  if (!(z_hi > z_lo)) return std::nullopt;

  RoomLayout layout;
  const double cy = std::cos(best_yaw), sy = std::sin(best_yaw);
  const double uc = (best.u_lo + best.u_hi) / 2, vc = (best.v_lo + best.v_hi) / 2;
  layout.center = Vec3(cy * uc - sy * vc, sy * uc + cy * vc, (z_lo + z_hi) / 2);
  layout.width = best.u_hi - best.u_lo;
  layout.length = best.v_hi - best.v_lo;
  layout.height = z_hi - z_lo;
  // canonical_yaw only flips by half turns, which leaves the face axes (and
  // so width/length) unchanged.
  layout.rotation = canonical_yaw(best_yaw);
  layout.validate();
  return layout;
}

}  // namespace voxnav
