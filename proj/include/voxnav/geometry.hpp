#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

// Grids, cameras and coordinate transforms. Conventions used throughout:
// right-handed world frame with z up (gravity axis); camera frames are
// z-forward, x-right, y-down.

namespace voxnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct CellIndex {
  int x = 0, y = 0, z = 0;
  bool operator==(const CellIndex&) const = default;
  /// Lexicographic (x, y, z); the deterministic tie-break order used by
  /// nearest-label propagation.
  bool operator<(const CellIndex& o) const {
    if (x != o.x) return x < o.x;
    if (y != o.y) return y < o.y;
    return z < o.z;
  }
};

/// Axis-aligned voxel lattice over a metric range. Cells are half-open
/// [min + i*res, min + (i+1)*res) with the top boundary clamped into the
/// last cell, so quantization is total on the closed range.
struct GridSpec {
  double x_min = 0, x_max = 0;
  double y_min = 0, y_max = 0;
  double z_min = 0, z_max = 0;
  double resolution = 0;

  GridSpec() = default;
  GridSpec(double xmin, double xmax, double ymin, double ymax, double zmin, double zmax,
           double res)
      : x_min(xmin), x_max(xmax), y_min(ymin), y_max(ymax), z_min(zmin), z_max(zmax),
        resolution(res) {
    validate();
  }

  void validate() const {
    if (!(resolution > 0)) throw std::invalid_argument("GridSpec: resolution must be > 0");
    if (!(x_max > x_min) || !(y_max > y_min) || !(z_max > z_min))
      throw std::invalid_argument("GridSpec: degenerate range (max must exceed min)");
    if (dim_x() < 1 || dim_y() < 1 || dim_z() < 1)
      throw std::invalid_argument("GridSpec: every dimension must have at least one cell");
  }

  int dim_x() const { return static_cast<int>(std::llround((x_max - x_min) / resolution)); }
  int dim_y() const { return static_cast<int>(std::llround((y_max - y_min) / resolution)); }
  int dim_z() const { return static_cast<int>(std::llround((z_max - z_min) / resolution)); }
  size_t cell_count() const {
    return static_cast<size_t>(dim_x()) * static_cast<size_t>(dim_y()) *
           static_cast<size_t>(dim_z());
  }

  Vec3 min_corner() const { return {x_min, y_min, z_min}; }

  Vec3 cell_center(const CellIndex& c) const {
    return {x_min + (c.x + 0.5) * resolution, y_min + (c.y + 0.5) * resolution,
            z_min + (c.z + 0.5) * resolution};
  }

  size_t flat_index(const CellIndex& c) const {
    return (static_cast<size_t>(c.x) * dim_y() + c.y) * dim_z() + c.z;
  }

  CellIndex from_flat(size_t f) const {
    const int Z = dim_z(), Y = dim_y();
    CellIndex c;
    c.z = static_cast<int>(f % Z);
    c.y = static_cast<int>((f / Z) % Y);
    c.x = static_cast<int>(f / (static_cast<size_t>(Z) * Y));
    return c;
  }

  /// Translates the ranges so the horizontal center and height reference sit
  /// on `origin` (the egocentric perception range around a viewpoint).
  GridSpec centered_at(const Vec3& origin) const {
    GridSpec s = *this;
    s.x_min += origin.x();
    s.x_max += origin.x();
    s.y_min += origin.y();
    s.y_max += origin.y();
    s.z_min += origin.z();
    s.z_max += origin.z();
    return s;
  }

  bool contains(const Vec3& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max &&
           p.z() >= z_min && p.z() <= z_max;
  }
};

/// Quantizes a point. Points exactly on an interior cell boundary land in the
/// upper cell (within a 1e-9-cell tolerance absorbing division rounding);
/// the max boundary maps to the last cell. Out-of-range is a value, not an
/// error.
inline std::optional<CellIndex> world_to_cell(const Vec3& p, const GridSpec& spec) {
  if (!spec.contains(p)) return std::nullopt;
  auto axis = [&](double v, double lo, int dim) {
    const double t = (v - lo) / spec.resolution;
    int c = static_cast<int>(std::floor(t + 1e-9));
    if (c < 0) c = 0;
    if (c >= dim) c = dim - 1;
    return c;
  };
  return CellIndex{axis(p.x(), spec.x_min, spec.dim_x()), axis(p.y(), spec.y_min, spec.dim_y()),
                   axis(p.z(), spec.z_min, spec.dim_z())};
}

/// Pinhole camera: K intrinsics (pixels), rigid world-to-camera transform.
struct Camera {
  Mat3 intrinsics = Mat3::Identity();
  Mat3 rotation = Mat3::Identity();  // world -> camera
  Vec3 translation = Vec3::Zero();
  int height = 0;
  int width = 0;

  void validate() const {
    const double det = rotation.determinant();
    const double ortho = (rotation * rotation.transpose() - Mat3::Identity()).norm();
    if (std::abs(det - 1.0) > 1e-9 || ortho > 1e-9)
      throw std::invalid_argument("Camera: rotation is not a proper orthonormal matrix");
    if (!(intrinsics(0, 0) > 0) || !(intrinsics(1, 1) > 0))
      throw std::invalid_argument("Camera: focal lengths must be positive");
    if (height <= 0 || width <= 0) throw std::invalid_argument("Camera: empty image size");
    const double cx = intrinsics(0, 2), cy = intrinsics(1, 2);
    if (cx < 0 || cx >= width || cy < 0 || cy >= height)
      throw std::invalid_argument("Camera: principal point outside image bounds");
  }

  Vec3 to_camera_frame(const Vec3& p_world) const { return rotation * p_world + translation; }
};

struct Projection {
  double u = 0, v = 0;
  double depth = 0;
  bool visible = false;
};

/// Extrinsic transform, perspective division, intrinsics. Not visible when
/// the camera-frame depth is <= 0 or the pixel falls outside [0,W)x[0,H).
inline Projection project_to_camera(const Vec3& p_world, const Camera& cam) {
  Projection out;
  const Vec3 pc = cam.to_camera_frame(p_world);
  out.depth = pc.z();
  if (pc.z() <= 0) return out;
  const Vec3 uvw = cam.intrinsics * pc;
  out.u = uvw.x() / uvw.z();
  out.v = uvw.y() / uvw.z();
  out.visible = out.u >= 0 && out.u < cam.width && out.v >= 0 && out.v < cam.height;
  return out;
}

inline Mat3 yaw_rotation(double yaw) {
  Mat3 r;
  const double c = std::cos(yaw), s = std::sin(yaw);
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

}  // namespace voxnav
