#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "voxnav/densify.hpp"
#include "voxnav/layout.hpp"
#include "voxnav/obb.hpp"
#include "voxnav/scene.hpp"
#include "voxnav/voxel.hpp"

// The annotation pipeline: from the accumulated labeled point cloud to a
// per-viewpoint set of dense multi-resolution occupancy grids, oriented
// object boxes, and (inside rooms) a cuboid layout.
//
// Stages, in order: crop the cloud to the egocentric grid around the
// viewpoint -> fit the room layout -> collect object instances and fit their
// boxes -> majority-vote voxelization -> amodal box fill -> free-space ray
// carving -> nearest-neighbor densification -> down-sampling chain.

namespace voxnav {

/// Perception-range geometry for annotation and encoding. The egocentric
/// grid is axis-aligned in world coordinates, centered on the viewpoint
/// horizontally and offset vertically.
struct PerceptionRange {
  double xy_extent = 6.0;  // [-e, e] around the viewpoint on x and y
  double z_below = 1.5;    // grid reaches this far below the viewpoint
  double z_above = 2.0;    // and this far above
  double fine_resolution = 0.1;

  GridSpec ego_grid(const Vec3& viewpoint) const {
    return GridSpec(viewpoint.x() - xy_extent, viewpoint.x() + xy_extent,
                    viewpoint.y() - xy_extent, viewpoint.y() + xy_extent,
                    viewpoint.z() - z_below, viewpoint.z() + z_above, fine_resolution);
  }
};

struct AnnotationSet {
  VoxelGrid fine;     // 0.1 m
  VoxelGrid half;     // 0.2 m
  VoxelGrid quarter;  // 0.4 m
  std::vector<LabeledBox> boxes;
  std::optional<RoomLayout> layout;
};

/// Marks unknown voxels on the segment viewpoint -> point as free, for every
/// point. Labeled voxels are never overwritten: point evidence beats ray
/// evidence. Rays pass through unlabeled shadows (they are drawn to every
/// accumulated point, observed from this viewpoint or not), which is what
/// empties occluded interiors. A point beyond the grid still frees the
/// in-grid prefix of its segment: the ray testifies that everything short of
/// the surface is air, however far away the surface is.
inline void carve_free_space(VoxelGrid& grid, const Vec3& origin,
                             const std::vector<Vec3>& targets) {
  const GridSpec& spec = grid.spec;
  const auto origin_cell = world_to_cell(origin, spec);
  if (!origin_cell) throw std::invalid_argument("carve_free_space: origin outside grid");

  auto mark = [&](const CellIndex& c) {
    uint16_t& l = grid.at(c);
    if (l == kLabelUnknown) l = kLabelFree;
  };

  for (const Vec3& target : targets) {
    // Amanatides-Woo traversal from origin toward target, stopping before
    // the cell that holds the point itself (or at the grid edge).
    const auto end_cell = world_to_cell(target, spec);
    CellIndex cur = *origin_cell;
    const Vec3 d = target - origin;
    const double len = d.norm();
    if (len == 0 || (end_cell && cur == *end_cell)) continue;
    int step[3];
    double t_max[3], t_delta[3];
    for (int a = 0; a < 3; ++a) {
      const double da = d[a];
      const double lo = a == 0 ? spec.x_min : a == 1 ? spec.y_min : spec.z_min;
      const int ca = a == 0 ? cur.x : a == 1 ? cur.y : cur.z;
      if (da > 0) {
        step[a] = 1;
        t_max[a] = ((lo + (ca + 1) * spec.resolution) - origin[a]) / da;
        t_delta[a] = spec.resolution / da;
      } else if (da < 0) {
        step[a] = -1;
        t_max[a] = ((lo + ca * spec.resolution) - origin[a]) / da;
        t_delta[a] = -spec.resolution / da;
      } else {
        step[a] = 0;
        t_max[a] = std::numeric_limits<double>::infinity();
        t_delta[a] = std::numeric_limits<double>::infinity();
      }
    }
    mark(cur);
    const int max_iter = spec.dim_x() + spec.dim_y() + spec.dim_z() + 3;
    for (int it = 0; it < max_iter; ++it) {
      const int a = t_max[0] <= t_max[1] ? (t_max[0] <= t_max[2] ? 0 : 2)
                                         : (t_max[1] <= t_max[2] ? 1 : 2);
      if (t_max[a] >= 1.0) break;  // next boundary is beyond the target
      t_max[a] += t_delta[a];
      (a == 0 ? cur.x : a == 1 ? cur.y : cur.z) += step[a];
      if (end_cell && cur == *end_cell) break;  // the point's own cell stays as observed
      if (cur.x < 0 || cur.x >= spec.dim_x() || cur.y < 0 || cur.y >= spec.dim_y() ||
          cur.z < 0 || cur.z >= spec.dim_z())
        break;
      mark(cur);
    }
  }
}

namespace detail {

struct InstancePoints {
  int32_t instance_id;
  uint16_t class_id;
  std::vector<Vec3> points;
};

inline std::vector<InstancePoints> group_instances(const std::vector<LabeledPoint>& pts) {
  std::map<int32_t, InstancePoints> by_id;
  for (const auto& p : pts) {
    if (p.instance_id < 0) continue;
    auto [it, fresh] = by_id.try_emplace(p.instance_id);
    if (fresh) {
      it->second.instance_id = p.instance_id;
      it->second.class_id = p.class_id;
    }
    it->second.points.push_back(p.position);
  }
  std::vector<InstancePoints> out;
  out.reserve(by_id.size());
  for (auto& [id, ip] : by_id) out.push_back(std::move(ip));
  return out;
}

}  // namespace detail

/// Runs the full pipeline for one viewpoint of a scene.
inline AnnotationSet generate_annotations(const Scene& scene, uint32_t viewpoint,
                                          const PerceptionRange& range = {}) {
  const Vec3 vp = scene.graph.node(viewpoint).position;
  const GridSpec ego = range.ego_grid(vp);

  // Crop the accumulated cloud.
  SemanticPointCloud crop;
  for (const auto& p : scene.cloud.points)
    if (ego.contains(p.position)) crop.points.push_back(p);
  if (crop.points.empty())
    throw std::runtime_error("generate_annotations: no points in perception range");

  // Room layout from wall-class points.
  std::vector<Vec3> wall_pts;
  for (const auto& p : crop.points)
    if (p.class_id == class_id_from_name("wall")) wall_pts.push_back(p.position);
  std::optional<RoomLayout> layout = fit_room_layout(wall_pts, vp);

  // Object boxes. Every fittable instance participates in the amodal fill
  // (its interior is known occupied however far away it is); the exported
  // list keeps, inside a room, only objects whose box center lies in that
  // room, and everything with points in range otherwise.
  std::vector<LabeledBox> fitted, boxes;
  for (auto& inst : detail::group_instances(crop.points)) {
    if (inst.points.size() < 3) continue;
    LabeledBox box;
    try {
      box.geom = fit_oriented_box(inst.points);
    } catch (const std::invalid_argument&) {
      continue;  // degenerate sliver of a mostly-out-of-range object
    }
    box.class_id = inst.class_id;
    box.instance_id = inst.instance_id;
    fitted.push_back(box);
    if (layout && !layout->as_box().contains(box.geom.center)) continue;
    boxes.push_back(box);
  }

  VoxelGrid grid = voxelize_majority(crop, ego);
  grid = amodal_fill(grid, fitted);

  // Carve toward every accumulated point, in range or not: a ray to a surface
  // beyond the window still frees the air it crosses inside the window.
  std::vector<Vec3> targets;
  targets.reserve(scene.cloud.points.size());
  for (const auto& p : scene.cloud.points) targets.push_back(p.position);
  carve_free_space(grid, vp, targets);

  grid = densify_nearest_neighbor(grid);

  AnnotationSet set;
  set.fine = std::move(grid);
  set.half = downsample_labels(set.fine, 2);
  set.quarter = downsample_labels(set.half, 2);
  set.boxes = std::move(boxes);
  set.layout = layout;
  return set;
}

/// Crops a grid to its top `keep_z` height cells (the below-floor band is
/// dropped when formatting labels for encoder supervision, whose z extent is
/// a power-of-two multiple of the query grid).
inline VoxelGrid crop_top_z(const VoxelGrid& g, int keep_z) {
  const GridSpec& s = g.spec;
  if (keep_z > s.dim_z()) throw std::invalid_argument("crop_top_z: grid too short");
  const int drop = s.dim_z() - keep_z;
  GridSpec cs(s.x_min, s.x_max, s.y_min, s.y_max, s.z_min + drop * s.resolution, s.z_max,
              s.resolution);
  VoxelGrid out(cs);
  for (int x = 0; x < cs.dim_x(); ++x)
    for (int y = 0; y < cs.dim_y(); ++y)
      for (int z = 0; z < keep_z; ++z) out.at({x, y, z}) = g.at({x, y, z + drop});
  return out;
}

/// Supervision-format labels: fine grid cropped to Z cells matching the
/// encoder pyramid (default 32), then the chain re-derived at 2x and 4x so
/// every level groups exactly the cells of the level below.
struct SupervisionLabels {
  VoxelGrid fine, half, quarter;  // e.g. 120x120x32, 60x60x16, 30x30x8
};

inline SupervisionLabels supervision_labels(const AnnotationSet& set, int fine_z = 32) {
  SupervisionLabels s;
  s.fine = crop_top_z(set.fine, fine_z);
  s.half = downsample_labels(s.fine, 2);
  s.quarter = downsample_labels(s.half, 2);
  return s;
}

}  // namespace voxnav
