#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "voxnav/boxes.hpp"
#include "voxnav/geometry.hpp"
#include "voxnav/scene.hpp"

// Dense semantic voxel grids and the label operations of the annotation
// pipeline that don't need spatial search: majority-vote voxelization,
// amodal box filling, and majority down-sampling.

namespace voxnav {

// Label values beyond the class range. free = known empty space, unknown =
// never observed. Both sort above every class id, which keeps "lowest label
// wins" tie-breaks purely semantic.
inline constexpr uint16_t kLabelFree = 0xFFFE;
inline constexpr uint16_t kLabelUnknown = 0xFFFF;

inline bool is_semantic(uint16_t label) { return label < kNumClasses; }

struct VoxelGrid {
  GridSpec spec;
  std::vector<uint16_t> labels;  // dense, x-major then y then z

  VoxelGrid() = default;
  explicit VoxelGrid(const GridSpec& s, uint16_t fill = kLabelUnknown)
      : spec(s), labels(s.cell_count(), fill) {}

  uint16_t& at(const CellIndex& c) { return labels[spec.flat_index(c)]; }
  uint16_t at(const CellIndex& c) const { return labels[spec.flat_index(c)]; }

  void validate() const {
    spec.validate();
    if (labels.size() != spec.cell_count())
      throw std::invalid_argument("VoxelGrid: label array length must equal cell count");
    for (uint16_t l : labels)
      if (is_semantic(l) ? l >= kNumClasses : (l != kLabelFree && l != kLabelUnknown))
        throw std::invalid_argument("VoxelGrid: label value out of range");
  }
};

/// Majority vote per cell over the points it contains; ties go to the lowest
/// class id. Cells without points stay unknown. Points outside the grid are
/// ignored (the caller crops).
inline VoxelGrid voxelize_majority(const SemanticPointCloud& cloud, const GridSpec& spec) {
  if (cloud.points.empty()) throw std::invalid_argument("voxelize_majority: empty cloud");
  VoxelGrid grid(spec);
  // Per-cell histogram; a flat count array (cells x classes) would be 16x the
  // grid, so count sparsely.
  std::map<size_t, std::array<uint32_t, kNumClasses>> hist;
  for (const auto& p : cloud.points) {
    auto cell = world_to_cell(p.position, spec);
    if (!cell) continue;
    auto [it, fresh] = hist.try_emplace(spec.flat_index(*cell));
    if (fresh) it->second.fill(0);
    ++it->second[p.class_id];
  }
  for (const auto& [flat, counts] : hist) {
    uint16_t best = 0;
    uint32_t best_n = 0;
    for (uint16_t c = 0; c < kNumClasses; ++c)
      if (counts[c] > best_n) {  // strict: first (lowest id) wins ties
        best_n = counts[c];
        best = c;
      }
    grid.labels[flat] = best;
  }
  return grid;
}

/// Labels every cell whose center lies inside a box with that box's class.
/// Overlaps go to the smaller box (the more specific object); exact volume
/// ties to the lower instance id. Existing labels are overwritten only by
/// boxes (point evidence inside a box is subsumed by the amodal label).
inline VoxelGrid amodal_fill(const VoxelGrid& grid, const std::vector<LabeledBox>& boxes) {
  VoxelGrid out = grid;
  // Process big to small so the smaller box's label lands last.
  std::vector<const LabeledBox*> order;
  order.reserve(boxes.size());
  for (const auto& b : boxes) order.push_back(&b);
  std::stable_sort(order.begin(), order.end(), [](const LabeledBox* a, const LabeledBox* b) {
    if (a->geom.volume() != b->geom.volume()) return a->geom.volume() > b->geom.volume();
    return a->instance_id > b->instance_id;
  });
  const GridSpec& spec = grid.spec;
  for (const LabeledBox* b : order) {
    // Only scan the cells under the box's axis-aligned bound.
    const auto fp = b->geom.footprint();
    double x_lo = fp[0].x(), x_hi = fp[0].x(), y_lo = fp[0].y(), y_hi = fp[0].y();
    for (const auto& c : fp) {
      x_lo = std::min(x_lo, c.x());
      x_hi = std::max(x_hi, c.x());
      y_lo = std::min(y_lo, c.y());
      y_hi = std::max(y_hi, c.y());
    }
    auto clamp_cell = [](int v, int dim) { return std::clamp(v, 0, dim - 1); };
    const double res = spec.resolution;
    const int ix0 = clamp_cell(static_cast<int>(std::floor((x_lo - spec.x_min) / res)), spec.dim_x());
    const int ix1 = clamp_cell(static_cast<int>(std::floor((x_hi - spec.x_min) / res)), spec.dim_x());
    const int iy0 = clamp_cell(static_cast<int>(std::floor((y_lo - spec.y_min) / res)), spec.dim_y());
    const int iy1 = clamp_cell(static_cast<int>(std::floor((y_hi - spec.y_min) / res)), spec.dim_y());
    const int iz0 = clamp_cell(static_cast<int>(std::floor((b->geom.z_lo() - spec.z_min) / res)), spec.dim_z());
    const int iz1 = clamp_cell(static_cast<int>(std::floor((b->geom.z_hi() - spec.z_min) / res)), spec.dim_z());
    for (int x = ix0; x <= ix1; ++x)
      for (int y = iy0; y <= iy1; ++y)
        for (int z = iz0; z <= iz1; ++z) {
          const CellIndex c{x, y, z};
          if (b->geom.contains(spec.cell_center(c))) out.at(c) = b->class_id;
        }
  }
  return out;
}

/// Coarsens by an integer factor. Each coarse cell takes the modal semantic
/// label of its factor^3 children (ties to the lowest id); with no semantic
/// children it is free if any child is free, else unknown. Dims that don't
/// divide are padded with unknown.
inline VoxelGrid downsample_labels(const VoxelGrid& fine, int factor) {
  if (factor < 2) throw std::invalid_argument("downsample_labels: factor must be >= 2");
  const GridSpec& fs = fine.spec;
  auto ceil_div = [factor](int v) { return (v + factor - 1) / factor; };
  const int cx = ceil_div(fs.dim_x()), cy = ceil_div(fs.dim_y()), cz = ceil_div(fs.dim_z());
  GridSpec cs(fs.x_min, fs.x_min + cx * factor * fs.resolution, fs.y_min,
              fs.y_min + cy * factor * fs.resolution, fs.z_min,
              fs.z_min + cz * factor * fs.resolution, fs.resolution * factor);
  VoxelGrid coarse(cs);
  for (int x = 0; x < cx; ++x)
    for (int y = 0; y < cy; ++y)
      for (int z = 0; z < cz; ++z) {
        std::array<uint32_t, kNumClasses> counts{};
        bool any_free = false;
        for (int dx = 0; dx < factor; ++dx)
          for (int dy = 0; dy < factor; ++dy)
            for (int dz = 0; dz < factor; ++dz) {
              const int fx = x * factor + dx, fy = y * factor + dy, fz = z * factor + dz;
              if (fx >= fs.dim_x() || fy >= fs.dim_y() || fz >= fs.dim_z()) continue;  // pad
              const uint16_t l = fine.at({fx, fy, fz});
              if (is_semantic(l))
                ++counts[l];
              else if (l == kLabelFree)
                any_free = true;
            }
        uint16_t best = kLabelUnknown;
        uint32_t best_n = 0;
        for (uint16_t c = 0; c < kNumClasses; ++c)
          if (counts[c] > best_n) {
            best_n = counts[c];
            best = c;
          }
        if (best_n == 0) best = any_free ? kLabelFree : kLabelUnknown;
        coarse.at({x, y, z}) = best;
      }
  return coarse;
}

}  // namespace voxnav
