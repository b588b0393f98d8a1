#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "voxnav/annotate.hpp"
#include "voxnav/io_util.hpp"

// Binary annotation archive: a sequence of per-viewpoint records, each
// holding the three label grids (run-length encoded), the instance boxes,
// and the room layout when one was fitted. Round-trips bit-exactly.

namespace voxnav {

inline constexpr uint32_t kAnnotationFormatVersion = 1;

struct ViewpointAnnotation {
  uint32_t viewpoint = 0;
  AnnotationSet set;
};

/// Runs of identical labels over the flat cell order. Lengths are u32; a run
/// never needs more (the largest grid has ~500k cells).
inline std::vector<std::pair<uint16_t, uint32_t>> rle_encode(const std::vector<uint16_t>& labels) {
  std::vector<std::pair<uint16_t, uint32_t>> runs;
  for (uint16_t l : labels) {
    if (!runs.empty() && runs.back().first == l && runs.back().second != UINT32_MAX)
      ++runs.back().second;
    else
      runs.push_back({l, 1});
  }
  return runs;
}

inline std::vector<uint16_t> rle_decode(const std::vector<std::pair<uint16_t, uint32_t>>& runs,
                                        size_t expected) {
  std::vector<uint16_t> labels;
  labels.reserve(expected);
  for (const auto& [label, len] : runs) labels.insert(labels.end(), len, label);
  if (labels.size() != expected) io_fail("run lengths do not match the cell count");
  return labels;
}

namespace detail {

inline void write_grid(std::ostream& os, const VoxelGrid& g) {
  for (double v : {g.spec.x_min, g.spec.x_max, g.spec.y_min, g.spec.y_max, g.spec.z_min,
                   g.spec.z_max, g.spec.resolution})
    write_le(os, v);
  const auto runs = rle_encode(g.labels);
  write_le(os, static_cast<uint64_t>(runs.size()));
  for (const auto& [label, len] : runs) {
    write_le(os, label);
    write_le(os, len);
  }
}

inline VoxelGrid read_grid(std::istream& is) {
  double b[7];
  for (double& v : b) v = read_le<double>(is);
  VoxelGrid g(GridSpec(b[0], b[1], b[2], b[3], b[4], b[5], b[6]));
  const uint64_t n_runs = read_le<uint64_t>(is);
  std::vector<std::pair<uint16_t, uint32_t>> runs(n_runs);
  for (auto& [label, len] : runs) {
    label = read_le<uint16_t>(is);
    len = read_le<uint32_t>(is);
  }
  g.labels = rle_decode(runs, g.spec.cell_count());
  return g;
}

inline void write_box(std::ostream& os, const LabeledBox& b) {
  for (int i = 0; i < 3; ++i) write_le(os, b.geom.center[i]);
  for (int i = 0; i < 3; ++i) write_le(os, b.geom.half_extents[i]);
  write_le(os, b.geom.yaw);
  write_le(os, b.class_id);
  write_le(os, b.instance_id);
}

inline LabeledBox read_box(std::istream& is) {
  LabeledBox b;
  for (int i = 0; i < 3; ++i) b.geom.center[i] = read_le<double>(is);
  for (int i = 0; i < 3; ++i) b.geom.half_extents[i] = read_le<double>(is);
  b.geom.yaw = read_le<double>(is);
  b.class_id = read_le<uint16_t>(is);
  b.instance_id = read_le<int32_t>(is);
  return b;
}

}  // namespace detail

inline void save_annotations(const std::vector<ViewpointAnnotation>& records,
                             const std::filesystem::path& path) {
  auto os = open_out_binary(path);
  write_le(os, kAnnotationFormatVersion);
  write_le(os, static_cast<uint32_t>(records.size()));
  for (const auto& rec : records) {
    write_le(os, rec.viewpoint);
    detail::write_grid(os, rec.set.fine);
    detail::write_grid(os, rec.set.half);
    detail::write_grid(os, rec.set.quarter);
    write_le(os, static_cast<uint8_t>(rec.set.layout ? 1 : 0));
    if (rec.set.layout) {
      const RoomLayout& r = *rec.set.layout;
      for (double v : {r.center.x(), r.center.y(), r.center.z(), r.width, r.length, r.height,
                       r.rotation})
        write_le(os, v);
    }
    write_le(os, static_cast<uint32_t>(rec.set.boxes.size()));
    for (const auto& b : rec.set.boxes) detail::write_box(os, b);
  }
  if (!os) io_fail("failed writing " + path.string());
}

inline std::vector<ViewpointAnnotation> load_annotations(const std::filesystem::path& path) {
  auto is = open_in_binary(path);
  if (read_le<uint32_t>(is) != kAnnotationFormatVersion)
    io_fail("unsupported annotation format in " + path.string());
  const uint32_t n = read_le<uint32_t>(is);
  std::vector<ViewpointAnnotation> records(n);
  for (auto& rec : records) {
    rec.viewpoint = read_le<uint32_t>(is);
    rec.set.fine = detail::read_grid(is);
    rec.set.half = detail::read_grid(is);
    rec.set.quarter = detail::read_grid(is);
    if (read_le<uint8_t>(is) != 0) {
      RoomLayout r;
      for (int i = 0; i < 3; ++i) r.center[i] = read_le<double>(is);
      r.width = read_le<double>(is);
      r.length = read_le<double>(is);
      r.height = read_le<double>(is);
      r.rotation = read_le<double>(is);
      rec.set.layout = r;
    }
    const uint32_t n_boxes = read_le<uint32_t>(is);
    rec.set.boxes.resize(n_boxes);
    for (auto& b : rec.set.boxes) b = detail::read_box(is);
  }
  if (!is) io_fail("failed reading " + path.string());
  return records;
}

}  // namespace voxnav
