#include <catch2/catch_amalgamated.hpp>
#include <map>

#include "voxnav/rng.hpp"
#include "voxnav/voxel.hpp"

using namespace voxnav;

namespace {

constexpr uint16_t kClassWall = 1;
constexpr uint16_t kClassFloor = 2;
constexpr uint16_t kClassCeiling = 3;
constexpr uint16_t kClassChair = 5;

LabeledPoint pt(double x, double y, double z, uint16_t cls, int32_t inst = -1) {
  LabeledPoint p;
  p.position = Vec3(x, y, z);
  p.class_id = cls;
  p.instance_id = inst;
  return p;
}

LabeledBox box(double cx, double cy, double cz, double hx, double hy, double hz, uint16_t cls,
               int32_t inst) {
  LabeledBox b;
  b.geom.center = Vec3(cx, cy, cz);
  b.geom.half_extents = Vec3(hx, hy, hz);
  b.class_id = cls;
  b.instance_id = inst;
  return b;
}

}  // namespace

TEST_CASE("majority vote per cell, ties to the lowest class id") {
  const GridSpec spec(0, 1, 0, 1, 0, 1, 0.5);
  SemanticPointCloud cloud;
  // Cell (0,0,0): two walls, one floor -> wall.
  cloud.points.push_back(pt(0.1, 0.1, 0.1, kClassWall));
  cloud.points.push_back(pt(0.2, 0.2, 0.2, kClassWall));
  cloud.points.push_back(pt(0.3, 0.3, 0.3, kClassFloor));
  // Cell (1,1,1): a wall/floor tie -> wall (lower id).
  cloud.points.push_back(pt(0.9, 0.9, 0.9, kClassFloor));
  cloud.points.push_back(pt(0.8, 0.8, 0.8, kClassWall));
  // Out-of-grid points are dropped silently.
  cloud.points.push_back(pt(5, 5, 5, kClassCeiling));

  const VoxelGrid g = voxelize_majority(cloud, spec);
  CHECK(g.at({0, 0, 0}) == kClassWall);
  CHECK(g.at({1, 1, 1}) == kClassWall);
  CHECK(g.at({0, 1, 0}) == kLabelUnknown);  // no points

  SemanticPointCloud empty;
  CHECK_THROWS_AS(voxelize_majority(empty, spec), std::invalid_argument);
}

TEST_CASE("voxelization matches a naive per-cell recount") {
  const GridSpec spec(-1, 1, -1, 1, 0, 0.8, 0.2);
  Rng rng(stream_seed(11, "voxel-prop"));
  SemanticPointCloud cloud;
  for (int i = 0; i < 4000; ++i)
    cloud.points.push_back(pt(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                              rng.uniform(-0.1, 0.9),
                              static_cast<uint16_t>(rng.uniform_index(kNumClasses))));

  const VoxelGrid g = voxelize_majority(cloud, spec);

  std::map<CellIndex, std::vector<uint16_t>> bins;
  for (const auto& p : cloud.points) {
    if (auto c = world_to_cell(p.position, spec)) bins[*c].push_back(p.class_id);
  }
  for (size_t f = 0; f < spec.cell_count(); ++f) {
    const CellIndex c = spec.from_flat(f);
    auto it = bins.find(c);
    if (it == bins.end()) {
      CHECK(g.labels[f] == kLabelUnknown);
      continue;
    }
    uint16_t best = kLabelUnknown;
    size_t best_n = 0;
    for (uint16_t cls = 0; cls < kNumClasses; ++cls) {
      const size_t n = std::count(it->second.begin(), it->second.end(), cls);
      if (n > best_n) {
        best_n = n;
        best = cls;
      }
    }
    CHECK(g.labels[f] == best);
  }
}

TEST_CASE("amodal fill paints cell centers inside boxes, smaller box wins") {
  const GridSpec spec(0, 3, 0, 3, 0, 3, 1.0);  // 3x3x3, centers at 0.5/1.5/2.5
  VoxelGrid base(spec);
  base.at({0, 0, 0}) = kClassFloor;  // survives unless a box covers it

  // Big box covers the center column of cells; small box covers just the middle.
  const LabeledBox big = box(1.5, 1.5, 1.5, 0.9, 0.9, 1.5, 5, 0);
  const LabeledBox small = box(1.5, 1.5, 1.5, 0.6, 0.6, 0.5, 7, 1);
  const VoxelGrid filled = amodal_fill(base, {small, big});

  CHECK(filled.at({1, 1, 1}) == 7);  // overlap -> smaller box
  CHECK(filled.at({1, 1, 0}) == 5);  // big only
  CHECK(filled.at({1, 1, 2}) == 5);
  CHECK(filled.at({0, 0, 0}) == kClassFloor);  // untouched
  CHECK(filled.at({2, 2, 2}) == kLabelUnknown);

  // Identical volumes: the lower instance id is painted last and wins.
  const LabeledBox t0 = box(0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 9, 0);
  const LabeledBox t1 = box(0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 10, 1);
  CHECK(amodal_fill(base, {t1, t0}).at({0, 0, 0}) == 9);
  CHECK(amodal_fill(base, {t0, t1}).at({0, 0, 0}) == 9);

  // Box faces are inclusive: a center exactly on the face is painted.
  const LabeledBox face = box(0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 11, 2);
  CHECK(amodal_fill(base, {face}).at({0, 0, 0}) == 11);
}

TEST_CASE("downsampling takes the modal semantic label of each block") {
  const GridSpec spec(0, 0.4, 0, 0.4, 0, 0.4, 0.1);  // 4^3
  VoxelGrid fine(spec);
  // Block (0,0,0): 3 floor + 5 wall -> wall.
  int put = 0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) fine.at({x, y, z}) = (put++ < 3) ? kClassFloor : kClassWall;
  // Block (1,0,0): only free and unknown -> free.
  fine.at({2, 0, 0}) = kLabelFree;
  // Block (0,1,0): tie floor/wall -> wall (lower id).
  fine.at({0, 2, 0}) = kClassFloor;
  fine.at({0, 3, 0}) = kClassWall;
  // Block (1,1,0): left all-unknown.

  const VoxelGrid coarse = downsample_labels(fine, 2);
  CHECK(coarse.spec.dim_x() == 2);
  CHECK(coarse.spec.resolution == Catch::Approx(0.2));
  CHECK(coarse.at({0, 0, 0}) == kClassWall);
  CHECK(coarse.at({1, 0, 0}) == kLabelFree);
  CHECK(coarse.at({0, 1, 0}) == kClassWall);
  CHECK(coarse.at({1, 1, 0}) == kLabelUnknown);

  CHECK_THROWS_AS(downsample_labels(fine, 1), std::invalid_argument);
}

TEST_CASE("downsampling pads non-divisible dims with unknown") {
  const GridSpec spec(0, 0.3, 0, 0.3, 0, 0.3, 0.1);  // 3^3
  VoxelGrid fine(spec, kLabelFree);
  fine.at({2, 2, 2}) = kClassChair;  // lone corner cell

  const VoxelGrid coarse = downsample_labels(fine, 2);
  CHECK(coarse.spec.dim_x() == 2);
  CHECK(coarse.spec.dim_y() == 2);
  CHECK(coarse.spec.dim_z() == 2);
  // The far corner block holds a single real child with a semantic label;
  // padding contributes nothing.
  CHECK(coarse.at({1, 1, 1}) == kClassChair);
  CHECK(coarse.at({0, 0, 0}) == kLabelFree);
}

TEST_CASE("grid validation catches malformed label arrays") {
  const GridSpec spec(0, 1, 0, 1, 0, 1, 0.5);
  VoxelGrid g(spec);
  g.labels.pop_back();
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  VoxelGrid h(spec);
  h.labels[0] = kNumClasses;  // in the gap between classes and free
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
}
