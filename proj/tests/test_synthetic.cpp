#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>

#include "voxnav/synthetic.hpp"

using namespace voxnav;

namespace {

SynthConfig small_config(uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_rooms = 2;
  cfg.n_objects = 5;
  cfg.density = 25;
  cfg.object_spacing = 0.1;
  return cfg;
}

}  // namespace

TEST_CASE("generation is a pure function of the config") {
  const SynthConfig cfg = small_config(77);
  const SyntheticScene a = generate_synthetic_scene(cfg);
  const SyntheticScene b = generate_synthetic_scene(cfg);

  REQUIRE(a.scene.cloud.points.size() == b.scene.cloud.points.size());
  for (size_t i = 0; i < a.scene.cloud.points.size(); i += 97) {
    CHECK(a.scene.cloud.points[i].position == b.scene.cloud.points[i].position);
    CHECK(a.scene.cloud.points[i].class_id == b.scene.cloud.points[i].class_id);
  }
  CHECK(a.scene.graph.edges == b.scene.graph.edges);
  REQUIRE(a.world.objects.size() == b.world.objects.size());
  for (size_t i = 0; i < a.world.objects.size(); ++i)
    CHECK(a.world.objects[i].geom.center == b.world.objects[i].geom.center);

  // A different seed moves the geometry.
  SynthConfig other = cfg;
  other.seed = 78;
  const SyntheticScene c = generate_synthetic_scene(other);
  bool differs = c.scene.cloud.points.size() != a.scene.cloud.points.size();
  for (size_t i = 0; !differs && i < a.scene.cloud.points.size(); ++i)
    differs = a.scene.cloud.points[i].position != c.scene.cloud.points[i].position;
  CHECK(differs);
}

TEST_CASE("structural planes and viewpoints sit at the documented heights") {
  const SyntheticScene s = generate_synthetic_scene(small_config(81));
  CHECK(s.world.floor_z == 0.0);
  CHECK(s.world.ceil_z == 2.7);
  for (const auto& n : s.scene.graph.nodes) {
    CHECK(n.position.z() == 1.2);
    // Horizontal coordinates snap to the 0.05 grid shifted by 0.025, so no
    // viewpoint-centered cell boundary can land on a wall plane.
    for (double v : {n.position.x(), n.position.y()}) {
      const double steps = (v - 0.025) / 0.05;
      CHECK(std::abs(steps - std::round(steps)) < 1e-9);
    }
  }
  CHECK(s.scene.graph.connected());
  CHECK(s.scene.rigs.size() == s.scene.graph.nodes.size());
  for (const auto& rig : s.scene.rigs) CHECK(rig.size() == 36);  // 12 azimuths x 3 elevations

  for (const auto& p : s.scene.cloud.points) CHECK(s.scene.bounds.contains(p.position));
}

TEST_CASE("objects land inside rooms with dense instance ids") {
  const SyntheticScene s = generate_synthetic_scene(small_config(82));
  REQUIRE_FALSE(s.world.objects.empty());
  for (size_t i = 0; i < s.world.objects.size(); ++i) {
    const auto& o = s.world.objects[i];
    CHECK(o.instance_id == static_cast<int32_t>(i));
    CHECK(is_object_class(o.class_id));
    CHECK(s.world.room_of(o.geom.center.x(), o.geom.center.y()) >= 0);
    CHECK(o.geom.z_lo() >= s.world.floor_z - 1e-12);
    CHECK(o.geom.z_hi() <= s.world.ceil_z + 1e-12);
  }
}

TEST_CASE("window glass lies exactly on wall planes") {
  SynthConfig cfg = small_config(83);
  cfg.density = 120;  // enough samples that each window band is hit
  const SyntheticScene s = generate_synthetic_scene(cfg);

  const uint16_t window_cls = class_id_from_name("window");
  size_t n_window = 0;
  for (const auto& p : s.scene.cloud.points) {
    if (p.class_id != window_cls) continue;
    ++n_window;
    bool on_plane = false;
    for (const auto& w : s.world.walls) {
      const double coord = w.axis == 0 ? p.position.x() : p.position.y();
      if (std::abs(coord - w.plane) < 1e-12) on_plane = true;
    }
    CHECK(on_plane);
    CHECK(p.position.z() >= 0.9);
    CHECK(p.position.z() <= 1.8);
  }
  CHECK(n_window > 0);

  SynthConfig plain = cfg;
  plain.windows = false;
  const SyntheticScene t = generate_synthetic_scene(plain);
  for (const auto& p : t.scene.cloud.points) CHECK(p.class_id != window_cls);
}

TEST_CASE("central mode clusters four viewpoints at the wall junction") {
  SynthConfig cfg;
  cfg.seed = 84;
  cfg.n_rooms = 4;
  cfg.n_objects = 4;
  cfg.density = 25;
  cfg.object_spacing = 0.1;
  cfg.central_viewpoints = true;
  const SyntheticScene s = generate_synthetic_scene(cfg);

  REQUIRE(s.scene.graph.nodes.size() == 4);
  REQUIRE(s.world.rooms.size() == 4);
  for (const auto& r : s.world.rooms) {
    CHECK(r.width >= 6.0 - 1e-9);
    CHECK(r.length >= 6.0 - 1e-9);
  }
  // All four viewpoints within a meter of each other, one per room.
  std::set<int> rooms;
  for (const auto& a : s.scene.graph.nodes) {
    rooms.insert(s.world.room_of(a.position.x(), a.position.y()));
    for (const auto& b : s.scene.graph.nodes)
      CHECK((a.position - b.position).norm() <= 1.0);
  }
  CHECK(rooms.size() == 4);

  SynthConfig bad = cfg;
  bad.n_rooms = 3;
  CHECK_THROWS_AS(generate_synthetic_scene(bad), std::invalid_argument);
}

TEST_CASE("analytic annotation fills bands the way the pipeline converges to") {
  const SyntheticScene s = generate_synthetic_scene(small_config(85));
  const AnnotationSet set = oracle_annotations(s, 0);
  const GridSpec& ego = set.fine.spec;
  const Vec3 vp = s.scene.graph.node(0).position;

  // Default range: floor plane lands in cell 3, ceiling band starts at 30.
  const int floor_band = world_to_cell(Vec3(vp.x(), vp.y(), 0.0), ego)->z;
  const int ceil_band = world_to_cell(Vec3(vp.x(), vp.y(), 2.7), ego)->z;
  CHECK(floor_band == 3);
  CHECK(ceil_band == 30);

  // The viewpoint's own column: floor band, free air, ceiling band, and the
  // below-floor copy of the floor label.
  const auto vc = world_to_cell(vp, ego);
  REQUIRE(vc.has_value());
  const uint16_t floor_cls = class_id_from_name("floor");
  const uint16_t ceiling_cls = class_id_from_name("ceiling");
  CHECK(set.fine.at({vc->x, vc->y, floor_band}) == floor_cls);
  for (int z = 0; z < floor_band; ++z) CHECK(set.fine.at({vc->x, vc->y, z}) == floor_cls);
  CHECK(set.fine.at({vc->x, vc->y, floor_band + 1}) == kLabelFree);
  CHECK(set.fine.at({vc->x, vc->y, ceil_band - 1}) == kLabelFree);
  for (int z = ceil_band; z < ego.dim_z(); ++z)
    CHECK(set.fine.at({vc->x, vc->y, z}) == ceiling_cls);

  // A column beyond the building footprint reads as solid wall below the
  // ceiling band.
  const uint16_t wall_cls = class_id_from_name("wall");
  int exterior_x = -1;
  for (int x = 0; x < ego.dim_x(); ++x) {
    const Vec3 c = ego.cell_center({x, vc->y, 0});
    if (!s.world.in_footprint(c.x(), c.y())) {
      exterior_x = x;
      break;
    }
  }
  REQUIRE(exterior_x >= 0);
  for (int z = floor_band; z < ceil_band; ++z) {
    const uint16_t l = set.fine.at({exterior_x, vc->y, z});
    CHECK((l == wall_cls || l == class_id_from_name("window")));
  }

  // Boxes and layout mirror the viewpoint's room.
  const int room = s.world.room_of(vp.x(), vp.y());
  REQUIRE(room >= 0);
  REQUIRE(set.layout.has_value());
  CHECK(set.layout->center == s.world.rooms[room].center);
  for (const auto& b : set.boxes)
    CHECK(s.world.rooms[room].as_box().contains(b.geom.center));

  // The coarser grids are the label-mode chain.
  CHECK(downsample_labels(set.fine, 2).labels == set.half.labels);
  CHECK(downsample_labels(set.half, 2).labels == set.quarter.labels);
}
