#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "voxnav/annotate.hpp"
#include "voxnav/rng.hpp"
#include "voxnav/scene.hpp"

// Synthetic indoor scenes: a small building of cuboid rooms on a grid, with
// doorways, optional windows, furniture boxes, a navigation graph, and
// panorama camera rigs. Every surface is sampled into the labeled point
// cloud; the exact world model is kept alongside the Scene so annotation
// output can be scored against analytic ground truth.
//
// Geometry conventions the ground-truth oracle relies on:
//  - floor z = 0, ceiling z = 2.7, viewpoints at z = 1.2; with the 0.1 m
//    grid reaching 1.5 m below the viewpoint, structural planes land exactly
//    on cell boundaries in z.
//  - wall planes sit on 0.1-aligned coordinates while viewpoints are jittered
//    on a 0.05-grid offset by 0.025, so no wall plane ever coincides with an
//    egocentric cell boundary in x or y.
//  - object surfaces are sampled on deterministic lattices that include the
//    corners, so a fitted box reproduces the true box to rounding error.

namespace voxnav {

struct SynthConfig {
  uint64_t seed = 1;
  int n_rooms = 3;
  int n_objects = 8;
  double density = 260;         // structural surface points per square meter
  double object_spacing = 0.05;  // lattice pitch on object faces
  bool windows = true;
  // Enclosed-window mode: a 2x2 grid of >= 6 m rooms with all viewpoints in
  // a small central region, so every egocentric perception window lies
  // entirely inside the building (no exterior enters any annotation grid).
  bool central_viewpoints = false;
  std::string name = "synthetic";
};

struct SyntheticWorld {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // building footprint
  double floor_z = 0.0;
  double ceil_z = 2.7;

  struct Hole {
    double lo = 0, hi = 0;      // span along the wall's horizontal axis
    double z_lo = 0, z_hi = 0;  // vertical span
    bool window = false;        // windows carry glass points, doorways are open
  };
  struct Wall {
    int axis = 0;        // 0: plane perpendicular to x, 1: perpendicular to y
    double plane = 0;    // x (or y) coordinate of the plane
    double lo = 0, hi = 0;  // horizontal span along the other axis
    std::vector<Hole> holes;
  };
  std::vector<Wall> walls;
  std::vector<RoomLayout> rooms;     // ground-truth layouts, row-major grid order
  std::vector<LabeledBox> objects;   // ground-truth boxes, instance ids 0..n-1

  bool in_footprint(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }

  int room_of(double x, double y) const {
    for (size_t r = 0; r < rooms.size(); ++r)
      if (rooms[r].as_box().contains(Vec3(x, y, (floor_z + ceil_z) / 2))) return static_cast<int>(r);
    return -1;
  }
};

struct SyntheticScene {
  Scene scene;
  SyntheticWorld world;
};

namespace detail {

inline bool in_hole_rect(const SyntheticWorld::Hole& h, double u, double z) {
  return u >= h.lo && u <= h.hi && z >= h.z_lo && z <= h.z_hi;
}

/// Points on one wall: jittered stratified lattice over span x height,
/// skipping doorway holes and the margin ring around window glass, emitting
/// window-class points on the inset glass rectangle.
inline void sample_wall(const SyntheticWorld::Wall& w, const SyntheticWorld& world,
                        double density, Rng& rng, std::vector<LabeledPoint>& out) {
  const double h = 1.0 / std::sqrt(density);
  const int nu = std::max(1, static_cast<int>(std::ceil((w.hi - w.lo) / h)));
  const int nz = std::max(1, static_cast<int>(std::ceil((world.ceil_z - world.floor_z) / h)));
  const double du = (w.hi - w.lo) / nu, dz = (world.ceil_z - world.floor_z) / nz;
  constexpr double kGlassInset = 0.08;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nz; ++j) {
      const double u = w.lo + (i + rng.uniform()) * du;
      const double z = world.floor_z + (j + rng.uniform()) * dz;
      uint16_t cls = class_id_from_name("wall");
      bool skip = false;
      for (const auto& hole : w.holes) {
        if (!in_hole_rect(hole, u, z)) continue;
        if (hole.window && u >= hole.lo + kGlassInset && u <= hole.hi - kGlassInset &&
            z >= hole.z_lo + kGlassInset && z <= hole.z_hi - kGlassInset) {
          cls = class_id_from_name("window");
        } else {
          skip = true;
        }
        break;
      }
      if (skip) continue;
      LabeledPoint p;
      p.position = w.axis == 0 ? Vec3(w.plane, u, z) : Vec3(u, w.plane, z);
      p.class_id = cls;
      out.push_back(p);
    }
}

inline void sample_horizontal_plane(double z, uint16_t cls, const SyntheticWorld& world,
                                    double density, Rng& rng, std::vector<LabeledPoint>& out) {
  const double h = 1.0 / std::sqrt(density);
  const int nx = std::max(1, static_cast<int>(std::ceil((world.x1 - world.x0) / h)));
  const int ny = std::max(1, static_cast<int>(std::ceil((world.y1 - world.y0) / h)));
  const double dx = (world.x1 - world.x0) / nx, dy = (world.y1 - world.y0) / ny;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      LabeledPoint p;
      p.position = Vec3(world.x0 + (i + rng.uniform()) * dx, world.y0 + (j + rng.uniform()) * dy, z);
      p.class_id = cls;
      out.push_back(p);
    }
}

/// Deterministic lattice over all six faces of a box, endpoints included, so
/// corners and edges are always sampled.
inline void sample_box_surface(const LabeledBox& box, double spacing,
                               std::vector<LabeledPoint>& out) {
  const Vec3 he = box.geom.half_extents;
  const double cy = std::cos(box.geom.yaw), sy = std::sin(box.geom.yaw);
  auto emit = [&](double lx, double ly, double lz) {
    LabeledPoint p;
    p.position = Vec3(box.geom.center.x() + cy * lx - sy * ly,
                      box.geom.center.y() + sy * lx + cy * ly, box.geom.center.z() + lz);
    p.class_id = box.class_id;
    p.instance_id = box.instance_id;
    out.push_back(p);
  };
  auto steps = [spacing](double extent) {
    return std::max(2, static_cast<int>(std::lround(2 * extent / spacing)) + 1);
  };
  const int nx = steps(he.x()), ny = steps(he.y()), nz = steps(he.z());
  auto coord = [](int i, int n, double he_) { return -he_ + 2 * he_ * i / (n - 1); };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      emit(coord(i, nx, he.x()), coord(j, ny, he.y()), -he.z());
      emit(coord(i, nx, he.x()), coord(j, ny, he.y()), he.z());
    }
  for (int i = 0; i < nx; ++i)
    for (int k = 1; k + 1 < nz; ++k) {
      emit(coord(i, nx, he.x()), -he.y(), coord(k, nz, he.z()));
      emit(coord(i, nx, he.x()), he.y(), coord(k, nz, he.z()));
    }
  for (int j = 1; j + 1 < ny; ++j)
    for (int k = 1; k + 1 < nz; ++k) {
      emit(-he.x(), coord(j, ny, he.y()), coord(k, nz, he.z()));
      emit(he.x(), coord(j, ny, he.y()), coord(k, nz, he.z()));
    }
}

struct ObjectTemplate {
  const char* cls;
  double hx, hy, hz;  // half extents
  bool floating;      // wall art and screens hang above the floor
};

inline constexpr ObjectTemplate kObjectTemplates[] = {
    {"chair", 0.25, 0.25, 0.45, false},  {"table", 0.60, 0.40, 0.38, false},
    {"sofa", 0.90, 0.45, 0.40, false},   {"bed", 1.00, 0.75, 0.30, false},
    {"cabinet", 0.40, 0.25, 0.90, false}, {"plant", 0.20, 0.20, 0.55, false},
    {"sink", 0.30, 0.22, 0.42, false},   {"toilet", 0.20, 0.30, 0.40, false},
    {"tv", 0.50, 0.04, 0.30, true},      {"picture", 0.40, 0.025, 0.30, true},
    {"cushion", 0.22, 0.22, 0.08, false},
};

/// Snap to the 0.05-grid offset by 0.025 (see file header).
inline double snap_offgrid(double v) { return std::floor(v / 0.05) * 0.05 + 0.025; }

inline Camera make_camera(const Vec3& position, double azimuth, double elevation) {
  Camera cam;
  cam.width = 224;
  cam.height = 224;
  cam.intrinsics = Mat3::Identity();
  cam.intrinsics(0, 0) = cam.intrinsics(1, 1) = 110.0;
  cam.intrinsics(0, 2) = cam.intrinsics(1, 2) = 112.0;
  const Vec3 forward(std::cos(elevation) * std::cos(azimuth),
                     std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
  const Vec3 up(0, 0, 1);
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right).normalized();
  Mat3 r;  // world -> camera: rows are the camera axes in world coordinates
  r.row(0) = right;
  r.row(1) = down;
  r.row(2) = forward;
  cam.rotation = r;
  cam.translation = -r * position;
  return cam;
}

inline std::vector<Camera> make_rig(const Vec3& position, int n_azimuth, int n_elevation) {
  std::vector<Camera> rig;
  for (int e = 0; e < n_elevation; ++e) {
    const double elev = n_elevation == 1 ? 0.0 : (-30.0 + 60.0 * e / (n_elevation - 1)) * M_PI / 180;
    for (int a = 0; a < n_azimuth; ++a)
      rig.push_back(make_camera(position, 2 * M_PI * a / n_azimuth, elev));
  }
  return rig;
}

}  // namespace detail

inline SyntheticScene generate_synthetic_scene(const SynthConfig& cfg) {
  if (cfg.n_rooms < 1) throw std::invalid_argument("generate_synthetic_scene: n_rooms >= 1");
  if (cfg.central_viewpoints && cfg.n_rooms != 4)
    throw std::invalid_argument("generate_synthetic_scene: central mode is a 2x2 grid (4 rooms)");

  SyntheticScene out;
  SyntheticWorld& world = out.world;
  Rng rng(stream_seed(cfg.seed, "scene-geometry"));

  // --- room grid -----------------------------------------------------------
  const int rows = cfg.central_viewpoints ? 2 : (cfg.n_rooms <= 3 ? 1 : 2);
  const int cols = (cfg.n_rooms + rows - 1) / rows;
  auto pick_span = [&](double lo, double hi) {
    const int steps = static_cast<int>(std::lround((hi - lo) / 0.1));
    return lo + 0.1 * rng.uniform_index(static_cast<uint64_t>(steps) + 1);
  };
  // Room spans are kept small enough that viewpoints in adjacent rooms stay
  // well inside each other's egocentric action grids (6 m half extent).
  std::vector<double> xs = {0.0}, ys = {0.0};
  for (int c = 0; c < cols; ++c)
    xs.push_back(xs.back() + (cfg.central_viewpoints ? pick_span(6.0, 6.2) : pick_span(4.0, 5.0)));
  for (int r = 0; r < rows; ++r)
    ys.push_back(ys.back() + (cfg.central_viewpoints ? pick_span(6.0, 6.2) : pick_span(4.0, 5.0)));
  world.x0 = xs.front();
  world.x1 = xs.back();
  world.y0 = ys.front();
  world.y1 = ys.back();

  const int n_rooms = rows * cols;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      RoomLayout room;
      room.center = Vec3((xs[c] + xs[c + 1]) / 2, (ys[r] + ys[r + 1]) / 2,
                         (world.floor_z + world.ceil_z) / 2);
      room.width = xs[c + 1] - xs[c];
      room.length = ys[r + 1] - ys[r];
      room.height = world.ceil_z - world.floor_z;
      room.rotation = 0;
      world.rooms.push_back(room);
    }

  // --- walls, doorways, windows -------------------------------------------
  const double door_top = world.floor_z + 2.1;
  auto door_span = [&](double lo, double hi) -> std::pair<double, double> {
    // 1 m doorway, roughly centered with a little jitter, kept off the ends.
    const double mid = (lo + hi) / 2 + (cfg.central_viewpoints ? 0.0 : 0.4 * (rng.uniform() - 0.5));
    return {mid - 0.5, mid + 0.5};
  };
  for (int c = 0; c <= cols; ++c) {
    SyntheticWorld::Wall w;
    w.axis = 0;
    w.plane = xs[c];
    w.lo = world.y0;
    w.hi = world.y1;
    if (c > 0 && c < cols) {  // interior: doorway per row cell
      for (int r = 0; r < rows; ++r) {
        auto [lo, hi] = door_span(ys[r], ys[r + 1]);
        w.holes.push_back({lo, hi, world.floor_z, door_top, false});
      }
    } else if (cfg.windows && !cfg.central_viewpoints) {
      for (int r = 0; r < rows; ++r) {
        const double mid = (ys[r] + ys[r + 1]) / 2;
        w.holes.push_back({mid - 0.6, mid + 0.6, 0.9, 1.8, true});
      }
    }
    world.walls.push_back(w);
  }
  for (int r = 0; r <= rows; ++r) {
    SyntheticWorld::Wall w;
    w.axis = 1;
    w.plane = ys[r];
    w.lo = world.x0;
    w.hi = world.x1;
    if (r > 0 && r < rows) {
      for (int c = 0; c < cols; ++c) {
        auto [lo, hi] = door_span(xs[c], xs[c + 1]);
        w.holes.push_back({lo, hi, world.floor_z, door_top, false});
      }
    } else if (cfg.windows && !cfg.central_viewpoints) {
      for (int c = 0; c < cols; ++c) {
        const double mid = (xs[c] + xs[c + 1]) / 2;
        w.holes.push_back({mid - 0.6, mid + 0.6, 0.9, 1.8, true});
      }
    }
    world.walls.push_back(w);
  }

  // --- navigation graph ----------------------------------------------------
  SceneGraph& graph = out.scene.graph;
  std::vector<int> node_room;
  if (cfg.central_viewpoints) {
    const double cx = xs[1], cy_ = ys[1];  // the interior wall junction
    const double off = 0.275;
    const Vec3 spots[4] = {{cx - off, cy_ - off, 1.2},
                           {cx + off, cy_ - off, 1.2},
                           {cx + off, cy_ + off, 1.2},
                           {cx - off, cy_ + off, 1.2}};
    for (uint32_t i = 0; i < 4; ++i) {
      graph.nodes.push_back({i, spots[i]});
      node_room.push_back(world.room_of(spots[i].x(), spots[i].y()));
    }
    graph.edges = {{0, 1}, {0, 3}, {1, 2}, {2, 3}};
    // Doorways must cover the paths between these nodes: recenter the
    // interior doorways on the junction.
    for (auto& w : world.walls)
      for (auto& h : w.holes)
        if (!h.window) {
          const double mid = w.axis == 0 ? cy_ : cx;
          h.lo = mid - 0.7;
          h.hi = mid + 0.7;
        }
  } else {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const int room = r * cols + c;
        const RoomLayout& rm = world.rooms[room];
        const uint32_t id = static_cast<uint32_t>(graph.nodes.size());
        const double jx = (rng.uniform() - 0.5) * 0.6;
        const double jy = (rng.uniform() - 0.5) * 0.6;
        graph.nodes.push_back({id, Vec3(detail::snap_offgrid(rm.center.x() + jx),
                                        detail::snap_offgrid(rm.center.y() + jy), 1.2)});
        node_room.push_back(room);
      }
    // Connect rooms that share an interior wall (every such wall has a door).
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const uint32_t a = static_cast<uint32_t>(r * cols + c);
        if (c + 1 < cols) graph.edges.push_back({a, a + 1});
        if (r + 1 < rows) graph.edges.push_back({a, static_cast<uint32_t>(a + cols)});
      }
    std::sort(graph.edges.begin(), graph.edges.end());
  }

  // --- furniture -----------------------------------------------------------
  Rng obj_rng(stream_seed(cfg.seed, "scene-objects"));
  const double kWallClear = cfg.central_viewpoints ? 1.0 : 0.4;
  constexpr double kGap = 0.3, kNodeClear = 0.7;
  int placed = 0;
  for (int attempt = 0; attempt < cfg.n_objects * 60 && placed < cfg.n_objects; ++attempt) {
    const auto& tpl =
        detail::kObjectTemplates[placed % std::size(detail::kObjectTemplates)];
    const int room = static_cast<int>(obj_rng.uniform_index(n_rooms));
    const RoomLayout& rm = world.rooms[room];
    LabeledBox box;
    box.class_id = class_id_from_name(tpl.cls);
    box.instance_id = placed;
    box.geom.half_extents = Vec3(tpl.hx, tpl.hy, tpl.hz);
    box.geom.yaw = canonical_yaw((obj_rng.uniform() - 0.5) * M_PI);
    const double reach = std::hypot(tpl.hx, tpl.hy);  // footprint circumradius
    const double x_lo = rm.center.x() - rm.width / 2 + kWallClear + reach;
    const double x_hi = rm.center.x() + rm.width / 2 - kWallClear - reach;
    const double y_lo = rm.center.y() - rm.length / 2 + kWallClear + reach;
    const double y_hi = rm.center.y() + rm.length / 2 - kWallClear - reach;
    if (x_lo >= x_hi || y_lo >= y_hi) continue;
    const double zc = tpl.floating ? 1.3 : world.floor_z + tpl.hz;
    box.geom.center = Vec3(obj_rng.uniform(x_lo, x_hi), obj_rng.uniform(y_lo, y_hi), zc);
    bool ok = true;
    for (const auto& other : world.objects) {
      const double min_gap =
          reach + std::hypot(other.geom.half_extents.x(), other.geom.half_extents.y()) + kGap;
      if ((other.geom.center.head<2>() - box.geom.center.head<2>()).norm() < min_gap) ok = false;
    }
    for (const auto& n : graph.nodes)
      if ((n.position.head<2>() - box.geom.center.head<2>()).norm() < reach + kNodeClear)
        ok = false;
    if (!ok) continue;
    world.objects.push_back(box);
    ++placed;
  }

  // --- point cloud ---------------------------------------------------------
  Rng sample_rng(stream_seed(cfg.seed, "scene-sampling"));
  auto& pts = out.scene.cloud.points;
  for (const auto& w : world.walls) detail::sample_wall(w, world, cfg.density, sample_rng, pts);
  detail::sample_horizontal_plane(world.floor_z, class_id_from_name("floor"), world, cfg.density,
                                  sample_rng, pts);
  detail::sample_horizontal_plane(world.ceil_z, class_id_from_name("ceiling"), world, cfg.density,
                                  sample_rng, pts);
  for (const auto& box : world.objects) detail::sample_box_surface(box, cfg.object_spacing, pts);

  // --- rigs, bounds, name --------------------------------------------------
  for (const auto& n : graph.nodes)
    out.scene.rigs.push_back(detail::make_rig(n.position, 12, 3));
  out.scene.bounds = GridSpec(world.x0 - 6.5, world.x1 + 6.5, world.y0 - 6.5, world.y1 + 6.5,
                              world.floor_z - 1.6, world.ceil_z + 2.1, 0.1);
  out.scene.name = cfg.name;
  out.scene.validate();
  return out;
}

/// Analytic ground-truth annotation for one viewpoint: the label every cell
/// of the egocentric grid should carry given the exact world model. Mirrors
/// what the measurement pipeline converges to with dense sampling: amodal
/// object boxes, single-cell structural bands (wall beats floor where they
/// share a cell; the ceiling band starts where walls end), solid labels below
/// the floor, above the ceiling, and beyond the building footprint.
inline AnnotationSet oracle_annotations(const SyntheticScene& synth, uint32_t viewpoint,
                                        const PerceptionRange& range = {}) {
  const SyntheticWorld& w = synth.world;
  const Vec3 vp = synth.scene.graph.node(viewpoint).position;
  const GridSpec ego = range.ego_grid(vp);
  const uint16_t kWall = class_id_from_name("wall");
  const uint16_t kWindow = class_id_from_name("window");
  const uint16_t kFloor = class_id_from_name("floor");
  const uint16_t kCeiling = class_id_from_name("ceiling");

  const int floor_band = world_to_cell(Vec3(vp.x(), vp.y(), w.floor_z), ego)
                             ? world_to_cell(Vec3(vp.x(), vp.y(), w.floor_z), ego)->z
                             : -1;
  const int ceil_band = world_to_cell(Vec3(vp.x(), vp.y(), w.ceil_z), ego)
                            ? world_to_cell(Vec3(vp.x(), vp.y(), w.ceil_z), ego)->z
                            : ego.dim_z();

  // Wall bands: cell index of each wall plane along its axis, in ego cells.
  struct Band {
    const SyntheticWorld::Wall* wall;
    int cell;
  };
  std::vector<Band> bands;
  for (const auto& wall : w.walls) {
    const Vec3 probe = wall.axis == 0 ? Vec3(wall.plane, vp.y(), vp.z())
                                      : Vec3(vp.x(), wall.plane, vp.z());
    if (auto c = world_to_cell(probe, ego)) bands.push_back({&wall, wall.axis == 0 ? c->x : c->y});
  }

  AnnotationSet set;
  set.fine = VoxelGrid(ego, kLabelFree);
  VoxelGrid& g = set.fine;

  const int X = ego.dim_x(), Y = ego.dim_y(), Z = ego.dim_z();

  // Object occupancy is amodal: a cell belongs to a box wherever the two
  // genuinely overlap, with positive footprint area and a z-cell span taken
  // through the same quantization as point binning so a face lying exactly on
  // a cell boundary claims the cell above it, never the one below.
  const auto z_cell = [&](double v) {
    return static_cast<int>(std::floor((v - ego.z_min) / ego.resolution + 1e-9));
  };
  struct ColumnHit {
    int z_lo, z_hi;  // inclusive cell range
    double volume;
    uint16_t cls;
  };
  std::vector<ColumnHit> hits;
  OrientedBox column;
  column.half_extents = Vec3(ego.resolution / 2, ego.resolution / 2, 1.0);

  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y) {
      const Vec3 col = ego.cell_center({x, y, 0});
      const bool inside = w.in_footprint(col.x(), col.y());
      column.center = Vec3(col.x(), col.y(), 0);
      hits.clear();
      for (const auto& obj : w.objects) {
        const auto& he = obj.geom.half_extents;
        const double reach = std::hypot(he.x(), he.y()) + ego.resolution;
        if (std::abs(obj.geom.center.x() - col.x()) > reach ||
            std::abs(obj.geom.center.y() - col.y()) > reach)
          continue;
        if (footprint_intersection_area(obj.geom, column) <= 1e-12) continue;
        hits.push_back(
            {z_cell(obj.geom.z_lo()), z_cell(obj.geom.z_hi()), obj.geom.volume(), obj.class_id});
      }
      // Which wall bands cover this column, and with what label.
      auto wall_label_at = [&](double z) -> uint16_t {
        for (const auto& b : bands) {
          const int idx = b.wall->axis == 0 ? x : y;
          if (idx != b.cell) continue;
          const double u = b.wall->axis == 0 ? col.y() : col.x();
          if (u < b.wall->lo || u > b.wall->hi) continue;
          uint16_t label = kWall;
          bool open = false;
          for (const auto& hole : b.wall->holes) {
            if (!detail::in_hole_rect(hole, u, z)) continue;
            if (hole.window)
              label = kWindow;
            else
              open = true;
            break;
          }
          if (open) continue;
          return label;
        }
        return kLabelFree;
      };
      for (int z = std::max(floor_band, 0); z < Z; ++z) {
        uint16_t label = kLabelFree;
        double best_vol = std::numeric_limits<double>::infinity();
        for (const auto& h : hits)
          if (h.z_lo <= z && z <= h.z_hi && h.volume < best_vol) {
            best_vol = h.volume;
            label = h.cls;
          }
        if (label == kLabelFree) {
          if (z >= ceil_band) {
            label = kCeiling;  // walls stop one cell below the ceiling plane
          } else {
            const double zc = ego.z_min + (z + 0.5) * ego.resolution;
            const uint16_t wl = wall_label_at(zc);
            if (wl != kLabelFree)
              label = wl;
            else if (!inside)
              label = kWall;
            else if (z == floor_band)
              label = kFloor;
          }
        }
        g.at({x, y, z}) = label;
      }
      // Below the floor plane nothing is ever observed; the nearest label is
      // whatever the floor-band cell directly above settled on (an object
      // footprint, a wall base, floor, or solid exterior).
      if (floor_band > 0 && floor_band < Z) {
        const uint16_t base = g.at({x, y, floor_band});
        for (int z = 0; z < floor_band; ++z) g.at({x, y, z}) = base;
      }
    }

  // Ground-truth boxes and layout under the same collection rule as the
  // pipeline: the viewpoint's room when it exists, else anything in range.
  const int room = w.room_of(vp.x(), vp.y());
  if (room >= 0) set.layout = w.rooms[room];
  for (const auto& obj : w.objects) {
    if (set.layout && !set.layout->as_box().contains(obj.geom.center)) continue;
    if (!set.layout) {
      const auto& ctr = obj.geom.center;
      if (ctr.x() < ego.x_min || ctr.x() > ego.x_max || ctr.y() < ego.y_min ||
          ctr.y() > ego.y_max)
        continue;
    }
    set.boxes.push_back(obj);
  }

  set.half = downsample_labels(set.fine, 2);
  set.quarter = downsample_labels(set.half, 2);
  return set;
}

}  // namespace voxnav
