#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "voxnav/boxes.hpp"
#include "voxnav/obb.hpp"
#include "voxnav/rng.hpp"
#include "voxnav/synthetic.hpp"

using namespace voxnav;

namespace {

OrientedBox make_box(double cx, double cy, double cz, double hx, double hy, double hz,
                     double yaw = 0) {
  OrientedBox b;
  b.center = Vec3(cx, cy, cz);
  b.half_extents = Vec3(hx, hy, hz);
  b.yaw = yaw;
  return b;
}

}  // namespace

TEST_CASE("canonical yaw folds the half-turn symmetry") {
  CHECK(canonical_yaw(0.6) == Catch::Approx(0.6));
  CHECK(canonical_yaw(0.6 + M_PI) == Catch::Approx(0.6).margin(1e-12));
  CHECK(canonical_yaw(2.0) == Catch::Approx(2.0 - M_PI));
  CHECK(canonical_yaw(-2.0) == Catch::Approx(M_PI - 2.0));
  CHECK(canonical_yaw(M_PI / 2) == Catch::Approx(-M_PI / 2));  // half-open at +pi/2
  for (double y : {-3.0, -1.0, 0.0, 1.0, 3.0, 6.0}) {
    const double c = canonical_yaw(y);
    CHECK(c >= -M_PI / 2);
    CHECK(c < M_PI / 2);
  }
}

TEST_CASE("rotated containment matches the box frame") {
  const OrientedBox b = make_box(1, 2, 0.5, 1.0, 0.5, 0.5, 0.6);
  const double c = std::cos(0.6), s = std::sin(0.6);
  // A point just inside the +x face, expressed through the yaw rotation.
  const Vec3 inside = b.center + Vec3(c * 0.99, s * 0.99, 0);
  const Vec3 outside = b.center + Vec3(c * 1.01, s * 1.01, 0);
  CHECK(b.contains(inside));
  CHECK_FALSE(b.contains(outside));
  CHECK(b.contains(outside, 0.02));  // tolerance widens the box
  CHECK_FALSE(b.contains(b.center + Vec3(0, 0, 0.51)));
  CHECK(b.contains(b.center + Vec3(0, 0, 0.5)));  // faces are inclusive
}

TEST_CASE("footprint is counter-clockwise and has the right area") {
  const OrientedBox b = make_box(0, 0, 0, 2, 1, 1, 0.3);
  const auto f = b.footprint();
  double twice_area = 0;
  for (int i = 0; i < 4; ++i) {
    const auto& p = f[i];
    const auto& q = f[(i + 1) % 4];
    twice_area += p.x() * q.y() - q.x() * p.y();
  }
  CHECK(twice_area > 0);  // positive signed area = CCW
  CHECK(twice_area / 2 == Catch::Approx(8.0));
  CHECK(b.volume() == Catch::Approx(16.0));
}

TEST_CASE("footprint intersection handles overlap, rotation, and disjoint boxes") {
  const OrientedBox unit = make_box(0.5, 0.5, 0.5, 0.5, 0.5, 0.5);
  const OrientedBox shifted = make_box(1.0, 0.5, 0.5, 0.5, 0.5, 0.5);
  CHECK(footprint_intersection_area(unit, shifted) == Catch::Approx(0.5));
  CHECK(footprint_intersection_area(unit, unit) == Catch::Approx(1.0));

  // A 45-degree square centred on a unit square: the intersection of a unit
  // square and its inscribed-diamond rotation has area 2*(sqrt(2)-1).
  const OrientedBox diamond = make_box(0.5, 0.5, 0.5, 0.5, 0.5, 0.5, M_PI / 4);
  CHECK(footprint_intersection_area(unit, diamond) ==
        Catch::Approx(2 * (std::sqrt(2.0) - 1)).epsilon(1e-9));

  const OrientedBox far = make_box(10, 10, 0.5, 0.5, 0.5, 0.5);
  CHECK(footprint_intersection_area(unit, far) == 0.0);
}

TEST_CASE("3d iou closed forms") {
  const OrientedBox a = make_box(0.5, 0.5, 0.5, 0.5, 0.5, 0.5);
  OrientedBox b = a;
  CHECK(box_iou_3d(a, b) == Catch::Approx(1.0));

  b.center.x() = 1.0;  // half-overlapping unit cubes: 0.5 / 1.5
  CHECK(box_iou_3d(a, b) == Catch::Approx(1.0 / 3.0));

  b.center = Vec3(0.5, 0.5, 5.0);  // no z overlap
  CHECK(box_iou_3d(a, b) == 0.0);
}

TEST_CASE("layout iou sees through the rectangle's symmetry") {
  RoomLayout a;
  a.center = Vec3(1, 2, 1.35);
  a.width = 4;
  a.length = 4;
  a.height = 2.7;
  RoomLayout b = a;
  b.rotation = M_PI / 2;  // square footprint: a quarter turn changes nothing
  CHECK(layout_iou(a, b) == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(a.floor_z() == Catch::Approx(0.0));
  CHECK(a.ceiling_z() == Catch::Approx(2.7));

  b = a;
  b.center.x() += 2.0;  // half footprint overlap
  CHECK(layout_iou(a, b) == Catch::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("box fitting recovers sampled boxes") {
  Rng rng(stream_seed(31, "box-unit"));
  for (int trial = 0; trial < 50; ++trial) {
    OrientedBox truth;
    truth.center = Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.3, 1.5));
    const double hx = rng.uniform(0.4, 1.0);
    truth.half_extents = Vec3(hx, hx / rng.uniform(1.4, 2.2), rng.uniform(0.2, 0.8));
    truth.yaw = canonical_yaw(rng.uniform(-M_PI, M_PI));

    LabeledBox lb;
    lb.geom = truth;
    std::vector<LabeledPoint> pts;
    detail::sample_box_surface(lb, 0.15, pts);
    std::vector<Vec3> xyz;
    for (const auto& p : pts) xyz.push_back(p.position);

    const OrientedBox fit = fit_oriented_box(xyz);
    for (const auto& p : xyz) CHECK(fit.contains(p, 1e-9));

    // Yaw agrees modulo the quarter-turn ambiguity of a rectangle's axes.
    const double diff = fit.yaw - truth.yaw;
    const double k = std::round(diff / (M_PI / 2));
    CHECK(std::abs(diff - k * (M_PI / 2)) < 1e-6);

    // Extents match, axes possibly swapped when yaw is off by a quarter turn.
    const bool swapped = static_cast<int64_t>(std::llround(std::abs(k))) % 2 == 1;
    const double ex = swapped ? truth.half_extents.y() : truth.half_extents.x();
    const double ey = swapped ? truth.half_extents.x() : truth.half_extents.y();
    CHECK(std::abs(fit.half_extents.x() - ex) < 1e-6);
    CHECK(std::abs(fit.half_extents.y() - ey) < 1e-6);
    CHECK(std::abs(fit.half_extents.z() - truth.half_extents.z()) < 1e-6);
  }
}

TEST_CASE("box fitting rejects degenerate inputs") {
  CHECK_THROWS_AS(fit_oriented_box({Vec3(0, 0, 0), Vec3(1, 0, 0)}), std::invalid_argument);
  // Collinear points have no second horizontal axis.
  std::vector<Vec3> line;
  for (int i = 0; i < 10; ++i) line.emplace_back(0.1 * i, 0.2 * i, 0.5);
  CHECK_THROWS_AS(fit_oriented_box(line), std::invalid_argument);
  // Flat (single z) sets have no vertical extent.
  std::vector<Vec3> flat = {Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1), Vec3(1, 1, 1)};
  CHECK_THROWS_AS(fit_oriented_box(flat), std::invalid_argument);
}

TEST_CASE("axis-aligned inputs fit exactly axis-aligned") {
  std::vector<Vec3> pts;
  for (double x : {-1.0, 1.0})
    for (double y : {-0.4, 0.4})
      for (double z : {0.0, 0.6}) pts.emplace_back(x + 5, y - 2, z);
  const OrientedBox fit = fit_oriented_box(pts);
  CHECK(fit.yaw == 0.0);
  CHECK(fit.center.x() == Catch::Approx(5.0));
  CHECK(fit.half_extents.x() == Catch::Approx(1.0));
  CHECK(fit.half_extents.y() == Catch::Approx(0.4));
  CHECK(fit.half_extents.z() == Catch::Approx(0.3));
}

TEST_CASE("box validation flags non-positive extents") {
  OrientedBox b = make_box(0, 0, 0, 1, 1, 0);
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  RoomLayout r;
  r.width = 1;
  r.length = 0;
  r.height = 2;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}
