#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "voxnav/metrics.hpp"
#include "voxnav/rng.hpp"

using namespace voxnav;

namespace {

LabeledBox make_box(double cx, double cy, double cz, double hx, double hy, double hz,
                    uint16_t class_id, int32_t instance) {
  LabeledBox b;
  b.geom.center = Vec3(cx, cy, cz);
  b.geom.half_extents = Vec3(hx, hy, hz);
  b.geom.yaw = 0.0;
  b.class_id = class_id;
  b.instance_id = instance;
  return b;
}

// Full-table dynamic program, kept deliberately different from the rolling
// two-row implementation under test.
double dtw_reference(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  const size_t n = a.size(), m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(m + 1, inf));
  d[0][0] = 0;
  for (size_t i = 1; i <= n; ++i)
    for (size_t j = 1; j <= m; ++j)
      d[i][j] = (a[i - 1] - b[j - 1]).norm() +
                std::min({d[i - 1][j], d[i][j - 1], d[i - 1][j - 1]});
  return d[n][m];
}

}  // namespace

TEST_CASE("path_length and navigation_error on hand paths") {
  const std::vector<Vec3> path{{0, 0, 0}, {3, 4, 0}, {3, 4, 2}};
  CHECK(path_length(path) == Catch::Approx(7.0).epsilon(1e-15));
  CHECK(path_length({{1, 1, 1}}) == 0.0);
  CHECK_THROWS_AS(path_length({}), std::invalid_argument);

  const std::vector<Vec3> goals{{3, 4, 4}, {0, 0, 0}};
  CHECK(navigation_error(path, goals) == Catch::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(navigation_error({}, goals), std::invalid_argument);
  CHECK_THROWS_AS(navigation_error(path, {}), std::invalid_argument);
}

TEST_CASE("success is about the endpoint, oracle success about the whole walk") {
  // Walks straight through the goal and keeps going.
  const std::vector<Vec3> path{{0, 0, 0}, {5, 0, 0}, {10, 0, 0}};
  const std::vector<Vec3> goals{{5, 0, 0}};
  CHECK_FALSE(success(path, goals, 3.0));
  CHECK(oracle_success(path, goals, 3.0));
  CHECK(success(path, {{9, 0, 0}}, 3.0));
  CHECK(success(path, {{13, 0, 0}}, 3.0));  // boundary counts
  CHECK_FALSE(oracle_success(path, {{0, 4, 0}}, 3.0));
}

TEST_CASE("spl rewards staying near the geodesic") {
  CHECK(spl(true, 4.0, 4.0) == 1.0);
  CHECK(spl(true, 4.0, 8.0) == 0.5);
  CHECK(spl(false, 4.0, 4.0) == 0.0);
  CHECK(spl(true, 0.0, 2.0) == 1.0);   // started on the goal
  CHECK(spl(true, 4.0, 1.0) == 1.0);   // traveled below geodesic clamps
}

TEST_CASE("dtw hand values and brute-force parity") {
  const std::vector<Vec3> a{{0, 0, 0}, {1, 0, 0}};
  CHECK(dtw(a, a) == 0.0);

  // Extra trailing node pays exactly its distance to the matched tail.
  const std::vector<Vec3> b{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  CHECK(dtw(a, b) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(dtw(b, a) == Catch::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(dtw({}, a), std::invalid_argument);
  CHECK_THROWS_AS(dtw(a, {}), std::invalid_argument);

  Rng rng(stream_seed(909, "dtw-brute"));
  for (int trial = 0; trial < 24; ++trial) {
    const size_t n = 1 + trial % 6, m = 1 + (trial * 7 + 3) % 6;
    std::vector<Vec3> p, q;
    for (size_t i = 0; i < n; ++i)
      p.emplace_back(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 1));
    for (size_t j = 0; j < m; ++j)
      q.emplace_back(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 1));
    CHECK(dtw(p, q) == Catch::Approx(dtw_reference(p, q)).epsilon(1e-12));
  }
}

TEST_CASE("ndtw and sdtw") {
  const std::vector<Vec3> ref{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  CHECK(ndtw(ref, ref) == 1.0);
  const std::vector<Vec3> walk{{0, 0, 0}, {1, 0, 0}};
  // dtw = 1, reference has 3 nodes, radius 3.
  CHECK(ndtw(walk, ref, 3.0) == Catch::Approx(std::exp(-1.0 / 9.0)).epsilon(1e-15));

  // Endpoint within radius of a goal keeps the ndtw value, otherwise zero.
  CHECK(sdtw(walk, ref, {{1.5, 0, 0}}, 3.0) == Catch::Approx(std::exp(-1.0 / 9.0)).epsilon(1e-15));
  CHECK(sdtw(walk, ref, {{9, 0, 0}}, 3.0) == 0.0);
}

TEST_CASE("cls blends coverage with length fidelity") {
  const std::vector<Vec3> ref{{0, 0, 0}, {4, 0, 0}};
  CHECK(cls(ref, ref) == Catch::Approx(1.0).epsilon(1e-15));

  // Perfect coverage but twice the length halves the score.
  const std::vector<Vec3> lap{{0, 0, 0}, {4, 0, 0}, {8, 0, 0}};
  CHECK(cls(lap, ref, 3.0) == Catch::Approx(0.5).epsilon(1e-12));

  // Single-point reference has no length; pure coverage remains.
  const std::vector<Vec3> point_ref{{1, 0, 0}};
  const std::vector<Vec3> off{{0, 0, 0}};
  CHECK(cls(off, point_ref, 3.0) == Catch::Approx(std::exp(-1.0 / 3.0)).epsilon(1e-12));

  CHECK_THROWS_AS(cls(ref, {}), std::invalid_argument);
}

TEST_CASE("occupancy_scores hand-counted IoU") {
  const GridSpec spec(0, 0.4, 0, 0.1, 0, 0.1, 0.1);  // 4 cells in a row
  VoxelGrid truth(spec), pred(spec);
  truth.labels = {1, 2, kLabelFree, kLabelUnknown};
  pred.labels = {1, 1, kLabelFree, 2};

  const OccupancyScores s = occupancy_scores(pred, truth);
  // Both-occupied cells: 0 and 1. Either-occupied: 0, 1, 3.
  CHECK(s.binary_iou == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
  // Wall: intersection {cell 0}, union {cells 0, 1}.
  CHECK(s.class_iou[1] == Catch::Approx(0.5).epsilon(1e-15));
  // Floor: disjoint cells 1 and 3.
  CHECK(s.class_iou[2] == 0.0);
  CHECK(s.class_iou[3] == -1.0);
  CHECK(s.class_iou[5] == -1.0);
  CHECK(s.mean_iou == Catch::Approx(0.25).epsilon(1e-15));

  // Treating the thirteen absent classes as perfect lifts the mean.
  const OccupancyScores t = occupancy_scores(pred, truth, true);
  CHECK(t.class_iou[3] == 1.0);
  CHECK(t.mean_iou == Catch::Approx((0.5 + 0.0 + 13.0) / 15.0).epsilon(1e-15));
  CHECK(t.binary_iou == s.binary_iou);

  const OccupancyScores self = occupancy_scores(truth, truth);
  CHECK(self.binary_iou == 1.0);
  CHECK(self.class_iou[1] == 1.0);
  CHECK(self.class_iou[2] == 1.0);
  CHECK(self.mean_iou == 1.0);

  VoxelGrid empty_a(spec), empty_b(spec);
  empty_a.labels.assign(4, kLabelFree);
  empty_b.labels.assign(4, kLabelUnknown);
  const OccupancyScores e = occupancy_scores(empty_a, empty_b);
  CHECK(e.binary_iou == 1.0);  // nothing occupied anywhere
  CHECK(e.mean_iou == 0.0);

  VoxelGrid longer(GridSpec(0, 0.5, 0, 0.1, 0, 0.1, 0.1));
  CHECK_THROWS_AS(occupancy_scores(longer, truth), std::invalid_argument);
}

TEST_CASE("average_precision closed forms") {
  CHECK(average_precision({true, true, true}, 3) == Catch::Approx(1.0).epsilon(1e-15));
  // TP, FP, TP over two truth boxes: the 5/6 textbook case.
  CHECK(average_precision({true, false, true}, 2) == Catch::Approx(5.0 / 6.0).epsilon(1e-15));
  // One hit, one truth box forever missed.
  CHECK(average_precision({true}, 2) == Catch::Approx(0.5).epsilon(1e-15));
  // No predictions at all.
  CHECK(average_precision({}, 2) == 0.0);
  // Leading false positive caps precision at 1/2.
  CHECK(average_precision({false, true}, 1) == Catch::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(average_precision({true}, 0), std::invalid_argument);
}

TEST_CASE("detection_scores matches greedily per class") {
  const std::vector<LabeledBox> truth{
      make_box(0, 0, 0, 0.5, 0.5, 0.5, 5, 0),   // chair
      make_box(4, 0, 0, 0.5, 0.5, 0.5, 6, 1),   // table
  };

  SECTION("perfect predictions") {
    const std::vector<ScoredBox> preds{
        {make_box(0, 0, 0, 0.5, 0.5, 0.5, 5, 0), 0.9},
        {make_box(4, 0, 0, 0.5, 0.5, 0.5, 6, 1), 0.8},
    };
    const DetectionScores d = detection_scores(preds, truth);
    CHECK(d.class_ap[5] == 1.0);
    CHECK(d.class_ap[6] == 1.0);
    CHECK(d.class_ap[10] == -1.0);
    CHECK(d.mean_ap == 1.0);
    CHECK(d.recall == 1.0);
  }

  SECTION("high-scoring false positive halves the chair AP") {
    const std::vector<ScoredBox> preds{
        {make_box(9, 9, 0, 0.5, 0.5, 0.5, 5, 0), 0.95},   // far away, FP
        {make_box(0, 0, 0, 0.5, 0.5, 0.5, 5, 1), 0.90},
        {make_box(4, 0, 0, 0.5, 0.5, 0.5, 6, 2), 0.70},
    };
    const DetectionScores d = detection_scores(preds, truth);
    CHECK(d.class_ap[5] == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(d.class_ap[6] == 1.0);
    CHECK(d.mean_ap == Catch::Approx(0.75).epsilon(1e-15));
    CHECK(d.recall == 1.0);
  }

  SECTION("iou threshold decides the match") {
    // Unit cube shifted by half a cell: IoU = 1/3.
    const std::vector<ScoredBox> preds{
        {make_box(0.5, 0, 0, 0.5, 0.5, 0.5, 5, 0), 0.9},
    };
    const DetectionScores strict = detection_scores(preds, truth, 0.5);
    CHECK(strict.class_ap[5] == 0.0);
    CHECK(strict.recall == 0.0);
    const DetectionScores loose = detection_scores(preds, truth, 0.25);
    CHECK(loose.class_ap[5] == 1.0);
    CHECK(loose.recall == Catch::Approx(0.5).epsilon(1e-15));
  }

  SECTION("missing predictions score zero, absent truth scores nothing") {
    const DetectionScores d = detection_scores({}, truth);
    CHECK(d.class_ap[5] == 0.0);
    CHECK(d.class_ap[6] == 0.0);
    CHECK(d.mean_ap == 0.0);
    CHECK(d.recall == 0.0);

    const DetectionScores none = detection_scores({}, {});
    CHECK(none.mean_ap == 0.0);
    CHECK(none.recall == 1.0);
    for (double ap : none.class_ap) CHECK(ap == -1.0);
  }

  SECTION("each truth box is claimed once, best overlap first") {
    const std::vector<LabeledBox> pair{
        make_box(0, 0, 0, 0.5, 0.5, 0.5, 5, 0),
        make_box(0.6, 0, 0, 0.5, 0.5, 0.5, 5, 1),
    };
    // Both predictions overlap both boxes; the higher-scored one grabs its
    // best match, the second takes what is left.
    const std::vector<ScoredBox> preds{
        {make_box(0.6, 0, 0, 0.5, 0.5, 0.5, 5, 0), 0.9},
        {make_box(0.1, 0, 0, 0.5, 0.5, 0.5, 5, 1), 0.8},
    };
    const DetectionScores d = detection_scores(preds, pair, 0.5);
    CHECK(d.class_ap[5] == 1.0);
    CHECK(d.recall == 1.0);
  }
}

TEST_CASE("remote grounding success and its spl weighting") {
  CHECK(remote_grounding_success(true, 4, 4));
  CHECK_FALSE(remote_grounding_success(false, 4, 4));
  CHECK_FALSE(remote_grounding_success(true, 3, 4));
  CHECK_FALSE(remote_grounding_success(true, -1, -1));  // no goal object set

  CHECK(rgspl(true, 3.0, 6.0) == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(rgspl(false, 3.0, 6.0) == 0.0);
}

TEST_CASE("score_episode agrees with the closed forms") {
  const std::vector<Vec3> reference{{0, 0, 0}, {3, 0, 0}};
  const std::vector<Vec3> goals{{3, 0, 0}};
  const std::vector<Vec3> walk{{0, 0, 0}, {0, 4, 0}, {3, 4, 0}, {3, 0, 0}};

  const EpisodeMetrics m = score_episode("ep-1", walk, reference, goals, 3.0, 3.0);
  CHECK(m.id == "ep-1");
  CHECK(m.tl == Catch::Approx(11.0).epsilon(1e-15));
  CHECK(m.ne == 0.0);
  CHECK(m.sr);
  CHECK(m.osr);
  CHECK(m.spl == Catch::Approx(3.0 / 11.0).epsilon(1e-15));
  // Hand DP over the 4x2 cost table gives dtw = 8.
  CHECK(m.ndtw == Catch::Approx(std::exp(-8.0 / 6.0)).epsilon(1e-12));
  CHECK(m.sdtw == Catch::Approx(m.ndtw).epsilon(1e-15));
  CHECK(m.cls == Catch::Approx(3.0 / 11.0).epsilon(1e-12));

  // Stopping short of the goal zeroes the success-gated columns.
  const std::vector<Vec3> short_walk{{0, 0, 0}, {0, 8, 0}};
  const EpisodeMetrics f = score_episode("ep-2", short_walk, reference, goals, 3.0, 3.0);
  CHECK_FALSE(f.sr);
  CHECK(f.spl == 0.0);
  CHECK(f.sdtw == 0.0);
  CHECK(f.ne == Catch::Approx(std::sqrt(9.0 + 64.0)).epsilon(1e-15));
}

TEST_CASE("summarize_metrics averages columns and rates booleans") {
  EpisodeMetrics a, b;
  a.tl = 10;  a.ne = 2;  a.spl = 1.0;  a.ndtw = 0.8;  a.sdtw = 0.8;  a.cls = 0.9;
  a.sr = true;  a.osr = true;
  b.tl = 20;  b.ne = 6;  b.spl = 0.0;  b.ndtw = 0.4;  b.sdtw = 0.0;  b.cls = 0.5;
  b.sr = false;  b.osr = true;

  const MetricSummary s = summarize_metrics({a, b});
  CHECK(s.tl == Catch::Approx(15.0).epsilon(1e-15));
  CHECK(s.ne == Catch::Approx(4.0).epsilon(1e-15));
  CHECK(s.sr == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(s.osr == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(s.spl == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(s.ndtw == Catch::Approx(0.6).epsilon(1e-15));
  CHECK(s.sdtw == Catch::Approx(0.4).epsilon(1e-15));
  CHECK(s.cls == Catch::Approx(0.7).epsilon(1e-15));

  CHECK_THROWS_AS(summarize_metrics({}), std::invalid_argument);
}
