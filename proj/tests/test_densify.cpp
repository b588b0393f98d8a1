#include <catch2/catch_amalgamated.hpp>

#include "voxnav/densify.hpp"
#include "voxnav/rng.hpp"

using namespace voxnav;

namespace {

// Straight-line reference: for every unknown cell, scan every seed.
VoxelGrid densify_reference(const VoxelGrid& grid) {
  struct Seed {
    CellIndex cell;
    uint16_t label;
  };
  std::vector<Seed> seeds;
  const GridSpec& s = grid.spec;
  for (int x = 0; x < s.dim_x(); ++x)
    for (int y = 0; y < s.dim_y(); ++y)
      for (int z = 0; z < s.dim_z(); ++z)
        if (is_semantic(grid.at({x, y, z}))) seeds.push_back({{x, y, z}, grid.at({x, y, z})});
  VoxelGrid out = grid;
  for (int x = 0; x < s.dim_x(); ++x)
    for (int y = 0; y < s.dim_y(); ++y)
      for (int z = 0; z < s.dim_z(); ++z) {
        if (grid.at({x, y, z}) != kLabelUnknown) continue;
        int64_t best = std::numeric_limits<int64_t>::max();
        CellIndex best_cell{};
        uint16_t label = kLabelUnknown;
        for (const auto& seed : seeds) {
          const int64_t dx = seed.cell.x - x, dy = seed.cell.y - y, dz = seed.cell.z - z;
          const int64_t d2 = dx * dx + dy * dy + dz * dz;
          if (d2 < best || (d2 == best && seed.cell < best_cell)) {
            best = d2;
            best_cell = seed.cell;
            label = seed.label;
          }
        }
        out.at({x, y, z}) = label;
      }
  return out;
}

}  // namespace

TEST_CASE("equidistant seeds tie to the lexicographically smaller cell") {
  const GridSpec spec(0, 0.3, 0, 0.1, 0, 0.1, 0.1);  // 3x1x1
  VoxelGrid g(spec);
  g.at({0, 0, 0}) = 5;
  g.at({2, 0, 0}) = 7;
  const VoxelGrid d = densify_nearest_neighbor(g);
  CHECK(d.at({1, 0, 0}) == 5);  // both seeds at distance 1; (0,0,0) < (2,0,0)
  CHECK(d.at({0, 0, 0}) == 5);  // seeds unchanged
  CHECK(d.at({2, 0, 0}) == 7);
}

TEST_CASE("free cells pass through untouched") {
  const GridSpec spec(0, 0.4, 0, 0.1, 0, 0.1, 0.1);
  VoxelGrid g(spec);
  g.at({0, 0, 0}) = 3;
  g.at({1, 0, 0}) = kLabelFree;
  const VoxelGrid d = densify_nearest_neighbor(g);
  CHECK(d.at({1, 0, 0}) == kLabelFree);
  CHECK(d.at({2, 0, 0}) == 3);
  CHECK(d.at({3, 0, 0}) == 3);
}

TEST_CASE("densify refuses a grid with no labeled cell") {
  const GridSpec spec(0, 0.2, 0, 0.2, 0, 0.2, 0.1);
  VoxelGrid g(spec);
  g.at({0, 0, 0}) = kLabelFree;
  CHECK_THROWS_AS(densify_nearest_neighbor(g), std::invalid_argument);
}

TEST_CASE("sparse-seed grids match the straight-line reference") {
  Rng rng(stream_seed(21, "densify-sparse"));
  for (int trial = 0; trial < 12; ++trial) {
    const GridSpec spec(0, 1.2, 0, 1.0, 0, 0.8, 0.1);  // 12x10x8
    VoxelGrid g(spec);
    const int n_seeds = 2 + static_cast<int>(rng.uniform_index(30));
    for (int i = 0; i < n_seeds; ++i) {
      const CellIndex c{static_cast<int>(rng.uniform_index(12)),
                        static_cast<int>(rng.uniform_index(10)),
                        static_cast<int>(rng.uniform_index(8))};
      g.at(c) = static_cast<uint16_t>(rng.uniform_index(kNumClasses));
    }
    for (int i = 0; i < 40; ++i) {
      const CellIndex c{static_cast<int>(rng.uniform_index(12)),
                        static_cast<int>(rng.uniform_index(10)),
                        static_cast<int>(rng.uniform_index(8))};
      if (g.at(c) == kLabelUnknown) g.at(c) = kLabelFree;
    }
    const VoxelGrid got = densify_nearest_neighbor(g);
    const VoxelGrid want = densify_reference(g);
    REQUIRE(got.labels == want.labels);
  }
}

TEST_CASE("dense-seed grids take the shell search and still match") {
  // Enough seeds to leave the per-query linear scan behind, few enough that
  // the reference stays quick: ~4.3k seeds in a 4.8k-cell grid.
  Rng rng(stream_seed(22, "densify-dense"));
  const GridSpec spec(0, 2.0, 0, 2.0, 0, 1.2, 0.1);  // 20x20x12
  VoxelGrid g(spec);
  size_t seeded = 0;
  for (size_t f = 0; f < spec.cell_count(); ++f) {
    const double roll = rng.uniform();
    if (roll < 0.88) {
      g.labels[f] = static_cast<uint16_t>(rng.uniform_index(kNumClasses));
      ++seeded;
    } else if (roll < 0.93) {
      g.labels[f] = kLabelFree;
    }
  }
  REQUIRE(seeded >= 4096);  // guard: this case must exercise the dense path
  const VoxelGrid got = densify_nearest_neighbor(g);
  const VoxelGrid want = densify_reference(g);
  REQUIRE(got.labels == want.labels);
  for (uint16_t l : got.labels) CHECK(l != kLabelUnknown);
}
