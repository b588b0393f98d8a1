#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "voxnav/voxel.hpp"

// Nearest-neighbor label densification: every unknown cell inherits the label
// of the nearest semantically labeled cell (Euclidean distance between cell
// centers). Free cells are left alone. The result must be label-exact against
// a brute-force scan, so distances are exact integers (squared cell offsets)
// and ties go to the lexicographically smallest seed cell.

namespace voxnav {

namespace detail {

struct Seed {
  CellIndex cell;
  uint16_t label;
};

/// Exact nearest seed of `q` by (squared distance, lexicographic cell).
inline const Seed* nearest_seed_scan(const std::vector<Seed>& seeds, const CellIndex& q) {
  const Seed* best = nullptr;
  int64_t best_d2 = std::numeric_limits<int64_t>::max();
  for (const auto& s : seeds) {
    const int64_t dx = s.cell.x - q.x, dy = s.cell.y - q.y, dz = s.cell.z - q.z;
    const int64_t d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best_d2 || (d2 == best_d2 && s.cell < best->cell)) {
      best_d2 = d2;
      best = &s;
    }
  }
  return best;
}

}  // namespace detail

/// Densifies `grid` in place semantics-wise: unknown cells receive the label
/// of their nearest labeled cell; free and labeled cells pass through.
/// Throws if no cell carries a semantic label.
inline VoxelGrid densify_nearest_neighbor(const VoxelGrid& grid) {
  const GridSpec& spec = grid.spec;
  const int X = spec.dim_x(), Y = spec.dim_y(), Z = spec.dim_z();

  std::vector<detail::Seed> seeds;
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y)
      for (int z = 0; z < Z; ++z) {
        const uint16_t l = grid.at({x, y, z});
        if (is_semantic(l)) seeds.push_back({{x, y, z}, l});
      }
  if (seeds.empty())
    throw std::invalid_argument("densify_nearest_neighbor: grid has no labeled cell");

  VoxelGrid out = grid;

  // With few seeds a direct scan per query is both fastest and trivially
  // exact. With many (the usual case after voxelization: surfaces everywhere)
  // we search outward in Chebyshev shells around each query, which touches
  // only a handful of cells. A shell at radius r cannot contain a seed closer
  // than r cells, so the search is complete once r*r exceeds the best squared
  // distance found — scanning the whole tying shell first keeps the
  // lexicographic tie-break identical to the brute-force rule.
  const bool sparse = seeds.size() < 4096;

  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y)
      for (int z = 0; z < Z; ++z) {
        const CellIndex q{x, y, z};
        if (grid.at(q) != kLabelUnknown) continue;
        if (sparse) {
          out.at(q) = detail::nearest_seed_scan(seeds, q)->label;
          continue;
        }
        int64_t best_d2 = std::numeric_limits<int64_t>::max();
        CellIndex best_cell{};
        uint16_t best_label = kLabelUnknown;
        const int r_max = std::max({X, Y, Z});
        for (int r = 1; r <= r_max; ++r) {
          const int64_t r2 = static_cast<int64_t>(r) * r;
          if (r2 > best_d2) break;  // no closer or tying seed can remain
          const int x0 = x - r, x1 = x + r, y0 = y - r, y1 = y + r, z0 = z - r, z1 = z + r;
          for (int sx = std::max(x0, 0); sx <= std::min(x1, X - 1); ++sx)
            for (int sy = std::max(y0, 0); sy <= std::min(y1, Y - 1); ++sy) {
              const bool face_xy = sx == x0 || sx == x1 || sy == y0 || sy == y1;
              for (int sz = std::max(z0, 0); sz <= std::min(z1, Z - 1); ++sz) {
                if (!face_xy && sz != z0 && sz != z1) {
                  sz = std::max(z1, 0) - 1;  // interior: jump to the far face
                  continue;
                }
                const uint16_t l = grid.at({sx, sy, sz});
                if (!is_semantic(l)) continue;
                const int64_t dx = sx - x, dy = sy - y, dz = sz - z;
                const int64_t d2 = dx * dx + dy * dy + dz * dz;
                const CellIndex sc{sx, sy, sz};
                if (d2 < best_d2 || (d2 == best_d2 && sc < best_cell)) {
                  best_d2 = d2;
                  best_cell = sc;
                  best_label = l;
                }
              }
            }
        }
        out.at(q) = best_label;
      }
  return out;
}

}  // namespace voxnav
