#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "voxnav/encoder.hpp"
#include "voxnav/mlt.hpp"

// Volume-state navigation policy: a transformer refines the finest volume
// features jointly with the instruction tokens, a linear head turns every
// cell into a logit, and the softmax over cells is the agent's belief over
// "where to go next". Actions are read off the volume state by pooling cell
// probabilities around candidate viewpoints.

namespace voxnav {

/// Cells are processed in height groups (contiguous bands of z layers) so
/// token counts stay manageable; the transformer weights are shared across
/// groups. Z must divide evenly into the groups.
inline int height_group_of(int z, int dim_z, int groups) {
  return z * groups / dim_z;
}

struct StateEstimate {
  Eigen::VectorXd dist;     // over cells in flat order; sums to 1
  Eigen::MatrixXd refined;  // cells x D, transformer-updated features
};

/// Joint instruction/volume refinement and per-cell state distribution.
/// `instruction` carries one token per row (L x D).
inline StateEstimate estimate_state(const Eigen::MatrixXd& instruction, const VolumeFeature& vol,
                                    int height_groups, const TransformerParams& mlt,
                                    const Eigen::VectorXd& head_w, double head_b) {
  const int Z = vol.spec.dim_z();
  if (height_groups < 1 || Z % height_groups != 0)
    throw std::invalid_argument("estimate_state: height groups must evenly divide z layers");
  if (instruction.cols() != vol.data.cols())
    throw std::invalid_argument("estimate_state: instruction and volume widths differ");
  const Eigen::Index L = instruction.rows();
  const size_t n = vol.spec.cell_count();

  StateEstimate est;
  est.refined.resize(vol.data.rows(), vol.data.cols());
  for (int g = 0; g < height_groups; ++g) {
    std::vector<size_t> cells;
    for (size_t i = 0; i < n; ++i)
      if (height_group_of(vol.spec.from_flat(i).z, Z, height_groups) == g) cells.push_back(i);
    Eigen::MatrixXd tokens(L + static_cast<Eigen::Index>(cells.size()), vol.data.cols());
    tokens.topRows(L) = instruction;
    for (size_t j = 0; j < cells.size(); ++j)
      tokens.row(L + static_cast<Eigen::Index>(j)) =
          vol.data.row(static_cast<Eigen::Index>(cells[j]));
    const Eigen::MatrixXd out = apply_transformer(tokens, mlt);
    for (size_t j = 0; j < cells.size(); ++j)
      est.refined.row(static_cast<Eigen::Index>(cells[j])) =
          out.row(L + static_cast<Eigen::Index>(j));
  }

  Eigen::VectorXd logits(static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i)
    logits[static_cast<Eigen::Index>(i)] =
        head_w.dot(est.refined.row(static_cast<Eigen::Index>(i))) + head_b;
  est.dist = softmax(logits);
  return est;
}

/// Collapses a cell distribution to the horizontal plane by summing each
/// column of cells (ascending z). The result sums to 1 like the input.
inline Eigen::MatrixXd collapse_height(const Eigen::VectorXd& dist, const GridSpec& spec) {
  if (dist.size() != static_cast<Eigen::Index>(spec.cell_count()))
    throw std::invalid_argument("collapse_height: distribution does not match the grid");
  Eigen::MatrixXd heat = Eigen::MatrixXd::Zero(spec.dim_x(), spec.dim_y());
  for (int x = 0; x < spec.dim_x(); ++x)
    for (int y = 0; y < spec.dim_y(); ++y)
      for (int z = 0; z < spec.dim_z(); ++z)
        heat(x, y) += dist[static_cast<Eigen::Index>(spec.flat_index({x, y, z}))];
  return heat;
}

/// Probability mass of the 3x3 horizontal neighborhood around each candidate
/// cell, renormalized over candidates. Candidate 0 is the agent's own cell
/// (the stop action). Neighborhoods must lie inside the grid.
inline Eigen::VectorXd map_state_to_action(const Eigen::MatrixXd& heat,
                                           const std::vector<CellIndex>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("map_state_to_action: no candidates");
  Eigen::VectorXd mass(static_cast<Eigen::Index>(candidates.size()));
  for (size_t i = 0; i < candidates.size(); ++i) {
    const CellIndex& c = candidates[i];
    if (c.x < 1 || c.x > heat.rows() - 2 || c.y < 1 || c.y > heat.cols() - 2)
      throw std::invalid_argument("map_state_to_action: candidate neighborhood outside grid");
    double m = 0;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) m += heat(c.x + dx, c.y + dy);
    mass[static_cast<Eigen::Index>(i)] = m;
  }
  const double total = mass.sum();
  if (total <= 0) throw std::invalid_argument("map_state_to_action: zero probability mass");
  return mass / total;
}

/// Gaussian supervision heatmap over the horizontal grid, peak 1 at the goal
/// cell, sigma in cells.
inline Eigen::MatrixXd heatmap_target(const GridSpec& spec, const CellIndex& goal,
                                      double sigma = 3.0) {
  Eigen::MatrixXd t(spec.dim_x(), spec.dim_y());
  for (int x = 0; x < spec.dim_x(); ++x)
    for (int y = 0; y < spec.dim_y(); ++y) {
      const double d2 = double(x - goal.x) * (x - goal.x) + double(y - goal.y) * (y - goal.y);
      t(x, y) = std::exp(-d2 / (2 * sigma * sigma));
    }
  return t;
}

/// Focal loss of the collapsed state distribution against a Gaussian target.
inline double state_loss(const Eigen::MatrixXd& heat, const Eigen::MatrixXd& target,
                         double alpha = 0.25, double gamma = 2.0) {
  if (heat.rows() != target.rows() || heat.cols() != target.cols())
    throw std::invalid_argument("state loss: shape mismatch");
  constexpr double kFloor = 1e-12;
  double loss = 0;
  for (Eigen::Index x = 0; x < heat.rows(); ++x)
    for (Eigen::Index y = 0; y < heat.cols(); ++y) {
      const double pt = std::max(kFloor, 1.0 - std::abs(heat(x, y) - target(x, y)));
      loss += -alpha * std::pow(1.0 - pt, gamma) * std::log(pt);
    }
  return loss / static_cast<double>(heat.size());
}

/// Combines the local action distribution (over the agent's current
/// candidates) with the global one (over all remembered nodes). The local
/// distribution is lifted to the global node list first: nodes outside the
/// local candidate set inherit the local stop probability (reaching them
/// means stopping the local motion and jumping), and the lifted vector is
/// renormalized before blending.
inline Eigen::VectorXd fuse_actions(const Eigen::VectorXd& local,
                                    const std::vector<uint32_t>& local_nodes,
                                    const Eigen::VectorXd& global,
                                    const std::vector<uint32_t>& global_nodes, double w_global) {
  if (local.size() != static_cast<Eigen::Index>(local_nodes.size()) ||
      global.size() != static_cast<Eigen::Index>(global_nodes.size()))
    throw std::invalid_argument("fuse_actions: distribution/node list size mismatch");
  if (w_global < 0 || w_global > 1)
    throw std::invalid_argument("fuse_actions: blend weight outside [0, 1]");
  Eigen::VectorXd lifted(global.size());
  for (size_t i = 0; i < global_nodes.size(); ++i) {
    double v = local[0];  // stop mass, the default for non-adjacent nodes
    for (size_t j = 0; j < local_nodes.size(); ++j)
      if (local_nodes[j] == global_nodes[i]) {
        v = local[static_cast<Eigen::Index>(j)];
        break;
      }
    lifted[static_cast<Eigen::Index>(i)] = v;
  }
  for (uint32_t ln : local_nodes) {
    bool found = false;
    for (uint32_t gn : global_nodes) found = found || gn == ln;
    if (!found) throw std::invalid_argument("fuse_actions: local candidate missing from memory");
  }
  const double s = lifted.sum();
  if (s <= 0) throw std::invalid_argument("fuse_actions: lifted distribution has no mass");
  lifted /= s;
  return w_global * global + (1 - w_global) * lifted;
}

/// Instruction-conditioned object grounding (used for goal-object tasks,
/// enabled by configuration). Object tokens ride through the same per-group
/// transformer alongside instruction and volume tokens; their refined
/// embeddings are summed over groups and scored.
inline Eigen::VectorXd ground_objects(const Eigen::MatrixXd& instruction, const VolumeFeature& vol,
                                      int height_groups, const Eigen::MatrixXd& object_tokens,
                                      const TransformerParams& mlt, const Eigen::VectorXd& head_w,
                                      double head_b) {
  const int Z = vol.spec.dim_z();
  if (height_groups < 1 || Z % height_groups != 0)
    throw std::invalid_argument("ground_objects: height groups must evenly divide z layers");
  if (object_tokens.rows() == 0)
    throw std::invalid_argument("ground_objects: no object tokens");
  const Eigen::Index L = instruction.rows(), N = object_tokens.rows();
  const size_t n = vol.spec.cell_count();
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(N, object_tokens.cols());
  for (int g = 0; g < height_groups; ++g) {
    std::vector<size_t> cells;
    for (size_t i = 0; i < n; ++i)
      if (height_group_of(vol.spec.from_flat(i).z, Z, height_groups) == g) cells.push_back(i);
    Eigen::MatrixXd tokens(L + static_cast<Eigen::Index>(cells.size()) + N, vol.data.cols());
    tokens.topRows(L) = instruction;
    for (size_t j = 0; j < cells.size(); ++j)
      tokens.row(L + static_cast<Eigen::Index>(j)) =
          vol.data.row(static_cast<Eigen::Index>(cells[j]));
    tokens.bottomRows(N) = object_tokens;
    pooled += apply_transformer(tokens, mlt).bottomRows(N);
  }
  Eigen::VectorXd logits(N);
  for (Eigen::Index i = 0; i < N; ++i) logits[i] = head_w.dot(pooled.row(i)) + head_b;
  return softmax(logits);
}

}  // namespace voxnav
