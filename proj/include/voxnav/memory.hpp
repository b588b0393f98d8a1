#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "voxnav/encoder.hpp"
#include "voxnav/mlt.hpp"

// Episodic memory: the online-built graph of viewpoints the agent has seen.
// Every observed viewpoint owns one embedding, updated as a running mean over
// its observations, so nodes keep stable descriptors however often the agent
// looks at them. Node order is insertion order and never changes; action
// distributions over memory refer to that order.

namespace voxnav {

struct MemoryNode {
  uint32_t id = 0;
  Vec3 position = Vec3::Zero();
  Eigen::VectorXd embedding;
  uint32_t observations = 0;
};

struct EpisodicGraph {
  std::vector<MemoryNode> nodes;                     // insertion order
  std::vector<std::pair<uint32_t, uint32_t>> edges;  // a < b, deduplicated

  int index_of(uint32_t id) const {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
  }

  const MemoryNode& node(uint32_t id) const {
    const int i = index_of(id);
    if (i < 0) throw std::invalid_argument("episodic graph: unknown node");
    return nodes[static_cast<size_t>(i)];
  }

  void add_edge(uint32_t a, uint32_t b) {
    if (a == b) throw std::invalid_argument("episodic graph: self edge");
    if (index_of(a) < 0 || index_of(b) < 0)
      throw std::invalid_argument("episodic graph: edge endpoint not in memory");
    const auto e = std::minmax(a, b);
    const std::pair<uint32_t, uint32_t> edge{e.first, e.second};
    if (std::find(edges.begin(), edges.end(), edge) == edges.end()) edges.push_back(edge);
  }

  std::vector<uint32_t> neighbors(uint32_t id) const {
    std::vector<uint32_t> out;
    for (const auto& [a, b] : edges) {
      if (a == id) out.push_back(b);
      if (b == id) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

/// Inserts or refreshes one node. A revisited node's embedding becomes the
/// mean of all embeddings it was ever given, via an observation-count
/// weighted running mean.
inline void update_memory(EpisodicGraph& g, uint32_t id, const Vec3& position,
                          const Eigen::VectorXd& embedding) {
  const int i = g.index_of(id);
  if (i < 0) {
    g.nodes.push_back({id, position, embedding, 1});
    return;
  }
  MemoryNode& n = g.nodes[static_cast<size_t>(i)];
  if (n.embedding.size() != embedding.size())
    throw std::invalid_argument("update_memory: embedding width changed");
  const double c = static_cast<double>(n.observations);
  n.embedding = (n.embedding * c + embedding) / (c + 1.0);
  n.observations += 1;
}

/// Pools the vertical pillar of cells around a horizontal position: the mean
/// feature over the 3x3 cell neighborhood through every z layer. The
/// neighborhood must lie inside the grid.
inline Eigen::VectorXd extract_pillar(const VolumeFeature& vol, const CellIndex& center) {
  const GridSpec& s = vol.spec;
  if (center.x < 1 || center.x > s.dim_x() - 2 || center.y < 1 || center.y > s.dim_y() - 2)
    throw std::invalid_argument("extract_pillar: neighborhood outside grid");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(vol.data.cols());
  int count = 0;
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy)
      for (int z = 0; z < s.dim_z(); ++z) {
        acc += vol.data.row(static_cast<Eigen::Index>(
                                s.flat_index({center.x + dx, center.y + dy, z})))
                   .transpose();
        ++count;
      }
  return acc / static_cast<double>(count);
}

/// Euclidean-weighted shortest path over memory edges, endpoints included.
/// Ties break toward smaller node ids; unreachable targets are an error.
inline std::vector<uint32_t> shortest_path(const EpisodicGraph& g, uint32_t from, uint32_t to) {
  if (g.index_of(from) < 0 || g.index_of(to) < 0)
    throw std::invalid_argument("shortest_path: endpoint not in memory");
  const size_t n = g.nodes.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  std::vector<bool> done(n, false);
  const int src = g.index_of(from), dst = g.index_of(to);
  dist[static_cast<size_t>(src)] = 0;
  for (;;) {
    int cur = -1;
    for (size_t i = 0; i < n; ++i) {  // smallest distance, then smallest id
      if (done[i] || !std::isfinite(dist[i])) continue;
      if (cur < 0 || dist[i] < dist[static_cast<size_t>(cur)] ||
          (dist[i] == dist[static_cast<size_t>(cur)] &&
           g.nodes[i].id < g.nodes[static_cast<size_t>(cur)].id))
        cur = static_cast<int>(i);
    }
    if (cur < 0) break;
    if (cur == dst) break;
    done[static_cast<size_t>(cur)] = true;
    for (const auto& [a, b] : g.edges) {
      if (a != g.nodes[static_cast<size_t>(cur)].id && b != g.nodes[static_cast<size_t>(cur)].id)
        continue;
      const uint32_t other_id = a == g.nodes[static_cast<size_t>(cur)].id ? b : a;
      const int other = g.index_of(other_id);
      const double w =
          (g.nodes[static_cast<size_t>(other)].position - g.nodes[static_cast<size_t>(cur)].position)
              .norm();
      const double nd = dist[static_cast<size_t>(cur)] + w;
      auto& dref = dist[static_cast<size_t>(other)];
      if (nd < dref || (nd == dref && prev[static_cast<size_t>(other)] >= 0 &&
                        g.nodes[static_cast<size_t>(cur)].id <
                            g.nodes[static_cast<size_t>(prev[static_cast<size_t>(other)])].id)) {
        dref = nd;
        prev[static_cast<size_t>(other)] = cur;
      }
    }
  }
  if (!std::isfinite(dist[static_cast<size_t>(dst)]))
    throw std::runtime_error("shortest_path: target unreachable through memory");
  std::vector<uint32_t> path;
  for (int i = dst; i >= 0; i = prev[static_cast<size_t>(i)])
    path.push_back(g.nodes[static_cast<size_t>(i)].id);
  std::reverse(path.begin(), path.end());
  if (path.front() != from) throw std::runtime_error("shortest_path: reconstruction failed");
  return path;
}

/// Global action scores: instruction tokens and node embeddings (insertion
/// order) pass through the transformer together; each node's refined
/// embedding is scored and the result is a distribution over memory nodes.
inline Eigen::VectorXd global_action(const Eigen::MatrixXd& instruction, const EpisodicGraph& g,
                                     const TransformerParams& mlt, const Eigen::VectorXd& head_w,
                                     double head_b) {
  if (g.nodes.empty()) throw std::invalid_argument("global_action: empty memory");
  const Eigen::Index L = instruction.rows(), N = static_cast<Eigen::Index>(g.nodes.size());
  Eigen::MatrixXd tokens(L + N, instruction.cols());
  tokens.topRows(L) = instruction;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (g.nodes[static_cast<size_t>(i)].embedding.size() != instruction.cols())
      throw std::invalid_argument("global_action: embedding width mismatch");
    tokens.row(L + i) = g.nodes[static_cast<size_t>(i)].embedding.transpose();
  }
  const Eigen::MatrixXd out = apply_transformer(tokens, mlt);
  Eigen::VectorXd logits(N);
  for (Eigen::Index i = 0; i < N; ++i) logits[i] = head_w.dot(out.row(L + i)) + head_b;
  return softmax(logits);
}

}  // namespace voxnav
