#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxnav/boxes.hpp"
#include "voxnav/geometry.hpp"

// Scene domain model: semantic class table, labeled point cloud, navigation
// graph, camera rigs. A Scene is the ground-truth world a simulated agent
// perceives and moves through.

namespace voxnav {

// Semantic classes. Index 0 is the unlabeled catch-all; ids 1..4 are
// structural stuff; ids 5..15 are countable foreground objects that carry
// instance tags.
inline constexpr std::array<const char*, 16> kClassNames = {
    "void",    "wall",    "floor", "ceiling", "window", "chair",  "table", "picture",
    "cabinet", "cushion", "sofa",  "bed",     "plant",  "sink",   "toilet", "tv"};

inline constexpr uint16_t kNumClasses = 16;
inline constexpr uint16_t kFirstObjectClass = 5;  // ids >= this carry instances

inline bool is_object_class(uint16_t cls) { return cls >= kFirstObjectClass && cls < kNumClasses; }

inline uint16_t class_id_from_name(const std::string& name) {
  for (uint16_t i = 0; i < kClassNames.size(); ++i)
    if (name == kClassNames[i]) return i;
  throw std::invalid_argument("unknown semantic class: " + name);
}

/// One labeled 3D sample. instance_id is -1 for structural points and unique
/// per object otherwise.
struct LabeledPoint {
  Vec3 position = Vec3::Zero();
  uint16_t class_id = 0;
  int32_t instance_id = -1;
};

struct SemanticPointCloud {
  std::vector<LabeledPoint> points;

  void validate() const {
    for (const auto& p : points) {
      if (p.class_id >= kNumClasses)
        throw std::invalid_argument("SemanticPointCloud: class id out of range");
      if (is_object_class(p.class_id) && p.instance_id < 0)
        throw std::invalid_argument("SemanticPointCloud: foreground point without an instance id");
      if (!is_object_class(p.class_id) && p.instance_id >= 0)
        throw std::invalid_argument("SemanticPointCloud: instance tag on a structural class");
    }
  }
};

/// Navigation graph node: a position the agent can stand at.
struct GraphNode {
  uint32_t id = 0;
  Vec3 position = Vec3::Zero();
};

struct SceneGraph {
  std::vector<GraphNode> nodes;                      // ids are dense 0..n-1
  std::vector<std::pair<uint32_t, uint32_t>> edges;  // undirected, a < b, sorted

  const GraphNode& node(uint32_t id) const {
    if (id >= nodes.size()) throw std::out_of_range("SceneGraph: node id out of range");
    return nodes[id];
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

  /// Whether an edge joins the two nodes.
  bool connected(uint32_t a, uint32_t b) const {
    if (a > b) std::swap(a, b);
    return std::find(edges.begin(), edges.end(), std::make_pair(a, b)) != edges.end();
  }

  bool connected() const {
    if (nodes.empty()) return true;
    std::vector<char> seen(nodes.size(), 0);
    std::vector<uint32_t> stack = {0};
    seen[0] = 1;
    while (!stack.empty()) {
      uint32_t v = stack.back();
      stack.pop_back();
      for (uint32_t n : neighbors(v))
        if (!seen[n]) {
          seen[n] = 1;
          stack.push_back(n);
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  }

  void validate() const {
    for (uint32_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id != i)
        throw std::invalid_argument("SceneGraph: node ids must be dense 0..n-1");
    for (const auto& [a, b] : edges) {
      if (a >= nodes.size() || b >= nodes.size())
        throw std::invalid_argument("SceneGraph: edge (" + std::to_string(a) + "," +
                                    std::to_string(b) + ") references a missing node");
      if (a >= b) throw std::invalid_argument("SceneGraph: edges must be stored with a < b");
    }
    for (size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i - 1] < edges[i]))
        throw std::invalid_argument("SceneGraph: edges must be sorted and unique");
    if (!connected()) throw std::invalid_argument("SceneGraph: graph is not connected");
  }
};

/// A language instruction, already embedded: one D_w column per token.
/// The raw string is optional metadata; all computation uses the embeddings.
struct Instruction {
  Eigen::MatrixXd tokens;  // D_w x L, L >= 1
  std::string text;

  void validate() const {
    if (tokens.cols() < 1) throw std::invalid_argument("Instruction: needs at least one token");
  }
};

struct Scene {
  std::string name;
  GridSpec bounds;  // metric extent of the whole scene at annotation resolution
  SemanticPointCloud cloud;
  SceneGraph graph;
  std::vector<std::vector<Camera>> rigs;  // per graph node: the panorama cameras

  void validate() const {
    bounds.validate();
    cloud.validate();
    graph.validate();
    if (rigs.size() != graph.nodes.size())
      throw std::invalid_argument("Scene: need exactly one camera rig per graph node");
    for (const auto& rig : rigs)
      for (const auto& cam : rig) cam.validate();
  }
};

}  // namespace voxnav
