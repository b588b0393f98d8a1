#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxnav/encoder.hpp"
#include "voxnav/io_util.hpp"
#include "voxnav/memory.hpp"
#include "voxnav/policy.hpp"
#include "voxnav/rng.hpp"
#include "voxnav/scene.hpp"
#include "voxnav/tensor.hpp"

// Episode simulator over scene graphs. The agent stands on a graph node,
// encodes its panorama into a volume, derives local (adjacent) and global
// (episodic memory) action distributions, fuses them, and moves until it
// stops or exhausts its step budget. Choosing a remembered non-adjacent node
// walks there along the shortest remembered route.

namespace voxnav {

struct Episode {
  std::string id;
  std::string scene_dir;  // scene archive location, resolved against the episodes file
  uint32_t start = 0;
  std::vector<uint32_t> goals;
  std::vector<uint32_t> gt_path;
  int max_steps = 15;
  uint64_t instruction_seed = 0;
  int instruction_length = 8;
  int32_t goal_object = -1;  // instance id for grounding tasks, -1 when unused

  void validate() const {
    if (id.empty()) throw std::invalid_argument("episode: empty id");
    if (goals.empty()) throw std::invalid_argument("episode: no goals");
    if (gt_path.empty() || gt_path.front() != start)
      throw std::invalid_argument("episode: reference path must begin at the start node");
    if (max_steps < 1) throw std::invalid_argument("episode: max_steps must be >= 1");
    if (instruction_length < 1) throw std::invalid_argument("episode: empty instruction");
  }
};

inline void save_episodes(const std::vector<Episode>& episodes,
                          const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) io_fail("cannot open " + path.string() + " for writing");
  for (const auto& e : episodes) {
    e.validate();
    os << "episode " << e.id << "\n";
    os << "scene " << e.scene_dir << "\n";
    os << "start " << e.start << "\n";
    os << "goals";
    for (uint32_t g : e.goals) os << ' ' << g;
    os << "\n";
    os << "path";
    for (uint32_t v : e.gt_path) os << ' ' << v;
    os << "\n";
    os << "max_steps " << e.max_steps << "\n";
    os << "instruction " << e.instruction_seed << ' ' << e.instruction_length << "\n";
    os << "goal_object " << e.goal_object << "\n";
    os << "end\n";
  }
  if (!os) io_fail("failed writing " + path.string());
}

inline std::vector<Episode> load_episodes(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) io_fail("cannot open " + path.string());
  std::vector<Episode> episodes;
  std::string line;
  Episode cur;
  bool open = false;
  while (std::getline(is, line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    auto need = [&](size_t n) {
      if (tok.size() < n) io_fail("episodes file: malformed '" + line + "'");
    };
    if (key == "episode") {
      need(2);
      if (open) io_fail("episodes file: missing 'end'");
      cur = Episode{};
      cur.id = tok[1];
      open = true;
    } else if (key == "scene") {
      need(2);
      cur.scene_dir = tok[1];
    } else if (key == "start") {
      need(2);
      cur.start = static_cast<uint32_t>(parse_int(tok[1]));
    } else if (key == "goals") {
      need(2);
      for (size_t i = 1; i < tok.size(); ++i)
        cur.goals.push_back(static_cast<uint32_t>(parse_int(tok[i])));
    } else if (key == "path") {
      need(2);
      for (size_t i = 1; i < tok.size(); ++i)
        cur.gt_path.push_back(static_cast<uint32_t>(parse_int(tok[i])));
    } else if (key == "max_steps") {
      need(2);
      cur.max_steps = static_cast<int>(parse_int(tok[1]));
    } else if (key == "instruction") {
      need(3);
      cur.instruction_seed = parse_uint64(tok[1]);
      cur.instruction_length = static_cast<int>(parse_int(tok[2]));
    } else if (key == "goal_object") {
      need(2);
      cur.goal_object = static_cast<int32_t>(parse_int(tok[1]));
    } else if (key == "end") {
      if (!open) io_fail("episodes file: stray 'end'");
      cur.validate();
      episodes.push_back(cur);
      open = false;
    } else {
      io_fail("episodes file: unknown record '" + key + "'");
    }
  }
  if (open) io_fail("episodes file: unterminated episode");
  return episodes;
}

/// Deterministic instruction features: L rows of width D from a seeded
/// stream, standing in for encoded instruction tokens.
inline Eigen::MatrixXd seeded_instruction(uint64_t seed, int length, int width) {
  return seeded_tensor("instruction", {length, width}, seed, 1.0).matrix();
}

// --- trajectories ------------------------------------------------------------

struct TrajectoryStep {
  int step = 0;
  uint32_t viewpoint = 0;   // the node chosen at this decision
  double chosen_prob = 0;  // fused probability of that choice
};

struct Trajectory {
  std::string episode_id;
  std::vector<TrajectoryStep> steps;
  std::vector<uint32_t> walk;  // every node traversed, jumps expanded
  std::string reason;          // "stop" or "step-limit"
};

inline void save_trajectories(const std::vector<Trajectory>& trajectories,
                              const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) io_fail("cannot open " + path.string() + " for writing");
  for (const auto& t : trajectories) {
    os << "trajectory " << t.episode_id << "\n";
    for (const auto& s : t.steps)
      os << "step " << s.step << ' ' << s.viewpoint << ' ' << format_double(s.chosen_prob)
         << "\n";
    os << "walk";
    for (uint32_t v : t.walk) os << ' ' << v;
    os << "\n";
    os << "reason " << t.reason << "\n";
    os << "end\n";
  }
  if (!os) io_fail("failed writing " + path.string());
}

inline std::vector<Trajectory> load_trajectories(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) io_fail("cannot open " + path.string());
  std::vector<Trajectory> out;
  Trajectory cur;
  bool open = false;
  std::string line;
  while (std::getline(is, line)) {
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "trajectory" && tok.size() == 2) {
      if (open) io_fail("trajectory file: missing 'end'");
      cur = Trajectory{};
      cur.episode_id = tok[1];
      open = true;
    } else if (tok[0] == "step" && tok.size() == 4) {
      cur.steps.push_back({static_cast<int>(parse_int(tok[1])),
                           static_cast<uint32_t>(parse_int(tok[2])), parse_double(tok[3])});
    } else if (tok[0] == "walk") {
      for (size_t i = 1; i < tok.size(); ++i)
        cur.walk.push_back(static_cast<uint32_t>(parse_int(tok[i])));
    } else if (tok[0] == "reason" && tok.size() == 2) {
      cur.reason = tok[1];
    } else if (tok[0] == "end") {
      if (!open) io_fail("trajectory file: stray 'end'");
      out.push_back(cur);
      open = false;
    } else {
      io_fail("trajectory file: malformed '" + line + "'");
    }
  }
  if (open) io_fail("trajectory file: unterminated trajectory");
  return out;
}

// --- the agent ---------------------------------------------------------------

struct AgentParams {
  EncoderConfig encoder_config;
  EncoderParams encoder;
  TransformerParams state_mlt;
  Eigen::VectorXd state_head_w;
  double state_head_b = 0;
  TransformerParams global_mlt;
  Eigen::VectorXd global_head_w;
  double global_head_b = 0;
  int height_groups = 4;
  double w_global = 0.5;
  int feature_height = 12, feature_width = 12;  // view feature map size
  uint64_t feature_seed = 0;                    // procedural backbone stream
  bool sample_actions = false;                  // argmax when false
};

/// Everything seeded, reproducibly, from one number.
inline AgentParams seeded_agent_params(const EncoderConfig& cfg, uint64_t seed) {
  AgentParams a;
  a.encoder_config = cfg;
  a.encoder = seeded_encoder_params(cfg, seed);
  a.state_mlt = seeded_transformer_params(cfg.d_model, 4, seed, "policy.state");
  a.state_head_w = seeded_tensor("policy.state.head", {cfg.d_model}, seed).vector();
  a.global_mlt = seeded_transformer_params(cfg.d_model, 4, seed, "policy.global");
  a.global_head_w = seeded_tensor("policy.global.head", {cfg.d_model}, seed).vector();
  a.feature_seed = stream_seed(seed, "backbone");
  return a;
}

namespace detail {

inline std::vector<ViewFeature> observe(const Scene& scene, uint32_t node,
                                        const AgentParams& agent) {
  const auto& rig = scene.rigs.at(node);
  std::vector<ViewFeature> views;
  views.reserve(rig.size());
  for (size_t v = 0; v < rig.size(); ++v)
    views.push_back(procedural_view_features(agent.feature_seed, node,
                                             static_cast<uint32_t>(v), rig[v],
                                             agent.encoder_config.d_input, agent.feature_height,
                                             agent.feature_width));
  return views;
}

inline size_t choose_action(const Eigen::VectorXd& fused, bool sample, Rng& rng) {
  if (sample) {
    const double u = rng.uniform();
    double acc = 0;
    for (Eigen::Index i = 0; i < fused.size(); ++i) {
      acc += fused[i];
      if (u < acc) return static_cast<size_t>(i);
    }
    return static_cast<size_t>(fused.size() - 1);  // guard against rounding
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < fused.size(); ++i)
    if (fused[i] > fused[best]) best = i;  // ties keep the earlier node
  return static_cast<size_t>(best);
}

}  // namespace detail

/// Runs one episode. Stepping follows the fused action distribution; picking
/// the current node stops. Non-adjacent choices are reached through the
/// episodic graph and every traversed node lands on the walk.
inline Trajectory run_episode(const Scene& scene, const Episode& episode,
                              const AgentParams& agent, Rng& rng) {
  episode.validate();
  scene.graph.node(episode.start);  // throws on bad start
  Trajectory traj;
  traj.episode_id = episode.id;

  const Eigen::MatrixXd instruction = seeded_instruction(
      episode.instruction_seed, episode.instruction_length, agent.encoder_config.d_model);

  EpisodicGraph memory;
  uint32_t cur = episode.start;
  traj.walk.push_back(cur);

  for (int t = 0; t < episode.max_steps; ++t) {
    const Vec3 pos = scene.graph.node(cur).position;
    const auto views = detail::observe(scene, cur, agent);
    const auto pyramid = encode_ver(views, pos, agent.encoder, agent.encoder_config);
    const VolumeFeature& fine = pyramid.back();

    const StateEstimate est = estimate_state(instruction, fine, agent.height_groups,
                                             agent.state_mlt, agent.state_head_w,
                                             agent.state_head_b);
    const Eigen::MatrixXd heat = collapse_height(est.dist, fine.spec);

    // Local candidates: stop first, then graph neighbors in ascending order.
    std::vector<uint32_t> local_nodes = {cur};
    for (uint32_t nb : scene.graph.neighbors(cur)) local_nodes.push_back(nb);
    std::vector<CellIndex> candidate_cells;
    for (uint32_t node : local_nodes) {
      const auto cell = world_to_cell(scene.graph.node(node).position, fine.spec);
      if (!cell)
        throw std::runtime_error("run_episode: candidate viewpoint outside the volume");
      candidate_cells.push_back(*cell);
    }
    const Eigen::VectorXd local = map_state_to_action(heat, candidate_cells);

    // Refresh memory with pillar embeddings for every candidate.
    const VolumeFeature refined{fine.spec, est.refined};
    for (size_t i = 0; i < local_nodes.size(); ++i)
      update_memory(memory, local_nodes[i], scene.graph.node(local_nodes[i]).position,
                    extract_pillar(refined, candidate_cells[i]));
    for (size_t i = 1; i < local_nodes.size(); ++i) memory.add_edge(cur, local_nodes[i]);

    std::vector<uint32_t> memory_nodes;
    for (const auto& n : memory.nodes) memory_nodes.push_back(n.id);
    const Eigen::VectorXd global = global_action(instruction, memory, agent.global_mlt,
                                                 agent.global_head_w, agent.global_head_b);
    const Eigen::VectorXd fused =
        fuse_actions(local, local_nodes, global, memory_nodes, agent.w_global);

    const size_t choice = detail::choose_action(fused, agent.sample_actions, rng);
    const uint32_t chosen = memory_nodes[choice];
    traj.steps.push_back({t, chosen, fused[static_cast<Eigen::Index>(choice)]});

    if (chosen == cur) {
      traj.reason = "stop";
      return traj;
    }
    if (scene.graph.connected(cur, chosen)) {
      traj.walk.push_back(chosen);
    } else {
      const auto route = shortest_path(memory, cur, chosen);
      for (size_t i = 1; i < route.size(); ++i) traj.walk.push_back(route[i]);
    }
    cur = chosen;
  }
  traj.reason = "step-limit";
  return traj;
}

}  // namespace voxnav
