// voxnav: scene synthesis, annotation, encoding, and navigation simulation
// from the command line. Every subcommand is deterministic for a fixed seed:
// rerunning with the same arguments writes byte-identical files.
//
// Exit codes: 0 success, 1 runtime failure (bad file, invalid data), 2 usage.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "voxnav/annotation_io.hpp"
#include "voxnav/config.hpp"
#include "voxnav/metrics.hpp"
#include "voxnav/params_io.hpp"
#include "voxnav/scene_io.hpp"
#include "voxnav/selfcheck.hpp"
#include "voxnav/sim.hpp"
#include "voxnav/synthetic.hpp"
#include "voxnav/tensor.hpp"

namespace fs = std::filesystem;
using namespace voxnav;

namespace {

/// Post-parse argument problems (bad --viewpoint value, malformed --set, ...)
/// that should exit 2 like any other usage error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value pairs
  std::optional<uint64_t> seed;
};

Config make_config(const CommonArgs& common) {
  Config cfg = common.config_path.empty() ? default_config() : load_config(common.config_path);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (common.seed) cfg.seed = *common.seed;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* sub, CommonArgs& common) {
  sub->add_option("--config", common.config_path,
                  "config file (default: $VOXNAV_CONFIG when set)");
  sub->add_option("--set", common.overrides, "override a config entry as key=value")
      ->take_all();
  sub->add_option("--seed", common.seed, "override the config seed");
}

AgentParams agent_from_config(const Config& cfg) {
  AgentParams a = seeded_agent_params(cfg.encoder(), cfg.seed);
  a.height_groups = cfg.height_groups;
  a.w_global = cfg.w_global;
  a.feature_height = cfg.feature_height;
  a.feature_width = cfg.feature_width;
  a.sample_actions = cfg.mode == "sample";
  return a;
}

/// Index-addressed work items on a small thread pool; the first exception
/// wins and is rethrown on the calling thread.
void parallel_for(int jobs, size_t n, const std::function<void(size_t)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const size_t n_threads = std::min(static_cast<size_t>(jobs), n);
  for (size_t t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<uint32_t> hop_shortest_path(const SceneGraph& g, uint32_t from, uint32_t to) {
  std::vector<int> prev(g.nodes.size(), -1);
  std::queue<uint32_t> frontier;
  frontier.push(from);
  prev[from] = static_cast<int>(from);
  while (!frontier.empty() && prev[to] < 0) {
    const uint32_t v = frontier.front();
    frontier.pop();
    for (uint32_t nb : g.neighbors(v))
      if (prev[nb] < 0) {
        prev[nb] = static_cast<int>(v);
        frontier.push(nb);
      }
  }
  if (prev[to] < 0) throw std::runtime_error("scene graph is not connected");
  std::vector<uint32_t> path = {to};
  for (uint32_t v = to; v != from; v = static_cast<uint32_t>(prev[v]))
    path.push_back(static_cast<uint32_t>(prev[v]));
  std::reverse(path.begin(), path.end());
  return path;
}

uint32_t parse_viewpoint(const std::string& text, size_t n_nodes) {
  long long v = 0;
  try {
    v = parse_int(text);
  } catch (const std::exception&) {
    throw UsageError("--viewpoint expects 'all' or a node id, got '" + text + "'");
  }
  if (v < 0 || static_cast<size_t>(v) >= n_nodes)
    throw std::runtime_error("viewpoint " + text + " is out of range (scene has " +
                             std::to_string(n_nodes) + " nodes)");
  return static_cast<uint32_t>(v);
}

// --- gen-scene ----------------------------------------------------------------

struct GenSceneArgs {
  CommonArgs common;
  std::string out;
  std::string name;
  int rooms = 3;
  int objects = 8;
  double density = 260;
  bool central = false;
  bool no_windows = false;
  int episodes = 4;
};

int run_gen_scene(const GenSceneArgs& a) {
  const Config cfg = make_config(a.common);

  SynthConfig synth_cfg;
  synth_cfg.seed = cfg.seed;
  synth_cfg.n_rooms = a.rooms;
  synth_cfg.n_objects = a.objects;
  synth_cfg.density = a.density;
  synth_cfg.central_viewpoints = a.central;
  synth_cfg.windows = !a.no_windows;
  synth_cfg.name = a.name.empty() ? "scene-" + std::to_string(cfg.seed) : a.name;
  const SyntheticScene synth = generate_synthetic_scene(synth_cfg);

  const fs::path dir(a.out);
  save_scene(synth.scene, dir);

  std::vector<ViewpointAnnotation> truth;
  truth.reserve(synth.scene.graph.nodes.size());
  for (uint32_t v = 0; v < synth.scene.graph.nodes.size(); ++v)
    truth.push_back({v, oracle_annotations(synth, v, cfg.range())});
  save_annotations(truth, dir / "truth.vxa");

  if (a.episodes > 0) {
    Rng rng(stream_seed(cfg.seed, "episodes"));
    const uint32_t n = static_cast<uint32_t>(synth.scene.graph.nodes.size());
    std::vector<Episode> episodes;
    for (int i = 0; i < a.episodes; ++i) {
      Episode e;
      e.id = "ep-" + std::to_string(i);
      e.scene_dir = ".";  // relative to the episodes file
      e.start = static_cast<uint32_t>(rng.uniform_index(n));
      uint32_t goal = static_cast<uint32_t>(rng.uniform_index(n));
      while (n > 1 && goal == e.start) goal = static_cast<uint32_t>(rng.uniform_index(n));
      e.goals = {goal};
      e.gt_path = hop_shortest_path(synth.scene.graph, e.start, goal);
      e.max_steps = cfg.max_steps;
      e.instruction_seed = stream_seed(cfg.seed, "instruction-" + e.id);
      e.instruction_length = cfg.instruction_length;
      episodes.push_back(std::move(e));
    }
    save_episodes(episodes, dir / "episodes.txt");
  }

  std::cout << "scene '" << synth_cfg.name << "': " << synth.scene.cloud.points.size()
            << " points, " << synth.scene.graph.nodes.size() << " viewpoints, "
            << synth.world.objects.size() << " objects, " << synth.world.rooms.size()
            << " rooms -> " << dir.string() << "\n";
  return 0;
}

// --- annotate -------------------------------------------------------------------

struct AnnotateArgs {
  CommonArgs common;
  std::string scene;
  std::string viewpoint = "all";
  std::string out;
  int jobs = 1;
};

int run_annotate(const AnnotateArgs& a) {
  const Config cfg = make_config(a.common);
  const Scene scene = load_scene(a.scene);

  std::vector<uint32_t> viewpoints;
  if (a.viewpoint == "all")
    for (uint32_t v = 0; v < scene.graph.nodes.size(); ++v) viewpoints.push_back(v);
  else
    viewpoints.push_back(parse_viewpoint(a.viewpoint, scene.graph.nodes.size()));

  const PerceptionRange range = cfg.range();
  std::vector<ViewpointAnnotation> records(viewpoints.size());
  parallel_for(a.jobs, viewpoints.size(), [&](size_t i) {
    records[i] = {viewpoints[i], generate_annotations(scene, viewpoints[i], range)};
  });
  save_annotations(records, a.out);

  size_t boxes = 0, layouts = 0;
  for (const auto& r : records) {
    boxes += r.set.boxes.size();
    layouts += r.set.layout.has_value();
  }
  std::cout << records.size() << " viewpoints annotated (" << boxes << " boxes, " << layouts
            << " layouts) -> " << a.out << "\n";
  return 0;
}

// --- encode ---------------------------------------------------------------------

struct EncodeArgs {
  CommonArgs common;
  std::string scene;
  std::string viewpoint;
  std::string out;
  std::string params_in;
  std::string params_out;
};

Tensor tensor_from_volume(const std::string& name, const VolumeFeature& vol) {
  Tensor t;
  t.name = name;
  t.dims = {vol.spec.dim_x(), vol.spec.dim_y(), vol.spec.dim_z(), vol.data.cols()};
  t.data.reserve(static_cast<size_t>(vol.data.rows()) * vol.data.cols());
  for (Eigen::Index r = 0; r < vol.data.rows(); ++r)
    for (Eigen::Index c = 0; c < vol.data.cols(); ++c)
      t.data.push_back(static_cast<float>(vol.data(r, c)));
  return t;
}

int run_encode(const EncodeArgs& a) {
  const Config cfg = make_config(a.common);
  const Scene scene = load_scene(a.scene);
  const uint32_t vp = parse_viewpoint(a.viewpoint, scene.graph.nodes.size());

  AgentParams agent = agent_from_config(cfg);
  // encode runs only the encoder, so --params needs just the encoder tensors;
  // a full agent dump works too.
  if (!a.params_in.empty())
    agent.encoder = encoder_from_tensors(load_tensors(a.params_in), agent.encoder_config);
  if (!a.params_out.empty()) {
    TensorFile weights;
    append_encoder_tensors(weights, agent.encoder);
    save_tensors(weights, a.params_out);
  }

  const auto views = detail::observe(scene, vp, agent);
  const auto pyramid = encode_ver(views, scene.graph.node(vp).position, agent.encoder,
                                  agent.encoder_config);

  TensorFile out;
  Eigen::VectorXd position = scene.graph.node(vp).position;
  out.tensors.push_back(tensor_from_vector("viewpoint", position));
  for (size_t level = 0; level < pyramid.size(); ++level)
    out.tensors.push_back(tensor_from_volume("level" + std::to_string(level), pyramid[level]));
  save_tensors(out, a.out);

  std::cout << "encoded node " << vp << " into " << pyramid.size() << " levels (finest "
            << pyramid.back().spec.dim_x() << "x" << pyramid.back().spec.dim_y() << "x"
            << pyramid.back().spec.dim_z() << "x" << pyramid.back().data.cols() << ") -> "
            << a.out << "\n";
  return 0;
}

// --- policy-step ------------------------------------------------------------------

struct PolicyStepArgs {
  CommonArgs common;
  std::string scene;
  std::string viewpoint;
  std::string out;  // empty: stdout
  std::string params_in;
};

int run_policy_step(const PolicyStepArgs& a) {
  const Config cfg = make_config(a.common);
  const Scene scene = load_scene(a.scene);
  const uint32_t cur = parse_viewpoint(a.viewpoint, scene.graph.nodes.size());

  AgentParams agent = agent_from_config(cfg);
  if (!a.params_in.empty()) agent = agent_from_tensors(load_tensors(a.params_in), agent);

  // One decision from a cold start, exactly as the simulator's first step.
  const Eigen::MatrixXd instruction =
      seeded_instruction(stream_seed(cfg.seed, "instruction"), cfg.instruction_length,
                         cfg.d_model);
  const Vec3 pos = scene.graph.node(cur).position;
  const auto views = detail::observe(scene, cur, agent);
  const auto pyramid = encode_ver(views, pos, agent.encoder, agent.encoder_config);
  const VolumeFeature& fine = pyramid.back();

  const StateEstimate est = estimate_state(instruction, fine, agent.height_groups,
                                           agent.state_mlt, agent.state_head_w,
                                           agent.state_head_b);
  const Eigen::MatrixXd heat = collapse_height(est.dist, fine.spec);

  std::vector<uint32_t> local_nodes = {cur};
  for (uint32_t nb : scene.graph.neighbors(cur)) local_nodes.push_back(nb);
  std::vector<CellIndex> cells;
  for (uint32_t node : local_nodes) {
    const auto cell = world_to_cell(scene.graph.node(node).position, fine.spec);
    if (!cell) throw std::runtime_error("candidate viewpoint outside the encoded volume");
    cells.push_back(*cell);
  }
  const Eigen::VectorXd local = map_state_to_action(heat, cells);

  EpisodicGraph memory;
  const VolumeFeature refined{fine.spec, est.refined};
  for (size_t i = 0; i < local_nodes.size(); ++i)
    update_memory(memory, local_nodes[i], scene.graph.node(local_nodes[i]).position,
                  extract_pillar(refined, cells[i]));
  for (size_t i = 1; i < local_nodes.size(); ++i) memory.add_edge(cur, local_nodes[i]);
  std::vector<uint32_t> memory_nodes;
  for (const auto& n : memory.nodes) memory_nodes.push_back(n.id);
  const Eigen::VectorXd global = global_action(instruction, memory, agent.global_mlt,
                                               agent.global_head_w, agent.global_head_b);
  const Eigen::VectorXd fused = fuse_actions(local, local_nodes, global, memory_nodes,
                                             agent.w_global);

  Rng rng(stream_seed(cfg.seed, "policy-step"));
  const size_t choice = detail::choose_action(fused, agent.sample_actions, rng);

  std::ostringstream report;
  report << "viewpoint " << cur << "\n";
  report << "state_sum " << format_double(est.dist.sum()) << "\n";
  for (size_t i = 0; i < memory_nodes.size(); ++i)
    report << "candidate " << memory_nodes[i] << " "
           << format_double(fused[static_cast<Eigen::Index>(i)]) << "\n";
  report << "chosen " << memory_nodes[choice]
         << (memory_nodes[choice] == cur ? " stop" : " move") << "\n";

  if (a.out.empty()) {
    std::cout << report.str();
  } else {
    std::ofstream os(a.out);
    if (!os) throw std::runtime_error("cannot open " + a.out + " for writing");
    os << report.str();
    std::cout << "decision at node " << cur << " -> " << a.out << "\n";
  }
  return 0;
}

// --- simulate -------------------------------------------------------------------

struct SimulateArgs {
  CommonArgs common;
  std::string episodes;
  std::string out;
  std::string params_in;
  int jobs = 1;
};

int run_simulate(const SimulateArgs& a) {
  const Config cfg = make_config(a.common);
  const auto episodes = load_episodes(a.episodes);
  if (episodes.empty()) throw std::runtime_error("no episodes in " + a.episodes);

  AgentParams agent = agent_from_config(cfg);
  if (!a.params_in.empty()) agent = agent_from_tensors(load_tensors(a.params_in), agent);

  // Scene archives load once, keyed by resolved directory.
  const fs::path base = fs::path(a.episodes).parent_path();
  std::map<std::string, Scene> scenes;
  std::vector<const Scene*> scene_of(episodes.size());
  for (size_t i = 0; i < episodes.size(); ++i) {
    const fs::path dir = fs::path(episodes[i].scene_dir).is_absolute()
                             ? fs::path(episodes[i].scene_dir)
                             : base / episodes[i].scene_dir;
    const std::string key = dir.lexically_normal().string();
    auto it = scenes.find(key);
    if (it == scenes.end()) it = scenes.emplace(key, load_scene(dir)).first;
    scene_of[i] = &it->second;
  }

  // One independent stream per episode, so ordering and --jobs cannot change
  // any outcome.
  std::vector<Trajectory> trajectories(episodes.size());
  parallel_for(a.jobs, episodes.size(), [&](size_t i) {
    Rng rng(stream_seed(cfg.seed, "episode-" + episodes[i].id));
    trajectories[i] = run_episode(*scene_of[i], episodes[i], agent, rng);
  });
  save_trajectories(trajectories, a.out);

  size_t stopped = 0;
  for (const auto& t : trajectories) stopped += t.reason == "stop";
  std::cout << trajectories.size() << " episodes simulated (" << stopped << " stopped, "
            << trajectories.size() - stopped << " hit the step limit) -> " << a.out << "\n";
  return 0;
}

// --- evaluate -------------------------------------------------------------------

struct EvaluateArgs {
  CommonArgs common;
  std::string trajectories;
  std::string episodes;
  std::string out;
  std::string perception;  // "predicted.vxa,truth.vxa"
};

int run_evaluate(const EvaluateArgs& a) {
  const Config cfg = make_config(a.common);
  const auto episodes = load_episodes(a.episodes);
  const auto trajectories = load_trajectories(a.trajectories);

  const fs::path base = fs::path(a.episodes).parent_path();
  std::map<std::string, Scene> scenes;
  auto scene_for = [&](const Episode& e) -> const Scene& {
    const fs::path dir = fs::path(e.scene_dir).is_absolute() ? fs::path(e.scene_dir)
                                                             : base / e.scene_dir;
    const std::string key = dir.lexically_normal().string();
    auto it = scenes.find(key);
    if (it == scenes.end()) it = scenes.emplace(key, load_scene(dir)).first;
    return it->second;
  };

  std::vector<EpisodeMetrics> rows;
  for (const auto& traj : trajectories) {
    const Episode* ep = nullptr;
    for (const auto& e : episodes)
      if (e.id == traj.episode_id) {
        ep = &e;
        break;
      }
    if (!ep) throw std::runtime_error("trajectory '" + traj.episode_id +
                                      "' has no matching episode");
    const Scene& scene = scene_for(*ep);
    auto positions = [&](const std::vector<uint32_t>& nodes) {
      std::vector<Vec3> out;
      out.reserve(nodes.size());
      for (uint32_t n : nodes) out.push_back(scene.graph.node(n).position);
      return out;
    };
    const auto walk = positions(traj.walk);
    const auto reference = positions(ep->gt_path);
    const auto goals = positions(ep->goals);
    rows.push_back(score_episode(traj.episode_id, walk, reference, goals,
                                 path_length(reference), cfg.success_radius));
  }
  if (rows.empty()) throw std::runtime_error("no trajectories to score");
  const MetricSummary s = summarize_metrics(rows);

  nlohmann::json doc;
  std::ostringstream text;
  auto emit = [&](const std::string& key, double value) {
    text << key << " " << format_double(value) << "\n";
    doc["summary"][key] = value;
  };
  text << "episodes " << rows.size() << "\n";
  doc["episodes"] = nlohmann::json::array();
  for (const auto& r : rows)
    doc["episodes"].push_back({{"id", r.id},
                               {"tl", r.tl},
                               {"ne", r.ne},
                               {"sr", r.sr},
                               {"osr", r.osr},
                               {"spl", r.spl},
                               {"ndtw", r.ndtw},
                               {"sdtw", r.sdtw},
                               {"cls", r.cls}});
  emit("tl", s.tl);
  emit("ne", s.ne);
  emit("sr", s.sr);
  emit("osr", s.osr);
  emit("spl", s.spl);
  emit("ndtw", s.ndtw);
  emit("sdtw", s.sdtw);
  emit("cls", s.cls);

  if (!a.perception.empty()) {
    const auto comma = a.perception.find(',');
    if (comma == std::string::npos)
      throw UsageError("--perception expects predicted.vxa,truth.vxa");
    const auto predicted = load_annotations(a.perception.substr(0, comma));
    const auto truth = load_annotations(a.perception.substr(comma + 1));
    double binary = 0, miou = 0, map = 0, recall = 0, layout = 0;
    size_t layouts = 0, matched = 0;
    for (const auto& t : truth) {
      const ViewpointAnnotation* p = nullptr;
      for (const auto& cand : predicted)
        if (cand.viewpoint == t.viewpoint) {
          p = &cand;
          break;
        }
      if (!p) continue;
      ++matched;
      const OccupancyScores occ = occupancy_scores(p->set.fine, t.set.fine);
      binary += occ.binary_iou;
      miou += occ.mean_iou;
      std::vector<ScoredBox> scored;
      for (const auto& b : p->set.boxes) scored.push_back({b, 1.0});
      const DetectionScores det = detection_scores(scored, t.set.boxes);
      map += det.mean_ap;
      recall += det.recall;
      if (p->set.layout && t.set.layout) {
        layout += layout_iou(*p->set.layout, *t.set.layout);
        ++layouts;
      }
    }
    if (matched == 0) throw std::runtime_error("--perception archives share no viewpoints");
    const double n = static_cast<double>(matched);
    emit("binary_iou", binary / n);
    emit("miou", miou / n);
    emit("map", map / n);
    emit("detection_recall", recall / n);
    if (layouts > 0) emit("layout_iou", layout / static_cast<double>(layouts));
  }

  {
    std::ofstream os(a.out);
    if (!os) throw std::runtime_error("cannot open " + a.out + " for writing");
    os << text.str();
  }
  {
    std::ofstream os(a.out + ".json");
    if (!os) throw std::runtime_error("cannot open " + a.out + ".json for writing");
    os << doc.dump(2) << "\n";
  }
  std::cout << rows.size() << " episodes scored -> " << a.out << " (+ .json)\n";
  return 0;
}

// --- selfcheck -------------------------------------------------------------------

int run_selfcheck_command(const std::string& out) {
  const auto results = run_selfcheck();
  std::ostringstream report;
  bool all_pass = true;
  for (const auto& r : results) {
    report << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << report.str();
  std::cout << (all_pass ? "all checks passed" : "CHECKS FAILED") << "\n";
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open " + out + " for writing");
    os << report.str();
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"volumetric scene annotation, encoding, and navigation toolkit"};
  app.require_subcommand(1);

  GenSceneArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-scene", "synthesize a scene archive with ground truth");
  gen_cmd->add_option("--out", gen.out, "output scene directory")->required();
  gen_cmd->add_option("--name", gen.name, "scene name (default scene-<seed>)");
  gen_cmd->add_option("--rooms", gen.rooms, "room count");
  gen_cmd->add_option("--objects", gen.objects, "object count");
  gen_cmd->add_option("--density", gen.density, "surface points per square meter");
  gen_cmd->add_flag("--central", gen.central, "one centered viewpoint per room");
  gen_cmd->add_flag("--no-windows", gen.no_windows, "solid outer walls");
  gen_cmd->add_option("--episodes", gen.episodes, "episodes to generate (0 disables)");
  add_common(gen_cmd, gen.common);

  AnnotateArgs ann;
  auto* ann_cmd = app.add_subcommand("annotate", "run the annotation pipeline on a scene");
  ann_cmd->add_option("--scene", ann.scene, "scene archive directory")->required();
  ann_cmd->add_option("--viewpoint", ann.viewpoint, "'all' or one node id (default all)");
  ann_cmd->add_option("--out", ann.out, "output annotation archive")->required();
  ann_cmd->add_option("--jobs", ann.jobs, "viewpoints annotated in parallel");
  add_common(ann_cmd, ann.common);

  EncodeArgs enc;
  auto* enc_cmd = app.add_subcommand("encode", "encode one viewpoint into a feature pyramid");
  enc_cmd->add_option("--scene", enc.scene, "scene archive directory")->required();
  enc_cmd->add_option("--viewpoint", enc.viewpoint, "node id")->required();
  enc_cmd->add_option("--out", enc.out, "output tensor file")->required();
  enc_cmd->add_option("--params", enc.params_in, "load encoder weights from a tensor file");
  enc_cmd->add_option("--params-out", enc.params_out, "also dump the encoder weights");
  add_common(enc_cmd, enc.common);

  PolicyStepArgs pol;
  auto* pol_cmd = app.add_subcommand("policy-step", "one navigation decision at a viewpoint");
  pol_cmd->add_option("--scene", pol.scene, "scene archive directory")->required();
  pol_cmd->add_option("--viewpoint", pol.viewpoint, "node id")->required();
  pol_cmd->add_option("--out", pol.out, "write the decision report here instead of stdout");
  pol_cmd->add_option("--params", pol.params_in, "load weights from a tensor file");
  add_common(pol_cmd, pol.common);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run episodes and record trajectories");
  sim_cmd->add_option("--episodes", sim.episodes, "episodes file")->required();
  sim_cmd->add_option("--out", sim.out, "output trajectory file")->required();
  sim_cmd->add_option("--params", sim.params_in, "load weights from a tensor file");
  sim_cmd->add_option("--jobs", sim.jobs, "episodes simulated in parallel");
  add_common(sim_cmd, sim.common);

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "score trajectories against their episodes");
  ev_cmd->add_option("--trajectories", ev.trajectories, "trajectory file")->required();
  ev_cmd->add_option("--episodes", ev.episodes, "episodes file")->required();
  ev_cmd->add_option("--out", ev.out, "report file ('metric value' lines; .json twin)")
      ->required();
  ev_cmd->add_option("--perception", ev.perception,
                     "also score annotation archives: predicted.vxa,truth.vxa");
  add_common(ev_cmd, ev.common);

  std::string selfcheck_out;
  auto* check_cmd = app.add_subcommand("selfcheck", "run the acceptance checks");
  check_cmd->add_option("--out", selfcheck_out, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_scene(gen);
    if (ann_cmd->parsed()) return run_annotate(ann);
    if (enc_cmd->parsed()) return run_encode(enc);
    if (pol_cmd->parsed()) return run_policy_step(pol);
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (ev_cmd->parsed()) return run_evaluate(ev);
    if (check_cmd->parsed()) return run_selfcheck_command(selfcheck_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable with require_subcommand(1)
}
