#include <catch2/catch_amalgamated.hpp>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "voxnav/annotation_io.hpp"
#include "voxnav/config.hpp"
#include "voxnav/params_io.hpp"
#include "voxnav/scene_io.hpp"
#include "voxnav/sim.hpp"
#include "voxnav/synthetic.hpp"
#include "voxnav/tensor.hpp"

using namespace voxnav;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("voxnav-test-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Scene tiny_scene() {
  SynthConfig cfg;
  cfg.seed = 301;
  cfg.n_rooms = 2;
  cfg.n_objects = 3;
  cfg.density = 16;
  cfg.object_spacing = 0.15;
  cfg.name = "tiny";
  return generate_synthetic_scene(cfg).scene;
}

}  // namespace

TEST_CASE("scene archives round-trip byte for byte") {
  TempDir tmp("scene");
  const Scene scene = tiny_scene();
  const fs::path a = tmp.path / "a", b = tmp.path / "b";
  save_scene(scene, a);

  const Scene loaded = load_scene(a);
  CHECK(loaded.name == scene.name);
  REQUIRE(loaded.cloud.points.size() == scene.cloud.points.size());
  CHECK(loaded.graph.edges == scene.graph.edges);
  REQUIRE(loaded.rigs.size() == scene.rigs.size());
  for (size_t i = 0; i < scene.cloud.points.size(); i += 131) {
    CHECK(loaded.cloud.points[i].position == scene.cloud.points[i].position);
    CHECK(loaded.cloud.points[i].class_id == scene.cloud.points[i].class_id);
    CHECK(loaded.cloud.points[i].instance_id == scene.cloud.points[i].instance_id);
  }

  save_scene(loaded, b);
  for (const char* f : {"header.txt", "points.bin", "graph.txt", "cameras.bin"})
    CHECK(slurp(a / f) == slurp(b / f));

  CHECK_THROWS_AS(load_scene(tmp.path / "missing"), std::runtime_error);
}

TEST_CASE("run-length coding is the identity on label arrays") {
  std::vector<uint16_t> labels;
  Rng rng(stream_seed(5, "rle"));
  for (int i = 0; i < 5000; ++i) {
    const uint16_t v = rng.uniform() < 0.7 ? labels.empty() ? 0 : labels.back()
                                           : static_cast<uint16_t>(rng.uniform_index(18));
    labels.push_back(v == 16 ? kLabelFree : v == 17 ? kLabelUnknown : v);
  }
  const auto runs = rle_encode(labels);
  CHECK(rle_decode(runs, labels.size()) == labels);
  CHECK(runs.size() < labels.size());  // actually compresses the repeats
}

TEST_CASE("annotation archives round-trip bit-exactly") {
  TempDir tmp("anno");
  const Scene scene = tiny_scene();

  PerceptionRange range;
  range.xy_extent = 2.5;
  range.z_below = 1.2;
  range.z_above = 1.4;
  std::vector<ViewpointAnnotation> records;
  for (uint32_t v = 0; v < scene.graph.nodes.size(); ++v)
    records.push_back({v, generate_annotations(scene, v, range)});

  const fs::path a = tmp.path / "a.vxa", b = tmp.path / "b.vxa";
  save_annotations(records, a);
  const auto loaded = load_annotations(a);
  REQUIRE(loaded.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].viewpoint == records[i].viewpoint);
    CHECK(loaded[i].set.fine.labels == records[i].set.fine.labels);
    CHECK(loaded[i].set.half.labels == records[i].set.half.labels);
    CHECK(loaded[i].set.quarter.labels == records[i].set.quarter.labels);
    REQUIRE(loaded[i].set.boxes.size() == records[i].set.boxes.size());
    CHECK(loaded[i].set.layout.has_value() == records[i].set.layout.has_value());
    if (records[i].set.layout) {
      CHECK(loaded[i].set.layout->center == records[i].set.layout->center);
      CHECK(loaded[i].set.layout->rotation == records[i].set.layout->rotation);
    }
  }
  save_annotations(loaded, b);
  CHECK(slurp(a) == slurp(b));

  CHECK_THROWS_AS(load_annotations(tmp.path / "nope.vxa"), std::runtime_error);
}

TEST_CASE("tensor files narrow once and then round-trip stably") {
  TempDir tmp("tensor");
  TensorFile f;
  f.tensors.push_back(seeded_tensor("alpha", {3, 4}, 9));
  f.tensors.push_back(seeded_tensor("beta", {7}, 9));
  Tensor scalar;
  scalar.name = "gamma";
  scalar.dims = {1};
  scalar.data = {0.1f};
  f.tensors.push_back(scalar);

  const fs::path a = tmp.path / "a.vxt", b = tmp.path / "b.vxt";
  save_tensors(f, a);
  const TensorFile g = load_tensors(a);
  REQUIRE(g.tensors.size() == 3);
  CHECK(g.find("alpha").dims == std::vector<int64_t>{3, 4});
  CHECK(g.find("alpha").data == f.tensors[0].data);
  CHECK(g.contains("beta"));
  CHECK_FALSE(g.contains("delta"));
  CHECK_THROWS_AS(g.find("delta"), std::runtime_error);
  save_tensors(g, b);
  CHECK(slurp(a) == slurp(b));

  // Matrix view reads row-major.
  const Eigen::MatrixXd m = g.find("alpha").matrix();
  CHECK(m.rows() == 3);
  CHECK(m(1, 2) == static_cast<double>(f.tensors[0].data[1 * 4 + 2]));
  CHECK_THROWS_AS(g.find("beta").matrix(), std::runtime_error);

  // A truncated file fails loudly.
  {
    std::ofstream os(tmp.path / "bad.vxt", std::ios::binary);
    os << "vx";
  }
  CHECK_THROWS_AS(load_tensors(tmp.path / "bad.vxt"), std::runtime_error);
}

TEST_CASE("agent parameters survive the file format") {
  TempDir tmp("params");
  EncoderConfig cfg;
  cfg.d_model = 8;
  cfg.d_input = 8;
  cfg.heads = 2;
  cfg.samples = 2;
  cfg.head_dim = 4;
  cfg.levels = 2;
  cfg.layers = {2, 1};
  cfg.base_x = 10;
  cfg.base_y = 10;
  cfg.base_z = 2;
  cfg.fine_resolution = 0.7;
  AgentParams agent = seeded_agent_params(cfg, 606);
  agent.w_global = 0.25;
  agent.height_groups = 2;
  agent.feature_height = 4;
  agent.feature_width = 4;

  const fs::path a = tmp.path / "a.vxt", b = tmp.path / "b.vxt";
  save_tensors(tensors_from_agent(agent), a);
  const AgentParams back = agent_from_tensors(load_tensors(a), agent);
  save_tensors(tensors_from_agent(back), b);
  CHECK(slurp(a) == slurp(b));  // float-narrowed once, stable afterwards

  // Run-time knobs come from the template, weights from the file.
  CHECK(back.w_global == agent.w_global);
  CHECK(back.height_groups == agent.height_groups);
  CHECK(back.feature_seed == agent.feature_seed);
  CHECK(back.state_head_w.size() == agent.state_head_w.size());
  CHECK(back.encoder.levels.size() == agent.encoder.levels.size());
}

TEST_CASE("config files accept all three assignment spellings") {
  TempDir tmp("config");
  const fs::path p = tmp.path / "conf.txt";
  {
    std::ofstream os(p);
    os << "# perception\n";
    os << "range_xy = 3.5\n";
    os << "heads=4\n";
    os << "mode sample\n";
    os << "w_global 0.75  # fused weighting\n";
  }
  const Config cfg = load_config(p);
  CHECK(cfg.range_xy == 3.5);
  CHECK(cfg.heads == 4);
  CHECK(cfg.mode == "sample");
  CHECK(cfg.w_global == 0.75);
  CHECK(cfg.d_model == 768);  // untouched defaults stay

  Config direct;
  CHECK_THROWS_AS(direct.set("no_such_key", "1"), std::runtime_error);
  CHECK_THROWS_AS(direct.set("heads", "many"), std::runtime_error);
  CHECK_THROWS_AS(direct.set("object_head", "maybe"), std::runtime_error);

  {
    std::ofstream os(tmp.path / "bad.txt");
    os << "w_global = 2.0\n";  // out of range: validate() must reject
  }
  CHECK_THROWS_AS(load_config(tmp.path / "bad.txt"), std::runtime_error);
  {
    std::ofstream os(tmp.path / "malformed.txt");
    os << "just-some-words\n";
  }
  CHECK_THROWS_AS(load_config(tmp.path / "malformed.txt"), std::runtime_error);
}

TEST_CASE("the config environment variable names the default file") {
  TempDir tmp("env");
  const fs::path p = tmp.path / "env.txt";
  {
    std::ofstream os(p);
    os << "seed = 4242\n";
  }
  ::setenv("VOXNAV_CONFIG", p.string().c_str(), 1);
  CHECK(default_config().seed == 4242);
  ::setenv("VOXNAV_CONFIG", (tmp.path / "missing.txt").string().c_str(), 1);
  CHECK_THROWS_AS(default_config(), std::runtime_error);
  ::unsetenv("VOXNAV_CONFIG");
  CHECK(default_config().seed == 1);
}

TEST_CASE("episode files round-trip and validate") {
  TempDir tmp("episodes");
  Episode e;
  e.id = "walk-1";
  e.scene_dir = "scenes/demo";
  e.start = 0;
  e.goals = {2, 3};
  e.gt_path = {0, 1, 2};
  e.max_steps = 7;
  e.instruction_seed = 99;
  e.instruction_length = 5;
  Episode f = e;
  f.id = "walk-2";
  f.goal_object = 4;

  const fs::path a = tmp.path / "a.txt", b = tmp.path / "b.txt";
  save_episodes({e, f}, a);
  const auto loaded = load_episodes(a);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "walk-1");
  CHECK(loaded[0].goals == e.goals);
  CHECK(loaded[0].gt_path == e.gt_path);
  CHECK(loaded[1].goal_object == 4);
  save_episodes(loaded, b);
  CHECK(slurp(a) == slurp(b));

  Episode bad = e;
  bad.goals.clear();
  CHECK_THROWS_AS(save_episodes({bad}, tmp.path / "x.txt"), std::invalid_argument);
  bad = e;
  bad.gt_path = {1, 2};  // does not begin at start
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  {
    std::ofstream os(tmp.path / "junk.txt");
    os << "episode z\nriddle 4\nend\n";
  }
  CHECK_THROWS_AS(load_episodes(tmp.path / "junk.txt"), std::runtime_error);
}

TEST_CASE("trajectory files round-trip") {
  TempDir tmp("traj");
  Trajectory t;
  t.episode_id = "walk-1";
  t.steps = {{0, 1, 0.5}, {1, 1, 0.25}};
  t.walk = {0, 1};
  t.reason = "stop";
  Trajectory u;
  u.episode_id = "walk-2";
  u.steps = {{0, 2, 1.0 / 3.0}};
  u.walk = {2, 1, 0};
  u.reason = "step-limit";

  const fs::path a = tmp.path / "a.txt", b = tmp.path / "b.txt";
  save_trajectories({t, u}, a);
  const auto loaded = load_trajectories(a);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].walk == t.walk);
  CHECK(loaded[0].steps[1].chosen_prob == 0.25);
  CHECK(loaded[1].steps[0].chosen_prob == 1.0 / 3.0);  // text form parses to the same bits
  CHECK(loaded[1].reason == "step-limit");
  save_trajectories(loaded, b);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("number formatting survives the text round trip exactly") {
  for (double v : {0.1, 1.0 / 3.0, -0.0, 1e-300, 6.02214076e23, 12345.678901234567, -2.5}) {
    const double back = parse_double(format_double(v));
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  CHECK_THROWS_AS(parse_double("1.5x"), std::runtime_error);
  CHECK_THROWS_AS(parse_int("seven"), std::runtime_error);
}
