#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "voxnav/sim.hpp"
#include "voxnav/synthetic.hpp"

using namespace voxnav;

namespace {

Episode tiny_episode() {
  Episode e;
  e.id = "ep-sim";
  e.scene_dir = ".";
  e.start = 0;
  e.goals = {3};
  e.gt_path = {0, 3};
  e.max_steps = 3;
  e.instruction_seed = 11;
  e.instruction_length = 4;
  return e;
}

AgentParams tiny_agent(uint64_t seed) {
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
  AgentParams agent = seeded_agent_params(cfg, seed);
  agent.feature_height = 4;
  agent.feature_width = 4;
  return agent;
}

Scene tiny_scene(uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_rooms = 3;
  cfg.n_objects = 6;
  cfg.density = 40;
  cfg.object_spacing = 0.1;
  return generate_synthetic_scene(cfg).scene;
}

bool equal_trajectories(const Trajectory& a, const Trajectory& b) {
  if (a.episode_id != b.episode_id || a.reason != b.reason || a.walk != b.walk ||
      a.steps.size() != b.steps.size())
    return false;
  for (size_t i = 0; i < a.steps.size(); ++i)
    if (a.steps[i].step != b.steps[i].step || a.steps[i].viewpoint != b.steps[i].viewpoint ||
        a.steps[i].chosen_prob != b.steps[i].chosen_prob)
      return false;
  return true;
}

}  // namespace

TEST_CASE("episode validation catches malformed fields") {
  Episode ok = tiny_episode();
  CHECK_NOTHROW(ok.validate());

  Episode e = ok;
  e.id.clear();
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);

  e = ok;
  e.goals.clear();
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);

  e = ok;
  e.gt_path = {1, 3};  // must begin at the start node
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);

  e = ok;
  e.gt_path.clear();
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);

  e = ok;
  e.max_steps = 0;
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);

  e = ok;
  e.instruction_length = 0;
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
}

TEST_CASE("seeded instructions are reproducible token grids") {
  const Eigen::MatrixXd a = seeded_instruction(11, 4, 8);
  REQUIRE(a.rows() == 4);
  REQUIRE(a.cols() == 8);
  CHECK(a.allFinite());
  CHECK(a.cwiseAbs().maxCoeff() > 0.0);

  const Eigen::MatrixXd b = seeded_instruction(11, 4, 8);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd c = seeded_instruction(12, 4, 8);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("choose_action argmax keeps the earliest of tied maxima") {
  Rng rng(1);
  Eigen::VectorXd dist(3);
  dist << 0.2, 0.5, 0.3;
  CHECK(detail::choose_action(dist, false, rng) == 1);
  dist << 0.4, 0.4, 0.2;
  CHECK(detail::choose_action(dist, false, rng) == 0);
  Eigen::VectorXd lone(1);
  lone << 1.0;
  CHECK(detail::choose_action(lone, false, rng) == 0);
}

TEST_CASE("choose_action sampling follows the distribution") {
  Eigen::VectorXd dist(2);
  dist << 0.25, 0.75;

  // Identical streams, identical draws.
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i)
    CHECK(detail::choose_action(dist, true, a) == detail::choose_action(dist, true, b));

  // The empirical rate lands near 3/4 (8 sigma bounds).
  Rng rng(123);
  int second = 0;
  for (int i = 0; i < 400; ++i) second += detail::choose_action(dist, true, rng) == 1;
  CHECK(second > 230);
  CHECK(second < 370);

  Eigen::VectorXd lone(1);
  lone << 1.0;
  Rng c(5);
  CHECK(detail::choose_action(lone, true, c) == 0);
}

TEST_CASE("run_episode walks the scene graph and stops for a reason") {
  const Scene scene = tiny_scene(505);
  const AgentParams agent = tiny_agent(606);
  const Episode episode = tiny_episode();

  Rng rng(42);
  const Trajectory traj = run_episode(scene, episode, agent, rng);

  CHECK(traj.episode_id == "ep-sim");
  REQUIRE_FALSE(traj.walk.empty());
  CHECK(traj.walk.front() == episode.start);
  REQUIRE_FALSE(traj.steps.empty());
  CHECK(traj.steps.size() <= static_cast<size_t>(episode.max_steps));
  CHECK((traj.reason == "stop" || traj.reason == "step-limit"));

  // Steps are numbered from zero and carry real probabilities.
  for (size_t i = 0; i < traj.steps.size(); ++i) {
    CHECK(traj.steps[i].step == static_cast<int>(i));
    CHECK(traj.steps[i].chosen_prob > 0.0);
    CHECK(traj.steps[i].chosen_prob <= 1.0);
    CHECK_NOTHROW(scene.graph.node(traj.steps[i].viewpoint));
  }

  // Every hop on the walk is a real graph edge, jumps included.
  for (size_t i = 1; i < traj.walk.size(); ++i)
    CHECK(scene.graph.connected(traj.walk[i - 1], traj.walk[i]));

  // Stopping means the final decision named the node the agent stood on.
  if (traj.reason == "stop") CHECK(traj.steps.back().viewpoint == traj.walk.back());
}

TEST_CASE("run_episode is deterministic given the seed") {
  const Scene scene = tiny_scene(505);
  const AgentParams agent = tiny_agent(606);
  Episode episode = tiny_episode();
  episode.max_steps = 2;

  Rng r1(42), r2(42);
  const Trajectory a = run_episode(scene, episode, agent, r1);
  const Trajectory b = run_episode(scene, episode, agent, r2);
  CHECK(equal_trajectories(a, b));

  AgentParams sampler = agent;
  sampler.sample_actions = true;
  Rng s1(7), s2(7);
  const Trajectory c = run_episode(scene, episode, sampler, s1);
  const Trajectory d = run_episode(scene, episode, sampler, s2);
  CHECK(equal_trajectories(c, d));
  CHECK((c.reason == "stop" || c.reason == "step-limit"));
}

TEST_CASE("run_episode rejects bad starts and invalid episodes") {
  const Scene scene = tiny_scene(505);
  const AgentParams agent = tiny_agent(606);
  Rng rng(1);

  Episode bad_start = tiny_episode();
  bad_start.start = 99;
  bad_start.gt_path = {99, 3};
  CHECK_THROWS_AS(run_episode(scene, bad_start, agent, rng), std::out_of_range);

  Episode no_goals = tiny_episode();
  no_goals.goals.clear();
  CHECK_THROWS_AS(run_episode(scene, no_goals, agent, rng), std::invalid_argument);
}
