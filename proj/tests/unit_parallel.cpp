// The OpenMP kernels must be bit-identical to their serial references.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cvflock/harness.hpp"
#include "test_util.hpp"

using namespace cvflock;

namespace {

std::unique_ptr<Policy> trained_stub(std::uint64_t seed) {
  Rng rng(seed);
  GnnArch arch;
  arch.hidden_layers = 2;
  arch.width = 8;
  return make_invariant_policy(arch, rng);
}

}  // namespace

TEST_CASE("batch gradients: parallel == serial, bitwise") {
  auto policy = trained_stub(3);
  DaggerConfig cfg;
  cfg.swarm_size = 8;
  cfg.episodes_per_iter = 3;
  cfg.episode_seconds = 0.5;
  cfg.seed = 17;
  ReplayBuffer buffer(100000);
  dagger_iteration(1, cfg, *policy, buffer, true);
  REQUIRE(buffer.size() == 150);

  std::vector<std::size_t> idx(buffer.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto serial = batch_loss_grad(*policy, buffer, idx, false);
  const auto parallel = batch_loss_grad(*policy, buffer, idx, true);
  CHECK(serial.first == parallel.first);
  CHECK(serial.second == parallel.second);
}

TEST_CASE("episode collection: parallel == serial, bitwise") {
  auto policy = trained_stub(4);
  DaggerConfig cfg;
  cfg.swarm_size = 6;
  cfg.episodes_per_iter = 4;
  cfg.episode_seconds = 0.4;
  cfg.seed = 23;

  ReplayBuffer b1(100000), b2(100000);
  const auto c1 = dagger_iteration(2, cfg, *policy, b1, false);
  const auto c2 = dagger_iteration(2, cfg, *policy, b2, true);
  CHECK(c1 == c2);
  REQUIRE(b1.size() == b2.size());
  for (std::size_t s = 0; s < b1.size(); ++s) {
    CHECK(b1.at(s).expert_u == b2.at(s).expert_u);
    for (int i = 0; i < b1.at(s).graph.size(); ++i)
      CHECK(b1.at(s).graph.features[i] == b2.at(s).graph.features[i]);
  }
}

TEST_CASE("evaluation episodes: parallel == serial, bitwise") {
  ExperimentConfig cfg;
  cfg.kind = "expert";
  cfg.agents = 10;
  cfg.episode_seconds = 0.6;
  cfg.eval_episodes = 5;
  cfg.seed = 31;
  cfg.write_trajectories = false;
  cfg.parallel = false;
  const MetricSeries serial = evaluate(cfg, false);
  cfg.parallel = true;
  const MetricSeries parallel = evaluate(cfg, false);
  CHECK(serial.mean == parallel.mean);
  CHECK(serial.stddev == parallel.stddev);
}

TEST_CASE("full training run: parallel == serial, bitwise") {
  DaggerConfig cfg;
  cfg.iterations = 2;
  cfg.episodes_per_iter = 2;
  cfg.episode_seconds = 0.3;
  cfg.epochs_per_iter = 2;
  cfg.minibatch_graphs = 8;
  cfg.swarm_size = 6;
  cfg.seed = 41;

  auto p1 = trained_stub(5);
  auto p2 = p1->clone();
  const TrainResult r1 = train(*p1, cfg, false);
  const TrainResult r2 = train(*p2, cfg, true);
  CHECK(p1->params_flat() == p2->params_flat());
  REQUIRE(r1.history.size() == r2.history.size());
  for (std::size_t k = 0; k < r1.history.size(); ++k) {
    CHECK(r1.history[k].mean_loss == r2.history[k].mean_loss);
    CHECK(r1.history[k].rollout_velocity_variance ==
          r2.history[k].rollout_velocity_variance);
  }
}
