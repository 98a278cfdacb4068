#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "cvflock/policy.hpp"
#include "cvflock/swarm.hpp"

namespace cvflock {

// Mean over nodes of |u_nom_i - u_i|^2; throws ShapeError on length mismatch
// or empty input.
double msae_loss(const ComplexVector& u, const ComplexVector& u_nom);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::vector<double> m;  // first moments
  std::vector<double> v;  // second moments
  long t = 0;

  explicit AdamState(std::size_t n, AdamConfig c = {})
      : cfg(c), m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam update over every real coordinate, in place. Throws
// TrainFault on a non-finite gradient; `name` (optional) maps a coordinate
// index to a parameter path for the fault message.
void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grad,
               const std::function<std::string(std::size_t)>& name = {});

// FIFO buffer of graph samples, bounded by total node count (node-steps).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity_nodes)
      : capacity_nodes_(capacity_nodes) {}

  void add(Sample sample);
  std::size_t size() const { return samples_.size(); }  // graphs
  std::size_t node_count() const { return nodes_; }
  std::size_t capacity_nodes() const { return capacity_nodes_; }
  const Sample& at(std::size_t i) const { return samples_[i]; }

 private:
  std::deque<Sample> samples_;
  std::size_t nodes_ = 0;
  std::size_t capacity_nodes_;
};

struct DaggerConfig {
  int iterations = 10;        // K
  int episodes_per_iter = 10;
  double episode_seconds = 2.0;
  int epochs_per_iter = 20;
  int minibatch_graphs = 32;
  std::size_t buffer_capacity_nodes = 50000;
  int swarm_size = 30;
  AdamConfig adam;
  SimConfig sim;
  std::uint64_t seed = 0;

  // expert-mixture schedule: pure expert first, geometric decay
  double beta(int k) const;  // k is 1-based
  int episode_steps() const;
  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double beta = 0.0;
  double mean_loss = 0.0;
  // per-step velocity variance averaged over the iteration's rollouts
  std::vector<double> rollout_velocity_variance;
};

struct TrainResult {
  std::vector<IterationRecord> history;
};

// The independent streams episode e of iteration k draws from; collection
// consumes nothing else, so a beta=1 iteration replays exactly as a pure
// expert rollout over the same streams.
struct EpisodeStreams {
  Rng init;
  Rng jitter;
  Rng coin;
};
EpisodeStreams dagger_episode_streams(std::uint64_t seed, int k, int episode);

// Mean over the indexed samples of per-graph MSAE, plus its gradient. The
// parallel path computes per-sample gradients concurrently and reduces them
// in index order, so it is bit-identical to the serial path.
std::pair<double, std::vector<double>> batch_loss_grad(
    const Policy& policy, const ReplayBuffer& buffer,
    const std::vector<std::size_t>& idx, bool parallel);

// Roll out episodes_per_iter episodes executing the expert with probability
// beta(k) per step, else the policy; label every visited state with the
// fully-connected expert and append to the buffer. Episode e of iteration k
// draws its streams from substream(cfg.seed, kind, k, e) only, so rollouts
// are reproducible and parallelizable. Returns the per-step velocity
// variance averaged over the iteration's episodes.
std::vector<double> dagger_iteration(int k, const DaggerConfig& cfg,
                                     const Policy& policy,
                                     ReplayBuffer& buffer, bool parallel);

// One pass over the buffer in shuffled minibatches; returns the epoch's
// node-weighted mean loss.
double fit_epoch(Policy& policy, const ReplayBuffer& buffer, AdamState& adam,
                 int minibatch_graphs, Rng& rng, bool parallel);

// Full DAGGER run: K iterations of (collect, fit). on_iteration (optional)
// observes each record as it completes.
TrainResult train(Policy& policy, const DaggerConfig& cfg, bool parallel,
                  const std::function<void(const IterationRecord&)>&
                      on_iteration = {});

}  // namespace cvflock
