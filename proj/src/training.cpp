#include "cvflock/training.hpp"

#include <cmath>
#include <string>

#include "cvflock/expert.hpp"

namespace cvflock {

namespace {

// substream tags: one per independent consumer of the master seed
constexpr std::uint64_t kCollectTag = 0xC0;
constexpr std::uint64_t kFitTag = 0xF1;

struct EpisodeData {
  std::vector<Sample> samples;
  std::vector<double> variance;  // per step, length steps + 1
};

EpisodeData collect_episode(const DaggerConfig& cfg, const Policy& policy,
                            double beta, EpisodeStreams streams) {
  EpisodeData out;
  const int steps = cfg.episode_steps();
  out.samples.reserve(steps);
  out.variance.reserve(steps + 1);
  SwarmState state = init_swarm(cfg.swarm_size, cfg.sim, streams.init);
  for (int s = 0; s < steps; ++s) {
    out.variance.push_back(velocity_variance(state));
    EncodedGraph graph = build_graph(state, cfg.sim.comm_radius);
    local_features(state, graph);
    ComplexVector label = nominal_control(state);
    const bool use_expert = streams.coin.uniform() < beta;
    ComplexVector exec = use_expert ? label : policy.act(graph);
    out.samples.push_back({std::move(graph), std::move(label)});
    step_dynamics(state, exec, cfg.sim, streams.jitter);
  }
  out.variance.push_back(velocity_variance(state));
  return out;
}

}  // namespace

EpisodeStreams dagger_episode_streams(std::uint64_t seed, int k, int episode) {
  const std::uint64_t base = substream(seed, kCollectTag, k, episode);
  return {Rng(substream(base, 1)), Rng(substream(base, 2)),
          Rng(substream(base, 3))};
}

double msae_loss(const ComplexVector& u, const ComplexVector& u_nom) {
  if (u.size() != u_nom.size())
    throw ShapeError("msae_loss: length mismatch (" + std::to_string(u.size()) +
                     " vs " + std::to_string(u_nom.size()) + ")");
  if (u.empty()) throw ShapeError("msae_loss: empty input, mean undefined");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += std::norm(u_nom[i] - u[i]);
  return acc / static_cast<double>(u.size());
}

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grad,
               const std::function<std::string(std::size_t)>& name) {
  if (params.size() != state.m.size() || grad.size() != state.m.size())
    throw ShapeError("adam_step: parameter/gradient/state size mismatch");
  state.t += 1;
  const auto& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g))
      throw TrainFault("adam_step: non-finite gradient at " +
                       (name ? name(i) : "coordinate " + std::to_string(i)));
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

void ReplayBuffer::add(Sample sample) {
  const std::size_t n = sample.graph.nbrs.size();
  samples_.push_back(std::move(sample));
  nodes_ += n;
  while (nodes_ > capacity_nodes_ && samples_.size() > 1) {
    nodes_ -= samples_.front().graph.nbrs.size();
    samples_.pop_front();
  }
}

double DaggerConfig::beta(int k) const {
  return std::pow(0.5, static_cast<double>(k - 1));
}

int DaggerConfig::episode_steps() const {
  return static_cast<int>(std::llround(episode_seconds / sim.dt));
}

void DaggerConfig::validate() const {
  if (iterations < 1) throw ConfigError("train.iterations must be >= 1");
  if (episodes_per_iter < 1)
    throw ConfigError("train.episodes_per_iter must be >= 1");
  if (!(episode_seconds > 0.0))
    throw ConfigError("train.episode_seconds must be > 0");
  if (epochs_per_iter < 1) throw ConfigError("train.epochs_per_iter must be >= 1");
  if (minibatch_graphs < 1)
    throw ConfigError("train.minibatch_graphs must be >= 1");
  if (buffer_capacity_nodes < 1)
    throw ConfigError("train.buffer_capacity_nodes must be >= 1");
  if (swarm_size < 2) throw ConfigError("train.swarm_size must be >= 2");
  sim.validate();
}

std::pair<double, std::vector<double>> batch_loss_grad(
    const Policy& policy, const ReplayBuffer& buffer,
    const std::vector<std::size_t>& idx, bool parallel) {
  if (idx.empty()) throw ShapeError("batch_loss_grad: empty batch");
  const std::size_t b = idx.size();
  std::vector<std::pair<double, std::vector<double>>> per_sample(b);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long s = 0; s < static_cast<long>(b); ++s)
    per_sample[s] = policy.loss_and_grad(buffer.at(idx[s]));

  // fixed-order reduction keeps the result independent of thread count
  const double inv_b = 1.0 / static_cast<double>(b);
  double loss = 0.0;
  std::vector<double> grad(policy.param_count(), 0.0);
  for (std::size_t s = 0; s < b; ++s) {
    loss += per_sample[s].first;
    const auto& g = per_sample[s].second;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
  }
  loss *= inv_b;
  for (auto& g : grad) g *= inv_b;
  return {loss, grad};
}

std::vector<double> dagger_iteration(int k, const DaggerConfig& cfg,
                                     const Policy& policy,
                                     ReplayBuffer& buffer, bool parallel) {
  cfg.validate();
  const int episodes = cfg.episodes_per_iter;
  const double beta = cfg.beta(k);
  std::vector<EpisodeData> data(episodes);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int e = 0; e < episodes; ++e)
    data[e] = collect_episode(cfg, policy, beta,
                              dagger_episode_streams(cfg.seed, k, e));

  // appends serialized in episode order
  std::vector<double> mean_var(cfg.episode_steps() + 1, 0.0);
  for (auto& ep : data) {
    for (auto& s : ep.samples) buffer.add(std::move(s));
    for (std::size_t i = 0; i < mean_var.size(); ++i)
      mean_var[i] += ep.variance[i];
  }
  for (auto& v : mean_var) v /= static_cast<double>(episodes);
  return mean_var;
}

double fit_epoch(Policy& policy, const ReplayBuffer& buffer, AdamState& adam,
                 int minibatch_graphs, Rng& rng, bool parallel) {
  const std::size_t n = buffer.size();
  if (n == 0) throw TrainFault("fit_epoch: empty replay buffer");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<double> params = policy.params_flat();
  auto name = [&policy](std::size_t i) { return policy.describe_param(i); };
  double loss_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < n; start += minibatch_graphs) {
    const std::size_t end = std::min(n, start + minibatch_graphs);
    std::vector<std::size_t> batch(order.begin() + start, order.begin() + end);
    auto [loss, grad] = batch_loss_grad(policy, buffer, batch, parallel);
    adam_step(adam, params, grad, name);
    policy.set_params_flat(params);
    loss_sum += loss * static_cast<double>(batch.size());
    count += batch.size();
  }
  return loss_sum / static_cast<double>(count);
}

TrainResult train(Policy& policy, const DaggerConfig& cfg, bool parallel,
                  const std::function<void(const IterationRecord&)>&
                      on_iteration) {
  cfg.validate();
  TrainResult result;
  ReplayBuffer buffer(cfg.buffer_capacity_nodes);
  AdamState adam(policy.param_count(), cfg.adam);
  for (int k = 1; k <= cfg.iterations; ++k) {
    IterationRecord rec;
    rec.iter = k;
    rec.beta = cfg.beta(k);
    rec.rollout_velocity_variance =
        dagger_iteration(k, cfg, policy, buffer, parallel);
    Rng fit_rng(substream(cfg.seed, kFitTag, k));
    double loss_sum = 0.0;
    for (int epoch = 0; epoch < cfg.epochs_per_iter; ++epoch)
      loss_sum += fit_epoch(policy, buffer, adam, cfg.minibatch_graphs,
                            fit_rng, parallel);
    rec.mean_loss = loss_sum / cfg.epochs_per_iter;
    if (on_iteration) on_iteration(rec);
    result.history.push_back(std::move(rec));
  }
  return result;
}

}  // namespace cvflock
