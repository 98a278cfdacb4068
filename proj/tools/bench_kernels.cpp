// Times the OpenMP episode/minibatch kernels against their serial reference
// and checks the results are bit-identical.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cvflock/expert.hpp"
#include "cvflock/harness.hpp"

using namespace cvflock;

namespace {

double seconds_of(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel path runs serially\n");
#endif

  // minibatch gradient kernel
  {
    Rng rng(42);
    DaggerConfig dc;
    dc.swarm_size = 30;
    dc.episodes_per_iter = 2;
    dc.episode_seconds = 1.0;
    dc.seed = 42;
    GnnArch arch;
    arch.hidden_layers = 2;
    arch.width = 8;
    auto policy = make_invariant_policy(arch, rng);
    ReplayBuffer buffer(50000);
    dagger_iteration(1, dc, *policy, buffer, true);
    std::vector<std::size_t> idx(buffer.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

    const auto serial = batch_loss_grad(*policy, buffer, idx, false);
    const auto parallel = batch_loss_grad(*policy, buffer, idx, true);
    const bool identical =
        serial.first == parallel.first && serial.second == parallel.second;
    const double ts =
        seconds_of([&] { batch_loss_grad(*policy, buffer, idx, false); }, 5);
    const double tp =
        seconds_of([&] { batch_loss_grad(*policy, buffer, idx, true); }, 5);
    std::printf("batch_loss_grad (%zu graphs): serial %.1f ms, parallel %.1f "
                "ms, speedup %.2fx, bit-identical: %s\n",
                idx.size(), ts * 1e3, tp * 1e3, ts / tp,
                identical ? "yes" : "NO");
  }

  // evaluation episode batch
  {
    ExperimentConfig cfg;
    cfg.kind = "expert";
    cfg.agents = 50;
    cfg.eval_episodes = 8;
    cfg.episode_seconds = 2.0;
    cfg.seed = 7;
    cfg.write_trajectories = false;
    std::unique_ptr<Policy> unused;
    const Controller controller = make_controller(cfg, unused);

    cfg.parallel = false;
    const MetricSeries serial = evaluate(controller, cfg, false);
    cfg.parallel = true;
    const MetricSeries parallel = evaluate(controller, cfg, false);
    const bool identical =
        serial.mean == parallel.mean && serial.stddev == parallel.stddev;
    cfg.parallel = false;
    const double ts =
        seconds_of([&] { evaluate(controller, cfg, false); }, 3);
    cfg.parallel = true;
    const double tp =
        seconds_of([&] { evaluate(controller, cfg, false); }, 3);
    std::printf("evaluate (%d episodes, n=%d): serial %.1f ms, parallel %.1f "
                "ms, speedup %.2fx, bit-identical: %s\n",
                cfg.eval_episodes, cfg.agents, ts * 1e3, tp * 1e3, ts / tp,
                identical ? "yes" : "NO");
  }
  return 0;
}
