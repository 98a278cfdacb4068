#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "cvflock/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPropertyFailure = 3;

void print_final(const cvflock::MetricSeries& series) {
  std::printf("final mean velocity variance: %.6g (std %.6g) over %zu steps\n",
              series.mean.back(), series.stddev.back(),
              series.mean.size() - 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frame-invariant flocking controllers: DAGGER training, "
               "seeded evaluation and architecture sweeps"};
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config_path,
                                    "experiment config (key = value lines)");
  auto* seed_opt =
      app.add_option("--seed", seed, "master seed (overrides config)");
  auto* out_opt =
      app.add_option("--out", out_dir, "output directory (overrides config)");

  auto* cmd_train =
      app.add_subcommand("train", "train the configured model with DAGGER");
  auto* cmd_eval = app.add_subcommand(
      "evaluate", "run the configured controller over seeded episodes");
  auto* cmd_sweep = app.add_subcommand(
      "sweep", "train and evaluate the 2-4 layer x 8-32 width grid");
  auto* cmd_ext =
      app.add_subcommand("extended", "evaluation-only run with a longer episode");
  double seconds = 5.0;
  cmd_ext->add_option("--seconds", seconds, "episode length, s")
      ->capture_default_str();
  auto* cmd_red = app.add_subcommand(
      "reduced-radius", "evaluation-only run with a smaller observed radius");
  double radius = 0.8;
  cmd_red->add_option("--radius", radius, "observed communication radius, m")
      ->capture_default_str();
  auto* cmd_self = app.add_subcommand(
      "selftest", "run the invariance and gradient property suites");
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    cvflock::ExperimentConfig cfg;
    if (config_opt->count() > 0) cfg = cvflock::parse_config_file(config_path);
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (out_opt->count() > 0) cfg.out_dir = out_dir;

    if (cmd_self->parsed())
      return cvflock::run_selftest(cfg.seed) ? kExitOk : kExitPropertyFailure;

    if (cmd_train->parsed()) {
      cvflock::run_training(cfg);
      std::printf("trained %s model written to %s/model.ckpt.json\n",
                  cfg.kind.c_str(), cfg.out_dir.c_str());
      return kExitOk;
    }
    if (cmd_eval->parsed()) {
      print_final(cvflock::evaluate(cfg));
      return kExitOk;
    }
    if (cmd_sweep->parsed()) {
      const auto cells = cvflock::sweep(cfg);
      int failed = 0;
      for (const auto& c : cells) failed += c.ok ? 0 : 1;
      std::printf("sweep finished: %zu cells, %d failed; summary in %s\n",
                  cells.size(), failed, (cfg.out_dir + "/sweep_summary.csv").c_str());
      return kExitOk;
    }
    if (cmd_ext->parsed()) {
      print_final(cvflock::extended_run(cfg, seconds));
      return kExitOk;
    }
    if (cmd_red->parsed()) {
      print_final(cvflock::reduced_radius_run(cfg, radius));
      return kExitOk;
    }
  } catch (const cvflock::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
