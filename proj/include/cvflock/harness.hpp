#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cvflock/policy.hpp"
#include "cvflock/training.hpp"

namespace cvflock {

// A controller under evaluation: body-frame acceleration per agent. The
// graph comes with features filled; state is available for the expert kinds
// only (learned controllers must not peek).
using Controller =
    std::function<ComplexVector(const SwarmState&, const EncodedGraph&)>;

struct ExperimentConfig {
  // model selection
  std::string kind = "invariant";  // invariant | baseline | expert | local-expert
  int layers = 2;                  // hidden (conv, activation) pairs
  int width = 8;
  std::string angle_encoding = "raw";  // baseline only: raw | cossin
  std::string checkpoint;              // trained model for evaluate

  // evaluation
  int agents = 30;
  double episode_seconds = 2.0;
  double comm_radius = 1.0;       // radius agents observe at evaluation
  int eval_episodes = 20;
  bool write_trajectories = true;

  // simulation (placement connectivity always uses sim.comm_radius so that
  // a reduced-radius evaluation shares initial states with the nominal one)
  SimConfig sim;

  // training
  int train_iterations = 10;
  int train_episodes_per_iter = 10;
  double train_episode_seconds = 2.0;
  int train_epochs = 20;
  int train_minibatch = 32;
  std::size_t train_buffer_nodes = 50000;
  int train_agents = 30;
  AdamConfig adam;

  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool parallel = true;

  DaggerConfig dagger() const;
  void validate() const;
};

// Single human-readable key-value document, `key = value` per line, `#`
// comments. Unknown keys are configuration errors.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value);
// Every field explicit, stable order; echoed into each output directory.
std::string render_config(const ExperimentConfig& cfg);

struct MetricSeries {
  double dt = 0.0;
  std::vector<double> mean;    // per step (t=0 included)
  std::vector<double> stddev;  // population std across episodes
};

inline constexpr const char* kMetricsHeader =
    "step,time_s,mean_velocity_variance,std_velocity_variance";
inline constexpr const char* kSweepHeader =
    "model,layers,width,final_mean_var,final_std_var,train_seconds";

std::string render_metrics_csv(const MetricSeries& series);

// Fresh untrained policy for the configured kind (learned kinds only).
std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg);

// Controller for the configured kind; loads cfg.checkpoint for learned
// kinds and verifies it against the configured architecture.
Controller make_controller(const ExperimentConfig& cfg,
                           std::unique_ptr<Policy>& policy_out);

// Seeded shared-stream evaluation. Episode e always sees the streams derived
// from (seed, e) regardless of controller kind, so comparisons share initial
// states and jitter. Writes metrics.csv, traj_ep###.csv and
// config_resolved.txt into out_dir when write_outputs is set.
MetricSeries evaluate(const Controller& controller, const ExperimentConfig& cfg,
                      bool write_outputs);

// Convenience: resolve the controller from cfg and evaluate.
MetricSeries evaluate(const ExperimentConfig& cfg, bool write_outputs = true);

// Train the configured learned kind with the DAGGER defaults in cfg; writes
// model.ckpt.json, history.jsonl and config_resolved.txt into out_dir.
std::unique_ptr<Policy> run_training(const ExperimentConfig& cfg,
                                     bool write_outputs = true);

struct SweepCell {
  int layers = 0;
  int width = 0;
  bool ok = false;
  std::string error;
  double final_mean_var = 0.0;
  double final_std_var = 0.0;
  double train_seconds = 0.0;  // simulated training time, deterministic
};

// Train + evaluate all 9 architectures of cfg.kind; continue-on-error with a
// failure manifest. Writes per-cell directories and sweep_summary.csv.
std::vector<SweepCell> sweep(const ExperimentConfig& cfg);

// Evaluation-only probes on an already-trained checkpoint.
MetricSeries extended_run(ExperimentConfig cfg, double seconds = 5.0);
MetricSeries reduced_radius_run(ExperimentConfig cfg, double radius = 0.8);

// Property suites behind the CLI selftest; prints one line per suite.
bool run_selftest(std::uint64_t seed);

}  // namespace cvflock
