#include "cvflock/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "cvflock/checkpoint.hpp"
#include "cvflock/expert.hpp"

namespace cvflock {

namespace {

constexpr std::uint64_t kEvalTag = 0xE7;
constexpr std::uint64_t kInitTag = 0x17;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << content;
}

bool is_learned(const std::string& kind) {
  return kind == "invariant" || kind == "baseline";
}

AngleEncoding parse_encoding(const std::string& s) {
  if (s == "raw") return AngleEncoding::kRaw;
  if (s == "cossin") return AngleEncoding::kCosSin;
  throw ConfigError("angle_encoding must be raw or cossin, got " + s);
}

struct EpisodeResult {
  std::vector<double> variance;
  std::string trajectory;
};

EpisodeResult run_episode(const Controller& controller,
                          const ExperimentConfig& cfg, int episode,
                          bool record_trajectory) {
  const std::uint64_t base = substream(cfg.seed, kEvalTag, episode);
  Rng init_rng(substream(base, 1));
  Rng jitter_rng(substream(base, 2));

  const int steps =
      static_cast<int>(std::llround(cfg.episode_seconds / cfg.sim.dt));
  EpisodeResult out;
  out.variance.reserve(steps + 1);
  SwarmState state = init_swarm(cfg.agents, cfg.sim, init_rng);
  if (record_trajectory) {
    out.trajectory = std::string(kTrajectoryHeader) + "\n";
  }
  for (int s = 0; s <= steps; ++s) {
    out.variance.push_back(velocity_variance(state));
    if (record_trajectory) append_trajectory_rows(out.trajectory, s, state);
    if (s == steps) break;
    EncodedGraph graph = build_graph(state, cfg.comm_radius);
    local_features(state, graph);
    const ComplexVector u = controller(state, graph);
    step_dynamics(state, u, cfg.sim, jitter_rng);
  }
  return out;
}

std::string cell_dir_name(int layers, int width) {
  return "L" + std::to_string(layers) + "_w" + std::to_string(width);
}

}  // namespace

DaggerConfig ExperimentConfig::dagger() const {
  DaggerConfig d;
  d.iterations = train_iterations;
  d.episodes_per_iter = train_episodes_per_iter;
  d.episode_seconds = train_episode_seconds;
  d.epochs_per_iter = train_epochs;
  d.minibatch_graphs = train_minibatch;
  d.buffer_capacity_nodes = train_buffer_nodes;
  d.swarm_size = train_agents;
  d.adam = adam;
  d.sim = sim;
  d.seed = seed;
  return d;
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds = {"invariant", "baseline",
                                                 "expert", "local-expert"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw ConfigError("kind must be one of invariant|baseline|expert|local-expert, got " +
                      kind);
  if (is_learned(kind)) {
    if (layers < 2 || layers > 4)
      throw ConfigError("layers must be 2, 3 or 4, got " +
                        std::to_string(layers));
    if (width != 8 && width != 16 && width != 32)
      throw ConfigError("width must be 8, 16 or 32, got " +
                        std::to_string(width));
    parse_encoding(angle_encoding);
  }
  if (agents < 2) throw ConfigError("agents must be >= 2");
  if (!(episode_seconds > 0.0)) throw ConfigError("episode_seconds must be > 0");
  if (!(comm_radius > 0.0)) throw ConfigError("comm_radius must be > 0");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  sim.validate();
  dagger().validate();
}

void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value) {
  auto to_int = [&](const std::string& v) {
    try {
      return std::stoi(v);
    } catch (...) {
      throw ConfigError("config: bad integer for " + key + ": " + v);
    }
  };
  auto to_double = [&](const std::string& v) {
    try {
      return std::stod(v);
    } catch (...) {
      throw ConfigError("config: bad number for " + key + ": " + v);
    }
  };
  auto to_bool = [&](const std::string& v) -> bool {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: bad bool for " + key + ": " + v);
  };

  if (key == "kind") cfg.kind = value;
  else if (key == "layers") cfg.layers = to_int(value);
  else if (key == "width") cfg.width = to_int(value);
  else if (key == "angle_encoding") cfg.angle_encoding = value;
  else if (key == "checkpoint") cfg.checkpoint = value;
  else if (key == "agents") cfg.agents = to_int(value);
  else if (key == "episode_seconds") cfg.episode_seconds = to_double(value);
  else if (key == "comm_radius") cfg.comm_radius = to_double(value);
  else if (key == "eval_episodes") cfg.eval_episodes = to_int(value);
  else if (key == "write_trajectories") cfg.write_trajectories = to_bool(value);
  else if (key == "sim_comm_radius") cfg.sim.comm_radius = to_double(value);
  else if (key == "dt") cfg.sim.dt = to_double(value);
  else if (key == "frame_jitter_std") cfg.sim.frame_jitter_std = to_double(value);
  else if (key == "placement_radius_coef")
    cfg.sim.placement_radius_coef = to_double(value);
  else if (key == "min_separation") cfg.sim.min_separation = to_double(value);
  else if (key == "max_init_speed") cfg.sim.max_init_speed = to_double(value);
  else if (key == "max_placement_retries")
    cfg.sim.max_placement_retries = to_int(value);
  else if (key == "train_iterations") cfg.train_iterations = to_int(value);
  else if (key == "train_episodes_per_iter")
    cfg.train_episodes_per_iter = to_int(value);
  else if (key == "train_episode_seconds")
    cfg.train_episode_seconds = to_double(value);
  else if (key == "train_epochs") cfg.train_epochs = to_int(value);
  else if (key == "train_minibatch") cfg.train_minibatch = to_int(value);
  else if (key == "train_buffer_nodes")
    cfg.train_buffer_nodes = static_cast<std::size_t>(to_int(value));
  else if (key == "train_agents") cfg.train_agents = to_int(value);
  else if (key == "lr") cfg.adam.lr = to_double(value);
  else if (key == "adam_beta1") cfg.adam.beta1 = to_double(value);
  else if (key == "adam_beta2") cfg.adam.beta2 = to_double(value);
  else if (key == "adam_eps") cfg.adam.eps = to_double(value);
  else if (key == "seed") {
    try {
      cfg.seed = std::stoull(value);
    } catch (...) {
      throw ConfigError("config: bad seed: " + value);
    }
  } else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "parallel") cfg.parallel = to_bool(value);
  else throw ConfigError("config: unknown key " + key);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    apply_config_line(cfg, trim(line.substr(0, eq)),
                      trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "kind = " << cfg.kind << "\n";
  out << "layers = " << cfg.layers << "\n";
  out << "width = " << cfg.width << "\n";
  out << "angle_encoding = " << cfg.angle_encoding << "\n";
  out << "checkpoint = " << cfg.checkpoint << "\n";
  out << "agents = " << cfg.agents << "\n";
  out << "episode_seconds = " << g17(cfg.episode_seconds) << "\n";
  out << "comm_radius = " << g17(cfg.comm_radius) << "\n";
  out << "eval_episodes = " << cfg.eval_episodes << "\n";
  out << "write_trajectories = " << (cfg.write_trajectories ? "true" : "false")
      << "\n";
  out << "sim_comm_radius = " << g17(cfg.sim.comm_radius) << "\n";
  out << "dt = " << g17(cfg.sim.dt) << "\n";
  out << "frame_jitter_std = " << g17(cfg.sim.frame_jitter_std) << "\n";
  out << "placement_radius_coef = " << g17(cfg.sim.placement_radius_coef)
      << "\n";
  out << "min_separation = " << g17(cfg.sim.min_separation) << "\n";
  out << "max_init_speed = " << g17(cfg.sim.max_init_speed) << "\n";
  out << "max_placement_retries = " << cfg.sim.max_placement_retries << "\n";
  out << "train_iterations = " << cfg.train_iterations << "\n";
  out << "train_episodes_per_iter = " << cfg.train_episodes_per_iter << "\n";
  out << "train_episode_seconds = " << g17(cfg.train_episode_seconds) << "\n";
  out << "train_epochs = " << cfg.train_epochs << "\n";
  out << "train_minibatch = " << cfg.train_minibatch << "\n";
  out << "train_buffer_nodes = " << cfg.train_buffer_nodes << "\n";
  out << "train_agents = " << cfg.train_agents << "\n";
  out << "lr = " << g17(cfg.adam.lr) << "\n";
  out << "adam_beta1 = " << g17(cfg.adam.beta1) << "\n";
  out << "adam_beta2 = " << g17(cfg.adam.beta2) << "\n";
  out << "adam_eps = " << g17(cfg.adam.eps) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "out_dir = " << cfg.out_dir << "\n";
  out << "parallel = " << (cfg.parallel ? "true" : "false") << "\n";
  return out.str();
}

std::string render_metrics_csv(const MetricSeries& series) {
  std::string csv = std::string(kMetricsHeader) + "\n";
  char buf[128];
  for (std::size_t s = 0; s < series.mean.size(); ++s) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", s,
                  static_cast<double>(s) * series.dt, series.mean[s],
                  series.stddev[s]);
    csv += buf;
  }
  return csv;
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg) {
  if (!is_learned(cfg.kind))
    throw ConfigError("kind " + cfg.kind + " has no trainable model");
  Rng rng(substream(cfg.seed, kInitTag, static_cast<std::uint64_t>(cfg.layers),
                    static_cast<std::uint64_t>(cfg.width)));
  if (cfg.kind == "invariant") {
    GnnArch arch;
    arch.input_width = kFeatureWidth;
    arch.hidden_layers = cfg.layers;
    arch.width = cfg.width;
    return make_invariant_policy(arch, rng);
  }
  BaselineArch arch;
  arch.input_width = 2 * kFeatureWidth;
  arch.hidden_layers = cfg.layers;
  arch.width = cfg.width;
  arch.output_width = 2;
  arch.encoding = parse_encoding(cfg.angle_encoding);
  return make_baseline_policy(arch, rng);
}

Controller make_controller(const ExperimentConfig& cfg,
                           std::unique_ptr<Policy>& policy_out) {
  if (cfg.kind == "expert") {
    return [](const SwarmState& s, const EncodedGraph&) {
      return nominal_control(s);
    };
  }
  if (cfg.kind == "local-expert") {
    return [](const SwarmState& s, const EncodedGraph& g) {
      return local_nominal_control(s, g);
    };
  }
  if (cfg.checkpoint.empty())
    throw ConfigError("kind " + cfg.kind +
                      " needs a checkpoint (set `checkpoint = path`)");
  policy_out = load_checkpoint(cfg.checkpoint);
  if (policy_out->kind() != cfg.kind)
    throw ConfigError("checkpoint " + cfg.checkpoint + " holds a " +
                      policy_out->kind() + " model but config kind is " +
                      cfg.kind);
  for (const auto& [key, value] : policy_out->arch_fields()) {
    if (key == "hidden_layers" && std::stoi(value) != cfg.layers)
      throw ConfigError("checkpoint has " + value +
                        " hidden layers, config says " +
                        std::to_string(cfg.layers));
    if (key == "width" && std::stoi(value) != cfg.width)
      throw ConfigError("checkpoint has width " + value + ", config says " +
                        std::to_string(cfg.width));
  }
  const Policy* policy = policy_out.get();
  return [policy](const SwarmState&, const EncodedGraph& g) {
    return policy->act(g);
  };
}

MetricSeries evaluate(const Controller& controller, const ExperimentConfig& cfg,
                      bool write_outputs) {
  cfg.validate();
  const int episodes = cfg.eval_episodes;
  const int steps =
      static_cast<int>(std::llround(cfg.episode_seconds / cfg.sim.dt));
  std::vector<EpisodeResult> results(episodes);
  const bool record_traj = write_outputs && cfg.write_trajectories;
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
  for (int e = 0; e < episodes; ++e)
    results[e] = run_episode(controller, cfg, e, record_traj);

  MetricSeries series;
  series.dt = cfg.sim.dt;
  series.mean.assign(steps + 1, 0.0);
  series.stddev.assign(steps + 1, 0.0);
  for (int s = 0; s <= steps; ++s) {
    double m = 0.0;
    for (const auto& r : results) m += r.variance[s];
    m /= episodes;
    double var = 0.0;
    for (const auto& r : results) {
      const double d = r.variance[s] - m;
      var += d * d;
    }
    series.mean[s] = m;
    series.stddev[s] = std::sqrt(var / episodes);
  }

  if (write_outputs) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/config_resolved.txt", render_config(cfg));
    write_file(cfg.out_dir + "/metrics.csv", render_metrics_csv(series));
    if (record_traj) {
      char name[64];
      for (int e = 0; e < episodes; ++e) {
        std::snprintf(name, sizeof(name), "/traj_ep%03d.csv", e);
        write_file(cfg.out_dir + name, results[e].trajectory);
      }
    }
  }
  return series;
}

MetricSeries evaluate(const ExperimentConfig& cfg, bool write_outputs) {
  std::unique_ptr<Policy> policy;
  const Controller controller = make_controller(cfg, policy);
  return evaluate(controller, cfg, write_outputs);
}

std::unique_ptr<Policy> run_training(const ExperimentConfig& cfg,
                                     bool write_outputs) {
  cfg.validate();
  std::unique_ptr<Policy> policy = make_policy(cfg);
  std::string history;
  const TrainResult result =
      train(*policy, cfg.dagger(), cfg.parallel, [&](const IterationRecord& r) {
        nlohmann::json j;
        j["iter"] = r.iter;
        j["beta"] = r.beta;
        j["mean_loss"] = r.mean_loss;
        j["rollout_velocity_variance_curve"] = r.rollout_velocity_variance;
        history += j.dump() + "\n";
        std::fprintf(stderr, "[train] iter %d/%d beta=%.4g mean_loss=%.6g\n",
                     r.iter, cfg.train_iterations, r.beta, r.mean_loss);
      });
  if (write_outputs) {
    std::filesystem::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/config_resolved.txt", render_config(cfg));
    write_file(cfg.out_dir + "/history.jsonl", history);
    save_checkpoint(*policy, cfg.out_dir + "/model.ckpt.json");
  }
  return policy;
}

std::vector<SweepCell> sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!is_learned(cfg.kind))
    throw ConfigError("sweep needs kind invariant or baseline, got " + cfg.kind);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  write_file(cfg.out_dir + "/config_resolved.txt", render_config(cfg));

  std::vector<SweepCell> cells;
  std::string failures;
  for (int layers : {2, 3, 4}) {
    for (int width : {8, 16, 32}) {
      SweepCell cell;
      cell.layers = layers;
      cell.width = width;
      ExperimentConfig cc = cfg;
      cc.layers = layers;
      cc.width = width;
      cc.out_dir = cfg.out_dir + "/" + cell_dir_name(layers, width);
      try {
        auto policy = run_training(cc, true);
        cc.checkpoint = cc.out_dir + "/model.ckpt.json";
        const Policy* p = policy.get();
        const Controller controller = [p](const SwarmState&,
                                          const EncodedGraph& g) {
          return p->act(g);
        };
        const MetricSeries series = evaluate(controller, cc, true);
        cell.final_mean_var = series.mean.back();
        cell.final_std_var = series.stddev.back();
        cell.train_seconds = static_cast<double>(cc.train_iterations) *
                             cc.train_episodes_per_iter *
                             cc.train_episode_seconds;
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
        failures += cell_dir_name(layers, width) + ": " + e.what() + "\n";
        std::fprintf(stderr, "[sweep] %s FAILED: %s\n",
                     cell_dir_name(layers, width).c_str(), e.what());
      }
      cells.push_back(std::move(cell));
    }
  }

  std::string csv = std::string(kSweepHeader) + "\n";
  for (const auto& c : cells) {
    if (!c.ok) continue;
    csv += cfg.kind + "," + std::to_string(c.layers) + "," +
           std::to_string(c.width) + "," + g17(c.final_mean_var) + "," +
           g17(c.final_std_var) + "," + g17(c.train_seconds) + "\n";
  }
  write_file(cfg.out_dir + "/sweep_summary.csv", csv);
  if (!failures.empty()) write_file(cfg.out_dir + "/failures.txt", failures);
  return cells;
}

MetricSeries extended_run(ExperimentConfig cfg, double seconds) {
  cfg.episode_seconds = seconds;
  return evaluate(cfg, true);
}

MetricSeries reduced_radius_run(ExperimentConfig cfg, double radius) {
  // evaluation-time override only: init keeps sim.comm_radius so initial
  // states stay shared with the nominal-radius comparison
  cfg.comm_radius = radius;
  return evaluate(cfg, true);
}

}  // namespace cvflock
