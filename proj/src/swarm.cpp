#include "cvflock/swarm.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace cvflock {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec2 sample_disc(Rng& rng, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double th = rng.uniform(0.0, kTwoPi);
  return {r * std::cos(th), r * std::sin(th)};
}

bool graph_connected(const std::vector<Vec2>& pos, double comm_radius) {
  const int n = static_cast<int>(pos.size());
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  const double c2 = comm_radius * comm_radius;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < n; ++j) {
      if (seen[j]) continue;
      const double d2 = norm_sq(pos[i] - pos[j]);
      if (d2 > 0.0 && d2 < c2) {
        seen[j] = 1;
        ++reached;
        stack.push_back(j);
      }
    }
  }
  return reached == n;
}

// One placement attempt: per-agent rejection sampling against the minimum
// separation. Returns false if some agent could not be placed.
bool try_place(std::vector<Vec2>& pos, int n, double radius, double min_sep,
               Rng& rng) {
  constexpr int kPerAgentTries = 2000;
  const double sep2 = min_sep * min_sep;
  pos.assign(n, {});
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int t = 0; t < kPerAgentTries && !placed; ++t) {
      const Vec2 p = sample_disc(rng, radius);
      placed = true;
      for (int j = 0; j < i; ++j) {
        if (norm_sq(pos[j] - p) < sep2) {
          placed = false;
          break;
        }
      }
      if (placed) pos[i] = p;
    }
    if (!placed) return false;
  }
  return true;
}

}  // namespace

double SimConfig::placement_radius(int n) const {
  return placement_radius_coef * std::pow(static_cast<double>(n), 0.25);
}

void SimConfig::validate() const {
  if (!(comm_radius > 0.0))
    throw ConfigError("sim.comm_radius must be > 0");
  if (!(dt > 0.0)) throw ConfigError("sim.dt must be > 0");
  if (!(frame_jitter_std >= 0.0))
    throw ConfigError("sim.frame_jitter_std must be >= 0");
  if (!(placement_radius_coef > 0.0))
    throw ConfigError("sim.placement_radius_coef must be > 0");
  if (!(min_separation >= 0.0))
    throw ConfigError("sim.min_separation must be >= 0");
  if (!(max_init_speed >= 0.0))
    throw ConfigError("sim.max_init_speed must be >= 0");
  if (max_placement_retries < 1)
    throw ConfigError("sim.max_placement_retries must be >= 1");
}

std::size_t EncodedGraph::edge_count() const {
  std::size_t e = 0;
  for (const auto& v : nbrs) e += v.size();
  return e;
}

SwarmState init_swarm(int n, const SimConfig& cfg, Rng& rng) {
  if (n < 2) throw ConfigError("init_swarm: need at least 2 agents");
  cfg.validate();

  const double radius = cfg.placement_radius(n);
  SwarmState s;
  for (int attempt = 0; attempt < cfg.max_placement_retries; ++attempt) {
    if (!try_place(s.pos, n, radius, cfg.min_separation, rng)) continue;
    if (!graph_connected(s.pos, cfg.comm_radius)) continue;

    s.vel.resize(n);
    for (int i = 0; i < n; ++i) s.vel[i] = sample_disc(rng, cfg.max_init_speed);
    s.frame.resize(n);
    for (int i = 0; i < n; ++i)
      s.frame[i] = Rotation(rng.uniform(-std::numbers::pi, std::numbers::pi));
    return s;
  }
  throw ConfigError(
      "init_swarm: no connected placement within " +
      std::to_string(cfg.max_placement_retries) + " retries (n=" +
      std::to_string(n) + ", comm_radius=" + std::to_string(cfg.comm_radius) +
      ", placement_radius=" + std::to_string(radius) +
      ", min_separation=" + std::to_string(cfg.min_separation) + ")");
}

void randomize_frames(SwarmState& s, Rng& rng) {
  for (auto& f : s.frame)
    f = Rotation(rng.uniform(-std::numbers::pi, std::numbers::pi));
}

EncodedGraph build_graph(const SwarmState& s, double comm_radius) {
  const int n = s.size();
  EncodedGraph g;
  g.nbrs.resize(n);
  g.features.resize(n);
  const double c2 = comm_radius * comm_radius;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d2 = norm_sq(s.pos[i] - s.pos[j]);
      if (d2 == 0.0) {
        throw SimFault("build_graph: agents " + std::to_string(i) + " and " +
                       std::to_string(j) + " are coincident");
      }
      if (d2 < c2) {
        g.nbrs[i].push_back(
            {j, rho(compose(s.frame[j], s.frame[i].inverse()))});
      }
    }
  }
  return g;
}

void perturb_frames(SwarmState& s, EncodedGraph& g,
                    const std::vector<Rotation>& deltas) {
  const int n = s.size();
  if (static_cast<int>(deltas.size()) != n)
    throw ShapeError("perturb_frames: " + std::to_string(deltas.size()) +
                     " deltas for " + std::to_string(n) + " agents");
  for (int i = 0; i < n; ++i)
    s.frame[i] = compose(s.frame[i], deltas[i]);
  for (int i = 0; i < n; ++i) {
    const Complex inv_i = rho(deltas[i].inverse());
    for (auto& c : g.features[i]) c *= inv_i;
    for (auto& e : g.nbrs[i]) e.rot *= rho(deltas[e.j]) * inv_i;
  }
}

void step_dynamics(SwarmState& s, const ComplexVector& u, const SimConfig& cfg,
                   Rng& rng) {
  const int n = s.size();
  if (static_cast<int>(u.size()) != n)
    throw ShapeError("step_dynamics: " + std::to_string(u.size()) +
                     " commands for " + std::to_string(n) + " agents");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(u[i].real()) || !std::isfinite(u[i].imag()))
      throw SimFault("step_dynamics: non-finite acceleration for agent " +
                     std::to_string(i));
  }
  for (int i = 0; i < n; ++i) {
    const Vec2 acc = extract(rotate(u[i], s.frame[i]));  // body -> global
    s.vel[i] = s.vel[i] + acc * cfg.dt;
    s.pos[i] = s.pos[i] + s.vel[i] * cfg.dt;
  }
  for (int i = 0; i < n; ++i) {
    const double jitter = rng.normal(0.0, cfg.frame_jitter_std);
    s.frame[i] = Rotation(s.frame[i].angle() + jitter);
  }
}

double velocity_variance(const SwarmState& s) {
  const int n = s.size();
  if (n < 1) throw SimFault("velocity_variance: empty swarm");
  Vec2 mean{};
  for (const auto& v : s.vel) mean = mean + v;
  mean = mean * (1.0 / n);
  double acc = 0.0;
  for (const auto& v : s.vel) acc += norm_sq(v - mean);
  return acc / n;
}

void append_trajectory_rows(std::string& csv, int step, const SwarmState& s) {
  char buf[256];
  for (int i = 0; i < s.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  step, i, s.pos[i].x, s.pos[i].y, s.vel[i].x, s.vel[i].y,
                  s.frame[i].angle());
    csv += buf;
  }
}

}  // namespace cvflock
