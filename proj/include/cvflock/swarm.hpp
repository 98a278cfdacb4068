#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvflock/geometry.hpp"
#include "cvflock/rng.hpp"

namespace cvflock {

struct SimConfig {
  double comm_radius = 1.0;       // m
  double dt = 0.01;               // s
  double frame_jitter_std = 0.1;  // rad per step
  // initial placement: uniform in a disc of radius coef * n^(1/4) (the
  // fully-connected controller's equilibrium swarm radius scales this way),
  // per-agent resampled to keep pairwise separation >= min_separation
  double placement_radius_coef = 0.55;
  double min_separation = 0.2;  // m
  double max_init_speed = 1.0;  // m/s
  int max_placement_retries = 10000;

  double placement_radius(int n) const;
  void validate() const;  // throws ConfigError
};

// Ground-truth global-frame state. The global frame is simulator-private;
// controllers only ever see body-frame quantities via EncodedGraph.
struct SwarmState {
  std::vector<Vec2> pos;        // m
  std::vector<Vec2> vel;        // m/s
  std::vector<Rotation> frame;  // body frame orientation relative to global

  int size() const { return static_cast<int>(pos.size()); }
};

// Directed edge payload: rot re-expresses a frame-j complex coordinate in
// frame i, rot = e^{j(alpha_j - alpha_i)}.
struct EdgeTo {
  int j;
  Complex rot;
};

struct EncodedGraph {
  std::vector<std::vector<EdgeTo>> nbrs;  // nbrs[i]: ascending j
  std::vector<ComplexVector> features;    // per-node body-frame features

  int size() const { return static_cast<int>(nbrs.size()); }
  std::size_t edge_count() const;  // directed
};

// Connected (at cfg.comm_radius) random swarm; throws ConfigError when the
// retry budget is exhausted.
SwarmState init_swarm(int n, const SimConfig& cfg, Rng& rng);

// Re-draw all body frames uniformly in [-pi, pi).
void randomize_frames(SwarmState& s, Rng& rng);

// Graph structure only (edges + rotations, empty feature vectors); an edge
// (i,j) exists iff 0 < |p_i - p_j| < comm_radius. Coincident agents fault.
EncodedGraph build_graph(const SwarmState& s, double comm_radius);

// Rotate each body frame by deltas[i] and apply the induced transformation
// to the encoded graph: features pick up e^{-j delta_i}, edge rotations
// become e^{j delta_j} e^{-j delta_i} rot_ij. Global-frame meaning of every
// feature is unchanged.
void perturb_frames(SwarmState& s, EncodedGraph& g,
                    const std::vector<Rotation>& deltas);

// Semi-implicit Euler step with body-frame accelerations u (one Complex per
// agent), then per-agent orientation jitter Normal(0, frame_jitter_std^2)
// drawn from rng.
void step_dynamics(SwarmState& s, const ComplexVector& u, const SimConfig& cfg,
                   Rng& rng);

// Mean over agents of |v_i - v_mean|^2 (trace of the biased velocity
// covariance), m^2/s^2.
double velocity_variance(const SwarmState& s);

inline constexpr const char* kTrajectoryHeader = "step,agent,px,py,vx,vy,alpha";

// One CSV row per agent for the given step, appended to csv.
void append_trajectory_rows(std::string& csv, int step, const SwarmState& s);

}  // namespace cvflock
