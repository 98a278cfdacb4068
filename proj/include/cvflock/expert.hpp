#pragma once

#include "cvflock/swarm.hpp"

namespace cvflock {

// Position of agent j expressed in agent i's body frame:
// T_ij = e^{-j alpha_i} * embed(p_j - p_i).
Complex relative_position(const SwarmState& s, int i, int j);

// Nominal flocking controller over the fully connected graph (it ignores the
// communication radius). Per agent, in its own body frame:
//   u_i = sum_{j != i} (rot_ij v_j - v_i) - 2 T_ij/|T_ij|^4 + 2 T_ij/|T_ij|^2
// The velocity-consensus term damps disagreement; the pair potential has its
// equilibrium at distance 1. Faults on coincident agents.
ComplexVector nominal_control(const SwarmState& s);

// Same control law summed over graph neighbors only (the splay-prone local
// variant, kept as a comparison curve).
ComplexVector local_nominal_control(const SwarmState& s,
                                    const EncodedGraph& g);

// Fill g.features with the width-3 body-frame feature tuple per node:
//   ( sum_j (v_i - rot_ij v_j),  sum_j T_ij/|T_ij|^2,  sum_j T_ij/|T_ij|^4 )
// summed over graph neighbors; an isolated node gets the empty-sum zeros.
void local_features(const SwarmState& s, EncodedGraph& g);

inline constexpr int kFeatureWidth = 3;

}  // namespace cvflock
