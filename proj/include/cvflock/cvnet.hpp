#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cvflock/rng.hpp"
#include "cvflock/swarm.hpp"

namespace cvflock {

// One modified SAGEConv layer: out_i = W * [x_i ; mean_j rot_ij x_j].
// W is out_width x (2 * in_width), complex, no additive bias.
struct SageLayer {
  ComplexMatrix w;

  int in_width() const { return w.cols() / 2; }
  int out_width() const { return w.rows(); }
};

// Split phase-amplitude activation with per-channel magnitude bias b and
// phase bias theta: sigma(c) = e^{j theta} tanh(|c| + b) c / |c|, with
// sigma(0) = 0. Phase biases are kept canonical in [-pi, pi).
struct PhaseAmpActivation {
  std::vector<double> mag_bias;
  std::vector<double> phase_bias;

  int width() const { return static_cast<int>(mag_bias.size()); }
};

struct GnnArch {
  int input_width = 3;
  int hidden_layers = 2;  // number of (conv, activation) pairs
  int width = 8;          // hidden width
};

// hidden_layers (conv, activation) pairs followed by an un-activated conv
// head projecting to width 1 (the complex acceleration command).
struct InvariantGnn {
  std::vector<SageLayer> layers;  // layers.size() == acts.size() + 1
  std::vector<PhaseAmpActivation> acts;

  int input_width() const { return layers.front().in_width(); }
};

// Complex weights with re/im parts i.i.d. Normal(0, 1/(2 fan_in)) so that
// E|w|^2 = 1/fan_in; biases zero.
InvariantGnn init_invariant(const GnnArch& arch, Rng& rng);

// Message function: re-express the sender's vector in the receiver's frame.
ComplexVector message(const ComplexVector& x_j, Complex rot_ij);

// Per-node forward of one conv layer; isolated nodes aggregate a zero vector.
std::vector<ComplexVector> layer_forward(const SageLayer& layer,
                                         const std::vector<ComplexVector>& x,
                                         const EncodedGraph& g);

ComplexVector activate(const PhaseAmpActivation& act, const ComplexVector& c);

// Full forward pass: graph features (width input_width) -> per-node complex
// acceleration command.
std::vector<Complex> forward(const InvariantGnn& net, const EncodedGraph& g);

// Intermediate values needed by backward.
struct InvariantTrace {
  std::vector<std::vector<ComplexVector>> inputs;  // per conv layer, per node
  std::vector<std::vector<ComplexVector>> preact;  // per hidden layer, per node
  std::vector<Complex> output;
};

InvariantTrace forward_traced(const InvariantGnn& net, const EncodedGraph& g);

// Flat real parameter layout, in order: for each hidden layer l — W_l
// entries row-major as (re, im) pairs, then mag biases, then phase biases —
// and finally the head W. Gradients use the same layout.
std::size_t param_count(const InvariantGnn& net);
std::vector<double> params_flat(const InvariantGnn& net);
void set_params_flat(InvariantGnn& net, const std::vector<double>& p);
std::string describe_param(const InvariantGnn& net, std::size_t index);

// Exact partial derivatives of a real loss with respect to every real
// parameter coordinate. cotangent[i] = dL/dRe(out_i) + j dL/dIm(out_i).
std::vector<double> backward(const InvariantGnn& net, const EncodedGraph& g,
                             const InvariantTrace& trace,
                             const std::vector<Complex>& cotangent);

// Magnitudes below this activate to exactly zero (value and gradient).
inline constexpr double kActivationEps = 1e-12;

}  // namespace cvflock
