#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cvflock/rng.hpp"
#include "cvflock/swarm.hpp"

namespace cvflock {

using RealVector = std::vector<double>;

class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return data_[idx(r, c)]; }
  const double& operator()(int r, int c) const { return data_[idx(r, c)]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// How the inter-frame angle rides along on each message.
enum class AngleEncoding {
  kRaw,     // append theta_ij (radians), the default
  kCosSin,  // append (cos theta_ij, sin theta_ij); ablation only
};

inline int angle_dims(AngleEncoding e) {
  return e == AngleEncoding::kRaw ? 1 : 2;
}

// Real SAGEConv layer over angle-augmented messages, no additive bias:
// out_i = W * [x_i ; mean_j concat(x_j, enc(theta_ij))].
struct RealSageLayer {
  RealMatrix w;  // out_width x (in_width + in_width + angle_dims)
};

struct BaselineArch {
  int input_width = 6;  // width-3 complex feature tuple as (x, y) pairs
  int hidden_layers = 2;
  int width = 8;
  int output_width = 2;  // body-frame acceleration as a 2-vector
  AngleEncoding encoding = AngleEncoding::kRaw;
};

// Standard SAGEConv stack with elementwise tanh between layers and a linear
// head; the only modification is the angle appended to each message.
struct BaselineGnn {
  std::vector<RealSageLayer> layers;
  AngleEncoding encoding = AngleEncoding::kRaw;

  int hidden_count() const { return static_cast<int>(layers.size()) - 1; }
  int in_width(int layer) const {
    return (layers[layer].w.cols() - angle_dims(encoding)) / 2;
  }
};

BaselineGnn init_baseline(const BaselineArch& arch, Rng& rng);

// concat(x_j, encoded angle).
RealVector baseline_message(const RealVector& x_j, double theta_ij,
                            AngleEncoding enc);

// Real per-node features for the baseline: the complex width-3 feature tuple
// flattened to (re, im) pairs, width 6.
std::vector<RealVector> real_features(const EncodedGraph& g);

std::vector<RealVector> baseline_layer_forward(const RealSageLayer& layer,
                                               const std::vector<RealVector>& x,
                                               const EncodedGraph& g,
                                               AngleEncoding enc);

// Full forward: per-node output (width output_width).
std::vector<RealVector> baseline_forward(const BaselineGnn& net,
                                         const EncodedGraph& g);

struct BaselineTrace {
  std::vector<std::vector<RealVector>> inputs;  // per layer, per node
  std::vector<std::vector<RealVector>> preact;  // per hidden layer, per node
  std::vector<RealVector> output;
};

BaselineTrace baseline_forward_traced(const BaselineGnn& net,
                                      const EncodedGraph& g);

// Flat layout: W entries row-major per layer, in layer order.
std::size_t baseline_param_count(const BaselineGnn& net);
std::vector<double> baseline_params_flat(const BaselineGnn& net);
void baseline_set_params_flat(BaselineGnn& net, const std::vector<double>& p);
std::string baseline_describe_param(const BaselineGnn& net, std::size_t index);

// cotangent[i][k] = dL/d out_i[k].
std::vector<double> baseline_backward(const BaselineGnn& net,
                                      const EncodedGraph& g,
                                      const BaselineTrace& trace,
                                      const std::vector<RealVector>& cotangent);

}  // namespace cvflock
