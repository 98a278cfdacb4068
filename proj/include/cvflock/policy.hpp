#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cvflock/baseline.hpp"
#include "cvflock/cvnet.hpp"
#include "cvflock/swarm.hpp"

namespace cvflock {

// One labeled training sample: the graph a controller observed (features
// filled) plus the fully-connected expert's body-frame action per node.
struct Sample {
  EncodedGraph graph;
  ComplexVector expert_u;
};

// Uniform trainable-controller surface over the two network types. All
// methods are const except set_params_flat, so a Policy can be shared
// read-only across episode threads.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string kind() const = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;

  // Body-frame acceleration command per node; expects features filled.
  virtual ComplexVector act(const EncodedGraph& g) const = 0;

  virtual std::size_t param_count() const = 0;
  virtual std::vector<double> params_flat() const = 0;
  virtual void set_params_flat(const std::vector<double>& p) = 0;
  virtual std::string describe_param(std::size_t index) const = 0;

  // Per-sample loss (mean |u_nom - u|^2 over the sample's nodes) and its
  // gradient in the flat parameter layout.
  virtual std::pair<double, std::vector<double>> loss_and_grad(
      const Sample& sample) const = 0;

  // Architecture metadata for checkpoints, as ordered key/value pairs.
  virtual std::vector<std::pair<std::string, std::string>> arch_fields()
      const = 0;
};

std::unique_ptr<Policy> make_invariant_policy(const GnnArch& arch, Rng& rng);
std::unique_ptr<Policy> make_baseline_policy(const BaselineArch& arch,
                                             Rng& rng);

// Direct access to the wrapped nets (used by invariance tests).
const InvariantGnn* as_invariant(const Policy& p);
const BaselineGnn* as_baseline(const Policy& p);

}  // namespace cvflock
