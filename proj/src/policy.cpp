#include "cvflock/policy.hpp"

#include "cvflock/training.hpp"

namespace cvflock {

namespace {

class InvariantPolicy final : public Policy {
 public:
  InvariantPolicy(const GnnArch& arch, Rng& rng)
      : arch_(arch), net_(init_invariant(arch, rng)) {}
  explicit InvariantPolicy(const InvariantPolicy&) = default;

  std::string kind() const override { return "invariant"; }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<InvariantPolicy>(*this);
  }

  ComplexVector act(const EncodedGraph& g) const override {
    return forward(net_, g);
  }

  std::size_t param_count() const override { return cvflock::param_count(net_); }
  std::vector<double> params_flat() const override {
    return cvflock::params_flat(net_);
  }
  void set_params_flat(const std::vector<double>& p) override {
    cvflock::set_params_flat(net_, p);
  }
  std::string describe_param(std::size_t index) const override {
    return cvflock::describe_param(net_, index);
  }

  std::pair<double, std::vector<double>> loss_and_grad(
      const Sample& sample) const override {
    const InvariantTrace trace = forward_traced(net_, sample.graph);
    const double loss = msae_loss(trace.output, sample.expert_u);
    const double inv_n = 1.0 / static_cast<double>(trace.output.size());
    std::vector<Complex> cot(trace.output.size());
    for (std::size_t i = 0; i < cot.size(); ++i)
      cot[i] = 2.0 * inv_n * (trace.output[i] - sample.expert_u[i]);
    return {loss, backward(net_, sample.graph, trace, cot)};
  }

  std::vector<std::pair<std::string, std::string>> arch_fields()
      const override {
    return {{"input_width", std::to_string(arch_.input_width)},
            {"hidden_layers", std::to_string(arch_.hidden_layers)},
            {"width", std::to_string(arch_.width)}};
  }

  const InvariantGnn& net() const { return net_; }

 private:
  GnnArch arch_;
  InvariantGnn net_;
};

class BaselinePolicy final : public Policy {
 public:
  BaselinePolicy(const BaselineArch& arch, Rng& rng)
      : arch_(arch), net_(init_baseline(arch, rng)) {}
  explicit BaselinePolicy(const BaselinePolicy&) = default;

  std::string kind() const override { return "baseline"; }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<BaselinePolicy>(*this);
  }

  ComplexVector act(const EncodedGraph& g) const override {
    const auto out = baseline_forward(net_, g);
    ComplexVector u(out.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      u[i] = Complex(out[i][0], out[i][1]);
    return u;
  }

  std::size_t param_count() const override {
    return baseline_param_count(net_);
  }
  std::vector<double> params_flat() const override {
    return baseline_params_flat(net_);
  }
  void set_params_flat(const std::vector<double>& p) override {
    baseline_set_params_flat(net_, p);
  }
  std::string describe_param(std::size_t index) const override {
    return baseline_describe_param(net_, index);
  }

  std::pair<double, std::vector<double>> loss_and_grad(
      const Sample& sample) const override {
    const BaselineTrace trace = baseline_forward_traced(net_, sample.graph);
    const std::size_t n = trace.output.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    std::vector<RealVector> cot(n, RealVector(2));
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = trace.output[i][0] - sample.expert_u[i].real();
      const double dy = trace.output[i][1] - sample.expert_u[i].imag();
      loss += (dx * dx + dy * dy) * inv_n;
      cot[i][0] = 2.0 * inv_n * dx;
      cot[i][1] = 2.0 * inv_n * dy;
    }
    return {loss, baseline_backward(net_, sample.graph, trace, cot)};
  }

  std::vector<std::pair<std::string, std::string>> arch_fields()
      const override {
    return {{"input_width", std::to_string(arch_.input_width)},
            {"hidden_layers", std::to_string(arch_.hidden_layers)},
            {"width", std::to_string(arch_.width)},
            {"output_width", std::to_string(arch_.output_width)},
            {"angle_encoding",
             arch_.encoding == AngleEncoding::kRaw ? "raw" : "cossin"}};
  }

  const BaselineGnn& net() const { return net_; }

 private:
  BaselineArch arch_;
  BaselineGnn net_;
};

}  // namespace

std::unique_ptr<Policy> make_invariant_policy(const GnnArch& arch, Rng& rng) {
  return std::make_unique<InvariantPolicy>(arch, rng);
}

std::unique_ptr<Policy> make_baseline_policy(const BaselineArch& arch,
                                             Rng& rng) {
  return std::make_unique<BaselinePolicy>(arch, rng);
}

const InvariantGnn* as_invariant(const Policy& p) {
  auto* ip = dynamic_cast<const InvariantPolicy*>(&p);
  return ip ? &ip->net() : nullptr;
}

const BaselineGnn* as_baseline(const Policy& p) {
  auto* bp = dynamic_cast<const BaselinePolicy*>(&p);
  return bp ? &bp->net() : nullptr;
}

}  // namespace cvflock
