#include <cmath>
#include <cstdio>
#include <numbers>

#include "cvflock/expert.hpp"
#include "cvflock/harness.hpp"

namespace cvflock {

namespace {

constexpr double kPi = std::numbers::pi;

SwarmState random_state(int n, Rng& rng, double min_sep = 0.0) {
  SwarmState s;
  s.pos.resize(n);
  s.vel.resize(n);
  s.frame.resize(n);
  for (int i = 0; i < n; ++i) {
    do {
      s.pos[i] = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
      bool ok = true;
      for (int j = 0; j < i; ++j)
        ok = ok && norm_sq(s.pos[i] - s.pos[j]) >= min_sep * min_sep;
      if (ok) break;
    } while (true);
    s.vel[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    s.frame[i] = Rotation(rng.uniform(-kPi, kPi));
  }
  return s;
}

void random_features(EncodedGraph& g, int width, Rng& rng) {
  for (auto& f : g.features) {
    f.resize(width);
    for (auto& c : f) c = Complex(rng.normal(), rng.normal());
  }
}

std::vector<Rotation> random_deltas(int n, Rng& rng) {
  std::vector<Rotation> d(n);
  for (auto& r : d) r = Rotation(rng.uniform(-kPi, kPi));
  return d;
}

bool report(const char* name, bool ok, double worst) {
  std::printf("[%s] %s (worst %.3g)\n", ok ? "ok" : "FAIL", name, worst);
  return ok;
}

bool rho_homomorphism(Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Rotation a(rng.uniform(-10.0, 10.0));
    const Rotation b(rng.uniform(-10.0, 10.0));
    worst = std::max(worst, std::abs(rho(compose(a, b)) - rho(a) * rho(b)));
  }
  return report("rho homomorphism", worst <= 1e-12, worst);
}

bool matmul_equivariance(Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int m = 1 + static_cast<int>(rng.below(5));
    const int n = 1 + static_cast<int>(rng.below(5));
    ComplexMatrix w(m, n);
    for (auto& e : w.data()) e = Complex(rng.normal(), rng.normal());
    ComplexVector x(n);
    for (auto& c : x) c = Complex(rng.normal(), rng.normal());
    const Complex r = rho(Rotation(rng.uniform(-kPi, kPi)));
    ComplexVector rx = x;
    for (auto& c : rx) c *= r;
    const ComplexVector lhs = cmatvec(w, rx);
    ComplexVector rhs = cmatvec(w, x);
    for (auto& c : rhs) c *= r;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < m; ++i) {
      num += std::norm(lhs[i] - rhs[i]);
      den += std::norm(rhs[i]);
    }
    worst = std::max(worst, std::sqrt(num) / std::max(1e-300, std::sqrt(den)));
  }
  return report("complex matmul rotation equivariance", worst <= 1e-9, worst);
}

bool activation_contract(Rng& rng) {
  PhaseAmpActivation act{{0.0}, {0.0}};
  double worst = 0.0;
  // zero maps to zero exactly
  if (activate(act, {Complex(0.0, 0.0)})[0] != Complex(0.0, 0.0))
    return report("activation contract", false, 1.0);
  for (int t = 0; t < 500; ++t) {
    PhaseAmpActivation a{{rng.normal()}, {rng.uniform(-kPi, kPi)}};
    const Complex c(rng.normal(), rng.normal());
    const Complex phase = rho(Rotation(rng.uniform(-kPi, kPi)));
    const Complex lhs = activate(a, {phase * c})[0];
    const Complex rhs = phase * activate(a, {c})[0];
    worst = std::max(worst, std::abs(lhs - rhs));
    const double mag = std::abs(activate(act, {c})[0]);
    worst = std::max(worst, std::abs(mag - std::abs(std::tanh(std::abs(c)))));
  }
  return report("activation phase equivariance + magnitude", worst <= 1e-12,
                worst);
}

bool frame_perturbation_consistency(Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 8;
    SwarmState s = random_state(n, rng);
    EncodedGraph g = build_graph(s, 1.5);
    local_features(s, g);
    const auto deltas = random_deltas(n, rng);

    SwarmState s2 = s;
    EncodedGraph g2 = g;
    perturb_frames(s2, g2, deltas);

    EncodedGraph rebuilt = build_graph(s2, 1.5);
    local_features(s2, rebuilt);
    for (int i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < g2.nbrs[i].size(); ++k)
        worst = std::max(worst, std::abs(g2.nbrs[i][k].rot -
                                         rebuilt.nbrs[i][k].rot));
      for (int k = 0; k < kFeatureWidth; ++k)
        worst = std::max(worst,
                         std::abs(g2.features[i][k] - rebuilt.features[i][k]));
    }
  }
  return report("frame perturbation two-path consistency", worst <= 1e-9,
                worst);
}

bool forward_equivariance(Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < 25; ++t) {
    const int n = 10;
    GnnArch arch;
    arch.hidden_layers = 2;
    arch.width = 8;
    const InvariantGnn net = init_invariant(arch, rng);
    SwarmState s = random_state(n, rng);
    EncodedGraph g = build_graph(s, 1.5);
    random_features(g, kFeatureWidth, rng);
    const auto base = forward(net, g);
    const auto deltas = random_deltas(n, rng);
    SwarmState s2 = s;
    perturb_frames(s2, g, deltas);
    const auto perturbed = forward(net, g);
    for (int i = 0; i < n; ++i) {
      const Complex want = rho(deltas[i].inverse()) * base[i];
      const double rel = std::abs(perturbed[i] - want) /
                         std::max(1e-300, std::abs(want));
      worst = std::max(worst, rel);
    }
  }
  return report("gnn forward frame equivariance", worst <= 1e-8, worst);
}

template <typename Net>
bool gradient_check(const char* name, Net& policy, const Sample& sample) {
  const double h = 1e-5;
  std::vector<double> params = policy->params_flat();
  const auto [loss, grad] = policy->loss_and_grad(sample);
  (void)loss;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    policy->set_params_flat(params);
    const double lp = policy->loss_and_grad(sample).first;
    params[i] = keep - h;
    policy->set_params_flat(params);
    const double lm = policy->loss_and_grad(sample).first;
    params[i] = keep;
    policy->set_params_flat(params);
    const double fd = (lp - lm) / (2.0 * h);
    const double err =
        std::abs(fd - grad[i]) / std::max(1e-3, std::abs(fd));
    worst = std::max(worst, err);
  }
  return report(name, worst <= 1e-4, worst);
}

}  // namespace

bool run_selftest(std::uint64_t seed) {
  Rng rng(substream(seed, 0x5E1F));
  bool ok = true;
  ok &= rho_homomorphism(rng);
  ok &= matmul_equivariance(rng);
  ok &= activation_contract(rng);
  ok &= frame_perturbation_consistency(rng);
  ok &= forward_equivariance(rng);

  {
    SwarmState s = random_state(6, rng, 0.4);
    EncodedGraph g = build_graph(s, 1.5);
    local_features(s, g);
    Sample sample{g, nominal_control(s)};
    GnnArch arch;
    arch.hidden_layers = 2;
    arch.width = 8;
    auto inv = make_invariant_policy(arch, rng);
    ok &= gradient_check("invariant gradient vs finite differences", inv,
                         sample);
    BaselineArch barch;
    barch.hidden_layers = 2;
    barch.width = 8;
    auto base = make_baseline_policy(barch, rng);
    ok &= gradient_check("baseline gradient vs finite differences", base,
                         sample);
  }
  std::printf("%s\n", ok ? "selftest: all suites passed"
                         : "selftest: FAILURES detected");
  return ok;
}

}  // namespace cvflock
