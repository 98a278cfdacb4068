#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cvflock/checkpoint.hpp"
#include "cvflock/cvnet.hpp"
#include "cvflock/policy.hpp"
#include "cvflock/training.hpp"
#include "test_util.hpp"

using namespace cvflock;
using testutil::kPi;

namespace {

EncodedGraph two_node_graph(Complex rot01 = {1.0, 0.0}) {
  EncodedGraph g;
  g.nbrs = {{{1, rot01}}, {{0, std::conj(rot01)}}};
  g.features.resize(2);
  return g;
}

EncodedGraph isolated_graph(int n) {
  EncodedGraph g;
  g.nbrs.resize(n);
  g.features.resize(n);
  return g;
}

// central finite differences over the flat parameters of a loss function
template <typename Loss>
double worst_fd_error(std::vector<double>& params, const Loss& loss,
                      const std::vector<double>& grad, double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double lp = loss(params);
    params[i] = keep - h;
    const double lm = loss(params);
    params[i] = keep;
    const double fd = (lp - lm) / (2.0 * h);
    const double err = std::abs(fd - grad[i]) / std::max(1e-3, std::abs(fd));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

TEST_CASE("message: identity, scalar multiply, perturbation identity") {
  CHECK(message({Complex(0.3, 1.0)}, Complex(1.0, 0.0))[0] ==
        Complex(0.3, 1.0));
  const auto m = message({Complex(1.0, 0.0), Complex(2.0, 0.0)},
                         Complex(0.0, 1.0));
  CHECK(m[0] == Complex(0.0, 1.0));
  CHECK(m[1] == Complex(0.0, 2.0));

  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    ComplexVector x{{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
    const Complex rot = rho(Rotation(rng.uniform(-kPi, kPi)));
    const Complex di = rho(Rotation(rng.uniform(-kPi, kPi)));
    const Complex dj = rho(Rotation(rng.uniform(-kPi, kPi)));
    // perturbed sender features and edge rotation
    ComplexVector xp = x;
    for (auto& c : xp) c /= dj;
    const Complex rotp = dj / di * rot;
    const auto out = message(x, rot);
    const auto outp = message(xp, rotp);
    for (int k = 0; k < 2; ++k)
      CHECK(std::abs(outp[k] - out[k] / di) <= 1e-12);
  }
}

TEST_CASE("layer_forward identity blocks on an isolated node") {
  SageLayer layer;
  layer.w = ComplexMatrix(3, 6);
  for (int k = 0; k < 3; ++k) {
    layer.w(k, k) = 1.0;
    layer.w(k, 3 + k) = 1.0;
  }
  EncodedGraph g = isolated_graph(1);
  const ComplexVector x{{1.0, 2.0}, {-0.5, 0.0}, {0.0, 3.0}};
  const auto out = layer_forward(layer, {x}, g);
  for (int k = 0; k < 3; ++k) CHECK(out[0][k] == x[k]);
}

TEST_CASE("layer_forward neighbor copy with identity frames") {
  SageLayer layer;
  layer.w = ComplexMatrix(2, 4);
  layer.w(0, 2) = 1.0;
  layer.w(1, 3) = 1.0;  // [0 | I]
  EncodedGraph g = two_node_graph();
  const std::vector<ComplexVector> x{{Complex(1.0, 1.0), Complex(2.0, 0.0)},
                                     {Complex(-1.0, 0.5), Complex(0.0, 4.0)}};
  const auto out = layer_forward(layer, x, g);
  for (int k = 0; k < 2; ++k) {
    CHECK(out[0][k] == x[1][k]);
    CHECK(out[1][k] == x[0][k]);
  }

  SageLayer bad;
  bad.w = ComplexMatrix(2, 6);
  CHECK_THROWS_AS(layer_forward(bad, x, g), ShapeError);
}

TEST_CASE("layer_forward is equivariant to per-node frame changes") {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const int n = 7;
    SwarmState s = testutil::random_state(n, rng);
    EncodedGraph g = build_graph(s, 1.6);
    testutil::random_features(g, 4, rng);
    SageLayer layer;
    layer.w = ComplexMatrix(5, 8);
    for (auto& e : layer.w.data()) e = Complex(rng.normal(), rng.normal());
    const auto base = layer_forward(layer, g.features, g);

    const auto deltas = testutil::random_deltas(n, rng);
    SwarmState s2 = s;
    perturb_frames(s2, g, deltas);
    const auto pert = layer_forward(layer, g.features, g);
    for (int i = 0; i < n; ++i) {
      const Complex f = rho(deltas[i].inverse());
      for (int k = 0; k < 5; ++k)
        CHECK(std::abs(pert[i][k] - f * base[i][k]) <=
              1e-9 * std::max(1.0, std::abs(base[i][k])));
    }
  }
}

TEST_CASE("activation: zero fixpoint, tanh magnitude, phase bias") {
  PhaseAmpActivation plain{{0.0}, {0.0}};
  CHECK(activate(plain, {Complex(0.0, 0.0)})[0] == Complex(0.0, 0.0));
  CHECK(activate(plain, {Complex(1.0, 0.0)})[0].real() ==
        doctest::Approx(std::tanh(1.0)).epsilon(1e-15));

  PhaseAmpActivation flipped{{0.0}, {kPi}};
  CHECK(activate(flipped, {Complex(1.0, 0.0)})[0].real() ==
        doctest::Approx(-std::tanh(1.0)).epsilon(1e-12));

  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    PhaseAmpActivation a{{rng.normal()}, {rng.uniform(-kPi, kPi)}};
    const Complex c(rng.normal(), rng.normal());
    // phase equivariance is exact up to rounding
    const Complex phase = rho(Rotation(rng.uniform(-kPi, kPi)));
    CHECK(std::abs(activate(a, {phase * c})[0] - phase * activate(a, {c})[0]) <=
          1e-12);
    // |sigma(c)| = |tanh(|c| + b)| <= 1 for any bias
    CHECK(std::abs(activate(a, {c})[0]) <= 1.0);
    CHECK(std::abs(std::abs(activate(plain, {c})[0]) -
                   std::tanh(std::abs(c))) <= 1e-12);
  }
}

TEST_CASE("init: deterministic, zero biases, per-entry second moment") {
  GnnArch arch;
  arch.hidden_layers = 2;
  arch.width = 8;
  Rng a(42), b(42);
  const InvariantGnn n1 = init_invariant(arch, a);
  const InvariantGnn n2 = init_invariant(arch, b);
  CHECK(params_flat(n1) == params_flat(n2));
  for (const auto& act : n1.acts) {
    for (double v : act.mag_bias) CHECK(v == 0.0);
    for (double v : act.phase_bias) CHECK(v == 0.0);
  }

  // E|w|^2 = 1/fan_in within 5%, pooled over ~1e5 draws
  Rng rng(7);
  GnnArch big;
  big.input_width = 3;
  big.hidden_layers = 1;
  big.width = 16;
  double sum = 0.0;
  std::size_t count = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const InvariantGnn net = init_invariant(big, rng);
    for (const auto& layer : net.layers) {
      const double fan_in = layer.w.cols();
      for (const auto& e : layer.w.data()) {
        sum += std::norm(e) * fan_in;  // normalized so the mean target is 1
        ++count;
      }
    }
  }
  CHECK(count > 100000);
  CHECK(sum / count == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("forward: zero features give exactly zero output") {
  Rng rng(8);
  GnnArch arch;
  arch.hidden_layers = 3;
  arch.width = 8;
  const InvariantGnn net = init_invariant(arch, rng);
  SwarmState s = testutil::random_state(6, rng);
  EncodedGraph g = build_graph(s, 1.6);
  for (auto& f : g.features) f.assign(3, Complex(0.0, 0.0));
  for (const Complex& o : forward(net, g)) CHECK(o == Complex(0.0, 0.0));

  // width mismatch propagates as a shape error
  EncodedGraph bad = g;
  for (auto& f : bad.features) f.assign(5, Complex(0.0, 0.0));
  CHECK_THROWS_AS(forward(net, bad), ShapeError);
}

TEST_CASE("forward rotates with a common global rotation") {
  Rng rng(9);
  GnnArch arch;
  arch.hidden_layers = 2;
  arch.width = 8;
  const InvariantGnn net = init_invariant(arch, rng);
  SwarmState s = testutil::random_state(10, rng);
  EncodedGraph g = build_graph(s, 1.6);
  testutil::random_features(g, 3, rng);
  const auto base = forward(net, g);
  const Rotation common(1.1);
  SwarmState s2 = s;
  perturb_frames(s2, g, std::vector<Rotation>(10, common));
  const auto rotated = forward(net, g);
  for (int i = 0; i < 10; ++i)
    CHECK(std::abs(rotated[i] - rho(common.inverse()) * base[i]) <=
          1e-9 * std::max(1.0, std::abs(base[i])));
}

TEST_CASE("forward is equivariant to random per-node frame changes") {
  Rng rng(10);
  for (int t = 0; t < 40; ++t) {
    const int n = 15;
    GnnArch arch;
    arch.hidden_layers = 2 + static_cast<int>(rng.below(3));
    arch.width = 8;
    const InvariantGnn net = init_invariant(arch, rng);
    SwarmState s = testutil::random_state(n, rng);
    EncodedGraph g = build_graph(s, 1.6);
    testutil::random_features(g, 3, rng);
    const auto base = forward(net, g);
    const auto deltas = testutil::random_deltas(n, rng);
    SwarmState s2 = s;
    perturb_frames(s2, g, deltas);
    const auto pert = forward(net, g);
    for (int i = 0; i < n; ++i) {
      const Complex want = rho(deltas[i].inverse()) * base[i];
      CHECK(std::abs(pert[i] - want) <= 1e-8 * std::max(1e-8, std::abs(want)));
    }
  }
}

TEST_CASE("backward: zero upstream gives zero gradients") {
  Rng rng(11);
  GnnArch arch;
  arch.hidden_layers = 2;
  arch.width = 8;
  const InvariantGnn net = init_invariant(arch, rng);
  SwarmState s = testutil::random_state(5, rng);
  EncodedGraph g = build_graph(s, 1.6);
  testutil::random_features(g, 3, rng);
  const auto tr = forward_traced(net, g);
  const auto grad = backward(net, g, tr, std::vector<Complex>(5, 0.0));
  for (double v : grad) CHECK(v == 0.0);
}

TEST_CASE("backward matches the closed form for one linear layer") {
  // single un-activated conv on one isolated node, loss |out|^2:
  // d/dRe(W_k) = 2 Re(conj(x_k) out), d/dIm(W_k) = 2 Im(conj(x_k) out)
  Rng rng(12);
  InvariantGnn net;
  net.layers.resize(1);
  net.layers[0].w = ComplexMatrix(1, 6);
  for (auto& e : net.layers[0].w.data())
    e = Complex(rng.normal(), rng.normal());
  EncodedGraph g = isolated_graph(1);
  g.features = {{Complex(0.7, -0.2), Complex(-1.1, 0.4), Complex(0.3, 0.9)}};

  const auto tr = forward_traced(net, g);
  const Complex out = tr.output[0];
  const auto grad = backward(net, g, tr, {2.0 * out});
  for (int k = 0; k < 3; ++k) {
    const Complex closed = 2.0 * std::conj(g.features[0][k]) * out;
    CHECK(grad[2 * k] == doctest::Approx(closed.real()).epsilon(1e-12));
    CHECK(grad[2 * k + 1] == doctest::Approx(closed.imag()).epsilon(1e-12));
  }
  for (int k = 3; k < 6; ++k) {  // aggregate half saw zeros
    CHECK(grad[2 * k] == 0.0);
    CHECK(grad[2 * k + 1] == 0.0);
  }
}

TEST_CASE("backward agrees with finite differences on a full net") {
  Rng rng(13);
  for (int inst = 0; inst < 3; ++inst) {
    GnnArch arch;
    arch.hidden_layers = 2;
    arch.width = 6 + 2 * inst;
    InvariantGnn net = init_invariant(arch, rng);
    SwarmState s = testutil::random_state(6, rng);
    EncodedGraph g = build_graph(s, 1.6);
    testutil::random_features(g, 3, rng);
    ComplexVector target(6);
    for (auto& c : target) c = Complex(rng.normal(), rng.normal());

    const auto tr = forward_traced(net, g);
    std::vector<Complex> cot(6);
    for (int i = 0; i < 6; ++i)
      cot[i] = 2.0 / 6.0 * (tr.output[i] - target[i]);
    const auto grad = backward(net, g, tr, cot);

    std::vector<double> params = params_flat(net);
    auto loss = [&](const std::vector<double>& p) {
      set_params_flat(net, p);
      return msae_loss(forward(net, g), target);
    };
    CHECK(worst_fd_error(params, loss, grad) <= 1e-4);
    set_params_flat(net, params);
  }
}

TEST_CASE("checkpoint round-trips bit-exactly and rejects corruption") {
  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / "cvflock_ckpt").string();
  fs::create_directories(dir);
  Rng rng(14);
  GnnArch arch;
  arch.hidden_layers = 2;
  arch.width = 8;
  auto policy = make_invariant_policy(arch, rng);
  // nudge biases off zero so the round trip is non-trivial
  auto p = policy->params_flat();
  for (auto& v : p) v += 1e-3;
  policy->set_params_flat(p);

  const std::string path = dir + "/model.ckpt.json";
  save_checkpoint(*policy, path);
  const auto loaded = load_checkpoint(path);
  CHECK(loaded->kind() == "invariant");
  CHECK(loaded->params_flat() == policy->params_flat());

  // flip one digit inside the file -> checksum mismatch
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();
  const auto pos = text.find("params");
  auto digit = text.find_first_of("123456789", pos);
  REQUIRE(digit != std::string::npos);
  text[digit] = text[digit] == '1' ? '2' : '1';
  const std::string bad_path = dir + "/model_bad.ckpt.json";
  std::ofstream(bad_path) << text;
  CHECK_THROWS_AS(load_checkpoint(bad_path), ConfigError);
}
