#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cvflock/expert.hpp"
#include "test_util.hpp"

using namespace cvflock;
using testutil::kPi;

namespace {

SwarmState pair_state(Vec2 p0, Vec2 p1, Vec2 v0, Vec2 v1, double a0 = 0.0,
                      double a1 = 0.0) {
  SwarmState s;
  s.pos = {p0, p1};
  s.vel = {v0, v1};
  s.frame = {Rotation(a0), Rotation(a1)};
  return s;
}

}  // namespace

TEST_CASE("relative position in the observer's frame") {
  const SwarmState s = pair_state({0, 0}, {1, 0}, {0, 0}, {0, 0});
  CHECK(std::abs(relative_position(s, 0, 1) - Complex(1.0, 0.0)) < 1e-15);

  const SwarmState t = pair_state({0, 0}, {1, 0}, {0, 0}, {0, 0}, kPi / 2);
  CHECK(std::abs(relative_position(t, 0, 1) - Complex(0.0, -1.0)) <= 1e-12);

  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    SwarmState r = pair_state({0, 0}, {0.3, -0.8}, {0, 0}, {0, 0},
                              rng.uniform(-kPi, kPi));
    CHECK(std::abs(relative_position(r, 0, 1)) ==
          doctest::Approx(std::sqrt(0.3 * 0.3 + 0.8 * 0.8)).epsilon(1e-12));
  }
}

TEST_CASE("two-agent equilibrium: spacing 1, equal velocities") {
  const SwarmState s = pair_state({0, 0}, {1, 0}, {0.4, 0.2}, {0.4, 0.2});
  const auto u = nominal_control(s);
  CHECK(std::abs(u[0]) <= 1e-12);
  CHECK(std::abs(u[1]) <= 1e-12);
}

TEST_CASE("close pair repels, far pair attracts") {
  // separation 0.5: potential term (-2/|T|^4 + 2/|T|^2) T = -12 on the x axis
  const SwarmState close = pair_state({0, 0}, {0.5, 0}, {0.1, 0}, {0.1, 0});
  const auto uc = nominal_control(close);
  CHECK(uc[0].real() == doctest::Approx(-12.0).epsilon(1e-12));
  CHECK(uc[0].imag() == doctest::Approx(0.0));

  // separation 2: potential term (-2/16 + 2/4) * 2 = +0.75 toward the peer
  const SwarmState far = pair_state({0, 0}, {2.0, 0}, {0.1, 0}, {0.1, 0});
  const auto uf = nominal_control(far);
  CHECK(uf[0].real() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(uf[0].imag() == doctest::Approx(0.0));

  SwarmState dup = close;
  dup.pos[1] = dup.pos[0];
  CHECK_THROWS_AS(nominal_control(dup), SimFault);
}

TEST_CASE("expert action is frame independent in the global frame") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    SwarmState s = testutil::random_state(7, rng);
    const auto u0 = nominal_control(s);
    SwarmState s2 = s;
    EncodedGraph scratch = build_graph(s, 2.0);
    const auto deltas = testutil::random_deltas(7, rng);
    perturb_frames(s2, scratch, deltas);
    const auto u1 = nominal_control(s2);
    for (int i = 0; i < 7; ++i) {
      const Complex g0 = rotate(u0[i], s.frame[i]);
      const Complex g1 = rotate(u1[i], s2.frame[i]);
      CHECK(std::abs(g0 - g1) <= 1e-9 * std::max(1.0, std::abs(g0)));
    }
  }
}

TEST_CASE("local features on a single-neighbor node") {
  const SwarmState s = pair_state({0, 0}, {0.5, 0}, {0.2, -0.1}, {0.2, -0.1});
  EncodedGraph g = build_graph(s, 1.0);
  local_features(s, g);
  CHECK(std::abs(g.features[0][0]) <= 1e-15);  // equal velocities
  CHECK(g.features[0][1].real() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.features[0][2].real() == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(std::abs(g.features[0][1].imag()) <= 1e-15);
}

TEST_CASE("isolated node gets the empty-sum zero features") {
  SwarmState s;
  s.pos = {{0, 0}, {10, 0}, {10.5, 0}};
  s.vel = {{1, 0}, {0, 1}, {0, -1}};
  s.frame.assign(3, Rotation(0.3));
  EncodedGraph g = build_graph(s, 1.0);
  local_features(s, g);
  for (int k = 0; k < 3; ++k) CHECK(g.features[0][k] == Complex(0.0, 0.0));
  CHECK(local_nominal_control(s, g)[0] == Complex(0.0, 0.0));
}

TEST_CASE("features rotate with e^{-j delta} under frame perturbation") {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    SwarmState s = testutil::random_state(8, rng);
    EncodedGraph g = build_graph(s, 1.4);
    local_features(s, g);
    const auto deltas = testutil::random_deltas(8, rng);
    SwarmState s2 = s;
    EncodedGraph g2 = build_graph(s2, 1.4);
    perturb_frames(s2, g2, deltas);
    local_features(s2, g2);
    for (int i = 0; i < 8; ++i)
      for (int k = 0; k < 3; ++k) {
        const Complex want = rho(deltas[i].inverse()) * g.features[i][k];
        CHECK(std::abs(g2.features[i][k] - want) <=
              1e-9 * std::max(1.0, std::abs(want)));
      }
  }
}

TEST_CASE("local control equals nominal on a complete graph, differs when sparse") {
  Rng rng(4);
  SwarmState s = testutil::random_state(6, rng, 0.6);  // tight: complete at C=2
  EncodedGraph g = build_graph(s, 5.0);
  const auto ln = local_nominal_control(s, g);
  const auto nom = nominal_control(s);
  for (int i = 0; i < 6; ++i)
    CHECK(std::abs(ln[i] - nom[i]) <= 1e-9 * std::max(1.0, std::abs(nom[i])));

  // spread out: some pair exceeds the radius, so the sums differ
  SwarmState sp = testutil::random_state(6, rng, 2.0);
  sp.pos[0] = {-3.0, 0.0};
  sp.pos[1] = {3.0, 0.0};
  EncodedGraph gs = build_graph(sp, 1.5);
  const auto lns = local_nominal_control(sp, gs);
  const auto noms = nominal_control(sp);
  double diff = 0.0;
  for (int i = 0; i < 6; ++i) diff = std::max(diff, std::abs(lns[i] - noms[i]));
  CHECK(diff > 1e-6);
}

TEST_CASE("expert drives a 20-agent swarm to consensus within 2 s") {
  SimConfig cfg;
  Rng rng(5);
  SwarmState s = init_swarm(20, cfg, rng);
  const double v0 = velocity_variance(s);
  for (int t = 0; t < 200; ++t) step_dynamics(s, nominal_control(s), cfg, rng);
  CHECK(velocity_variance(s) <= 1e-2 * v0);
}
