#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cvflock/geometry.hpp"
#include "test_util.hpp"

using namespace cvflock;
using testutil::kPi;

TEST_CASE("canonical angle range and idempotence") {
  Rng rng(1);
  for (int t = 0; t < 2000; ++t) {
    const double a = rng.uniform(-50.0, 50.0);
    const double c = canonical_angle(a);
    CHECK(c >= -kPi);
    CHECK(c < kPi);
    CHECK(canonical_angle(c) == c);  // bitwise stable once canonical
    // same direction
    CHECK(std::abs(std::sin(c) - std::sin(a)) < 1e-9);
    CHECK(std::abs(std::cos(c) - std::cos(a)) < 1e-9);
  }
  CHECK(canonical_angle(kPi) == -kPi);
  CHECK(canonical_angle(-kPi) == -kPi);
  CHECK(canonical_angle(0.0) == 0.0);
}

TEST_CASE("rho at the reference angles") {
  CHECK(std::abs(rho(Rotation(0.0)) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(rho(Rotation(kPi / 2)) - Complex(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(rho(Rotation(kPi)) - Complex(-1.0, 0.0)) < 1e-15);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const Rotation r(rng.uniform(-10.0, 10.0));
    CHECK(std::abs(std::abs(rho(r)) - 1.0) < 1e-12);
  }
}

TEST_CASE("rotation composition stays canonical, inverse cancels") {
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const Rotation a(rng.uniform(-20.0, 20.0));
    const Rotation b(rng.uniform(-20.0, 20.0));
    const Rotation c = compose(a, b);
    CHECK(c.angle() >= -kPi);
    CHECK(c.angle() < kPi);
    CHECK(std::abs(compose(a, a.inverse()).angle()) <= 1e-12);
  }
}

TEST_CASE("rho is a homomorphism") {
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    const Rotation a(rng.uniform(-20.0, 20.0));
    const Rotation b(rng.uniform(-20.0, 20.0));
    CHECK(std::abs(rho(compose(a, b)) - rho(a) * rho(b)) <= 1e-12);
  }
}

TEST_CASE("embed and extract") {
  CHECK(embed({3.0, -4.0}) == Complex(3.0, -4.0));
  CHECK(embed({0.0, 0.0}) == Complex(0.0, 0.0));
  const Vec2 v = extract(embed({0.5, 2.0}));
  CHECK(v.x == 0.5);
  CHECK(v.y == 2.0);
}

TEST_CASE("embed intertwines the 2x2 rotation matrix with rho") {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const double th = rng.uniform(-kPi, kPi);
    const Vec2 v{rng.normal(), rng.normal()};
    const Vec2 rv{std::cos(th) * v.x - std::sin(th) * v.y,
                  std::sin(th) * v.x + std::cos(th) * v.y};
    CHECK(std::abs(embed(rv) - rho(Rotation(th)) * embed(v)) <= 1e-12);
  }
}

TEST_CASE("rotate: identity, half turn, norm preservation, additivity") {
  CHECK(std::abs(rotate(Complex(1.0, 0.0), Rotation(kPi)) -
                 Complex(-1.0, 0.0)) < 1e-15);
  Rng rng(6);
  for (int t = 0; t < 500; ++t) {
    const Complex c(rng.normal(), rng.normal());
    CHECK(rotate(c, Rotation(0.0)) == c);
    const Rotation a(rng.uniform(-3.0, 3.0));
    const Rotation b(rng.uniform(-3.0, 3.0));
    CHECK(std::abs(rotate(rotate(c, a), b) - rotate(c, compose(a, b))) <
          1e-12);
    CHECK(std::abs(std::abs(rotate(c, a)) - std::abs(c)) <= 1e-9);
  }
}

TEST_CASE("cmatvec basics") {
  ComplexMatrix eye(2, 2);
  eye(0, 0) = 1.0;
  eye(1, 1) = 1.0;
  const ComplexVector x{{1.0, 1.0}, {0.0, 2.0}};
  const auto y = cmatvec(eye, x);
  CHECK(y[0] == x[0]);
  CHECK(y[1] == x[1]);

  ComplexMatrix j(1, 1);
  j(0, 0) = Complex(0.0, 1.0);
  CHECK(cmatvec(j, {Complex(1.0, 0.0)})[0] == Complex(0.0, 1.0));

  CHECK_THROWS_AS(cmatvec(eye, {Complex(1.0, 0.0)}), ShapeError);
}

TEST_CASE("complex matmul commutes with rotation") {
  Rng rng(7);
  // the spec's worked instance: W in C^{3x2}, x in C^2, r = 0.7 rad
  {
    ComplexMatrix w(3, 2);
    for (auto& e : w.data()) e = Complex(rng.normal(), rng.normal());
    ComplexVector x{{rng.normal(), rng.normal()}, {rng.normal(), rng.normal()}};
    const Complex r = rho(Rotation(0.7));
    ComplexVector rx = x;
    for (auto& c : rx) c *= r;
    const auto lhs = cmatvec(w, rx);
    auto rhs = cmatvec(w, x);
    for (auto& c : rhs) c *= r;
    for (int i = 0; i < 3; ++i) CHECK(testutil::rel_err(lhs[i], rhs[i]) <= 1e-9);
  }
  for (int t = 0; t < 1000; ++t) {
    const int m = 1 + static_cast<int>(rng.below(4));
    const int n = 1 + static_cast<int>(rng.below(4));
    ComplexMatrix w(m, n);
    for (auto& e : w.data()) e = Complex(rng.normal(), rng.normal());
    ComplexVector x(n);
    for (auto& c : x) c = Complex(rng.normal(), rng.normal());
    const Complex r = rho(Rotation(rng.uniform(-kPi, kPi)));
    ComplexVector rx = x;
    for (auto& c : rx) c *= r;
    const auto lhs = cmatvec(w, rx);
    auto rhs = cmatvec(w, x);
    for (auto& c : rhs) c *= r;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < m; ++i) {
      num += std::norm(lhs[i] - rhs[i]);
      den += std::norm(rhs[i]);
    }
    CHECK(std::sqrt(num) <= 1e-9 * std::max(1.0, std::sqrt(den)));
  }
}
