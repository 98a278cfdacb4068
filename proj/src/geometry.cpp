#include "cvflock/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cvflock {

double canonical_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double r = std::remainder(a, 2.0 * pi);  // [-pi, pi]
  if (r >= pi) r = -pi;
  return r;
}

Complex rho(Rotation r) {
  return std::polar(1.0, r.angle());
}

ComplexVector cmatvec(const ComplexMatrix& w, const ComplexVector& x) {
  if (static_cast<std::size_t>(w.cols()) != x.size()) {
    throw ShapeError("cmatvec: matrix is " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + " but vector has length " +
                     std::to_string(x.size()));
  }
  ComplexVector out(static_cast<std::size_t>(w.rows()));
  for (int r = 0; r < w.rows(); ++r) {
    Complex acc = 0.0;
    for (int c = 0; c < w.cols(); ++c) acc += w(r, c) * x[c];
    out[r] = acc;
  }
  return out;
}

}  // namespace cvflock
