#pragma once

#include <complex>
#include <vector>

#include "cvflock/errors.hpp"

namespace cvflock {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
inline double norm_sq(Vec2 a) { return a.x * a.x + a.y * a.y; }

// Wrap an angle to the canonical range [-pi, pi).
double canonical_angle(double a);

// An SO(2) element, stored as its canonical angle. Canonical range holds
// after every construction and composition.
class Rotation {
 public:
  Rotation() = default;
  explicit Rotation(double angle) : angle_(canonical_angle(angle)) {}

  double angle() const { return angle_; }
  Rotation inverse() const { return Rotation(-angle_); }

 private:
  double angle_ = 0.0;
};

inline Rotation compose(Rotation a, Rotation b) {
  return Rotation(a.angle() + b.angle());
}

// Unit-complex representation e^{j*angle}.
Complex rho(Rotation r);

// The R^2 <-> C isomorphism: (x, y) <-> x + yj.
inline Complex embed(Vec2 v) { return {v.x, v.y}; }
inline Vec2 extract(Complex c) { return {c.real(), c.imag()}; }

// Group action of SO(2) on C.
inline Complex rotate(Complex c, Rotation r) { return rho(r) * c; }

// Dense row-major complex matrix. Widths in this project stay <= 64, so no
// sparse path.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Complex& operator()(int r, int c) { return data_[idx(r, c)]; }
  const Complex& operator()(int r, int c) const { return data_[idx(r, c)]; }

  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Complex> data_;
};

// Standard complex matrix-vector product; throws ShapeError on mismatch.
ComplexVector cmatvec(const ComplexMatrix& w, const ComplexVector& x);

}  // namespace cvflock
