#pragma once
#include <array>
#include <cmath>

namespace coulomb {

// Point in R^d, d <= 3. Unused trailing coordinates stay zero so norms
// work uniformly across dimensions.
struct Vec {
  std::array<double, 3> x{0.0, 0.0, 0.0};

  Vec() = default;
  Vec(double a) : x{a, 0.0, 0.0} {}
  Vec(double a, double b) : x{a, b, 0.0} {}
  Vec(double a, double b, double c) : x{a, b, c} {}

  double& operator[](int i) { return x[i]; }
  double operator[](int i) const { return x[i]; }

  Vec operator+(const Vec& o) const { return {x[0] + o.x[0], x[1] + o.x[1], x[2] + o.x[2]}; }
  Vec operator-(const Vec& o) const { return {x[0] - o.x[0], x[1] - o.x[1], x[2] - o.x[2]}; }
  Vec operator*(double s) const { return {x[0] * s, x[1] * s, x[2] * s}; }
  Vec& operator+=(const Vec& o) {
    x[0] += o.x[0]; x[1] += o.x[1]; x[2] += o.x[2];
    return *this;
  }
  double dot(const Vec& o) const { return x[0] * o.x[0] + x[1] * o.x[1] + x[2] * o.x[2]; }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

}  // namespace coulomb
