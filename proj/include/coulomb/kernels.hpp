#pragma once
#include "coulomb/errors.hpp"
#include "coulomb/vec.hpp"

namespace coulomb {

// Dimension-dependent Coulomb kernel: g(r) = -log r for d in {1,2} and
// r^(2-d) for d >= 3, with the constant c_d from -Delta g = c_d delta_0
// (c_1 = pi for the half-Laplacian, c_2 = 2*pi, c_d = (d-2)|S^{d-1}|).
// The d = 1 logarithmic case is handled by embedding the line into the
// plane; embedded_1d records that, and embedded computations use c_2.
struct KernelSpec {
  int dim = 2;
  bool log_kernel = true;
  bool embedded_1d = false;
  double c_d = 0.0;

  static KernelSpec make(int d);
  // working constant for field-energy identities: c_2 when embedded
  double field_constant() const { return embedded_1d ? 6.283185307179586476925287 : c_d; }
};

double sphere_area(int d);  // |S^{d-1}|

double kernel_value(double r, const KernelSpec& spec);

// f_eta(r) = max(g(r) - g(eta), 0)
double truncated_kernel(double r, double eta, const KernelSpec& spec);

// g evaluated through one eta-smeared charge: g(max(r, eta)); exact by
// Newton's theorem for the uniform sphere charge against a point.
double smeared_point_kernel(double r, double eta, const KernelSpec& spec);

// Exact interaction of two eta-smeared unit charges at distance |p-q|:
// g(|p-q|) once |p-q| >= 2 eta, g(eta) at p = q, and a fixed-order
// quadrature of the Newton-reduced single integral in between.
double smeared_pair_interaction(const Vec& p, const Vec& q, double eta, const KernelSpec& spec);

}  // namespace coulomb
