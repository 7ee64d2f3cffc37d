#pragma once
#include <array>
#include <cstdint>
#include <vector>

namespace coulomb::detail {

// Projected SOR for -Delta h (+ h) = f, h >= psi on a 2D node set, with
// optional Shortley-Weller arm fractions so curved Dirichlet boundaries
// (disks) keep second-order accuracy. kind: 0 exterior (ignored), 1 free
// interior node, 2 fixed Dirichlet node.
struct PsorProblem {
  int nx = 0, ny = 0;
  double h = 1.0;
  bool screened = false;
  std::vector<uint8_t> kind;
  std::vector<double> psi;   // obstacle, -inf to disable per node
  std::vector<double> rhs;   // f
  std::vector<double> val;   // in: initial guess + Dirichlet values; out: solution
  // arm fractions (W,E,S,N) in (0,1]; empty means all 1
  std::vector<std::array<double, 4>> arms;
  // value at the boundary cut for each short arm (used when fraction < 1)
  std::vector<std::array<double, 4>> arm_values;
};

struct PsorResult {
  int sweeps = 0;
  double residual = 0.0;  // complementarity residual, sup norm
};

PsorResult psor_solve(PsorProblem& p, double omega, double tol, int max_sweeps);

}  // namespace coulomb::detail
