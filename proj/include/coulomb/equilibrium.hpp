#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "coulomb/grid.hpp"

namespace coulomb {

// Confining potential V. growth_ok declares assumption (A2):
// V/2 + g -> +infinity; boundedness below on the box is checked by sampling.
struct PotentialSpec {
  int dim = 2;
  std::string name = "quadratic";
  std::function<double(const Vec&)> V;
  bool growth_ok = true;

  static PotentialSpec quadratic(int dim);        // |x|^2
  static PotentialSpec quadratic_aniso(int dim);  // |x|^2 + x1^2/2
  static PotentialSpec zero(int dim);
  // "quadratic" | "quadratic_aniso" | "zero" | "poly:a2,a4" (a2 x^2 + a4 x^4, radial)
  static PotentialSpec from_name(int dim, const std::string& name);
};

struct EquilibriumOptions {
  int max_iters = 40000;
  double tol = 1e-6;          // KKT residual (sup norm)
  bool check_margin = true;   // reject support touching the outer 10% ring
  bool multilevel = true;     // warm start from a coarser grid
};

struct EquilibriumSolution {
  Grid grid;
  KernelSpec kernel;
  PotentialSpec potential;
  std::vector<double> density;   // mu0 (density per unit volume)
  std::vector<double> hmu0;      // g * mu0 at cell centers
  std::vector<double> zeta;      // hmu0 + V/2 - c
  std::vector<uint8_t> support;  // mu0 > 1e-6 max mu0
  double c = 0.0;                // I(mu0) - (1/2) int V dmu0
  double energy = 0.0;           // I(mu0)
  double interaction = 0.0;      // iint g dmu0 dmu0
  double potential_term = 0.0;   // int V dmu0
  double support_radius = 0.0;
  double kkt_residual = 0.0;

  double max_density() const;
};

// Direct convex minimization of the discretized mean-field energy over the
// probability simplex on grid cells (projected gradient with line search;
// Barzilai-Borwein steps under a nonmonotone Armijo safeguard).
EquilibriumSolution solve_equilibrium_direct(const PotentialSpec& spec, const Grid& grid,
                                             const EquilibriumOptions& opts = {});

enum class PsorMode { laplace, screened };

struct PsorOptions {
  double omega = 1.8;
  double tol = 1e-8;
  int max_sweeps = 400000;
};

// min int |grad h|^2 (+ h^2 in screened mode) subject to h >= psi, with the
// outermost cell ring held at the boundary field values; projected SOR with
// lexicographic sweeps. psi may contain -inf to disable the obstacle.
GridField solve_obstacle_psor(const GridField& psi, const GridField& boundary, PsorMode mode,
                              const PsorOptions& opts = {});

// Quadrature value of iint g dmu dmu + int V dmu with the exact in-cell
// diagonal correction. mu is a density field of unit total mass.
double mean_field_energy(const GridField& mu, const PotentialSpec& spec);

// (max over grid of (c - hmu0 - V/2)_+ , max over support of |hmu0 + V/2 - c|)
std::pair<double, double> euler_lagrange_residual(const EquilibriumSolution& sol);

}  // namespace coulomb
