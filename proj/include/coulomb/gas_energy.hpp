#pragma once
#include <cstddef>
#include <string>
#include <vector>

#include "coulomb/equilibrium.hpp"
#include "coulomb/vec.hpp"

namespace coulomb {

struct PointConfiguration {
  int dim = 2;
  std::vector<Vec> pts;
  bool blown_up = false;

  std::size_t size() const { return pts.size(); }
  double min_separation() const;
  bool distinct() const { return min_separation() > 0.0; }
  // coordinates scaled by n^{1/d}
  PointConfiguration blow_up() const;
};

// sum_{i != j} g(x_i - x_j) + n sum_i V(x_i)
double hamiltonian(const PointConfiguration& config, const PotentialSpec& spec);

struct FieldEnergyResult {
  double value = 0.0;     // int |grad h'_{n,eta}|^2 - n c_d g(eta)
  bool overlap = false;   // some pair closer than 2 eta (exactness of the
                          // finite-eta identity lost)
};

// Next-order energy of the blown-up configuration against the blown-up
// equilibrium background, via the Newton's-theorem pairwise reduction (no
// grid for the field itself; the background integrals use the equilibrium
// grid quadrature with sub-cell refinement near the points).
FieldEnergyResult truncated_field_energy(const PointConfiguration& blown,
                                         const EquilibriumSolution& eq, double eta);

struct NextOrderReport {
  std::size_t n = 0;
  int dim = 2;
  double hamiltonian = 0.0;   // H_n
  double leading = 0.0;       // n^2 I(mu0)
  double log_term = 0.0;      // -(n/2) log n in d=2, -n log n in d=1, else 0
  double confinement = 0.0;   // 2n sum_i zeta(x_i)
  double next_order = 0.0;    // script-H_n at the blown-up points
  double next_order_scaled = 0.0;  // n^{1-2/d}/c_d * next_order
  double eta = 0.0;
  double residual = 0.0;      // H_n minus the sum of the other terms
  double quad_tolerance = 0.0;
  bool overlap_flag = false;

  std::string to_json() const;
};

// Exact splitting of H_n; the residual measures quadrature only.
NextOrderReport splitting_report(const PointConfiguration& unblown, const EquilibriumSolution& eq,
                                 double eta = 0.0 /* 0: 0.1 x min blown separation */);

// D(center, R) = #points in ball - int_ball dmu0'
double discrepancy(const PointConfiguration& blown, const Vec& center, double R,
                   const EquilibriumSolution& eq);

struct LowerBoundCheck {
  bool holds = false;
  double fitted_C = 0.0;  // smallest C making the bound an equality
  double margin = 0.0;    // H_n - bound at C = 50
};
LowerBoundCheck easy_lower_bound_check(const PointConfiguration& unblown,
                                       const EquilibriumSolution& eq);

struct GridOracleResult {
  double value = 0.0;
  double tail_bound = 0.0;  // dipole-decay bound on the neglected far field
};
// Slow grid evaluation of the truncated field energy (n <= 8): finite
// differences of the convolution field over a box box_factor times the
// support diameter.
GridOracleResult field_energy_grid_oracle(const PointConfiguration& blown,
                                          const EquilibriumSolution& eq, double eta,
                                          double box_factor = 6.0, int cells_per_axis = 512);

}  // namespace coulomb
