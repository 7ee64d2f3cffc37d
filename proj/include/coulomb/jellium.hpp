#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "coulomb/vec.hpp"

namespace coulomb {

// Flat torus R^d / lattice for d in {1, 2}. For d = 1 the torus is the
// cylinder R/(L Z) x R with the charges on the axis.
struct TorusLattice {
  int dim = 2;
  Vec u{1.0, 0.0}, v{0.0, 1.0};  // basis (u only for d = 1)
  double volume = 1.0;
  Vec u_dual, v_dual;

  static TorusLattice line(double length);
  static TorusLattice from_basis(const Vec& u, const Vec& v);
  static TorusLattice rectangle(double lx, double ly);
  // unimodular lattice Z + tau Z scaled to the given volume
  static TorusLattice from_tau(double tau_re, double tau_im, double volume = 1.0);

  Vec reduce(const Vec& x) const;  // wrap into the fundamental domain
};

struct TorusConfiguration {
  TorusLattice lattice;
  std::vector<Vec> points;
  double min_torus_separation() const;
};

// Green function of the torus: -Delta G = delta_0 - 1/|T|, mean zero.
// d = 2 by Ewald splitting, d = 1 in closed form.
double torus_green(const TorusLattice& lat, const Vec& x);
Vec torus_green_grad(const TorusLattice& lat, const Vec& x);
// regularized diagonal lim_{x->0} (G(x) - g(x)/c_d), extracted analytically
// from the Ewald real-space term
double torus_green_reg_self(const TorusLattice& lat);
// slow oracle for the same limit: spectral truncation + Richardson in x
double torus_green_reg_self_oracle(const TorusLattice& lat);

// Renormalized energy of the periodic configuration (density N/|T|);
// +infinity sentinel for configurations with a repeated point.
double periodic_W(const TorusConfiguration& config);

struct ModularPoint {
  double re = 0.0;
  double im = 1.0;
};
ModularPoint reduce_tau(const ModularPoint& tau);

// relative lattice energy -2 pi log(sqrt(Im tau) |eta(tau)|^2); equals the
// renormalized energy of the volume-1 lattice up to one shared constant
double lattice_height(const ModularPoint& tau);

// sum_{k in dual lattice, k != 0} |k|^{-(2+x)} - int_{R^2} dy/(1+|y|^{2+x}),
// accelerated by the theta/Mellin split
double epstein_zeta_reg(const ModularPoint& tau, double x);

struct TorusMinimizeResult {
  TorusConfiguration config;
  double energy = 0.0;
  int iterations = 0;
};
TorusMinimizeResult minimize_torus_config(const TorusLattice& lat, int N, uint64_t seed);

// (W of the density-m rescaled configuration, m W(unit) - (2 pi / d) m log m)
std::pair<double, double> scaling_check(const TorusConfiguration& config, double m);

}  // namespace coulomb
