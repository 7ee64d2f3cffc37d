#pragma once
#include <cstdint>
#include <vector>

#include "coulomb/equilibrium.hpp"
#include "coulomb/gas_energy.hpp"

namespace coulomb {

struct GibbsSpec {
  int dim = 2;
  std::size_t n = 16;
  double beta = 2.0;
  PotentialSpec potential = PotentialSpec::quadratic(2);
  double sigma = 0.0;  // proposal std; 0 = auto-tune during burn-in to ~0.3
  int sweeps = 20000;
  int burnin = 4000;
  int thin = 20;
  uint64_t seed = 1;
  uint64_t stream = 0;  // chain index
  double init_radius = 1.0;
};

struct ChainStats {
  double acceptance = 0.0;       // post burn-in
  double sigma_used = 0.0;
  double mean_energy = 0.0;      // mean H_n over snapshots
  double energy_stderr = 0.0;
  double autocorr_time = 0.0;    // integrated, from the H_n series
  double bl_distance = -1.0;     // pooled empirical measure vs mu0 (if given)
  std::size_t coincident_rejects = 0;
  std::vector<double> radial_samples;  // |x| over all post-burn-in snapshots
};

struct GibbsChainResult {
  std::vector<PointConfiguration> snapshots;
  ChainStats stats;
};

// Single-site Metropolis with Gaussian proposals; detailed balance w.r.t.
// exp(-(beta/2) H_n); deterministic given (seed, stream).
GibbsChainResult sample_gibbs(const GibbsSpec& spec, const EquilibriumSolution* eq = nullptr);

// Bounded-Lipschitz distance between the empirical measure of the points
// and mu0, maximized over a fixed versioned dictionary of 200 1-Lipschitz
// test functions (dictionary version 1).
double empirical_distance(const PointConfiguration& config, const EquilibriumSolution& eq);

enum class PartitionMethod { quadrature, thermo };

// log Z_{n,beta} for the 1D log-gas; quadrature for n <= 3 (target error
// 1e-6), thermodynamic integration over the interaction coupling otherwise.
double log_partition_tiny(int n, double beta, const PotentialSpec& spec, PartitionMethod method);

}  // namespace coulomb
