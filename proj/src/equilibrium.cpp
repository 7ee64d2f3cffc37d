#include "coulomb/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coulomb/detail/psor.hpp"
#include "coulomb/errors.hpp"
#include "coulomb/simd.hpp"

namespace coulomb {
namespace {

std::vector<double> potential_on_grid(const PotentialSpec& spec, const Grid& grid) {
  std::vector<double> V(grid.cells());
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < V.size(); ++c) {
    V[c] = spec.V(grid.center(c));
    vmin = std::min(vmin, V[c]);
  }
  if (!std::isfinite(vmin)) throw domain_error("potential is unbounded below on the box");
  return V;
}

// Euclidean projection onto the probability simplex (masses sum to 1)
void project_simplex(std::vector<double>& w) {
  static thread_local std::vector<double> sorted;
  sorted = w;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cum += sorted[i];
    double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) {
      tau = t;
      k = i + 1;
    }
  }
  (void)k;
  for (auto& x : w) x = std::max(0.0, x - tau);
}

struct KktReport {
  double c = 0.0;
  double residual = 0.0;
};

KktReport kkt(const std::vector<double>& w, const std::vector<double>& Kw,
              const std::vector<double>& V) {
  KktReport r;
  double c = 0.0;
  double wmax = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    c += (Kw[i] + 0.5 * V[i]) * w[i];
    wmax = std::max(wmax, w[i]);
  }
  r.c = c;
  double thresh = 1e-9 * wmax;
  double res = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double phi = Kw[i] + 0.5 * V[i];
    if (w[i] > thresh)
      res = std::max(res, std::fabs(phi - c));
    else
      res = std::max(res, std::max(0.0, c - phi));
  }
  r.residual = res;
  return r;
}

std::vector<double> coarse_warm_start(const PotentialSpec& spec, const Grid& grid,
                                      const EquilibriumOptions& opts);

EquilibriumSolution solve_on_grid(const PotentialSpec& spec, const Grid& grid,
                                  const EquilibriumOptions& opts,
                                  std::vector<double> w /* initial masses or empty */) {
  KernelSpec kernel = KernelSpec::make(grid.dim);
  Convolver conv(grid, kernel);
  std::vector<double> V = potential_on_grid(spec, grid);
  std::size_t M = grid.cells();

  if (w.empty()) {
    w.assign(M, 1.0 / static_cast<double>(M));
  }

  auto energy_of = [&](const std::vector<double>& masses, const std::vector<double>& Kw) {
    const auto& k = simd::kernels();
    return k.dot(masses.data(), Kw.data(), M) + k.dot(masses.data(), V.data(), M);
  };

  std::vector<double> Kw = conv.apply(w);
  double F = energy_of(w, Kw);
  std::vector<double> grad(M), w_prev, grad_prev, trial(M), Ktrial;

  const int memory = 8;
  std::vector<double> recentF(memory, F);
  double step = 1.0 / std::max(1e-12, conv.diagonal());
  KktReport rep;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    for (std::size_t i = 0; i < M; ++i) grad[i] = 2.0 * Kw[i] + V[i];
    rep = kkt(w, Kw, V);
    if (rep.residual <= opts.tol) break;

    if (!w_prev.empty()) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < M; ++i) {
        double dw = w[i] - w_prev[i], dg = grad[i] - grad_prev[i];
        num += dw * dw;
        den += dw * dg;
      }
      if (den > 1e-300) step = std::min(1e12, std::max(1e-12, num / den));
    }

    double fref = *std::max_element(recentF.begin(), recentF.end());
    double t = step;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = w;
      for (std::size_t i = 0; i < M; ++i) trial[i] -= t * grad[i];
      project_simplex(trial);
      Ktrial = conv.apply(trial);
      double Ft = energy_of(trial, Ktrial);
      double decrease = 0.0;
      for (std::size_t i = 0; i < M; ++i) decrease += grad[i] * (w[i] - trial[i]);
      if (Ft <= fref - 1e-4 * decrease) {
        w_prev = w;
        grad_prev = grad;
        w = trial;
        Kw = Ktrial;
        F = Ft;
        recentF[it % memory] = F;
        accepted = true;
        break;
      }
      t *= 0.25;
    }
    if (!accepted) break;  // line search stalled at numerical floor
  }
  if (rep.residual > opts.tol * 64)
    throw iteration_error("equilibrium: projected gradient did not converge", rep.residual);

  EquilibriumSolution sol;
  sol.grid = grid;
  sol.kernel = kernel;
  sol.potential = spec;
  double cellvol = grid.cell_volume();
  sol.density.resize(M);
  for (std::size_t i = 0; i < M; ++i) sol.density[i] = w[i] / cellvol;
  sol.hmu0 = Kw;
  const auto& k = simd::kernels();
  sol.interaction = k.dot(w.data(), Kw.data(), M);
  sol.potential_term = k.dot(w.data(), V.data(), M);
  sol.energy = sol.interaction + sol.potential_term;
  sol.c = rep.c;
  sol.kkt_residual = rep.residual;
  sol.zeta.resize(M);
  for (std::size_t i = 0; i < M; ++i) sol.zeta[i] = Kw[i] + 0.5 * V[i] - sol.c;

  double dmax = *std::max_element(sol.density.begin(), sol.density.end());
  sol.support.assign(M, 0);
  sol.support_radius = 0.0;
  bool touches_margin = false;
  double margin = 0.9;
  for (std::size_t i = 0; i < M; ++i) {
    if (sol.density[i] > 1e-6 * dmax) {
      sol.support[i] = 1;
      Vec x = grid.center(i);
      sol.support_radius = std::max(sol.support_radius, x.norm());
      for (int d = 0; d < grid.dim; ++d) {
        double lo = grid.lo[d], hi = grid.lo[d] + grid.n[d] * grid.h;
        double span = hi - lo;
        double rel = (x[d] - lo) / span;  // in (0,1)
        if (rel < 0.5 * (1.0 - margin) || rel > 1.0 - 0.5 * (1.0 - margin)) touches_margin = true;
      }
    }
  }
  if (opts.check_margin && touches_margin)
    throw box_too_small_error("equilibrium: support touches the outer 10% margin of the box");
  return sol;
}

std::vector<double> coarse_warm_start(const PotentialSpec& spec, const Grid& grid,
                                      const EquilibriumOptions& opts) {
  bool can_coarsen = true;
  for (int d = 0; d < grid.dim; ++d)
    if (grid.n[d] % 2 != 0 || grid.n[d] < 64) can_coarsen = false;
  if (!opts.multilevel || !can_coarsen) return {};

  Grid coarse = grid;
  coarse.h = grid.h * 2;
  for (int d = 0; d < grid.dim; ++d) coarse.n[d] = grid.n[d] / 2;
  EquilibriumOptions copts = opts;
  copts.tol = std::max(opts.tol, 1e-6);
  copts.check_margin = false;
  EquilibriumSolution cs = solve_on_grid(spec, coarse, copts, coarse_warm_start(spec, coarse, copts));

  // prolongate masses: each child gets an equal share of the parent mass
  std::vector<double> w(grid.cells());
  double share = 1.0 / std::pow(2.0, grid.dim);
  double cellvol = coarse.cell_volume();
  int ny = grid.dim > 1 ? grid.n[1] : 1, nz = grid.dim > 2 ? grid.n[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < grid.n[0]; ++i) {
        std::size_t fine = (static_cast<std::size_t>(k) * ny + j) * grid.n[0] + i;
        std::size_t par = (static_cast<std::size_t>(k / 2) * (grid.dim > 1 ? coarse.n[1] : 1) +
                           j / 2) * coarse.n[0] + i / 2;
        w[fine] = cs.density[par] * cellvol * share;
      }
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace

double EquilibriumSolution::max_density() const {
  return *std::max_element(density.begin(), density.end());
}

PotentialSpec PotentialSpec::quadratic(int dim) {
  PotentialSpec s;
  s.dim = dim;
  s.name = "quadratic";
  s.V = [](const Vec& x) { return x.norm2(); };
  return s;
}

PotentialSpec PotentialSpec::quadratic_aniso(int dim) {
  PotentialSpec s;
  s.dim = dim;
  s.name = "quadratic_aniso";
  s.V = [](const Vec& x) { return x.norm2() + 0.5 * x[0] * x[0]; };
  return s;
}

PotentialSpec PotentialSpec::zero(int dim) {
  PotentialSpec s;
  s.dim = dim;
  s.name = "zero";
  s.V = [](const Vec&) { return 0.0; };
  s.growth_ok = false;
  return s;
}

PotentialSpec PotentialSpec::from_name(int dim, const std::string& name) {
  if (name == "quadratic") return quadratic(dim);
  if (name == "quadratic_aniso") return quadratic_aniso(dim);
  if (name == "zero") return zero(dim);
  if (name.rfind("poly:", 0) == 0) {
    std::string rest = name.substr(5);
    auto comma = rest.find(',');
    double a2 = std::stod(rest.substr(0, comma));
    double a4 = comma == std::string::npos ? 0.0 : std::stod(rest.substr(comma + 1));
    PotentialSpec s;
    s.dim = dim;
    s.name = name;
    s.V = [a2, a4](const Vec& x) {
      double r2 = x.norm2();
      return a2 * r2 + a4 * r2 * r2;
    };
    return s;
  }
  throw usage_error("unknown potential '" + name + "'");
}

EquilibriumSolution solve_equilibrium_direct(const PotentialSpec& spec, const Grid& grid,
                                             const EquilibriumOptions& opts) {
  if (spec.dim != grid.dim) throw domain_error("potential/grid dimension mismatch");
  return solve_on_grid(spec, grid, opts, coarse_warm_start(spec, grid, opts));
}

GridField solve_obstacle_psor(const GridField& psi, const GridField& boundary, PsorMode mode,
                              const PsorOptions& opts) {
  const Grid& g = psi.grid;
  if (g.dim != 2) throw domain_error("solve_obstacle_psor: 2D grids only");
  detail::PsorProblem p;
  p.nx = g.n[0];
  p.ny = g.n[1];
  p.h = g.h;
  p.screened = (mode == PsorMode::screened);
  std::size_t M = g.cells();
  p.kind.assign(M, 1);
  p.psi = psi.v;
  p.rhs.assign(M, 0.0);
  p.val = boundary.v;
  for (int j = 0; j < p.ny; ++j)
    for (int i = 0; i < p.nx; ++i)
      if (i == 0 || j == 0 || i == p.nx - 1 || j == p.ny - 1)
        p.kind[static_cast<std::size_t>(j) * p.nx + i] = 2;
  // start from max(boundary-ish value, obstacle) in the interior
  for (std::size_t idx = 0; idx < M; ++idx)
    if (p.kind[idx] == 1 && std::isfinite(p.psi[idx]) && p.val[idx] < p.psi[idx])
      p.val[idx] = p.psi[idx];
  detail::psor_solve(p, opts.omega, opts.tol, opts.max_sweeps);
  GridField out(g);
  out.v = p.val;
  return out;
}

double mean_field_energy(const GridField& mu, const PotentialSpec& spec) {
  const Grid& g = mu.grid;
  double cellvol = g.cell_volume();
  double mass = 0.0;
  for (std::size_t i = 0; i < mu.v.size(); ++i) {
    if (mu.v[i] < -1e-12) throw domain_error("mean_field_energy: negative density cell");
    mass += mu.v[i] * cellvol;
  }
  if (std::fabs(mass - 1.0) > 1e-6)
    throw domain_error("mean_field_energy: density mass differs from 1 beyond 1e-6");
  KernelSpec kernel = KernelSpec::make(g.dim);
  Convolver conv(g, kernel);
  std::vector<double> w(mu.v.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = mu.v[i] * cellvol;
  std::vector<double> Kw = conv.apply(w);
  std::vector<double> V = potential_on_grid(spec, g);
  const auto& k = simd::kernels();
  return k.dot(w.data(), Kw.data(), w.size()) + k.dot(w.data(), V.data(), w.size());
}

std::pair<double, double> euler_lagrange_residual(const EquilibriumSolution& sol) {
  double under = 0.0, on_support = 0.0;
  for (std::size_t i = 0; i < sol.zeta.size(); ++i) {
    under = std::max(under, -sol.zeta[i]);
    if (sol.support[i]) on_support = std::max(on_support, std::fabs(sol.zeta[i]));
  }
  return {under, on_support};
}

}  // namespace coulomb
