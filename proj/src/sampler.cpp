#include "coulomb/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coulomb/errors.hpp"
#include "coulomb/rng.hpp"
#include "coulomb/simd.hpp"

namespace coulomb {
namespace {

constexpr double kPi = 3.14159265358979323846264338;

struct State {
  int dim;
  std::vector<double> x, y, z;
  std::size_t n() const { return x.size(); }
  Vec at(std::size_t i) const { return {x[i], dim > 1 ? y[i] : 0.0, dim > 2 ? z[i] : 0.0}; }
};

double delta_interaction(const State& s, std::size_t i, const Vec& nw) {
  const auto& k = simd::kernels();
  if (s.dim == 1) return -k.logratio_move_1d(s.x.data(), s.n(), i, s.x[i], nw[0]);
  if (s.dim == 2)
    return -k.logratio_move_2d(s.x.data(), s.y.data(), s.n(), i, s.x[i], s.y[i], nw[0], nw[1]);
  double d = 0.0;
  for (std::size_t j = 0; j < s.n(); ++j) {
    if (j == i) continue;
    double rn = std::sqrt((s.x[j] - nw[0]) * (s.x[j] - nw[0]) + (s.y[j] - nw[1]) * (s.y[j] - nw[1]) +
                          (s.z[j] - nw[2]) * (s.z[j] - nw[2]));
    double ro = std::sqrt((s.x[j] - s.x[i]) * (s.x[j] - s.x[i]) +
                          (s.y[j] - s.y[i]) * (s.y[j] - s.y[i]) +
                          (s.z[j] - s.z[i]) * (s.z[j] - s.z[i]));
    d += 2.0 * (1.0 / rn - 1.0 / ro);
  }
  return d;
}

PointConfiguration snapshot_of(const State& s) {
  PointConfiguration c;
  c.dim = s.dim;
  for (std::size_t i = 0; i < s.n(); ++i) c.pts.push_back(s.at(i));
  return c;
}

double autocorr_time(const std::vector<double>& series) {
  std::size_t m = series.size();
  if (m < 8) return 0.0;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m);
  if (var <= 0.0) return 1.0;
  double tau = 1.0;
  for (std::size_t lag = 1; lag < m / 2; ++lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < m; ++t) c += (series[t] - mean) * (series[t + lag] - mean);
    c /= static_cast<double>(m - lag) * var;
    if (c <= 0.0) break;
    tau += 2.0 * c;
  }
  return tau;
}

// fixed 1-Lipschitz dictionary, version 1: one unit cone at the origin plus
// seeded planar/radial cosines and random cones
struct DictFn {
  int type;  // 0 cone, 1 planar cosine, 2 radial cosine
  Vec a;
  double kappa, phase, rho;
};

const std::vector<DictFn>& bl_dictionary(int dim) {
  static std::vector<DictFn> dict2, dict1, dict3;
  auto& dict = dim == 1 ? dict1 : (dim == 2 ? dict2 : dict3);
  if (!dict.empty()) return dict;
  CounterRng rng(0xB1D1C7, 1);  // dictionary version 1
  dict.push_back(DictFn{0, Vec{0.0, 0.0, 0.0}, 0.0, 0.0, 1.0});
  while (dict.size() < 200) {
    DictFn f;
    double u = rng.next_double();
    f.type = u < 0.4 ? 1 : (u < 0.7 ? 2 : 0);
    double theta = 2.0 * kPi * rng.next_double();
    double phi = kPi * rng.next_double();
    f.a = dim == 1 ? Vec{1.0, 0.0, 0.0}
                   : (dim == 2 ? Vec{std::cos(theta), std::sin(theta), 0.0}
                               : Vec{std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta),
                                     std::cos(phi)});
    f.kappa = 0.5 + 5.5 * rng.next_double();
    f.phase = 2.0 * kPi * rng.next_double();
    f.rho = 0.3 + 1.2 * rng.next_double();
    if (f.type == 0) {
      double r = 1.5 * rng.next_double();
      f.a = f.a * r;
    }
    dict.push_back(f);
  }
  return dict;
}

double dict_eval(const DictFn& f, const Vec& x) {
  if (f.type == 0) {
    double d = (x - f.a).norm();
    return std::max(0.0, f.rho - d);
  }
  if (f.type == 1) return std::cos(f.kappa * x.dot(f.a) + f.phase) / f.kappa;
  return std::cos(f.kappa * x.norm() + f.phase) / f.kappa;
}

// adaptive tensor quadrature of the sorted-gap representation for tiny 1D
// log-gas partition functions
double partition_quadrature(int n, double beta, const PotentialSpec& spec) {
  // Gauss-Legendre 20 on [0,1]
  static const double gx[20] = {
      0.0034357004074525, 0.0180140363610431, 0.0438827858743371, 0.0804415140888906,
      0.1268340467699246, 0.1819731596367425, 0.2445664990245864, 0.3131469556422902,
      0.3861070744291775, 0.4617367394332513, 0.5382632605667487, 0.6138929255708225,
      0.6868530443577098, 0.7554335009754136, 0.8180268403632575, 0.8731659532300754,
      0.9195584859111094, 0.9561172141256629, 0.9819859636389569, 0.9965642995925475};
  static const double gw[20] = {
      0.0088070035695761, 0.0203007149001935, 0.0313360241670545, 0.0416383707883524,
      0.0509650599086202, 0.0590972659807592, 0.0658443192245883, 0.0710480546591910,
      0.0745864932363018, 0.0763766935653629, 0.0763766935653629, 0.0745864932363018,
      0.0710480546591910, 0.0658443192245883, 0.0590972659807592, 0.0509650599086202,
      0.0416383707883524, 0.0313360241670545, 0.0203007149001935, 0.0088070035695761};

  double L = std::sqrt(90.0 / (beta * n));  // e^{-45} tail
  double W = std::sqrt(2.0 * L);            // gap substitution s = w^2

  auto integrand = [&](double m, double w1, double w2) {
    double s = w1 * w1;
    double x1 = m, x2 = m + s;
    double jac = 2.0 * w1;
    double logf = beta * std::log(s > 0 ? s : 1e-300);
    double vsum = spec.V(Vec{x1}) + spec.V(Vec{x2});
    double x3 = 0.0;
    if (n == 3) {
      double t = w2 * w2;
      x3 = x2 + t;
      jac *= 2.0 * w2;
      logf += beta * (std::log(t > 0 ? t : 1e-300) + std::log(s + t));
      vsum += spec.V(Vec{x3});
    }
    return jac * std::exp(logf - 0.5 * beta * n * vsum);
  };

  auto evaluate = [&](int panels) {
    double total = 0.0;
    double hm = 2.0 * L / panels, hw = W / panels;
    for (int pm = 0; pm < panels; ++pm)
      for (int im = 0; im < 20; ++im) {
        double m = -L + (pm + gx[im]) * hm;
        double wm = gw[im] * hm;
        for (int p1 = 0; p1 < panels; ++p1)
          for (int i1 = 0; i1 < 20; ++i1) {
            double w1 = (p1 + gx[i1]) * hw;
            double ww1 = gw[i1] * hw;
            if (n == 2) {
              total += wm * ww1 * integrand(m, w1, 0.0);
            } else {
              for (int p2 = 0; p2 < panels; ++p2)
                for (int i2 = 0; i2 < 20; ++i2) {
                  double w2 = (p2 + gx[i2]) * hw;
                  double ww2 = gw[i2] * hw;
                  total += wm * ww1 * ww2 * integrand(m, w1, w2);
                }
            }
          }
      }
    double factorial = n == 2 ? 2.0 : 6.0;
    return factorial * total;
  };

  if (n == 1) {
    // plain 1D adaptive panels
    auto eval1 = [&](int panels) {
      double total = 0.0;
      double hm = 2.0 * L / panels;
      for (int pm = 0; pm < panels; ++pm)
        for (int im = 0; im < 20; ++im) {
          double m = -L + (pm + gx[im]) * hm;
          total += gw[im] * hm * std::exp(-0.5 * beta * spec.V(Vec{m}));
        }
      return total;
    };
    double z1 = eval1(4), z2 = eval1(8);
    for (int p = 16; std::fabs(z2 - z1) > 1e-9 * std::fabs(z2) && p <= 256; p *= 2) {
      z1 = z2;
      z2 = eval1(p);
    }
    return std::log(z2);
  }

  double z1 = evaluate(2), z2 = evaluate(4);
  int p = 8;
  while (std::fabs(z2 - z1) > 2e-7 * std::fabs(z2) && p <= (n == 3 ? 16 : 64)) {
    z1 = z2;
    z2 = evaluate(p);
    p *= 2;
  }
  return std::log(z2);
}

// interaction-coupling thermodynamic integration from the pure Gaussian
double partition_thermo(int n, double beta, const PotentialSpec& spec, uint64_t seed) {
  // log Z(0): independent Gaussians
  double logz0 = 0.0;
  {
    // 1D quadrature of exp(-beta n V / 2)
    double L = std::sqrt(90.0 / (beta * n));
    int m = 4000;
    double h = 2.0 * L / m, acc = 0.0;
    for (int i = 0; i < m; ++i) {
      double x = -L + (i + 0.5) * h;
      acc += h * std::exp(-0.5 * beta * n * spec.V(Vec{x}));
    }
    logz0 = n * std::log(acc);
  }
  // d logZ / dlambda = -(beta/2) <U>_lambda, U = interaction only
  static const double nodes[8] = {0.0198550717512319, 0.1016667612931866, 0.2372337950418355,
                                  0.4082826787521751, 0.5917173212478249, 0.7627662049581645,
                                  0.8983332387068134, 0.9801449282487681};
  static const double wts[8] = {0.0506142681451881, 0.1111905172266872, 0.1568533229389436,
                                0.1813418916891810, 0.1813418916891810, 0.1568533229389436,
                                0.1111905172266872, 0.0506142681451881};
  auto mean_U = [&](double lam, uint64_t stream) {
    CounterRng rng(seed, stream);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = 0.5 * rng.next_gaussian();
    double sigma = 0.5;
    int sweeps = 60000, burn = 10000;
    double acc_u = 0.0;
    long cnt = 0, accepted = 0, proposed = 0;
    auto terms = [&](int i, double xi) {
      double u = 0.0, vsum = spec.V(Vec{xi});
      for (int j = 0; j < n; ++j)
        if (j != i) u += -2.0 * std::log(std::fabs(x[j] - xi));
      return std::pair<double, double>(u, vsum);
    };
    for (int s = 0; s < sweeps; ++s) {
      for (int i = 0; i < n; ++i) {
        double prop = x[i] + sigma * rng.next_gaussian();
        auto [u_new, v_new] = terms(i, prop);
        auto [u_old, v_old] = terms(i, x[i]);
        double dH = lam * (u_new - u_old) + n * (v_new - v_old);
        ++proposed;
        if (std::isfinite(dH) && rng.next_double() < std::exp(-0.5 * beta * dH)) {
          x[i] = prop;
          ++accepted;
        }
      }
      if (s < burn) {
        if (s % 100 == 99) {
          double rate = static_cast<double>(accepted) / proposed;
          sigma *= std::exp(0.7 * (rate - 0.35));
          sigma = std::clamp(sigma, 1e-3, 5.0);
          accepted = proposed = 0;
        }
        continue;
      }
      double u = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) u += -std::log(std::fabs(x[i] - x[j]));
      acc_u += u;
      ++cnt;
    }
    return acc_u / cnt;
  };
  double integral = 0.0;
  for (int q = 0; q < 8; ++q) integral += wts[q] * mean_U(nodes[q], 101 + q);
  return logz0 - 0.5 * beta * integral;
}

}  // namespace

GibbsChainResult sample_gibbs(const GibbsSpec& spec, const EquilibriumSolution* eq) {
  if (spec.sigma < 0.0) throw domain_error("sample_gibbs: sigma must be positive");
  if (spec.beta <= 0.0) throw domain_error("sample_gibbs: beta must be positive");
  State s;
  s.dim = spec.dim;
  CounterRng rng(spec.seed, spec.stream);
  s.x.resize(spec.n);
  s.y.assign(spec.n, 0.0);
  s.z.assign(spec.n, 0.0);
  for (std::size_t i = 0; i < spec.n; ++i) {
    s.x[i] = spec.init_radius * (2.0 * rng.next_double() - 1.0);
    if (spec.dim > 1) s.y[i] = spec.init_radius * (2.0 * rng.next_double() - 1.0);
    if (spec.dim > 2) s.z[i] = spec.init_radius * (2.0 * rng.next_double() - 1.0);
  }

  double sigma = spec.sigma > 0.0 ? spec.sigma : 0.3 / std::sqrt(static_cast<double>(spec.n));
  bool tune = spec.sigma <= 0.0;
  double nd = static_cast<double>(spec.n);

  GibbsChainResult out;
  out.stats.coincident_rejects = 0;
  long accepted = 0, proposed = 0, tune_acc = 0, tune_prop = 0;
  std::vector<double> energies;

  for (int sweep = 0; sweep < spec.sweeps; ++sweep) {
    for (std::size_t i = 0; i < spec.n; ++i) {
      Vec nw{s.x[i] + sigma * rng.next_gaussian(),
             spec.dim > 1 ? s.y[i] + sigma * rng.next_gaussian() : 0.0,
             spec.dim > 2 ? s.z[i] + sigma * rng.next_gaussian() : 0.0};
      double dH = delta_interaction(s, i, nw) + nd * (spec.potential.V(nw) - spec.potential.V(s.at(i)));
      bool accept;
      if (!std::isfinite(dH)) {
        accept = false;
        ++out.stats.coincident_rejects;
        rng.next_double();  // keep the stream aligned with the accept draw
      } else {
        accept = rng.next_double() < std::exp(-0.5 * spec.beta * dH);
      }
      if (accept) {
        s.x[i] = nw[0];
        if (spec.dim > 1) s.y[i] = nw[1];
        if (spec.dim > 2) s.z[i] = nw[2];
      }
      if (sweep < spec.burnin) {
        tune_prop++;
        if (accept) tune_acc++;
      } else {
        proposed++;
        if (accept) accepted++;
      }
    }
    if (tune && sweep < spec.burnin && sweep % 50 == 49) {
      double rate = tune_prop > 0 ? static_cast<double>(tune_acc) / tune_prop : 0.3;
      sigma *= std::exp(0.6 * (rate - 0.3));
      sigma = std::clamp(sigma, 1e-5, 10.0);
      tune_acc = tune_prop = 0;
    }
    if (sweep >= spec.burnin && (sweep - spec.burnin) % spec.thin == 0) {
      PointConfiguration snap = snapshot_of(s);
      energies.push_back(hamiltonian(snap, spec.potential));
      for (const auto& p : snap.pts) out.stats.radial_samples.push_back(p.norm());
      out.snapshots.push_back(std::move(snap));
    }
  }

  out.stats.acceptance = proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
  out.stats.sigma_used = sigma;
  if (!energies.empty()) {
    double mean = 0.0;
    for (double e : energies) mean += e;
    mean /= energies.size();
    out.stats.mean_energy = mean;
    double var = 0.0;
    for (double e : energies) var += (e - mean) * (e - mean);
    var /= std::max<std::size_t>(1, energies.size() - 1);
    out.stats.autocorr_time = autocorr_time(energies);
    double neff = energies.size() / std::max(1.0, out.stats.autocorr_time);
    out.stats.energy_stderr = std::sqrt(var / std::max(1.0, neff));
  }
  if (eq != nullptr && !out.snapshots.empty()) {
    PointConfiguration pooled;
    pooled.dim = spec.dim;
    for (const auto& snap : out.snapshots)
      pooled.pts.insert(pooled.pts.end(), snap.pts.begin(), snap.pts.end());
    out.stats.bl_distance = empirical_distance(pooled, *eq);
  }
  return out;
}

double empirical_distance(const PointConfiguration& config, const EquilibriumSolution& eq) {
  const auto& dict = bl_dictionary(eq.grid.dim);
  double cellvol = eq.grid.cell_volume();
  double best = 0.0;
  for (const auto& f : dict) {
    double mu_int = 0.0;
    for (std::size_t c = 0; c < eq.density.size(); ++c) {
      if (eq.density[c] == 0.0) continue;
      mu_int += eq.density[c] * cellvol * dict_eval(f, eq.grid.center(c));
    }
    double emp = 0.0;
    for (const auto& p : config.pts) emp += dict_eval(f, p);
    emp /= static_cast<double>(config.pts.size());
    best = std::max(best, std::fabs(emp - mu_int));
  }
  return best;
}

double log_partition_tiny(int n, double beta, const PotentialSpec& spec, PartitionMethod method) {
  if (spec.dim != 1) throw capability_error("log_partition_tiny: 1D potentials only");
  if (beta <= 0.0) throw domain_error("log_partition_tiny: beta must be positive");
  if (method == PartitionMethod::quadrature) {
    if (n < 1 || n > 3)
      throw capability_error("log_partition_tiny: quadrature supports n <= 3");
    return partition_quadrature(n, beta, spec);
  }
  if (n < 1 || n > 8) throw capability_error("log_partition_tiny: thermo supports n <= 8");
  if (n == 1) return partition_quadrature(1, beta, spec);
  return partition_thermo(n, beta, spec, 0xC0FFEE);
}

}  // namespace coulomb
