#include "coulomb/gas_energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "coulomb/errors.hpp"
#include "coulomb/kernels.hpp"
#include "coulomb/simd.hpp"

namespace coulomb {
namespace {

struct SoA {
  std::vector<double> x, y, z;
  void reserve(std::size_t n) {
    x.reserve(n);
    y.reserve(n);
    z.reserve(n);
  }
  void push(const Vec& p) {
    x.push_back(p[0]);
    y.push_back(p[1]);
    z.push_back(p[2]);
  }
  std::size_t size() const { return x.size(); }
};

SoA to_soa(const PointConfiguration& c) {
  SoA s;
  s.reserve(c.size());
  for (const auto& p : c.pts) s.push(p);
  return s;
}

// compressed equilibrium background: blown-up cell centers and masses
struct Background {
  SoA centers;            // blown-up coordinates
  std::vector<double> mass;  // blown-up cell masses (n * w_c)
  std::vector<Vec> raw_centers;
  double cell_size = 0.0;   // blown-up spacing
  int dim = 2;
};

Background make_background(const EquilibriumSolution& eq, double scale, double n_points) {
  Background bg;
  bg.dim = eq.grid.dim;
  bg.cell_size = eq.grid.h * scale;
  double cellvol = eq.grid.cell_volume();
  for (std::size_t c = 0; c < eq.density.size(); ++c) {
    double w = eq.density[c] * cellvol;
    if (w <= 0.0) continue;
    Vec y = eq.grid.center(c);
    bg.raw_centers.push_back(y);
    bg.centers.push(y * scale);
    bg.mass.push_back(w * n_points);
  }
  return bg;
}

// sum_c mass_c * g_eta(|q - y_c|) over the compressed background, with
// midpoint cells refined to sub-cells near q
double background_kernel_sum(const Background& bg, const Vec& q, double eta) {
  const auto& k = simd::kernels();
  std::size_t m = bg.centers.size();
  double eta_coarse = std::max(eta, 0.3 * bg.cell_size);
  double base;
  if (bg.dim == 3)
    base = k.sum_w_ginv_eta_3d(bg.centers.x.data(), bg.centers.y.data(), bg.centers.z.data(),
                               bg.mass.data(), m, q[0], q[1], q[2], eta_coarse);
  else
    base = k.sum_w_glog_eta_2d(bg.centers.x.data(), bg.centers.y.data(), bg.mass.data(), m, q[0],
                               q[1], eta_coarse);

  // refine cells close to q
  int split = bg.dim == 1 ? 64 : (bg.dim == 2 ? 16 : 8);
  double r_split = std::max(4.0 * eta, 3.0 * bg.cell_size);
  double sub = bg.cell_size / split;
  double eta_fine = std::max(eta, 0.3 * sub);
  KernelSpec spec = KernelSpec::make(bg.dim);
  for (std::size_t c = 0; c < m; ++c) {
    Vec yc{bg.centers.x[c], bg.centers.y[c], bg.centers.z[c]};
    double dist = (yc - q).norm();
    if (dist > r_split) continue;
    double coarse;
    if (bg.dim == 3)
      coarse = bg.mass[c] / std::max(dist, eta_coarse);
    else
      coarse = -bg.mass[c] * std::log(std::max(dist, eta_coarse));
    double fine = 0.0;
    double wsub = bg.mass[c] / std::pow(static_cast<double>(split), bg.dim);
    int sy = bg.dim > 1 ? split : 1, sz = bg.dim > 2 ? split : 1;
    for (int a = 0; a < split; ++a)
      for (int b = 0; b < sy; ++b)
        for (int cc = 0; cc < sz; ++cc) {
          Vec p = yc;
          p[0] += (a + 0.5) * sub - 0.5 * bg.cell_size;
          if (bg.dim > 1) p[1] += (b + 0.5) * sub - 0.5 * bg.cell_size;
          if (bg.dim > 2) p[2] += (cc + 0.5) * sub - 0.5 * bg.cell_size;
          double r = (p - q).norm();
          fine += wsub * kernel_value(std::max(r, eta_fine), spec);
        }
    base += fine - coarse;
  }
  return base;
}

double pair_g_sum(const SoA& pts, int dim) {
  const auto& k = simd::kernels();
  std::size_t n = pts.size();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t cnt = n - i - 1;
    if (dim == 1)
      total += -0.5 * k.sum_log_r2_1d(pts.x.data() + i + 1, cnt, pts.x[i]);
    else if (dim == 2)
      total += -0.5 * k.sum_log_r2_2d(pts.x.data() + i + 1, pts.y.data() + i + 1, cnt, pts.x[i],
                                      pts.y[i]);
    else
      total += k.sum_inv_r_3d(pts.x.data() + i + 1, pts.y.data() + i + 1, pts.z.data() + i + 1,
                              cnt, pts.x[i], pts.y[i], pts.z[i]);
  }
  return 2.0 * total;  // ordered pairs
}

}  // namespace

double PointConfiguration::min_separation() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::min(best, (pts[i] - pts[j]).norm());
  return pts.size() < 2 ? std::numeric_limits<double>::infinity() : best;
}

PointConfiguration PointConfiguration::blow_up() const {
  PointConfiguration out = *this;
  double s = std::pow(static_cast<double>(pts.size()), 1.0 / dim);
  for (auto& p : out.pts) p = p * s;
  out.blown_up = true;
  return out;
}

double hamiltonian(const PointConfiguration& config, const PotentialSpec& spec) {
  std::size_t n = config.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((config.pts[i] - config.pts[j]).norm2() == 0.0) {
        std::ostringstream os;
        os << "hamiltonian: coincident points " << i << " and " << j;
        throw singularity_error(os.str());
      }
  SoA pts = to_soa(config);
  double interaction = pair_g_sum(pts, config.dim);
  double conf = 0.0;
  for (const auto& p : config.pts) conf += spec.V(p);
  return interaction + static_cast<double>(n) * conf;
}

FieldEnergyResult truncated_field_energy(const PointConfiguration& blown,
                                         const EquilibriumSolution& eq, double eta) {
  if (eta <= 0.0) throw domain_error("truncated_field_energy: eta must be positive");
  std::size_t n = blown.size();
  double nd = static_cast<double>(n);
  int d = eq.grid.dim;
  KernelSpec spec = KernelSpec::make(d);
  double c_field = spec.field_constant();
  double scale = std::pow(nd, 1.0 / d);

  FieldEnergyResult out;
  double minsep = blown.min_separation();
  out.overlap = minsep < 2.0 * eta;

  // pair term
  SoA pts = to_soa(blown);
  double s_pair;
  if (!out.overlap) {
    s_pair = pair_g_sum(pts, d);
  } else {
    s_pair = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s_pair += smeared_pair_interaction(blown.pts[i], blown.pts[j], eta, spec);
  }

  // cross term against the blown-up background
  Background bg = make_background(eq, scale, nd);
  double s_cross = 0.0;
  for (std::size_t i = 0; i < n; ++i) s_cross += background_kernel_sum(bg, blown.pts[i], eta);

  // background self-energy under blow-up
  double s_bg;
  if (spec.log_kernel)
    s_bg = nd * nd * (-std::log(nd) / d + eq.interaction);
  else
    s_bg = std::pow(nd, (d + 2.0) / d) * eq.interaction;

  out.value = c_field * (s_pair - 2.0 * s_cross + s_bg);
  return out;
}

NextOrderReport splitting_report(const PointConfiguration& unblown, const EquilibriumSolution& eq,
                                 double eta) {
  std::size_t n = unblown.size();
  double nd = static_cast<double>(n);
  int d = eq.grid.dim;
  NextOrderReport rep;
  rep.n = n;
  rep.dim = d;
  rep.hamiltonian = hamiltonian(unblown, eq.potential);
  rep.leading = nd * nd * eq.energy;
  rep.log_term = d == 2 ? -0.5 * nd * std::log(nd) : (d == 1 ? -nd * std::log(nd) : 0.0);

  PointConfiguration blown = unblown.blow_up();
  if (eta <= 0.0) {
    double ms = blown.min_separation();
    eta = std::isfinite(ms) ? 0.1 * ms : 0.25;
  }
  rep.eta = eta;

  // confinement: zeta evaluated by direct quadrature at the points
  Background bg1 = make_background(eq, 1.0, 1.0);  // unblown, unit mass
  double zsum = 0.0;
  for (const auto& p : unblown.pts) {
    double hmu0 = background_kernel_sum(bg1, p, 0.0);
    zsum += hmu0 + 0.5 * eq.potential.V(p) - eq.c;
  }
  rep.confinement = 2.0 * nd * zsum;

  FieldEnergyResult fe = truncated_field_energy(blown, eq, eta);
  rep.next_order = fe.value;
  rep.overlap_flag = fe.overlap;
  KernelSpec spec = KernelSpec::make(d);
  double coef = d == 1 ? 1.0 / spec.field_constant()
                       : std::pow(nd, 1.0 - 2.0 / d) / spec.field_constant();
  rep.next_order_scaled = coef * rep.next_order;

  rep.residual =
      rep.hamiltonian - (rep.leading + rep.confinement + rep.log_term + rep.next_order_scaled);
  double h = eq.grid.h;
  rep.quad_tolerance = 2e-2 + 1.2e-2 * std::max(1.0, std::fabs(rep.hamiltonian)) * (64.0 * h) * (64.0 * h);
  return rep;
}

double discrepancy(const PointConfiguration& blown, const Vec& center, double R,
                   const EquilibriumSolution& eq) {
  if (R <= 0.0) throw domain_error("discrepancy: R must be positive");
  std::size_t n = blown.size();
  double nd = static_cast<double>(n);
  int d = eq.grid.dim;
  double scale = std::pow(nd, 1.0 / d);
  double count = 0.0;
  for (const auto& p : blown.pts)
    if ((p - center).norm() <= R) count += 1.0;

  Background bg = make_background(eq, scale, nd);
  double half_diag = 0.5 * bg.cell_size * std::sqrt(static_cast<double>(d));
  double mass_in = 0.0;
  int split = 4;
  for (std::size_t c = 0; c < bg.mass.size(); ++c) {
    Vec yc{bg.centers.x[c], bg.centers.y[c], bg.centers.z[c]};
    double dist = (yc - center).norm();
    if (dist <= R - half_diag) {
      mass_in += bg.mass[c];
    } else if (dist < R + half_diag) {
      double sub = bg.cell_size / split;
      double wsub = bg.mass[c] / std::pow(static_cast<double>(split), d);
      int sy = d > 1 ? split : 1, sz = d > 2 ? split : 1;
      for (int a = 0; a < split; ++a)
        for (int b = 0; b < sy; ++b)
          for (int cc = 0; cc < sz; ++cc) {
            Vec p = yc;
            p[0] += (a + 0.5) * sub - 0.5 * bg.cell_size;
            if (d > 1) p[1] += (b + 0.5) * sub - 0.5 * bg.cell_size;
            if (d > 2) p[2] += (cc + 0.5) * sub - 0.5 * bg.cell_size;
            if ((p - center).norm() <= R) mass_in += wsub;
          }
    }
  }
  return count - mass_in;
}

LowerBoundCheck easy_lower_bound_check(const PointConfiguration& unblown,
                                       const EquilibriumSolution& eq) {
  std::size_t n = unblown.size();
  double nd = static_cast<double>(n);
  int d = eq.grid.dim;
  double H = hamiltonian(unblown, eq.potential);
  Background bg1 = make_background(eq, 1.0, 1.0);
  double zsum = 0.0;
  for (const auto& p : unblown.pts)
    zsum += background_kernel_sum(bg1, p, 0.0) + 0.5 * eq.potential.V(p) - eq.c;
  double log_term = d == 2 ? -0.5 * nd * std::log(nd) : (d == 1 ? -nd * std::log(nd) : 0.0);
  double base = nd * nd * eq.energy + 2.0 * nd * zsum + log_term;
  double scale = eq.max_density() * std::pow(nd, 2.0 - 2.0 / d);
  LowerBoundCheck out;
  out.fitted_C = (base - H) / scale;
  out.margin = H - (base - 50.0 * scale);
  out.holds = out.margin >= 0.0;
  return out;
}

GridOracleResult field_energy_grid_oracle(const PointConfiguration& blown,
                                          const EquilibriumSolution& eq, double eta,
                                          double box_factor, int cells_per_axis) {
  std::size_t n = blown.size();
  if (n > 8) throw capability_error("field_energy_grid_oracle: supported only for n <= 8");
  double nd = static_cast<double>(n);
  int d = eq.grid.dim;
  if (d == 3) throw capability_error("field_energy_grid_oracle: d = 3 not supported");
  double scale = std::pow(nd, 1.0 / d);
  KernelSpec spec = KernelSpec::make(d);
  double c_field = spec.field_constant();

  double diam = eq.support_radius * 2.0 * scale;
  for (const auto& p : blown.pts) diam = std::max(diam, 2.0 * p.norm());
  double L = 0.5 * box_factor * std::max(diam, 1.0);
  int m = cells_per_axis;
  double hg = 2.0 * L / m;

  Background bg = make_background(eq, scale, nd);
  // potential of the truncated blown-up distribution on the oracle grid
  std::vector<double> phi(static_cast<std::size_t>(m) * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      Vec z{-L + (i + 0.5) * hg, -L + (j + 0.5) * hg, 0.0};
      double val = 0.0;
      for (const auto& p : blown.pts) {
        double r = (z - p).norm();
        val += kernel_value(std::max(r, eta), spec);
      }
      val -= background_kernel_sum(bg, z, 0.0);
      phi[static_cast<std::size_t>(j) * m + i] = val;
    }

  double energy = 0.0;
  double grad_edge_max = 0.0;
  for (int j = 1; j + 1 < m; ++j)
    for (int i = 1; i + 1 < m; ++i) {
      std::size_t idx = static_cast<std::size_t>(j) * m + i;
      double gx = (phi[idx + 1] - phi[idx - 1]) / (2.0 * hg);
      double gy = (phi[idx + m] - phi[idx - m]) / (2.0 * hg);
      double g2 = gx * gx + gy * gy;
      energy += g2 * hg * hg;
      if (i == 1 || j == 1 || i == m - 2 || j == m - 2) {
        Vec z{-L + (i + 0.5) * hg, -L + (j + 0.5) * hg, 0.0};
        grad_edge_max = std::max(grad_edge_max, std::sqrt(g2) * z.norm2());
      }
    }
  GridOracleResult out;
  out.value = energy - nd * c_field * kernel_value(eta, spec);
  // |grad h| <= K / r^2 outside, so the missing tail is below pi K^2 / L^2
  out.tail_bound = 3.14159265358979323846 * grad_edge_max * grad_edge_max / (L * L);
  return out;
}

std::string NextOrderReport::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\n"
     << "  \"n\": " << n << ",\n"
     << "  \"dim\": " << dim << ",\n"
     << "  \"hamiltonian\": " << hamiltonian << ",\n"
     << "  \"leading\": " << leading << ",\n"
     << "  \"log_term\": " << log_term << ",\n"
     << "  \"confinement\": " << confinement << ",\n"
     << "  \"next_order\": " << next_order << ",\n"
     << "  \"next_order_scaled\": " << next_order_scaled << ",\n"
     << "  \"eta\": " << eta << ",\n"
     << "  \"residual\": " << residual << ",\n"
     << "  \"quad_tolerance\": " << quad_tolerance << ",\n"
     << "  \"overlap_flag\": " << (overlap_flag ? "true" : "false") << "\n}";
  return os.str();
}

}  // namespace coulomb
