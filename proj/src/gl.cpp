#include "coulomb/gl.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "coulomb/detail/psor.hpp"
#include "coulomb/errors.hpp"
#include "coulomb/rng.hpp"

namespace coulomb {
namespace {

constexpr double kPi = 3.14159265358979323846264338;
using cplx = std::complex<double>;

// trapezoid node weight so that node sums integrate over the plaquette-
// covered area exactly
inline double node_weight(const GLGrid& g, int i, int j) {
  double w = 1.0;
  if (i == 0 || i == g.nx - 1) w *= 0.5;
  if (j == 0 || j == g.ny - 1) w *= 0.5;
  return w;
}

inline double link_weight_x(const GLGrid& g, int j) { return (j == 0 || j == g.ny - 1) ? 0.5 : 1.0; }
inline double link_weight_y(const GLGrid& g, int i) { return (i == 0 || i == g.nx - 1) ? 0.5 : 1.0; }

double energy_with_field(const GLState& s, double h_ex, bool trapezoid = true) {
  const GLGrid& g = s.grid;
  double h = g.h;
  double kinetic = 0.0, field = 0.0, potential = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      cplx d = s.u[g.idx(i + 1, j)] * std::polar(1.0, -h * s.a1[g.idx(i, j)]) - s.u[g.idx(i, j)];
      kinetic += (trapezoid ? link_weight_x(g, j) : 1.0) * std::norm(d);
    }
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      cplx d = s.u[g.idx(i, j + 1)] * std::polar(1.0, -h * s.a2[g.idx(i, j)]) - s.u[g.idx(i, j)];
      kinetic += (trapezoid ? link_weight_y(g, i) : 1.0) * std::norm(d);
    }
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      double circ = h * (s.a1[g.idx(i, j)] + s.a2[g.idx(i + 1, j)] - s.a1[g.idx(i, j + 1)] -
                         s.a2[g.idx(i, j)]);
      double b = circ / (h * h);
      field += (b - h_ex) * (b - h_ex) * h * h;
    }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double m = 1.0 - std::norm(s.u[g.idx(i, j)]);
      potential += (trapezoid ? node_weight(g, i, j) : 1.0) * m * m / (2.0 * s.eps * s.eps) * h * h;
    }
  return 0.5 * (kinetic + field + potential);
}

cplx bilinear_u(const GLState& s, const Vec& x) {
  const GLGrid& g = s.grid;
  double fx = (x[0] - g.lox) / g.h, fy = (x[1] - g.loy) / g.h;
  int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx - 2);
  int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
  double ax = fx - i, ay = fy - j;
  return (1 - ax) * (1 - ay) * s.u[g.idx(i, j)] + ax * (1 - ay) * s.u[g.idx(i + 1, j)] +
         (1 - ax) * ay * s.u[g.idx(i, j + 1)] + ax * ay * s.u[g.idx(i + 1, j + 1)];
}

bool ball_inside(const GLGrid& g, const Ball& b) {
  double x0 = g.lox, x1 = g.lox + (g.nx - 1) * g.h;
  double y0 = g.loy, y1 = g.loy + (g.ny - 1) * g.h;
  return b.center[0] - b.r >= x0 && b.center[0] + b.r <= x1 && b.center[1] - b.r >= y0 &&
         b.center[1] + b.r <= y1;
}

void merge_overlaps(BallSet& set, const GLGrid& domain, double s_now) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < set.balls.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < set.balls.size() && !changed; ++j) {
        Ball &a = set.balls[i], &b = set.balls[j];
        double dist = (a.center - b.center).norm();
        if (dist <= (a.r + b.r) * (1.0 + 1e-12)) {
          Ball merged;
          merged.r = a.r + b.r;
          merged.center = (a.center * a.r + b.center * b.r) * (1.0 / (a.r + b.r));
          merged.degree = a.degree + b.degree;
          merged.bound = a.bound + b.bound;
          merged.escaped = a.escaped || b.escaped;
          if (!merged.escaped && !ball_inside(domain, merged)) merged.escaped = true;
          if (merged.escaped) merged.degree = 0;
          set.merge_log.push_back(MergeEvent{s_now, static_cast<int>(i), static_cast<int>(j)});
          set.balls[i] = merged;
          set.balls.erase(set.balls.begin() + j);
          changed = true;
        }
      }
  }
}

// internal dictionary of 1-Lipschitz test functions vanishing on the
// domain boundary (for dual-Lipschitz norms)
struct LipFn {
  int type;
  Vec a;
  double kappa, phase, rho;
};

std::vector<LipFn> lip_dictionary(const GLGrid& g) {
  CounterRng rng(0x11BD1C7, 2);
  std::vector<LipFn> fns;
  double cx = g.lox + 0.5 * (g.nx - 1) * g.h, cy = g.loy + 0.5 * (g.ny - 1) * g.h;
  double half = 0.5 * std::min((g.nx - 1) * g.h, (g.ny - 1) * g.h);
  fns.push_back(LipFn{0, Vec{cx, cy, 0.0}, 0.0, 0.0, 0.7 * half});
  while (fns.size() < 160) {
    LipFn f;
    f.type = rng.next_double() < 0.5 ? 0 : 1;
    f.a = Vec{cx + (2.0 * rng.next_double() - 1.0) * 0.6 * half,
              cy + (2.0 * rng.next_double() - 1.0) * 0.6 * half, 0.0};
    f.kappa = (0.5 + 5.5 * rng.next_double()) / half;
    f.phase = 2.0 * kPi * rng.next_double();
    f.rho = (0.2 + 0.6 * rng.next_double()) * half;
    fns.push_back(f);
  }
  return fns;
}

double lip_eval(const LipFn& f, const GLGrid& g, const Vec& x) {
  double bx0 = g.lox, bx1 = g.lox + (g.nx - 1) * g.h;
  double by0 = g.loy, by1 = g.loy + (g.ny - 1) * g.h;
  double dist_boundary = std::min(std::min(x[0] - bx0, bx1 - x[0]), std::min(x[1] - by0, by1 - x[1]));
  if (dist_boundary <= 0.0) return 0.0;
  const double w = 0.25;
  double cut = std::min(1.0, dist_boundary / w);
  double base;
  if (f.type == 0)
    base = std::max(0.0, f.rho - (x - f.a).norm());
  else
    base = std::cos(f.kappa * (x - f.a).norm() + f.phase) / f.kappa;
  // product of a 1-Lipschitz function (bounded by rho or 1/kappa) with the
  // cutoff; normalize so the result stays 1-Lipschitz
  double bound = f.type == 0 ? f.rho : 1.0 / f.kappa;
  return base * cut / (1.0 + bound / w);
}

// screened obstacle solve on the plaquette-center grid of a GL state, with
// constant obstacle level and Dirichlet value h_ex on the outer cell ring
struct CellObstacle {
  int ncx = 0, ncy = 0;
  double h = 0.0;
  std::vector<double> val;  // h_{0,eps} on cells
  double level = 0.0;
};

CellObstacle solve_cell_obstacle(const GLGrid& g, double level, double h_ex) {
  CellObstacle out;
  out.ncx = g.nx - 1;
  out.ncy = g.ny - 1;
  out.h = g.h;
  out.level = level;
  detail::PsorProblem p;
  p.nx = out.ncx;
  p.ny = out.ncy;
  p.h = g.h;
  p.screened = true;
  std::size_t M = static_cast<std::size_t>(out.ncx) * out.ncy;
  p.kind.assign(M, 1);
  p.psi.assign(M, level);
  p.rhs.assign(M, 0.0);
  p.val.assign(M, h_ex);
  for (int j = 0; j < p.ny; ++j)
    for (int i = 0; i < p.nx; ++i)
      if (i == 0 || j == 0 || i == p.nx - 1 || j == p.ny - 1) {
        std::size_t idx = static_cast<std::size_t>(j) * p.nx + i;
        p.kind[idx] = 2;
        p.psi[idx] = -std::numeric_limits<double>::infinity();
      }
  detail::psor_solve(p, 1.8, 1e-10, 400000);
  out.val = p.val;
  return out;
}

}  // namespace

GLGrid GLGrid::square(double half_width, int nodes_per_axis) {
  GLGrid g;
  g.nx = g.ny = nodes_per_axis;
  g.h = 2.0 * half_width / (nodes_per_axis - 1);
  g.lox = g.loy = -half_width;
  return g;
}

GLState GLState::uniform(const GLGrid& grid, cplx value, double eps, double h_ex) {
  GLState s;
  s.grid = grid;
  s.u.assign(grid.nodes(), value);
  s.a1.assign(grid.nodes(), 0.0);
  s.a2.assign(grid.nodes(), 0.0);
  s.eps = eps;
  s.h_ex = h_ex;
  return s;
}

double gl_energy(const GLState& s) { return energy_with_field(s, s.h_ex); }
double gl_free_energy(const GLState& s) { return energy_with_field(s, 0.0); }

GridField vorticity(const GLState& s) {
  const GLGrid& g = s.grid;
  double h = g.h;
  Grid vg;
  vg.dim = 2;
  vg.n = {g.nx - 1, g.ny - 1, 1};
  vg.lo = {g.lox, g.loy, 0.0};
  vg.h = h;
  GridField out(vg);
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      double t_b = h * s.a1[g.idx(i, j)], t_r = h * s.a2[g.idx(i + 1, j)];
      double t_t = h * s.a1[g.idx(i, j + 1)], t_l = h * s.a2[g.idx(i, j)];
      double jc = std::imag(std::conj(s.u[g.idx(i, j)]) * s.u[g.idx(i + 1, j)] *
                            std::polar(1.0, -t_b)) +
                  std::imag(std::conj(s.u[g.idx(i + 1, j)]) * s.u[g.idx(i + 1, j + 1)] *
                            std::polar(1.0, -t_r)) -
                  std::imag(std::conj(s.u[g.idx(i, j + 1)]) * s.u[g.idx(i + 1, j + 1)] *
                            std::polar(1.0, -t_t)) -
                  std::imag(std::conj(s.u[g.idx(i, j)]) * s.u[g.idx(i, j + 1)] *
                            std::polar(1.0, -t_l));
      double ac = t_b + t_r - t_t - t_l;
      out.v[vg.index(i, j)] = (jc + ac) / (h * h);
    }
  return out;
}

void gauge_transform(GLState& s, const std::vector<double>& phi) {
  const GLGrid& g = s.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      std::size_t idx = g.idx(i, j);
      s.u[idx] *= std::polar(1.0, phi[idx]);
      if (i + 1 < g.nx) s.a1[idx] += (phi[g.idx(i + 1, j)] - phi[idx]) / g.h;
      if (j + 1 < g.ny) s.a2[idx] += (phi[g.idx(i, j + 1)] - phi[idx]) / g.h;
    }
}

int degree_on_circle(const GLState& s, const Vec& center, double r) {
  int m = std::max(64, static_cast<int>(16.0 * r / s.grid.h));
  double total = 0.0;
  cplx prev = bilinear_u(s, Vec{center[0] + r, center[1], 0.0});
  if (std::abs(prev) <= 0.1)
    throw singularity_error("degree_on_circle: |u| <= 0.1 on the path (ill-defined degree)");
  for (int k = 1; k <= m; ++k) {
    double t = 2.0 * kPi * k / m;
    cplx cur = bilinear_u(s, Vec{center[0] + r * std::cos(t), center[1] + r * std::sin(t), 0.0});
    if (std::abs(cur) <= 0.1)
      throw singularity_error("degree_on_circle: |u| <= 0.1 on the path (ill-defined degree)");
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

double BallSet::total_radius() const {
  double r = 0.0;
  for (const auto& b : balls) r += b.r;
  return r;
}
double BallSet::total_bound() const {
  double v = 0.0;
  for (const auto& b : balls) v += b.bound;
  return v;
}
int BallSet::total_abs_degree() const {
  int d = 0;
  for (const auto& b : balls) d += std::abs(b.degree);
  return d;
}

BallSet initial_balls_from_state(const GLState& s) {
  const GLGrid& g = s.grid;
  double thresh = std::pow(s.eps, 0.25);
  std::vector<uint8_t> bad(g.nodes(), 0), seen(g.nodes(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (std::fabs(std::abs(s.u[g.idx(i, j)]) - 1.0) >= thresh) bad[g.idx(i, j)] = 1;

  BallSet set;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!bad[g.idx(i, j)] || seen[g.idx(i, j)]) continue;
      // BFS component
      std::deque<std::pair<int, int>> queue{{i, j}};
      seen[g.idx(i, j)] = 1;
      int imin = i, imax = i, jmin = j, jmax = j;
      while (!queue.empty()) {
        auto [ci, cj] = queue.front();
        queue.pop_front();
        imin = std::min(imin, ci);
        imax = std::max(imax, ci);
        jmin = std::min(jmin, cj);
        jmax = std::max(jmax, cj);
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          int ni = ci + di[k], nj = cj + dj[k];
          if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
          if (bad[g.idx(ni, nj)] && !seen[g.idx(ni, nj)]) {
            seen[g.idx(ni, nj)] = 1;
            queue.push_back({ni, nj});
          }
        }
      }
      Ball b;
      Vec lo = g.node(imin, jmin), hi = g.node(imax, jmax);
      b.center = (lo + hi) * 0.5;
      b.r = 0.5 * (hi - lo).norm() + g.h;
      b.escaped = !ball_inside(g, b);
      if (!b.escaped) {
        for (double grow = 2.0; grow <= 8.0; grow += 2.0) {
          try {
            b.degree = degree_on_circle(s, b.center, b.r + grow * g.h);
            break;
          } catch (const singularity_error&) {
            if (grow + 2.0 > 8.0) b.degree = 0;
          }
        }
      }
      set.balls.push_back(b);
    }
  merge_overlaps(set, g, 1.0);
  set.initial_total_radius = set.total_radius();
  return set;
}

BallSet ball_construction(const BallSet& initial, double s_target, const GLGrid& domain) {
  if (s_target < 1.0) throw domain_error("ball_construction: s_target must be >= 1");
  BallSet set = initial;
  if (set.initial_total_radius == 0.0) set.initial_total_radius = set.total_radius();
  merge_overlaps(set, domain, set.s_reached);
  for (auto& b : set.balls)
    if (!b.escaped && !ball_inside(domain, b)) {
      b.escaped = true;
      b.degree = 0;
    }

  while (set.s_reached < s_target * (1.0 - 1e-15) && !set.balls.empty()) {
    // next tangency during joint growth
    double lambda_next = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.balls.size(); ++i)
      for (std::size_t j = i + 1; j < set.balls.size(); ++j) {
        double d = (set.balls[i].center - set.balls[j].center).norm();
        double lam = d / (set.balls[i].r + set.balls[j].r);
        lambda_next = std::min(lambda_next, lam);
      }
    double lambda_cap = s_target / set.s_reached;
    double lambda = std::min(std::max(1.0, lambda_next), lambda_cap);
    if (lambda > 1.0) {
      double logl = std::log(lambda);
      for (auto& b : set.balls) {
        b.r *= lambda;
        if (!b.escaped && !ball_inside(domain, b)) {
          b.escaped = true;
          b.degree = 0;
        }
        b.bound += kPi * std::abs(b.degree) * logl;
      }
      set.s_reached *= lambda;
    }
    if (set.s_reached < s_target * (1.0 - 1e-15)) merge_overlaps(set, domain, set.s_reached);
  }
  return set;
}

BallBoundReport ball_lower_bound_vs_energy(const GLState& s, const BallSet& balls) {
  const GLGrid& g = s.grid;
  double h = g.h;
  auto inside = [&](const Vec& x) {
    for (const auto& b : balls.balls)
      if ((x - b.center).norm() <= b.r) return true;
    return false;
  };
  double kinetic = 0.0, field = 0.0, potential = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      Vec mid = g.node(i, j);
      mid[0] += 0.5 * h;
      if (!inside(mid)) continue;
      cplx d = s.u[g.idx(i + 1, j)] * std::polar(1.0, -h * s.a1[g.idx(i, j)]) - s.u[g.idx(i, j)];
      kinetic += link_weight_x(g, j) * std::norm(d);
    }
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      Vec mid = g.node(i, j);
      mid[1] += 0.5 * h;
      if (!inside(mid)) continue;
      cplx d = s.u[g.idx(i, j + 1)] * std::polar(1.0, -h * s.a2[g.idx(i, j)]) - s.u[g.idx(i, j)];
      kinetic += link_weight_y(g, i) * std::norm(d);
    }
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      Vec c = g.node(i, j);
      c[0] += 0.5 * h;
      c[1] += 0.5 * h;
      if (!inside(c)) continue;
      double circ = h * (s.a1[g.idx(i, j)] + s.a2[g.idx(i + 1, j)] - s.a1[g.idx(i, j + 1)] -
                         s.a2[g.idx(i, j)]);
      double b = circ / (h * h);
      field += b * b * h * h;
    }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!inside(g.node(i, j))) continue;
      double m = 1.0 - std::norm(s.u[g.idx(i, j)]);
      potential += node_weight(g, i, j) * m * m / (2.0 * s.eps * s.eps) * h * h;
    }
  BallBoundReport rep;
  rep.energy = 0.5 * (kinetic + field + potential);
  rep.bound = balls.total_bound();
  int D = balls.total_abs_degree();
  if (D > 0)
    rep.reported_C = std::log(balls.total_radius() / (D * s.eps)) - rep.bound / (kPi * D);
  return rep;
}

double jacobian_estimate_check(const GLState& s, const BallSet& balls) {
  const GLGrid& g = s.grid;
  GridField mu = vorticity(s);
  auto fns = lip_dictionary(g);
  double worst = 0.0;
  for (const auto& f : fns) {
    double mu_int = 0.0;
    for (std::size_t c = 0; c < mu.v.size(); ++c)
      mu_int += mu.v[c] * lip_eval(f, g, mu.grid.center(c)) * g.h * g.h;
    double nu_int = 0.0;
    for (const auto& b : balls.balls)
      nu_int += 2.0 * kPi * b.degree * lip_eval(f, g, b.center);
    worst = std::max(worst, std::fabs(mu_int - nu_int));
  }
  double denom = std::max(s.eps, balls.total_radius()) * (1.0 + gl_free_energy(s));
  return worst / denom;
}

Domain Domain::rectangle(double half_width, int nodes_per_axis) {
  Domain d;
  d.shape = Shape::rectangle;
  d.grid = GLGrid::square(half_width, nodes_per_axis);
  return d;
}

Domain Domain::disk(double radius, int nodes_per_axis, double pad) {
  Domain d;
  d.shape = Shape::disk;
  d.radius = radius;
  d.center = Vec{0.0, 0.0, 0.0};
  d.grid = GLGrid::square(radius * (1.0 + pad), nodes_per_axis);
  return d;
}

bool Domain::contains(const Vec& x) const {
  if (shape == Shape::disk) return (x - center).norm() < radius;
  return x[0] > grid.lox && x[1] > grid.loy && x[0] < grid.lox + (grid.nx - 1) * grid.h &&
         x[1] < grid.loy + (grid.ny - 1) * grid.h;
}

namespace {

// assemble the node PDE problem for a domain, with Shortley-Weller arms on
// disk boundaries
detail::PsorProblem domain_problem(const Domain& dom, double boundary_value) {
  const GLGrid& g = dom.grid;
  detail::PsorProblem p;
  p.nx = g.nx;
  p.ny = g.ny;
  p.h = g.h;
  p.screened = true;
  std::size_t M = g.nodes();
  p.kind.assign(M, 0);
  p.psi.assign(M, -std::numeric_limits<double>::infinity());
  p.rhs.assign(M, 0.0);
  p.val.assign(M, boundary_value);
  if (dom.shape == Domain::Shape::rectangle) {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        p.kind[g.idx(i, j)] =
            (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1) ? 2 : 1;
    return p;
  }
  p.arms.assign(M, {1.0, 1.0, 1.0, 1.0});
  p.arm_values.assign(M, {0.0, 0.0, 0.0, 0.0});
  auto inside = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < g.nx && j < g.ny && dom.contains(g.node(i, j));
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!inside(i, j)) continue;
      p.kind[g.idx(i, j)] = 1;
      const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        if (inside(i + di[k], j + dj[k])) continue;
        // fraction t of the h-step where the circle is crossed
        Vec x = g.node(i, j);
        Vec e{static_cast<double>(di[k]), static_cast<double>(dj[k]), 0.0};
        Vec rel = x - dom.center;
        double b = rel.dot(e), c = rel.norm2() - dom.radius * dom.radius;
        double t = (-b + std::sqrt(std::max(0.0, b * b - c))) / 1.0;  // |e| = 1, step h
        t /= g.h;
        t = std::clamp(t, 1e-6, 1.0);
        p.arms[g.idx(i, j)][k] = t;
        p.arm_values[g.idx(i, j)][k] = boundary_value;
      }
    }
  return p;
}

GridField node_field(const GLGrid& g, const std::vector<double>& vals) {
  Grid grid;
  grid.dim = 2;
  grid.n = {g.nx, g.ny, 1};
  grid.lo = {g.lox - 0.5 * g.h, g.loy - 0.5 * g.h, 0.0};
  grid.h = g.h;
  GridField f(grid);
  f.v = vals;
  return f;
}

}  // namespace

GridField london_solve(const GridField& mu, double h_ex, const Domain& domain) {
  const GLGrid& g = domain.grid;
  if (mu.v.size() != g.nodes()) throw domain_error("london_solve: mu is not node-sampled");
  detail::PsorProblem p = domain_problem(domain, h_ex);
  p.rhs = mu.v;
  detail::psor_solve(p, 2.0 / (1.0 + std::sin(kPi / g.nx)), 1e-10, 600000);
  return node_field(g, p.val);
}

ObstacleResult gl_obstacle(double lambda, const Domain& domain) {
  if (lambda <= 0.0) throw domain_error("gl_obstacle: lambda must be positive");
  const GLGrid& g = domain.grid;
  double level = 1.0 - 1.0 / (2.0 * lambda);
  detail::PsorProblem p = domain_problem(domain, 1.0);
  for (std::size_t i = 0; i < p.kind.size(); ++i)
    if (p.kind[i] == 1) p.psi[i] = level;
  detail::psor_solve(p, 1.8, 1e-9, 600000);
  ObstacleResult out;
  out.h = node_field(g, p.val);
  out.mu_level = level;
  out.coincidence.assign(g.nodes(), 0);
  GridField mu = node_field(g, std::vector<double>(g.nodes(), 0.0));
  for (std::size_t i = 0; i < p.kind.size(); ++i)
    if (p.kind[i] == 1 && p.val[i] <= level + 1e-7) {
      out.coincidence[i] = 1;
      mu.v[i] = level;
    }
  out.mu = mu;
  return out;
}

CriticalFieldResult first_critical_lambda(const Domain& domain) {
  const GLGrid& g = domain.grid;
  GridField zero = node_field(g, std::vector<double>(g.nodes(), 0.0));
  GridField h0 = london_solve(zero, 1.0, domain);
  CriticalFieldResult out;
  double best = -1.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!domain.contains(g.node(i, j))) continue;
      double dev = std::fabs(h0.v[g.idx(i, j)] - 1.0);
      if (dev > best) {
        best = dev;
        out.argmax = g.node(i, j);
      }
    }
  out.lambda_omega = 1.0 / (2.0 * best);
  out.h0 = h0;
  return out;
}

SplittingReport gl_splitting_check(const GLState& s) {
  const GLGrid& g = s.grid;
  double h = g.h;
  if (s.h_ex <= 0.0) throw domain_error("gl_splitting_check: h_ex must be positive");
  double L0 = std::log(1.0 / (s.eps * std::sqrt(s.h_ex)));
  double level = s.h_ex - 0.5 * L0;
  CellObstacle ob = solve_cell_obstacle(g, level, s.h_ex);
  int ncx = ob.ncx, ncy = ob.ncy;
  auto cell = [&](int i, int j) -> double {
    if (i < 0 || j < 0 || i >= ncx || j >= ncy) return s.h_ex;  // extension
    return ob.val[static_cast<std::size_t>(j) * ncx + i];
  };
  // w = grad^perp h0e on links (staggered differences; curl_cell(w) equals
  // the 5-point Laplacian exactly)
  auto w1 = [&](int i, int j) { return -(cell(i, j) - cell(i, j - 1)) / h; };  // x-link (i,j)
  auto w2 = [&](int i, int j) { return (cell(i, j) - cell(i - 1, j)) / h; };   // y-link (i,j)

  // A1 state
  GLState s1 = s;
  s1.h_ex = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (i + 1 < g.nx) s1.a1[g.idx(i, j)] -= w1(i, j);
      if (j + 1 < g.ny) s1.a2[g.idx(i, j)] -= w2(i, j);
    }

  // all quadratic forms in the identity use the plain all-links/all-nodes
  // quadrature so the algebraic cancellations are exact
  double lhs = energy_with_field(s, s.h_ex, false);

  // G0 = (1/2) L0 int mu + E_dir + (1/2) int (h0e - hex)^2
  double int_mu = 0.0, field_h0 = 0.0;
  std::vector<double> mu_cell(static_cast<std::size_t>(ncx) * ncy, 0.0);
  for (int j = 0; j < ncy; ++j)
    for (int i = 0; i < ncx; ++i) {
      double lap = (cell(i + 1, j) + cell(i - 1, j) + cell(i, j + 1) + cell(i, j - 1) -
                    4.0 * cell(i, j)) / (h * h);
      double mu = -lap + cell(i, j);
      mu_cell[static_cast<std::size_t>(j) * ncx + i] = mu;
      bool ring = (i == 0 || j == 0 || i == ncx - 1 || j == ncy - 1);
      if (!ring) int_mu += mu * h * h;
      double dev = cell(i, j) - s.h_ex;
      field_h0 += dev * dev * h * h;
    }
  double e_dir = 0.0, term3 = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      double wl = w1(i, j);
      double c = 2.0 - 2.0 * std::cos(h * wl);
      e_dir += c;
      cplx X = std::conj(s.u[g.idx(i, j)]) * s.u[g.idx(i + 1, j)] *
               std::polar(1.0, -h * s1.a1[g.idx(i, j)]);
      term3 -= (1.0 - X.real()) * c;
    }
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double wl = w2(i, j);
      double c = 2.0 - 2.0 * std::cos(h * wl);
      e_dir += c;
      cplx X = std::conj(s.u[g.idx(i, j)]) * s.u[g.idx(i, j + 1)] *
               std::polar(1.0, -h * s1.a2[g.idx(i, j)]);
      term3 -= (1.0 - X.real()) * c;
    }
  e_dir *= 0.5;
  term3 *= 0.5;
  double g0 = 0.5 * L0 * int_mu + e_dir + 0.5 * field_h0;

  // G1(u, A1): kinetic + |curl A1 - mu|^2 + potential + int (h0e - hex) mu(u, A1)
  double kinetic1 = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      cplx d = s.u[g.idx(i + 1, j)] * std::polar(1.0, -h * s1.a1[g.idx(i, j)]) - s.u[g.idx(i, j)];
      kinetic1 += std::norm(d);
    }
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      cplx d = s.u[g.idx(i, j + 1)] * std::polar(1.0, -h * s1.a2[g.idx(i, j)]) - s.u[g.idx(i, j)];
      kinetic1 += std::norm(d);
    }
  double field1 = 0.0, cross = 0.0;
  GridField mu_ua1 = vorticity(s1);
  for (int j = 0; j < ncy; ++j)
    for (int i = 0; i < ncx; ++i) {
      std::size_t cidx = static_cast<std::size_t>(j) * ncx + i;
      double circ = h * (s1.a1[g.idx(i, j)] + s1.a2[g.idx(i + 1, j)] - s1.a1[g.idx(i, j + 1)] -
                         s1.a2[g.idx(i, j)]);
      double b1 = circ / (h * h);
      double dev = b1 - mu_cell[cidx];
      field1 += dev * dev * h * h;
      cross += (cell(i, j) - s.h_ex) * mu_ua1.v[cidx] * h * h;
    }
  double potential = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double m = 1.0 - std::norm(s.u[g.idx(i, j)]);
      potential += m * m / (2.0 * s.eps * s.eps) * h * h;
    }
  double g1 = 0.5 * (kinetic1 + field1 + potential) + cross;

  SplittingReport rep;
  rep.lhs = lhs;
  rep.g0 = g0;
  rep.g1 = g1;
  rep.correction = term3;
  rep.residual = lhs - (g0 + g1 + term3);
  rep.relative = std::fabs(rep.residual) /
                 std::max(1e-300, std::fabs(lhs) + std::fabs(g0) + std::fabs(g1));
  return rep;
}

GLState gl_splitting_reference_state(const GLGrid& grid, double eps, double h_ex) {
  GLState s = GLState::uniform(grid, cplx(1.0, 0.0), eps, h_ex);
  double L0 = std::log(1.0 / (eps * std::sqrt(h_ex)));
  CellObstacle ob = solve_cell_obstacle(grid, h_ex - 0.5 * L0, h_ex);
  int ncx = ob.ncx, ncy = ob.ncy;
  double h = grid.h;
  auto cell = [&](int i, int j) -> double {
    if (i < 0 || j < 0 || i >= ncx || j >= ncy) return h_ex;
    return ob.val[static_cast<std::size_t>(j) * ncx + i];
  };
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      if (i + 1 < grid.nx) s.a1[grid.idx(i, j)] = -(cell(i, j) - cell(i, j - 1)) / h;
      if (j + 1 < grid.ny) s.a2[grid.idx(i, j)] = (cell(i, j) - cell(i - 1, j)) / h;
    }
  return s;
}

GLState synthetic_vortex_state(const GLGrid& grid, const std::vector<Vec>& centers,
                               const std::vector<int>& degrees, double eps) {
  if (centers.size() != degrees.size())
    throw domain_error("synthetic_vortex_state: centers/degrees size mismatch");
  GLState s = GLState::uniform(grid, cplx(1.0, 0.0), eps);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      Vec x = grid.node(i, j);
      cplx val(1.0, 0.0);
      for (std::size_t k = 0; k < centers.size(); ++k) {
        Vec rel = x - centers[k];
        double r = rel.norm();
        cplx phase = r == 0.0 ? cplx(0.0, 0.0) : cplx(rel[0] / r, rel[1] / r);
        int d = degrees[k];
        cplx factor = d >= 0 ? phase : std::conj(phase);
        cplx pw(1.0, 0.0);
        for (int p = 0; p < std::abs(d); ++p) pw *= factor;
        val *= pw * std::tanh(r / eps);
      }
      s.u[grid.idx(i, j)] = val;
    }
  return s;
}

GLState gl_gradient_flow(GLState s, int max_steps) {
  const GLGrid& g = s.grid;
  double h = g.h;
  double dt = 0.1 * s.eps * s.eps;
  double ratio = dt / (h * h);
  double prev_e = gl_energy(s);
  std::vector<cplx> rhs(g.nodes());
  for (int step = 0; step < max_steps; ++step) {
    for (int j = 1; j + 1 < g.ny; ++j)
      for (int i = 1; i + 1 < g.nx; ++i) {
        std::size_t idx = g.idx(i, j);
        double m = 1.0 - std::norm(s.u[idx]);
        rhs[idx] = s.u[idx] + dt * s.u[idx] * m / (s.eps * s.eps);
      }
    // a few SOR sweeps on (I - dt Lap_A) u = rhs
    for (int sweep = 0; sweep < 12; ++sweep) {
      for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
          std::size_t idx = g.idx(i, j);
          cplx nb = s.u[g.idx(i + 1, j)] * std::polar(1.0, -h * s.a1[idx]) +
                    s.u[g.idx(i - 1, j)] * std::polar(1.0, h * s.a1[g.idx(i - 1, j)]) +
                    s.u[g.idx(i, j + 1)] * std::polar(1.0, -h * s.a2[idx]) +
                    s.u[g.idx(i, j - 1)] * std::polar(1.0, h * s.a2[g.idx(i, j - 1)]);
          cplx gs = (rhs[idx] + ratio * nb) / (1.0 + 4.0 * ratio);
          s.u[idx] += 1.5 * (gs - s.u[idx]);
        }
    }
    if (step % 20 == 19) {
      double e = gl_energy(s);
      if (std::fabs(e - prev_e) < 1e-8 * std::max(1.0, std::fabs(e))) break;
      prev_e = e;
    }
  }
  return s;
}

}  // namespace coulomb
