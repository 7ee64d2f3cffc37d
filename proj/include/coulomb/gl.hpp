#pragma once
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "coulomb/grid.hpp"
#include "coulomb/vec.hpp"

namespace coulomb {

// Node grid for Ginzburg-Landau states. u lives on nodes; the gauge field
// lives on links (a1 on the x-link leaving node (i,j), a2 on the y-link), so
// discrete gauge transformations are exact.
struct GLGrid {
  int nx = 0, ny = 0;
  double h = 1.0;
  double lox = 0.0, loy = 0.0;

  static GLGrid square(double half_width, int nodes_per_axis);
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  Vec node(int i, int j) const { return {lox + i * h, loy + j * h, 0.0}; }
  std::size_t nodes() const { return static_cast<std::size_t>(nx) * ny; }
  double domain_area() const { return (nx - 1.0) * (ny - 1.0) * h * h; }
};

struct GLState {
  GLGrid grid;
  std::vector<std::complex<double>> u;  // nodes
  std::vector<double> a1, a2;           // link fields (A . direction at the link)
  double eps = 0.1;
  double h_ex = 0.0;

  static GLState uniform(const GLGrid& grid, std::complex<double> value, double eps,
                         double h_ex = 0.0);
};

// energy, vorticity, degrees -------------------------------------------------

double gl_energy(const GLState& s);
// free energy with h_ex = 0 (the F_eps of the ball-construction bounds)
double gl_free_energy(const GLState& s);

// vorticity mu(u, A) = curl<iu, grad_A u> + curl A on plaquette centers
GridField vorticity(const GLState& s);

// exact discrete gauge transform: u -> u e^{i phi}, links shifted by the
// discrete gradient of phi
void gauge_transform(GLState& s, const std::vector<double>& phi_nodes);

int degree_on_circle(const GLState& s, const Vec& center, double r);

// ball construction -----------------------------------------------------------

struct Ball {
  Vec center;
  double r = 0.0;
  int degree = 0;
  double bound = 0.0;   // accumulated pi |d| log growth
  bool escaped = false;  // left the domain; degree forced to 0
};

struct MergeEvent {
  double s = 1.0;
  int kept = 0, absorbed = 0;
};

struct BallSet {
  std::vector<Ball> balls;
  double s_reached = 1.0;
  double initial_total_radius = 0.0;
  std::vector<MergeEvent> merge_log;

  double total_radius() const;
  double total_bound() const;
  int total_abs_degree() const;
};

// initial balls covering the bad set {||u| - 1| >= eps^(1/4)} by bounding
// disks of connected components, inflated by one cell
BallSet initial_balls_from_state(const GLState& s);

// grow radii by a common factor, merging tangent balls, until the conformal
// factor reaches s_target; balls crossing the domain boundary are flagged
// and their degree set to zero
BallSet ball_construction(const BallSet& initial, double s_target, const GLGrid& domain);

// (accumulated lower bound, measured free energy inside the balls)
struct BallBoundReport {
  double bound = 0.0;
  double energy = 0.0;
  double reported_C = 0.0;  // C with bound = pi D (log(r/(D eps)) - C)
};
BallBoundReport ball_lower_bound_vs_energy(const GLState& s, const BallSet& balls);

// dual-Lipschitz distance of mu(u,A) to 2 pi sum d_i delta_{a_i}, divided by
// max(eps, sum r_i) (1 + F_eps)
double jacobian_estimate_check(const GLState& s, const BallSet& balls);

// London / obstacle solvers ---------------------------------------------------

struct Domain {
  enum class Shape { rectangle, disk };
  Shape shape = Shape::rectangle;
  GLGrid grid;
  Vec center;
  double radius = 0.0;

  static Domain rectangle(double half_width, int nodes_per_axis);
  static Domain disk(double radius, int nodes_per_axis, double pad = 0.15);
  bool contains(const Vec& x) const;
};

// -Delta h + h = mu in Omega, h = h_ex on the boundary (Shortley-Weller arms
// on disks); mu sampled at nodes
GridField london_solve(const GridField& mu, double h_ex, const Domain& domain);

struct ObstacleResult {
  GridField h;
  std::vector<uint8_t> coincidence;  // omega_lambda mask (nodes)
  GridField mu;                      // (1 - 1/(2 lambda)) on omega
  double mu_level = 0.0;
};
ObstacleResult gl_obstacle(double lambda, const Domain& domain);

struct CriticalFieldResult {
  double lambda_omega = 0.0;
  Vec argmax;
  GridField h0;
};
CriticalFieldResult first_critical_lambda(const Domain& domain);

// splitting identity ----------------------------------------------------------

struct SplittingReport {
  double lhs = 0.0;       // G_eps(u, A)
  double g0 = 0.0;
  double g1 = 0.0;
  double correction = 0.0;  // -(1/2) int (1 - |u|^2) |grad h_{0,eps}|^2
  double residual = 0.0;
  double relative = 0.0;
};
SplittingReport gl_splitting_check(const GLState& s);

// state factories --------------------------------------------------------------

// u = 1 with A = grad^perp h_{0,eps} on links (the state at which the
// splitting identity reduces to pure algebra)
GLState gl_splitting_reference_state(const GLGrid& grid, double eps, double h_ex);

// product of degree-d_k vortices at the given centers with tanh core
// profiles of width eps; A = 0
GLState synthetic_vortex_state(const GLGrid& grid, const std::vector<Vec>& centers,
                               const std::vector<int>& degrees, double eps);

// semi-implicit gradient flow at fixed boundary values, time step 0.1 eps^2,
// stopping at relative energy change < 1e-8 (convenience factory)
GLState gl_gradient_flow(GLState initial, int max_steps = 20000);

}  // namespace coulomb
