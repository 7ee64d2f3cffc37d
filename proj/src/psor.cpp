#include "coulomb/detail/psor.hpp"

#include <cmath>
#include <limits>

#include "coulomb/errors.hpp"

namespace coulomb::detail {
namespace {

inline double neighbor(const PsorProblem& p, std::size_t idx, int arm, int di, int dj,
                       const std::array<double, 4>& a, const std::array<double, 4>& av) {
  if (a[arm] < 1.0) return av[arm];
  return p.val[idx + dj * static_cast<std::size_t>(p.nx) + di];
}

}  // namespace

PsorResult psor_solve(PsorProblem& p, double omega, double tol, int max_sweeps) {
  const double inv_h2 = 1.0 / (p.h * p.h);
  const bool has_arms = !p.arms.empty();
  const std::array<double, 4> unit{1.0, 1.0, 1.0, 1.0};
  const std::array<double, 4> zero{0.0, 0.0, 0.0, 0.0};

  double prev_res = std::numeric_limits<double>::infinity();
  int rising = 0;
  PsorResult out;

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int j = 0; j < p.ny; ++j)
      for (int i = 0; i < p.nx; ++i) {
        std::size_t idx = static_cast<std::size_t>(j) * p.nx + i;
        if (p.kind[idx] != 1) continue;
        const auto& a = has_arms ? p.arms[idx] : unit;
        const auto& av = has_arms ? p.arm_values[idx] : zero;
        double hw = neighbor(p, idx, 0, -1, 0, a, av);
        double he = neighbor(p, idx, 1, +1, 0, a, av);
        double hs = neighbor(p, idx, 2, 0, -1, a, av);
        double hn = neighbor(p, idx, 3, 0, +1, a, av);
        double cw = 2.0 / (a[0] * (a[0] + a[1])), ce = 2.0 / (a[1] * (a[0] + a[1]));
        double cs = 2.0 / (a[2] * (a[2] + a[3])), cn = 2.0 / (a[3] * (a[2] + a[3]));
        double diag = (cw + ce + cs + cn) * inv_h2 + (p.screened ? 1.0 : 0.0);
        double off = (cw * hw + ce * he + cs * hs + cn * hn) * inv_h2;
        double gs = (off + p.rhs[idx]) / diag;
        double relaxed = p.val[idx] + omega * (gs - p.val[idx]);
        p.val[idx] = relaxed > p.psi[idx] ? relaxed : p.psi[idx];
      }

    // complementarity residual: max |min(h - psi, -L h - f)|
    if (sweep % 4 == 0 || sweep == max_sweeps) {
      double res = 0.0;
      for (int j = 0; j < p.ny; ++j)
        for (int i = 0; i < p.nx; ++i) {
          std::size_t idx = static_cast<std::size_t>(j) * p.nx + i;
          if (p.kind[idx] != 1) continue;
          const auto& a = has_arms ? p.arms[idx] : unit;
          const auto& av = has_arms ? p.arm_values[idx] : zero;
          double hw = neighbor(p, idx, 0, -1, 0, a, av);
          double he = neighbor(p, idx, 1, +1, 0, a, av);
          double hs = neighbor(p, idx, 2, 0, -1, a, av);
          double hn = neighbor(p, idx, 3, 0, +1, a, av);
          double cw = 2.0 / (a[0] * (a[0] + a[1])), ce = 2.0 / (a[1] * (a[0] + a[1]));
          double cs = 2.0 / (a[2] * (a[2] + a[3])), cn = 2.0 / (a[3] * (a[2] + a[3]));
          double lap = (cw * hw + ce * he + cs * hs + cn * hn -
                        (cw + ce + cs + cn) * p.val[idx]) * inv_h2;
          double op = -lap + (p.screened ? p.val[idx] : 0.0) - p.rhs[idx];
          double slack = p.val[idx] - p.psi[idx];
          double m = slack < op ? slack : op;
          double am = std::fabs(m);
          if (am > res) res = am;
        }
      out.sweeps = sweep;
      out.residual = res;
      if (res <= tol) return out;
      if (res > prev_res * (1.0 + 1e-12)) {
        if (++rising >= 100)
          throw solver_error("psor: residual increased for 100 consecutive checks");
      } else {
        rising = 0;
      }
      prev_res = res;
    }
  }
  throw iteration_error("psor: no convergence within max sweeps", out.residual);
}

}  // namespace coulomb::detail
