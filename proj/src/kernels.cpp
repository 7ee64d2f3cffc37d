#include "coulomb/kernels.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace coulomb {
namespace {

constexpr double kPi = 3.14159265358979323846264338;

// nodes/weights of 64-point Gauss-Legendre on [-1,1], computed once by
// Newton iteration on the Legendre recurrence
struct Gauss64 {
  std::vector<double> x, w;
  Gauss64() {
    const int n = 64;
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        double dt = p1 / dp;
        t -= dt;
        if (std::fabs(dt) < 1e-15) break;
      }
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      x[i] = t;
      w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};

const Gauss64& gauss64() {
  static Gauss64 g;
  return g;
}

}  // namespace

double sphere_area(int d) {
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

KernelSpec KernelSpec::make(int d) {
  if (d < 1) throw domain_error("KernelSpec: dimension must be >= 1, got " + std::to_string(d));
  KernelSpec s;
  s.dim = d;
  s.log_kernel = (d <= 2);
  s.embedded_1d = (d == 1);
  if (d == 1)
    s.c_d = kPi;
  else if (d == 2)
    s.c_d = 2.0 * kPi;
  else
    s.c_d = (d - 2) * sphere_area(d);
  return s;
}

double kernel_value(double r, const KernelSpec& spec) {
  if (r < 0.0) throw domain_error("kernel_value: negative radius");
  if (r == 0.0) throw singularity_error("kernel_value: r = 0");
  return spec.log_kernel ? -std::log(r) : std::pow(r, 2.0 - spec.dim);
}

double truncated_kernel(double r, double eta, const KernelSpec& spec) {
  if (eta <= 0.0) throw domain_error("truncated_kernel: eta must be positive");
  if (r < 0.0) throw domain_error("truncated_kernel: negative radius");
  if (r >= eta) return 0.0;
  if (r == 0.0) {
    if (spec.log_kernel) throw singularity_error("truncated_kernel: r = 0 with log kernel");
    return std::numeric_limits<double>::infinity();
  }
  return kernel_value(r, spec) - kernel_value(eta, spec);
}

double smeared_point_kernel(double r, double eta, const KernelSpec& spec) {
  if (eta <= 0.0) throw domain_error("smeared_point_kernel: eta must be positive");
  return kernel_value(r < eta ? eta : r, spec);
}

double smeared_pair_interaction(const Vec& p, const Vec& q, double eta, const KernelSpec& spec) {
  if (spec.dim < 2 && !spec.embedded_1d)
    throw domain_error("smeared_pair_interaction: requires d >= 2 or the embedded 1d case");
  if (eta <= 0.0) throw domain_error("smeared_pair_interaction: eta must be positive");
  int d = spec.embedded_1d ? 2 : spec.dim;
  double s = (p - q).norm();
  if (s == 0.0) return kernel_value(eta, spec);
  if (s >= 2.0 * eta) return kernel_value(s, spec);

  // Newton's theorem collapses one sphere, leaving the average of
  // g(max(|y - p|, eta)) over the other. By axial symmetry this is a single
  // polar integral with weight sin^(d-2); 64-point Gauss-Legendre.
  const Gauss64& G = gauss64();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 64; ++i) {
    double phi = 0.5 * kPi * (G.x[i] + 1.0);  // [0, pi]
    double wphi = 0.5 * kPi * G.w[i];
    double sinp = std::sin(phi), cosp = std::cos(phi);
    double weight = wphi * std::pow(sinp, d - 2);
    double r = std::sqrt(s * s + eta * eta - 2.0 * s * eta * cosp);
    num += weight * kernel_value(r < eta ? eta : r, spec);
    den += weight;
  }
  return num / den;
}

}  // namespace coulomb
