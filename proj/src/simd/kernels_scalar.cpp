#include <cmath>

#include "coulomb/simd.hpp"

// Reference kernels. Log sums run on a running product with periodic
// exponent renormalization: one log call per 8 pairs instead of one per
// pair, and the AVX2 path mirrors the same algorithm lane-wise.
namespace coulomb::simd::scalar {
namespace {

constexpr double kLn2 = 0.6931471805599453094172321;

struct LogAccum {
  double prod = 1.0;
  long ex = 0;
  int pending = 0;

  inline void mul(double v) {
    prod *= v;
    if (++pending == 8) renorm();
  }
  inline void renorm() {
    int e;
    prod = std::frexp(prod, &e);
    ex += e;
    pending = 0;
  }
  inline double log_value() const { return std::log(prod) + static_cast<double>(ex) * kLn2; }
};

double sum_log_r2_2d(const double* xs, const double* ys, std::size_t n, double qx, double qy) {
  LogAccum acc;
  for (std::size_t j = 0; j < n; ++j) {
    double dx = xs[j] - qx, dy = ys[j] - qy;
    acc.mul(dx * dx + dy * dy);
  }
  return acc.log_value();
}

double sum_log_r2_1d(const double* xs, std::size_t n, double q) {
  LogAccum acc;
  for (std::size_t j = 0; j < n; ++j) {
    double dx = xs[j] - q;
    acc.mul(dx * dx);
  }
  return acc.log_value();
}

double sum_inv_r_3d(const double* xs, const double* ys, const double* zs, std::size_t n,
                    double qx, double qy, double qz) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double dx = xs[j] - qx, dy = ys[j] - qy, dz = zs[j] - qz;
    s += 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return s;
}

double logratio_move_2d(const double* xs, const double* ys, std::size_t n, std::size_t skip,
                        double ox, double oy, double nx, double ny) {
  LogAccum num, den;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == skip) continue;
    double dxn = xs[j] - nx, dyn = ys[j] - ny;
    double dxo = xs[j] - ox, dyo = ys[j] - oy;
    num.mul(dxn * dxn + dyn * dyn);
    den.mul(dxo * dxo + dyo * dyo);
  }
  return num.log_value() - den.log_value();
}

double logratio_move_1d(const double* xs, std::size_t n, std::size_t skip, double o, double nw) {
  LogAccum num, den;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == skip) continue;
    double dn = xs[j] - nw, dd = xs[j] - o;
    num.mul(dn * dn);
    den.mul(dd * dd);
  }
  return num.log_value() - den.log_value();
}

double sum_w_glog_eta_2d(const double* xs, const double* ys, const double* ws, std::size_t n,
                         double qx, double qy, double eta) {
  double e2 = eta * eta;
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double dx = xs[j] - qx, dy = ys[j] - qy;
    double r2 = dx * dx + dy * dy;
    s += ws[j] * std::log(r2 > e2 ? r2 : e2);
  }
  return -0.5 * s;
}

double sum_w_ginv_eta_3d(const double* xs, const double* ys, const double* zs, const double* ws,
                         std::size_t n, double qx, double qy, double qz, double eta) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double dx = xs[j] - qx, dy = ys[j] - qy, dz = zs[j] - qz;
    double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    s += ws[j] / (r > eta ? r : eta);
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += a[j] * b[j];
    s1 += a[j + 1] * b[j + 1];
    s2 += a[j + 2] * b[j + 2];
    s3 += a[j + 3] * b[j + 3];
  }
  for (; j < n; ++j) s0 += a[j] * b[j];
  return (s0 + s1) + (s2 + s3);
}

double max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double v = std::fabs(a[j]);
    if (v > m) m = v;
  }
  return m;
}

}  // namespace

const Kernels table = {sum_log_r2_2d, sum_log_r2_1d,    sum_inv_r_3d,      logratio_move_2d,
                       logratio_move_1d, sum_w_glog_eta_2d, sum_w_ginv_eta_3d, dot,
                       max_abs};

}  // namespace coulomb::simd::scalar
