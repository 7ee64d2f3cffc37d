#include <immintrin.h>

#include <cmath>

#include "coulomb/simd.hpp"

// AVX2 variants of the pairwise kernels. Same algorithms as the scalar
// reference (running products with exponent renormalization, one log per
// batch), four lanes wide. Lane partial results are combined in a fixed
// order so the output is independent of everything except the ISA choice.
namespace coulomb::simd::avx2 {
namespace {

constexpr double kLn2 = 0.6931471805599453094172321;

inline double hsum_ordered(__m256d v) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

// signed int64 lanes with |v| < 2^51 to double
inline __m256d i64_to_pd(__m256i v) {
  const __m256i magic = _mm256_set1_epi64x(0x4338000000000000LL);
  __m256i x = _mm256_add_epi64(v, magic);
  return _mm256_sub_pd(_mm256_castsi256_pd(x), _mm256_set1_pd(6755399441055744.0));
}

// log of positive normal doubles; reduction to [sqrt(1/2), sqrt(2)) plus
// an odd atanh-style polynomial
inline __m256d vlog_pd(__m256d x) {
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i exp_bias = _mm256_set1_epi64x(1023LL << 52);
  __m256i bits = _mm256_castpd_si256(x);
  __m256i e_raw = _mm256_srli_epi64(bits, 52);
  __m256i e = _mm256_sub_epi64(e_raw, _mm256_set1_epi64x(1023));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), exp_bias));
  // if m > sqrt(2): m /= 2, e += 1
  __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_sub_epi64(e, _mm256_castpd_si256(_mm256_and_pd(big, _mm256_castsi256_pd(_mm256_set1_epi64x(-1)))));
  __m256d one = _mm256_set1_pd(1.0);
  __m256d t = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  __m256d t2 = _mm256_mul_pd(t, t);
  __m256d p = _mm256_set1_pd(2.0 / 17.0);
  p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 15.0));
  p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 13.0));
  p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 11.0));
  p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 9.0));
  p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 7.0));
  p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 5.0));
  p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0 / 3.0));
  p = _mm256_fmadd_pd(p, t2, _mm256_set1_pd(2.0));
  return _mm256_fmadd_pd(i64_to_pd(e), _mm256_set1_pd(kLn2), _mm256_mul_pd(t, p));
}

struct VLogAccum {
  __m256d prod = _mm256_set1_pd(1.0);
  __m256i ex = _mm256_setzero_si256();
  int pending = 0;

  inline void mul(__m256d v) {
    prod = _mm256_mul_pd(prod, v);
    if (++pending == 8) renorm();
  }
  inline void renorm() {
    const __m256i exp_field = _mm256_set1_epi64x(0x7FFLL);
    const __m256i keep = _mm256_set1_epi64x(static_cast<long long>(0x800FFFFFFFFFFFFFULL));
    const __m256i bias = _mm256_set1_epi64x(1023LL << 52);
    __m256i bits = _mm256_castpd_si256(prod);
    __m256i e = _mm256_and_si256(_mm256_srli_epi64(bits, 52), exp_field);
    ex = _mm256_add_epi64(ex, _mm256_sub_epi64(e, _mm256_set1_epi64x(1023)));
    prod = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, keep), bias));
    pending = 0;
  }
  inline double log_value() {
    alignas(32) double p[4];
    alignas(32) long long e[4];
    _mm256_store_pd(p, prod);
    _mm256_store_si256(reinterpret_cast<__m256i*>(e), ex);
    double s = 0.0;
    for (int l = 0; l < 4; ++l) s += std::log(p[l]) + static_cast<double>(e[l]) * kLn2;
    return s;
  }
};

struct ScalarLogAccum {
  double prod = 1.0;
  long ex = 0;
  int pending = 0;
  inline void mul(double v) {
    prod *= v;
    if (++pending == 8) {
      int e;
      prod = std::frexp(prod, &e);
      ex += e;
      pending = 0;
    }
  }
  inline double log_value() const { return std::log(prod) + static_cast<double>(ex) * kLn2; }
};

double sum_log_r2_2d(const double* xs, const double* ys, std::size_t n, double qx, double qy) {
  VLogAccum vacc;
  __m256d vqx = _mm256_set1_pd(qx), vqy = _mm256_set1_pd(qy);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + j), vqx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + j), vqy);
    vacc.mul(_mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy)));
  }
  ScalarLogAccum tail;
  for (; j < n; ++j) {
    double dx = xs[j] - qx, dy = ys[j] - qy;
    tail.mul(dx * dx + dy * dy);
  }
  return vacc.log_value() + tail.log_value();
}

double sum_log_r2_1d(const double* xs, std::size_t n, double q) {
  VLogAccum vacc;
  __m256d vq = _mm256_set1_pd(q);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + j), vq);
    vacc.mul(_mm256_mul_pd(dx, dx));
  }
  ScalarLogAccum tail;
  for (; j < n; ++j) {
    double dx = xs[j] - q;
    tail.mul(dx * dx);
  }
  return vacc.log_value() + tail.log_value();
}

double sum_inv_r_3d(const double* xs, const double* ys, const double* zs, std::size_t n,
                    double qx, double qy, double qz) {
  __m256d acc = _mm256_setzero_pd();
  __m256d vqx = _mm256_set1_pd(qx), vqy = _mm256_set1_pd(qy), vqz = _mm256_set1_pd(qz);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + j), vqx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + j), vqy);
    __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + j), vqz);
    __m256d r2 = _mm256_fmadd_pd(dx, dx, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dz, dz)));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_sqrt_pd(r2)));
  }
  double s = hsum_ordered(acc);
  for (; j < n; ++j) {
    double dx = xs[j] - qx, dy = ys[j] - qy, dz = zs[j] - qz;
    s += 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return s;
}

void logratio_range_2d(const double* xs, const double* ys, std::size_t lo, std::size_t hi,
                       double ox, double oy, double nx, double ny, VLogAccum& num, VLogAccum& den,
                       ScalarLogAccum& snum, ScalarLogAccum& sden) {
  __m256d vox = _mm256_set1_pd(ox), voy = _mm256_set1_pd(oy);
  __m256d vnx = _mm256_set1_pd(nx), vny = _mm256_set1_pd(ny);
  std::size_t j = lo;
  for (; j + 4 <= hi; j += 4) {
    __m256d x = _mm256_loadu_pd(xs + j), y = _mm256_loadu_pd(ys + j);
    __m256d dxn = _mm256_sub_pd(x, vnx), dyn = _mm256_sub_pd(y, vny);
    __m256d dxo = _mm256_sub_pd(x, vox), dyo = _mm256_sub_pd(y, voy);
    num.mul(_mm256_fmadd_pd(dxn, dxn, _mm256_mul_pd(dyn, dyn)));
    den.mul(_mm256_fmadd_pd(dxo, dxo, _mm256_mul_pd(dyo, dyo)));
  }
  for (; j < hi; ++j) {
    double dxn = xs[j] - nx, dyn = ys[j] - ny;
    double dxo = xs[j] - ox, dyo = ys[j] - oy;
    snum.mul(dxn * dxn + dyn * dyn);
    sden.mul(dxo * dxo + dyo * dyo);
  }
}

double logratio_move_2d(const double* xs, const double* ys, std::size_t n, std::size_t skip,
                        double ox, double oy, double nx, double ny) {
  VLogAccum num, den;
  ScalarLogAccum snum, sden;
  logratio_range_2d(xs, ys, 0, skip, ox, oy, nx, ny, num, den, snum, sden);
  if (skip + 1 < n) logratio_range_2d(xs, ys, skip + 1, n, ox, oy, nx, ny, num, den, snum, sden);
  return (num.log_value() + snum.log_value()) - (den.log_value() + sden.log_value());
}

double logratio_move_1d(const double* xs, std::size_t n, std::size_t skip, double o, double nw) {
  VLogAccum num, den;
  ScalarLogAccum snum, sden;
  __m256d vo = _mm256_set1_pd(o), vn = _mm256_set1_pd(nw);
  auto range = [&](std::size_t lo, std::size_t hi) {
    std::size_t j = lo;
    for (; j + 4 <= hi; j += 4) {
      __m256d x = _mm256_loadu_pd(xs + j);
      __m256d dn = _mm256_sub_pd(x, vn), dd = _mm256_sub_pd(x, vo);
      num.mul(_mm256_mul_pd(dn, dn));
      den.mul(_mm256_mul_pd(dd, dd));
    }
    for (; j < hi; ++j) {
      double dn = xs[j] - nw, dd = xs[j] - o;
      snum.mul(dn * dn);
      sden.mul(dd * dd);
    }
  };
  range(0, skip);
  if (skip + 1 < n) range(skip + 1, n);
  return (num.log_value() + snum.log_value()) - (den.log_value() + sden.log_value());
}

double sum_w_glog_eta_2d(const double* xs, const double* ys, const double* ws, std::size_t n,
                         double qx, double qy, double eta) {
  __m256d acc = _mm256_setzero_pd();
  __m256d vqx = _mm256_set1_pd(qx), vqy = _mm256_set1_pd(qy);
  __m256d ve2 = _mm256_set1_pd(eta * eta);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + j), vqx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + j), vqy);
    __m256d r2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    __m256d m = _mm256_max_pd(r2, ve2);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(ws + j), vlog_pd(m), acc);
  }
  double s = hsum_ordered(acc);
  double e2 = eta * eta;
  for (; j < n; ++j) {
    double dx = xs[j] - qx, dy = ys[j] - qy;
    double r2 = dx * dx + dy * dy;
    s += ws[j] * std::log(r2 > e2 ? r2 : e2);
  }
  return -0.5 * s;
}

double sum_w_ginv_eta_3d(const double* xs, const double* ys, const double* zs, const double* ws,
                         std::size_t n, double qx, double qy, double qz, double eta) {
  __m256d acc = _mm256_setzero_pd();
  __m256d vqx = _mm256_set1_pd(qx), vqy = _mm256_set1_pd(qy), vqz = _mm256_set1_pd(qz);
  __m256d veta = _mm256_set1_pd(eta);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + j), vqx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + j), vqy);
    __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + j), vqz);
    __m256d r = _mm256_sqrt_pd(_mm256_fmadd_pd(dx, dx, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dz, dz))));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(ws + j), _mm256_max_pd(r, veta)));
  }
  double s = hsum_ordered(acc);
  for (; j < n; ++j) {
    double dx = xs[j] - qx, dy = ys[j] - qy, dz = zs[j] - qz;
    double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    s += ws[j] / (r > eta ? r : eta);
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double s0 = lane[0], s1 = lane[1], s2 = lane[2], s3 = lane[3];
  for (; j < n; ++j) s0 += a[j] * b[j];
  return (s0 + s1) + (s2 + s3);
}

double max_abs(const double* a, std::size_t n) {
  const __m256d sign_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
  __m256d m = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) m = _mm256_max_pd(m, _mm256_and_pd(_mm256_loadu_pd(a + j), sign_mask));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, m);
  double r = std::max(std::max(lane[0], lane[1]), std::max(lane[2], lane[3]));
  for (; j < n; ++j) r = std::max(r, std::fabs(a[j]));
  return r;
}

}  // namespace

const Kernels table = {sum_log_r2_2d, sum_log_r2_1d,    sum_inv_r_3d,      logratio_move_2d,
                       logratio_move_1d, sum_w_glog_eta_2d, sum_w_ginv_eta_3d, dot,
                       max_abs};

}  // namespace coulomb::simd::avx2
