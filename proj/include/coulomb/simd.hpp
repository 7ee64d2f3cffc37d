#pragma once
#include <cstddef>
#include <cstdint>

// Data-parallel inner-loop kernels for the pairwise sums that dominate the
// runtime (Hamiltonian evaluation, Metropolis energy deltas, point-vs-grid
// quadrature). Scalar reference implementations live in kernels_scalar.cpp;
// AVX2 variants in kernels_avx2.cpp are selected at runtime and are
// equivalence-tested against the scalar path.
namespace coulomb::simd {

enum class Isa { scalar, avx2 };

Isa active_isa();
const char* isa_name(Isa isa);
// Force a path (tests); forcing avx2 on unsupported hardware throws.
void force_isa(Isa isa);
bool avx2_supported();

struct Kernels {
  // sum_j log((xs[j]-qx)^2 + (ys[j]-qy)^2)
  double (*sum_log_r2_2d)(const double* xs, const double* ys, std::size_t n, double qx, double qy);
  // sum_j log((xs[j]-q)^2)
  double (*sum_log_r2_1d)(const double* xs, std::size_t n, double q);
  // sum_j 1/|p_j - q|, 3D
  double (*sum_inv_r_3d)(const double* xs, const double* ys, const double* zs, std::size_t n,
                         double qx, double qy, double qz);
  // sum_{j != skip} [log r2(p_j, nw) - log r2(p_j, od)], 2D
  double (*logratio_move_2d)(const double* xs, const double* ys, std::size_t n, std::size_t skip,
                             double ox, double oy, double nx, double ny);
  double (*logratio_move_1d)(const double* xs, std::size_t n, std::size_t skip, double o, double nw);
  // sum_j w[j] * (-1/2) log(max(r2_j, eta^2))  -- log-kernel smeared at eta
  double (*sum_w_glog_eta_2d)(const double* xs, const double* ys, const double* ws, std::size_t n,
                              double qx, double qy, double eta);
  // sum_j w[j] / max(r_j, eta)  -- 3D kernel smeared at eta
  double (*sum_w_ginv_eta_3d)(const double* xs, const double* ys, const double* zs, const double* ws,
                              std::size_t n, double qx, double qy, double qz, double eta);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*max_abs)(const double* a, std::size_t n);
};

// Kernel table for the active path.
const Kernels& kernels();

namespace scalar {
extern const Kernels table;
}
#ifdef __x86_64__
namespace avx2 {
extern const Kernels table;  // only valid when avx2_supported()
}
#endif

}  // namespace coulomb::simd
