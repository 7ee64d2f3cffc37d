#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "coulomb/rng.hpp"
#include "coulomb/simd.hpp"
#include "doctest.h"

using namespace coulomb;

namespace {

struct Inputs {
  std::vector<double> xs, ys, zs, ws;
  Inputs(std::size_t n, uint64_t seed) {
    CounterRng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(4.0 * rng.next_double() - 2.0);
      ys.push_back(4.0 * rng.next_double() - 2.0);
      zs.push_back(4.0 * rng.next_double() - 2.0);
      ws.push_back(rng.next_double() + 1e-3);
    }
  }
};

bool close(double a, double b, double rtol) {
  return std::fabs(a - b) <= rtol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

TEST_CASE("scalar and avx2 kernel paths agree") {
  if (!simd::avx2_supported()) {
    MESSAGE("avx2 not supported on this host; skipping equivalence checks");
    return;
  }
  const auto& sc = simd::scalar::table;
  const auto& vx = simd::avx2::table;
  for (std::size_t n : {std::size_t(1), std::size_t(3), std::size_t(4), std::size_t(7),
                        std::size_t(64), std::size_t(1000), std::size_t(1003)}) {
    Inputs in(n, 42 + n);
    double qx = 0.37, qy = -1.21, qz = 0.64;

    CHECK(close(sc.sum_log_r2_2d(in.xs.data(), in.ys.data(), n, qx, qy),
                vx.sum_log_r2_2d(in.xs.data(), in.ys.data(), n, qx, qy), 1e-12));
    CHECK(close(sc.sum_log_r2_1d(in.xs.data(), n, qx), vx.sum_log_r2_1d(in.xs.data(), n, qx),
                1e-12));
    CHECK(close(sc.sum_inv_r_3d(in.xs.data(), in.ys.data(), in.zs.data(), n, qx, qy, qz),
                vx.sum_inv_r_3d(in.xs.data(), in.ys.data(), in.zs.data(), n, qx, qy, qz), 1e-12));
    if (n >= 2) {
      std::size_t skip = n / 2;
      CHECK(close(
          sc.logratio_move_2d(in.xs.data(), in.ys.data(), n, skip, qx, qy, qx + 0.05, qy - 0.03),
          vx.logratio_move_2d(in.xs.data(), in.ys.data(), n, skip, qx, qy, qx + 0.05, qy - 0.03),
          1e-12));
      CHECK(close(sc.logratio_move_1d(in.xs.data(), n, skip, qx, qx + 0.05),
                  vx.logratio_move_1d(in.xs.data(), n, skip, qx, qx + 0.05), 1e-12));
    }
    CHECK(close(sc.sum_w_glog_eta_2d(in.xs.data(), in.ys.data(), in.ws.data(), n, qx, qy, 0.1),
                vx.sum_w_glog_eta_2d(in.xs.data(), in.ys.data(), in.ws.data(), n, qx, qy, 0.1),
                1e-12));
    CHECK(close(sc.sum_w_ginv_eta_3d(in.xs.data(), in.ys.data(), in.zs.data(), in.ws.data(), n,
                                     qx, qy, qz, 0.1),
                vx.sum_w_ginv_eta_3d(in.xs.data(), in.ys.data(), in.zs.data(), in.ws.data(), n,
                                     qx, qy, qz, 0.1),
                1e-12));
    CHECK(close(sc.dot(in.xs.data(), in.ys.data(), n), vx.dot(in.xs.data(), in.ys.data(), n),
                1e-13));
    CHECK(sc.max_abs(in.xs.data(), n) == vx.max_abs(in.xs.data(), n));
  }
}

TEST_CASE("log sums match a plain log-by-log evaluation") {
  Inputs in(257, 7);
  double qx = 0.1, qy = 0.2;
  double plain = 0.0;
  for (std::size_t j = 0; j < in.xs.size(); ++j) {
    double dx = in.xs[j] - qx, dy = in.ys[j] - qy;
    plain += std::log(dx * dx + dy * dy);
  }
  const auto& k = simd::kernels();
  CHECK(close(plain, k.sum_log_r2_2d(in.xs.data(), in.ys.data(), in.xs.size(), qx, qy), 1e-11));
}

TEST_CASE("runtime dispatch can be forced to the scalar path") {
  simd::Isa before = simd::active_isa();
  simd::force_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  Inputs in(37, 9);
  double v1 = simd::kernels().sum_log_r2_2d(in.xs.data(), in.ys.data(), 37, 0.0, 0.0);
  simd::force_isa(before);
  double v2 = simd::kernels().sum_log_r2_2d(in.xs.data(), in.ys.data(), 37, 0.0, 0.0);
  CHECK(close(v1, v2, 1e-12));
}
