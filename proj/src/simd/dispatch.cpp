#include "coulomb/simd.hpp"

#include "coulomb/errors.hpp"

namespace coulomb::simd {
namespace {

bool detect_avx2() {
#if defined(COULOMB_HAVE_AVX2) && defined(__x86_64__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa g_isa = detect_avx2() ? Isa::avx2 : Isa::scalar;

}  // namespace

bool avx2_supported() { return detect_avx2(); }

Isa active_isa() { return g_isa; }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !detect_avx2())
    throw domain_error("force_isa: avx2 not supported on this host");
  g_isa = isa;
}

const Kernels& kernels() {
#if defined(COULOMB_HAVE_AVX2) && defined(__x86_64__)
  if (g_isa == Isa::avx2) return avx2::table;
#endif
  return scalar::table;
}

}  // namespace coulomb::simd
