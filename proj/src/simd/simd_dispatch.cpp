#include <cstdlib>
#include <cstring>

#include "impactlab/simd.hpp"

namespace impactlab::simd {

// Defined in kernels_avx2.cpp; returns nullptr when that TU was built
// without AVX2 support.
const Kernels* avx2_kernels_impl();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels* resolve() {
  const Kernels* avx2 = cpu_has_avx2() ? avx2_kernels_impl() : nullptr;
  if (const char* env = std::getenv("IMPACTLAB_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    if (std::strcmp(env, "avx2") == 0 && avx2) return avx2;
  }
  return avx2 ? avx2 : &scalar_kernels();
}

}  // namespace

const Kernels* avx2_kernels() { return cpu_has_avx2() ? avx2_kernels_impl() : nullptr; }

const Kernels& active_kernels() {
  static const Kernels* chosen = resolve();
  return *chosen;
}

}  // namespace impactlab::simd
