#pragma once

#include <cstddef>

namespace impactlab::simd {

// Function table for the low-level array kernels used by the estimator and
// propagator inner loops. A scalar reference implementation is always built;
// an AVX2/FMA variant is compiled in its own translation unit and selected at
// runtime when the CPU supports it. The two variants are equivalence-tested;
// they are not bit-identical because the vector paths reorder reductions and
// use fused multiply-add.
struct Kernels {
  const char* name;

  // sum_{t<n} x[t]*y[t]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_{t<n} x[t]
  double (*sum)(const double* x, std::size_t n);
  // sum_{t<n-lag} (x[t+lag]-x[t]) * (y[t+lag]-y[t]); 0 when lag >= n
  double (*diff_dot)(const double* x, const double* y, std::size_t n, std::size_t lag);
  // y[t] += a * x[t]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

const Kernels& scalar_kernels();
// nullptr when this CPU lacks AVX2/FMA.
const Kernels* avx2_kernels();
// AVX2 when available; IMPACTLAB_SIMD=scalar|avx2 overrides.
const Kernels& active_kernels();

inline double dot(const double* x, const double* y, std::size_t n) {
  return active_kernels().dot(x, y, n);
}
inline double sum(const double* x, std::size_t n) { return active_kernels().sum(x, n); }
inline double diff_dot(const double* x, const double* y, std::size_t n, std::size_t lag) {
  return active_kernels().diff_dot(x, y, n, lag);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active_kernels().axpy(a, x, y, n);
}

}  // namespace impactlab::simd
