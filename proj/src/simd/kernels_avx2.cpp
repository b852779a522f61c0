// AVX2/FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after the runtime CPU check in
// simd_dispatch.cpp.
#include "impactlab/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace impactlab::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t t = 0;
  for (; t + 8 <= n; t += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + t), _mm256_loadu_pd(y + t), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + t + 4), _mm256_loadu_pd(y + t + 4), acc1);
  }
  for (; t + 4 <= n; t += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + t), _mm256_loadu_pd(y + t), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; t < n; ++t) acc += x[t] * y[t];
  return acc;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + t));
  double acc = hsum(acc0);
  for (; t < n; ++t) acc += x[t];
  return acc;
}

double diff_dot_avx2(const double* x, const double* y, std::size_t n, std::size_t lag) {
  if (lag >= n) return 0.0;
  const std::size_t m = n - lag;
  __m256d acc0 = _mm256_setzero_pd();
  std::size_t t = 0;
  for (; t + 4 <= m; t += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + t + lag), _mm256_loadu_pd(x + t));
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + t + lag), _mm256_loadu_pd(y + t));
    acc0 = _mm256_fmadd_pd(dx, dy, acc0);
  }
  double acc = hsum(acc0);
  for (; t < m; ++t) acc += (x[t + lag] - x[t]) * (y[t + lag] - y[t]);
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4)
    _mm256_storeu_pd(y + t, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + t), _mm256_loadu_pd(y + t)));
  for (; t < n; ++t) y[t] += a * x[t];
}

}  // namespace

const Kernels* avx2_kernels_impl() {
  static const Kernels k{"avx2", dot_avx2, sum_avx2, diff_dot_avx2, axpy_avx2};
  return &k;
}

}  // namespace impactlab::simd

#else

namespace impactlab::simd {
const Kernels* avx2_kernels_impl() { return nullptr; }
}  // namespace impactlab::simd

#endif
