#include "impactlab/simd.hpp"

namespace impactlab::simd {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) acc += x[t] * y[t];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) acc += x[t];
  return acc;
}

double diff_dot_scalar(const double* x, const double* y, std::size_t n, std::size_t lag) {
  if (lag >= n) return 0.0;
  double acc = 0.0;
  for (std::size_t t = 0; t < n - lag; ++t) acc += (x[t + lag] - x[t]) * (y[t + lag] - y[t]);
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t t = 0; t < n; ++t) y[t] += a * x[t];
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", dot_scalar, sum_scalar, diff_dot_scalar, axpy_scalar};
  return k;
}

}  // namespace impactlab::simd
