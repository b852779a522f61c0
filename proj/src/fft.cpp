#include "impactlab/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

namespace impactlab {

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::size_t FftEngine::good_size(std::size_t min_n) {
  std::size_t n = 1;
  while (n < min_n) n <<= 1;
  return n;
}

FftEngine::FftEngine(std::size_t fft_size) : n_(fft_size) {
  if (n_ < 2) throw Error("FftEngine: size must be >= 2");
  real_buf_ = fftw_alloc_real(n_);
  auto* cbuf = fftw_alloc_complex(n_ / 2 + 1);
  cplx_buf_ = cbuf;
  std::lock_guard<std::mutex> lock(plan_mutex());
  fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_buf_, cbuf, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), cbuf, real_buf_, FFTW_ESTIMATE);
  if (!fwd_ || !inv_) throw Error("FftEngine: fftw plan creation failed");
}

FftEngine::~FftEngine() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fftw_free(real_buf_);
  fftw_free(static_cast<fftw_complex*>(cplx_buf_));
}

Spectrum FftEngine::forward(std::span<const double> x) {
  if (x.size() > n_) throw Error("FftEngine::forward: series longer than fft size");
  std::memcpy(real_buf_, x.data(), x.size() * sizeof(double));
  std::memset(real_buf_ + x.size(), 0, (n_ - x.size()) * sizeof(double));
  auto* cbuf = static_cast<fftw_complex*>(cplx_buf_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), real_buf_, cbuf);
  Spectrum s;
  s.fft_size = n_;
  s.n_series = x.size();
  s.bins.resize(n_ / 2 + 1);
  std::memcpy(reinterpret_cast<double*>(s.bins.data()), cbuf,
              s.bins.size() * sizeof(fftw_complex));
  return s;
}

void FftEngine::corr(const Spectrum& x, const Spectrum& y, std::size_t max_lag, double* out) {
  if (x.fft_size != n_ || y.fft_size != n_) throw Error("FftEngine::corr: spectrum size mismatch");
  if (x.n_series + max_lag > n_)
    throw Error("FftEngine::corr: fft size too small for requested lags");
  auto* cbuf = static_cast<fftw_complex*>(cplx_buf_);
  const std::size_t nb = n_ / 2 + 1;
  for (std::size_t k = 0; k < nb; ++k) {
    const std::complex<double> p = x.bins[k] * std::conj(y.bins[k]);
    cbuf[k][0] = p.real();
    cbuf[k][1] = p.imag();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_), cbuf, real_buf_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t k = 0; k <= max_lag; ++k) out[k] = real_buf_[k] * scale;
}

void FftEngine::conv(const Spectrum& kernel, const Spectrum& imp, std::size_t n_out, double* out) {
  if (kernel.fft_size != n_ || imp.fft_size != n_)
    throw Error("FftEngine::conv: spectrum size mismatch");
  if (kernel.n_series + n_out > n_ + 1)
    throw Error("FftEngine::conv: fft size too small for linear convolution");
  auto* cbuf = static_cast<fftw_complex*>(cplx_buf_);
  const std::size_t nb = n_ / 2 + 1;
  for (std::size_t k = 0; k < nb; ++k) {
    const std::complex<double> p = kernel.bins[k] * imp.bins[k];
    cbuf[k][0] = p.real();
    cbuf[k][1] = p.imag();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_), cbuf, real_buf_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t t = 0; t < n_out; ++t) out[t] = real_buf_[t] * scale;
}

void FftEngine::forward_raw(const double* in, std::complex<double>* out) {
  std::memcpy(real_buf_, in, n_ * sizeof(double));
  auto* cbuf = static_cast<fftw_complex*>(cplx_buf_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), real_buf_, cbuf);
  std::memcpy(reinterpret_cast<double*>(out), cbuf, (n_ / 2 + 1) * sizeof(fftw_complex));
}

void FftEngine::backward_raw(const std::complex<double>* half_spectrum, double* out) {
  auto* cbuf = static_cast<fftw_complex*>(cplx_buf_);
  std::memcpy(cbuf, half_spectrum, (n_ / 2 + 1) * sizeof(fftw_complex));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_), cbuf, real_buf_);
  std::memcpy(out, real_buf_, n_ * sizeof(double));
}

}  // namespace impactlab
