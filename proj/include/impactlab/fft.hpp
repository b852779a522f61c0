#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "impactlab/errors.hpp"

namespace impactlab {

// Half-spectrum of a zero-padded real series of original length n_series.
struct Spectrum {
  std::vector<std::complex<double>> bins;  // fft_size/2 + 1 entries
  std::size_t fft_size = 0;
  std::size_t n_series = 0;
};

// Thin FFTW wrapper for the linear correlation and convolution sums behind
// the estimators and the price generator. One engine per transform size.
// Instances are not thread-safe; each worker owns its own engine. Plan
// creation is serialized internally.
class FftEngine {
 public:
  explicit FftEngine(std::size_t fft_size);
  ~FftEngine();
  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  // Smallest power of two >= min_n.
  static std::size_t good_size(std::size_t min_n);

  std::size_t size() const { return n_; }

  Spectrum forward(std::span<const double> x);

  // Correlation sums out[k] = sum_t x[t+k] * y[t] for k = 0..max_lag.
  // Linear (no wraparound) provided x.n_series + max_lag <= fft_size.
  void corr(const Spectrum& x, const Spectrum& y, std::size_t max_lag, double* out);

  // Causal convolution out[t] = sum_k kernel[k] * imp[t-k] for t = 0..n_out-1.
  // Linear provided kernel length + n_out <= fft_size + 1.
  void conv(const Spectrum& kernel, const Spectrum& imp, std::size_t n_out, double* out);

  // Raw unnormalized transforms for callers building custom spectra
  // (half_spectrum has fft_size/2 + 1 entries; out has fft_size entries).
  void forward_raw(const double* in, std::complex<double>* out);
  void backward_raw(const std::complex<double>* half_spectrum, double* out);

 private:
  std::size_t n_;
  double* real_buf_;
  void* cplx_buf_;  // fftw_complex*
  void* fwd_;       // fftw_plan
  void* inv_;
};

}  // namespace impactlab
