#include "impactlab/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "impactlab/fft.hpp"
#include "impactlab/fits.hpp"
#include "impactlab/simd.hpp"

namespace impactlab {

namespace {

constexpr std::uint64_t kTagCommon = 1;
constexpr std::uint64_t kTagSign = 2;
constexpr std::uint64_t kTagMask = 3;
constexpr std::uint64_t kTagVolume = 4;
constexpr std::uint64_t kTagNoise = 5;
constexpr std::uint64_t kTagTune = 6;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Latent autocorrelation that maps through the sign threshold and the
// participation mask onto the target power-law sign correlator: the sign
// correlator of a thresholded bivariate Gaussian with correlation r is
// (2/pi) asin(r), and an independent Bernoulli(p) mask scales lags > 0 by
// p^2.
double latent_autocorr(double gap, const SignProcessSpec& spec, double latent_gamma) {
  if (gap <= 0.0) return 1.0;
  const double p2 = spec.participation * spec.participation;
  const double target = spec.theta_self * std::pow(gap, -latent_gamma) / p2;
  const double clipped = std::min(target, 0.98);
  return std::sin(0.5 * M_PI * clipped);
}

// Stationary standard Gaussian sampler by circulant embedding: eigenvalues
// of the symmetric extension of the covariance, negative eigenvalues clipped
// to zero, samples via one half-spectrum inverse transform.
class StationaryGaussianSampler {
 public:
  StationaryGaussianSampler(const SignProcessSpec& spec, double latent_gamma, std::size_t out_len)
      : out_len_(out_len), fft_size_(FftEngine::good_size(2 * out_len)), engine_(fft_size_) {
    const std::size_t half = fft_size_ / 2;
    std::vector<double> cov(fft_size_);
    for (std::size_t k = 0; k < fft_size_; ++k) {
      const std::size_t gap = std::min(k, fft_size_ - k);
      cov[k] = latent_autocorr(static_cast<double>(gap), spec, latent_gamma);
    }
    std::vector<std::complex<double>> eigen(half + 1);
    engine_.forward_raw(cov.data(), eigen.data());
    scale_.resize(half + 1);
    const double n = static_cast<double>(fft_size_);
    for (std::size_t j = 0; j <= half; ++j) {
      const double lambda = std::max(0.0, eigen[j].real());
      scale_[j] = (j == 0 || j == half) ? std::sqrt(lambda / n) : std::sqrt(lambda / (2.0 * n));
    }
  }

  std::vector<double> sample(std::mt19937_64& rng) {
    const std::size_t half = fft_size_ / 2;
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::complex<double>> v(half + 1);
    v[0] = {scale_[0] * gauss(rng), 0.0};
    for (std::size_t j = 1; j < half; ++j) {
      const double a = gauss(rng);
      const double b = gauss(rng);
      v[j] = {scale_[j] * a, scale_[j] * b};
    }
    v[half] = {scale_[half] * gauss(rng), 0.0};
    std::vector<double> full(fft_size_);
    engine_.backward_raw(v.data(), full.data());
    full.resize(out_len_);
    return full;
  }

 private:
  std::size_t out_len_;
  std::size_t fft_size_;
  FftEngine engine_;
  std::vector<double> scale_;
};

void check_sign_spec(const SignProcessSpec& spec) {
  if (!(spec.gamma_self > 0.0)) throw Error("SignProcessSpec: gamma_self must be > 0");
  if (!(spec.theta_self > 0.0)) throw Error("SignProcessSpec: theta_self must be > 0");
  if (spec.cross_loading < 0.0 || spec.cross_loading >= 1.0)
    throw Error("SignProcessSpec: cross_loading must lie in [0, 1)");
  if (!(spec.participation > 0.0) || spec.participation > 1.0)
    throw Error("SignProcessSpec: participation must lie in (0, 1]");
}

std::vector<std::vector<SignValue>> gen_signs_day(const SignProcessSpec& spec, int n_stocks,
                                                  int slots, std::uint64_t seed,
                                                  StationaryGaussianSampler& sampler) {
  const double rho = spec.cross_loading;
  const double idio_w = std::sqrt(1.0 - rho * rho);
  std::vector<double> common;
  if (rho > 0.0) {
    std::mt19937_64 rng(child_seed(seed, kTagCommon, 0));
    common = sampler.sample(rng);
  }
  std::vector<std::vector<SignValue>> out(static_cast<std::size_t>(n_stocks));
  for (int s = 0; s < n_stocks; ++s) {
    std::mt19937_64 rng(child_seed(seed, kTagSign, static_cast<std::uint64_t>(s)));
    std::vector<double> latent = sampler.sample(rng);
    if (rho > 0.0)
      for (int t = 0; t < slots; ++t)
        latent[static_cast<std::size_t>(t)] =
            rho * common[static_cast<std::size_t>(t)] + idio_w * latent[static_cast<std::size_t>(t)];
    std::mt19937_64 mask_rng(child_seed(seed, kTagMask, static_cast<std::uint64_t>(s)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto& signs = out[static_cast<std::size_t>(s)];
    signs.resize(static_cast<std::size_t>(slots));
    for (int t = 0; t < slots; ++t) {
      const bool traded = spec.participation >= 1.0 || u(mask_rng) < spec.participation;
      signs[static_cast<std::size_t>(t)] =
          traded ? (latent[static_cast<std::size_t>(t)] >= 0.0 ? SignValue{1} : SignValue{-1})
                 : SignValue{0};
    }
  }
  return out;
}

// Pooled self-correlator of sign arrays over [0, t_max], FFT path.
std::vector<double> measure_self_correlator(const std::vector<std::vector<SignValue>>& days,
                                            long t_max) {
  const int slots = static_cast<int>(days.front().size());
  const long maxlag = std::min<long>(t_max, slots - 1);
  FftEngine engine(FftEngine::good_size(static_cast<std::size_t>(slots + maxlag)));
  std::vector<double> num(static_cast<std::size_t>(maxlag) + 1, 0.0);
  std::vector<long long> cnt(static_cast<std::size_t>(maxlag) + 1, 0);
  std::vector<double> arr(static_cast<std::size_t>(slots));
  std::vector<double> c(static_cast<std::size_t>(maxlag) + 1);
  for (const auto& day : days) {
    for (int t = 0; t < slots; ++t) arr[static_cast<std::size_t>(t)] = day[static_cast<std::size_t>(t)];
    const Spectrum sp = engine.forward(arr);
    engine.corr(sp, sp, static_cast<std::size_t>(maxlag), c.data());
    for (long g = 0; g <= maxlag; ++g) {
      num[static_cast<std::size_t>(g)] += c[static_cast<std::size_t>(g)];
      cnt[static_cast<std::size_t>(g)] += slots - g;
    }
  }
  for (long g = 0; g <= maxlag; ++g)
    num[static_cast<std::size_t>(g)] /= static_cast<double>(cnt[static_cast<std::size_t>(g)]);
  return num;
}

}  // namespace

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(seed ^ splitmix64(a ^ splitmix64(b)));
}

double tune_sign_exponent(const SignProcessSpec& spec, int slots, std::uint64_t seed) {
  check_sign_spec(spec);
  const int n_days = 12;
  const long fit_lo = 10;
  const long fit_hi = std::min<long>(400, slots / 4);
  const long t_max = fit_hi;

  auto measure = [&](double latent_gamma, int iter) {
    StationaryGaussianSampler sampler(spec, latent_gamma, static_cast<std::size_t>(slots));
    std::vector<std::vector<SignValue>> days;
    days.reserve(n_days);
    for (int d = 0; d < n_days; ++d) {
      const std::uint64_t day_seed =
          child_seed(seed, kTagTune + 100 * static_cast<std::uint64_t>(iter),
                     static_cast<std::uint64_t>(d));
      auto signs = gen_signs_day(spec, 1, slots, day_seed, sampler);
      days.push_back(std::move(signs.front()));
    }
    const auto theta = measure_self_correlator(days, t_max);
    std::vector<double> x, y;
    for (long g = fit_lo; g <= fit_hi; ++g) {
      x.push_back(static_cast<double>(g));
      y.push_back(theta[static_cast<std::size_t>(g)]);
    }
    return fit_power_law(x, y, static_cast<double>(fit_lo), static_cast<double>(fit_hi),
                         PowerLawKind::decay)
        .exponent;
  };

  const double target = spec.gamma_self;
  const double tol = 0.02;
  double g0 = target;
  double m0 = measure(g0, 0);
  if (std::fabs(m0 - target) <= tol) return g0;
  double g1 = std::clamp(g0 + (target - m0), 0.05, 3.0);
  double m1 = measure(g1, 1);
  for (int iter = 2; iter < 6 && std::fabs(m1 - target) > tol; ++iter) {
    const double dm = m1 - m0;
    double g2;
    if (std::fabs(dm) < 1e-9) {
      g2 = std::clamp(g1 + (target - m1), 0.05, 3.0);
    } else {
      g2 = std::clamp(g1 - (m1 - target) * (g1 - g0) / dm, 0.05, 3.0);
    }
    g0 = g1;
    m0 = m1;
    g1 = g2;
    m1 = measure(g1, iter);
  }
  return g1;
}

std::vector<std::vector<SignValue>> gen_signs_with_exponent(const SignProcessSpec& spec,
                                                            double latent_gamma, int n_stocks,
                                                            int slots, std::uint64_t seed) {
  check_sign_spec(spec);
  if (n_stocks < 1 || slots < 2) throw Error("gen_signs: need n_stocks >= 1 and slots >= 2");
  StationaryGaussianSampler sampler(spec, latent_gamma, static_cast<std::size_t>(slots));
  return gen_signs_day(spec, n_stocks, slots, seed, sampler);
}

std::vector<std::vector<SignValue>> gen_signs(const SignProcessSpec& spec, int n_stocks,
                                              int slots, std::uint64_t seed) {
  const double latent_gamma =
      tune_sign_exponent(spec, std::min(slots, SessionGrid::kSessionSlots),
                         child_seed(seed, kTagTune, 0));
  return gen_signs_with_exponent(spec, latent_gamma, n_stocks, slots,
                                 child_seed(seed, kTagSign, 0));
}

std::vector<double> gen_volumes(const VolumeLawLogNormal& law, std::span<const SignValue> signs,
                                std::uint64_t seed) {
  if (law.sigma < 0.0) throw Error("gen_volumes: sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out(signs.size(), 0.0);
  for (std::size_t t = 0; t < signs.size(); ++t)
    if (signs[t] != 0) out[t] = law.sigma == 0.0 ? 1.0 : std::exp(law.sigma * gauss(rng));
  return out;
}

namespace {

// Causal convolution out[t] = sum_{s=1..t_cut} kernel[s] * u[t-s]; sparse
// impulse accumulation when cheaper than the transform pair.
class ImpulseConvolver {
 public:
  ImpulseConvolver(const KernelParams& params, long t_cut, std::size_t day_len)
      : t_cut_(std::max<long>(t_cut, 0)), day_len_(day_len),
        fft_size_(FftEngine::good_size(day_len + static_cast<std::size_t>(t_cut_) + 1)),
        engine_(fft_size_) {
    kernel_.assign(static_cast<std::size_t>(t_cut_) + 1, 0.0);
    for (long s = 1; s <= t_cut_; ++s)
      kernel_[static_cast<std::size_t>(s)] = kernel_eval(params, static_cast<double>(s));
    spectrum_ = engine_.forward(kernel_);
    const double logn = std::log2(static_cast<double>(fft_size_));
    fft_cost_ = 5.0 * static_cast<double>(fft_size_) * logn;
  }

  std::vector<double> apply(std::span<const double> u) {
    std::vector<double> out(day_len_, 0.0);
    if (t_cut_ == 0) return out;
    std::size_t nnz = 0;
    for (double x : u)
      if (x != 0.0) ++nnz;
    const double sparse_cost = static_cast<double>(nnz) * static_cast<double>(t_cut_);
    if (sparse_cost <= fft_cost_) {
      for (std::size_t t = 0; t + 1 < day_len_; ++t) {
        const double w = u[t];
        if (w == 0.0) continue;
        const std::size_t len =
            std::min<std::size_t>(static_cast<std::size_t>(t_cut_), day_len_ - 1 - t);
        simd::axpy(w, kernel_.data() + 1, out.data() + t + 1, len);
      }
    } else {
      const Spectrum us = engine_.forward(u);
      engine_.conv(spectrum_, us, day_len_, out.data());
    }
    return out;
  }

 private:
  long t_cut_;
  std::size_t day_len_;
  std::size_t fft_size_;
  FftEngine engine_;
  std::vector<double> kernel_;
  Spectrum spectrum_;
  double fft_cost_ = 0.0;
};

}  // namespace

std::vector<std::string> trading_dates(const std::string& start, int n_days) {
  using namespace std::chrono;
  int y = 0, m = 0, d = 0;
  if (std::sscanf(start.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw InputError("trading_dates: start date must be yyyy-mm-dd");
  sys_days day = sys_days(year{y} / m / d);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n_days));
  while (static_cast<int>(out.size()) < n_days) {
    const weekday wd(day);
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd(day);
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      out.emplace_back(buf);
    }
    day += days{1};
  }
  return out;
}

SyntheticPanel gen_prices(const SimConfig& cfg,
                          const std::vector<std::vector<std::vector<SignValue>>>& signs,
                          const std::vector<std::vector<std::vector<double>>>& volumes) {
  const long burn = cfg.effective_burn_in();
  const std::size_t day_len = static_cast<std::size_t>(cfg.slots_per_day) +
                              static_cast<std::size_t>(burn);
  const std::size_t n_stocks = static_cast<std::size_t>(cfg.n_stocks);
  const std::size_t n_days = static_cast<std::size_t>(cfg.n_days);
  if (signs.size() != n_stocks || volumes.size() != n_stocks)
    throw InputError("gen_prices: array shape mismatch");
  for (std::size_t s = 0; s < n_stocks; ++s) {
    if (signs[s].size() != n_days || volumes[s].size() != n_days)
      throw InputError("gen_prices: array shape mismatch");
    for (std::size_t d = 0; d < n_days; ++d)
      if (signs[s][d].size() != day_len || volumes[s][d].size() != day_len)
        throw InputError("gen_prices: day length must be slots_per_day + burn_in");
  }

  ImpulseConvolver conv_self(cfg.kernel_self, cfg.t_cut, day_len);
  ImpulseConvolver conv_cross(cfg.kernel_cross, cfg.t_cut, day_len);
  const auto dates = trading_dates(cfg.start_date, cfg.n_days);
  const double noise_scale = cfg.noise_std * std::sqrt(static_cast<double>(cfg.n_stocks));

  SyntheticPanel panel;
  panel.ground_truth = cfg;
  panel.stocks.resize(n_stocks);
  for (std::size_t s = 0; s < n_stocks; ++s) panel.stocks[s].reserve(n_days);

  std::vector<std::vector<double>> impulse_self(n_stocks), impulse_cross(n_stocks);
  std::vector<double> total_cross(day_len);

  for (std::size_t d = 0; d < n_days; ++d) {
    std::fill(total_cross.begin(), total_cross.end(), 0.0);
    for (std::size_t s = 0; s < n_stocks; ++s) {
      auto& self = impulse_self[s];
      auto& cross = impulse_cross[s];
      self.assign(day_len, 0.0);
      cross.assign(day_len, 0.0);
      const auto& sg = signs[s][d];
      const auto& vol = volumes[s][d];
      for (std::size_t t = 0; t < day_len; ++t) {
        if (sg[t] == 0) continue;
        const double impact = std::pow(vol[t], cfg.impact_exponent);
        const double w = impact * static_cast<double>(sg[t]);
        self[t] = w;
        cross[t] = w;  // same square-root law for f and g
        total_cross[t] += w;
      }
    }
    for (std::size_t s = 0; s < n_stocks; ++s) {
      // own-liquidity component + information transmitted from all others
      std::vector<double> from_others(day_len);
      for (std::size_t t = 0; t < day_len; ++t)
        from_others[t] = total_cross[t] - impulse_cross[s][t];
      std::vector<double> own = conv_self.apply(impulse_self[s]);
      std::vector<double> info = conv_cross.apply(from_others);

      BarSeries bars;
      bars.stock.symbol = "S" + std::to_string(s);
      bars.grid = SessionGrid(dates[d], cfg.slots_per_day);
      bars.valid_from = 0;
      bars.log_mid.resize(static_cast<std::size_t>(cfg.slots_per_day));
      bars.sign.resize(static_cast<std::size_t>(cfg.slots_per_day));
      bars.volume.resize(static_cast<std::size_t>(cfg.slots_per_day));

      double walk = 0.0;
      std::mt19937_64 noise_rng(
          child_seed(cfg.seed, kTagNoise + 10 * s, static_cast<std::uint64_t>(d)));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (std::size_t t = 0; t < day_len; ++t) {
        if (noise_scale > 0.0) walk += noise_scale * gauss(noise_rng);
        const double log_mid = cfg.initial_log_price + own[t] + info[t] + walk;
        if (t >= static_cast<std::size_t>(burn)) {
          const std::size_t k = t - static_cast<std::size_t>(burn);
          bars.log_mid[k] = log_mid;
          bars.sign[k] = signs[s][d][t];
          bars.volume[k] = volumes[s][d][t];
        }
      }
      panel.stocks[s].push_back(std::move(bars));
    }
  }
  return panel;
}

SyntheticPanel simulate_market(const SimConfig& cfg) {
  if (cfg.n_stocks < 2) throw Error("simulate_market: n_stocks must be >= 2");
  if (cfg.n_days < 1) throw Error("simulate_market: n_days must be >= 1");
  if (cfg.noise_std < 0.0) throw Error("simulate_market: noise_std must be >= 0");
  check_sign_spec(cfg.sign_spec);

  const long burn = cfg.effective_burn_in();
  const int day_len = cfg.slots_per_day + static_cast<int>(burn);
  const double latent_gamma =
      tune_sign_exponent(cfg.sign_spec, std::min(day_len, SessionGrid::kSessionSlots),
                         child_seed(cfg.seed, kTagTune, 0));

  StationaryGaussianSampler sampler(cfg.sign_spec, latent_gamma,
                                    static_cast<std::size_t>(day_len));

  const std::size_t n_stocks = static_cast<std::size_t>(cfg.n_stocks);
  const std::size_t n_days = static_cast<std::size_t>(cfg.n_days);
  std::vector<std::vector<std::vector<SignValue>>> signs(n_stocks);
  std::vector<std::vector<std::vector<double>>> volumes(n_stocks);
  for (std::size_t s = 0; s < n_stocks; ++s) {
    signs[s].resize(n_days);
    volumes[s].resize(n_days);
  }

  for (std::size_t d = 0; d < n_days; ++d) {
    const std::uint64_t day_seed = child_seed(cfg.seed, 0, static_cast<std::uint64_t>(d));
    auto day_signs = gen_signs_day(cfg.sign_spec, cfg.n_stocks, day_len, day_seed, sampler);
    for (std::size_t s = 0; s < n_stocks; ++s) {
      volumes[s][d] = gen_volumes(cfg.volume_law, day_signs[s],
                                  child_seed(cfg.seed, kTagVolume + 10 * s,
                                             static_cast<std::uint64_t>(d)));
      signs[s][d] = std::move(day_signs[s]);
    }
  }

  // Normalize per stock by the grand mean over the session slots of all days
  // (zero slots included), then scale the burn-in region by the same factor.
  for (std::size_t s = 0; s < n_stocks; ++s) {
    double total = 0.0;
    for (std::size_t d = 0; d < n_days; ++d)
      for (int t = static_cast<int>(burn); t < day_len; ++t)
        total += volumes[s][d][static_cast<std::size_t>(t)];
    const double mean =
        total / (static_cast<double>(n_days) * static_cast<double>(cfg.slots_per_day));
    if (!(mean > 0.0)) throw NormalizationError("simulate_market: all-zero volumes");
    for (std::size_t d = 0; d < n_days; ++d)
      for (double& v : volumes[s][d]) v /= mean;
  }

  SyntheticPanel panel = gen_prices(cfg, signs, volumes);
  panel.latent_exponent = latent_gamma;
  return panel;
}

}  // namespace impactlab
