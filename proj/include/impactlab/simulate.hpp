#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "impactlab/core.hpp"
#include "impactlab/propagator.hpp"

namespace impactlab {

// Target law for the synthetic trade-sign process. Signs are thresholded
// correlated Gaussians: each stock's latent series is a long-memory Gaussian
// synthesized by circulant embedding whose covariance is chosen so the
// measured sign correlator follows theta_self / tau^gamma_self; the latent
// exponent is tuned in a closed loop because thresholding and finite panels
// shift the measured exponent. Cross correlation comes from a single common
// factor with loading cross_loading; zero signs are inserted with
// probability 1 - participation.
struct SignProcessSpec {
  double gamma_self = 0.8;
  double theta_self = 0.3;
  double cross_loading = 0.0;  // rho in [0, 1)
  double participation = 1.0;  // probability a slot trades
};

struct VolumeLawLogNormal {
  double sigma = 1.1;  // log-sd; volumes are normalized afterwards
};

struct SimConfig {
  int n_stocks = 2;
  int n_days = 1;
  KernelParams kernel_self{0.0, 5e-4, 10.0, 0.4};
  KernelParams kernel_cross{0.0, 5e-5, 10.0, 0.4};
  SignProcessSpec sign_spec{};
  VolumeLawLogNormal volume_law{};
  double impact_exponent = 0.5;  // f and g: v^impact_exponent
  double noise_std = 0.0;        // per-step std of each noise term
  double initial_log_price = 0.0;
  std::uint64_t seed = 1;
  long t_cut = 3000;   // history truncation of the superposition sums
  long burn_in = -1;   // slots discarded from each day's start; < 0 -> t_cut
  int slots_per_day = SessionGrid::kSessionSlots;
  std::string start_date = "2008-01-02";

  long effective_burn_in() const { return burn_in < 0 ? t_cut : burn_in; }
};

struct SyntheticPanel {
  std::vector<std::vector<BarSeries>> stocks;  // [stock][day]
  SimConfig ground_truth;
  double latent_exponent = 0.0;  // closed-loop tuned value actually used
};

// Deterministic per-stream seeds: one child per (tag, stock, day).
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

// Closed-loop calibration of the latent correlator exponent against the
// measured sign-correlator exponent. Deterministic under seed.
double tune_sign_exponent(const SignProcessSpec& spec, int slots, std::uint64_t seed);

// One day of signs for all stocks, latent exponent given explicitly.
std::vector<std::vector<SignValue>> gen_signs_with_exponent(const SignProcessSpec& spec,
                                                            double latent_gamma, int n_stocks,
                                                            int slots, std::uint64_t seed);

// Tunes the latent exponent, then generates (convenience form).
std::vector<std::vector<SignValue>> gen_signs(const SignProcessSpec& spec, int n_stocks,
                                              int slots, std::uint64_t seed);

// i.i.d. log-normal volumes at traded slots (sign != 0), zero elsewhere,
// un-normalized.
std::vector<double> gen_volumes(const VolumeLawLogNormal& law, std::span<const SignValue> signs,
                                std::uint64_t seed);

// Superposition price build on explicit inputs. Arrays are
// [stock][day][slot] with slot count slots_per_day + effective_burn_in();
// volumes must already be normalized. The first effective_burn_in() slots of
// each day approximate the infinite trade history and are discarded from the
// output BarSeries.
SyntheticPanel gen_prices(const SimConfig& cfg,
                          const std::vector<std::vector<std::vector<SignValue>>>& signs,
                          const std::vector<std::vector<std::vector<double>>>& volumes);

// Full generator: exponent tuning, signs, volumes, volume normalization to
// panel mean 1 over the session slots, prices.
SyntheticPanel simulate_market(const SimConfig& cfg);

// Sequential weekday dates starting at start (ISO yyyy-mm-dd).
std::vector<std::string> trading_dates(const std::string& start, int n_days);

}  // namespace impactlab
