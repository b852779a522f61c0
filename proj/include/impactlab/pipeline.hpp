#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impactlab/calibrate.hpp"
#include "impactlab/io.hpp"
#include "impactlab/simulate.hpp"

namespace impactlab::pipeline {

// Batch configuration: one JSON file plus flag overrides; flags win.
struct RunConfig {
  std::vector<std::string> universe;
  std::filesystem::path data_dir;
  std::filesystem::path out_dir;
  long t_max = 3000;
  long t_cut = 3000;
  std::string scenario = "III";
  std::vector<double> weights = {0.10, 0.30, 0.50, 0.70, 0.90};
  std::uint64_t seed = 1;
  long budget = 1000000;
  int threads = 0;  // 0: hardware concurrency
  std::string calibrate_stock;  // default: first universe entry
  bool use_fitted_correlators = true;
  double total_noise_d_eta = 1e-8;
  long fit_lo = 10;
  long fit_hi = 1000;
  int volume_bins = 20;
  bool emit_ticks = false;
  SimConfig sim;
};

RunConfig load_config(const std::filesystem::path& json_path);
std::string config_to_json(const RunConfig& config);

// Log-spaced unique integer lags in [lo, hi].
std::vector<long> make_lag_grid(long lo, long hi, int points_per_decade = 12);

// Correlator curve entering the matrices: raw value at lag 0, fitted power
// law beyond (the fitted tail denoises what dominates a large-t_cut matrix).
LagCurve materialize_fitted_theta(double theta0, const PowerLawFit& fit, long hi);

// --- stage entry points ------------------------------------------------------
// Every stage communicates with the next only through files under out_dir.
// Each returns a one-line JSON summary for stdout.

std::string cmd_ingest(const RunConfig& config);
std::string cmd_simulate(const RunConfig& config);
std::string cmd_estimate(const RunConfig& config);
std::string cmd_fit(const RunConfig& config);
std::string cmd_calibrate(const RunConfig& config);
std::string cmd_report(const RunConfig& config);

// --- pieces shared with the test suites -------------------------------------

std::map<std::string, std::vector<BarSeries>> load_bars(const std::filesystem::path& out_dir,
                                                        const std::vector<std::string>& universe);

struct StockFits {
  PowerLawFit theta_self, theta_passive, theta_active, theta_avgself;
  double theta0_self = 0.0, theta0_passive = 0.0, theta0_active = 0.0, theta0_avgself = 0.0;
  PowerLawFit vol_self, vol_c_passive, vol_c_active, vol_s_passive, vol_s_active;
  VolumeImpactConstants constants;
  VolumeProductAverages v_products;
};

StockFits load_fits(const std::filesystem::path& out_dir, const std::string& stock);

struct CalibrationOutcome {
  CalibrationResult s1_passive, s1_active;  // Scenario I: G_ii and <G_jj>
  CalibrationResult s2_passive, s2_active;  // Scenario II: G^(p) and G^(a)
  std::vector<WeightResult> ranked;         // Scenario III, ascending chi2_D
  double chi2_diffusion_s1 = kNaN;
  double chi2_diffusion_s2 = kNaN;
  double selected_weight = kNaN;
};

// In-process form of cmd_calibrate (cmd_calibrate runs this and writes the
// JSON report).
CalibrationOutcome run_calibration(const RunConfig& config);

// Synthetic tick emission so the ingest path can run on simulator output.
void emit_ticks_for_day(const BarSeries& bars, const std::filesystem::path& data_dir,
                        double shares_scale = 1000.0);

}  // namespace impactlab::pipeline
