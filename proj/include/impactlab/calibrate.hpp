#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "impactlab/propagator.hpp"

namespace impactlab {

struct ParamRange {
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;
};

// Default ranges bracket every kernel parameter the model realistically
// produces; widen explicitly to admit non-physical negative temporary
// impacts.
struct SearchSpace {
  ParamRange gamma_perm{0.0, 1e-3, false};
  ParamRange gamma_temp{1e-6, 1e-2, true};
  ParamRange tau0{1e-5, 1e3, true};
  ParamRange beta{0.01, 2.0, false};
  long budget = 1000000;
  std::uint64_t seed = 0;
};

struct TracePoint {
  long iteration = 0;
  double chi2 = 0.0;
  KernelParams params;
};

struct CalibrationResult {
  KernelParams best{};
  double weight = kNaN;          // Scenario III only
  double chi2_response = kNaN;
  double chi2_diffusion = kNaN;  // filled by rank_by_diffusion
  long iterations = 0;
  std::vector<TracePoint> trace;  // improvements; chi2 non-increasing
};

// chi2_normalized between an empirical response sampled on a lag grid and
//   base + scale * (rows * kernel_vector(params)),
// where rows are sign-matrix rows for those lags and kernel_vector tabulates
// the candidate kernel on [1, t_cut]. base/scale express the Scenario III
// combination; Scenario I/II use base = 0, scale = 1.
class ResponseObjective {
 public:
  ResponseObjective(Eigen::MatrixXd rows, Eigen::VectorXd empirical);
  ResponseObjective(Eigen::MatrixXd rows, Eigen::VectorXd empirical, Eigen::VectorXd base,
                    double scale);

  long t_cut() const { return rows_.cols(); }
  double operator()(const KernelParams& p) const;
  Eigen::VectorXd model(const KernelParams& p) const;

 private:
  void init();

  Eigen::MatrixXd rows_;
  Eigen::VectorXd empirical_;
  Eigen::VectorXd base_;
  double scale_ = 1.0;
  double emp_norm2_ = 0.0;
};

// Seeded best-of-N random search: uniform proposals (log-scale where the
// range says so) with a multiplicative local-refinement block around the
// incumbent after every 10^4 evaluations, refinement scale halving per
// round. Deterministic under seed. Throws CalibrationError when no proposal
// yields a finite objective.
CalibrationResult calibrate_scenario(const ResponseObjective& objective, const SearchSpace& space);

// One passive + one active calibration per weight of the Scenario III grid.
struct WeightScanInputs {
  Eigen::MatrixXd rows_passive;   // S-channel matrix rows (avg-self kind)
  Eigen::MatrixXd rows_active;    // S-channel matrix rows (self kind)
  Eigen::VectorXd emp_passive;    // raw averaged responses on the lag grid
  Eigen::VectorXd emp_active;
  Eigen::VectorXd s1_passive;     // fixed Scenario-I per-share curves on the grid
  Eigen::VectorXd s1_active;
  VolumeImpactConstants constants;
};

struct WeightResult {
  double weight = 0.0;
  CalibrationResult passive;
  CalibrationResult active;
  double chi2_diffusion = kNaN;
};

std::vector<WeightResult> scan_weights(const WeightScanInputs& inputs,
                                       std::span<const double> weights, const SearchSpace& space);

// Inputs shared by every candidate when ranking by diffusion consistency.
struct DiffusionRankContext {
  KernelParams g_self;      // Scenario-I calibrated kernels, fixed
  KernelParams g_avg_self;
  LagCurve theta_passive, theta_active, theta_self, theta_avg_self;
  VolumeProductAverages v;
  double total_noise = 0.0;
  std::vector<long> lags;  // evaluation grid for the scaling comparison
  long t_cut = 0;
};

// Computes chi2_normalized between the empirical diffusion-scaling curve and
// each candidate's theoretical Scenario-III curve, fills chi2_diffusion and
// returns the results ordered ascending (stable: ties keep input order).
std::vector<WeightResult> rank_by_diffusion(std::vector<WeightResult> results,
                                            const LagCurve& empirical_scaling,
                                            const DiffusionRankContext& ctx);

}  // namespace impactlab
