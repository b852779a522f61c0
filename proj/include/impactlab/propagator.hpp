#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "impactlab/core.hpp"
#include "impactlab/estimators.hpp"

namespace impactlab {

// Impact function of the time lag: an algebraically decaying temporary
// component of strength gamma_temp over time scale tau0 with exponent beta,
// plus a permanent constant gamma_perm.
//   G(tau) = gamma_temp / [1 + (tau/tau0)^2]^(beta/2) + gamma_perm
struct KernelParams {
  double gamma_perm = 0.0;
  double gamma_temp = 0.0;
  double tau0 = 1.0;
  double beta = 0.5;
};

double kernel_eval(const KernelParams& p, double tau);
LagCurve kernel_curve(const KernelParams& p, long min_lag, long max_lag);

// Which correlator pair fills the matrix. passive/active use the averaged
// cross-correlators; the self kinds use one (averaged) self-correlator.
enum class SignMatrixKind { passive_I, active_I, self_II, avg_self_II };

struct SignMatrix {
  Eigen::MatrixXd entries;  // row/col index k holds lag k+1
  SignMatrixKind kind = SignMatrixKind::self_II;
  long t_cut = 0;
};

// Correlator-difference matrix linking an impact kernel to a response per
// share. Entry(tau, tau') for 1 <= tau, tau' <= t_cut:
//   tau' <= tau:  first(tau - tau') - second(tau')
//   tau' >  tau:  second(tau' - tau) - second(tau')
// with (first, second) = (theta_p, theta_a) for passive_I, swapped for
// active_I, and both equal to the self-correlator for the self kinds.
// Curves must cover lags [0, t_cut].
SignMatrix build_sign_matrix(const LagCurve& theta_p, const LagCurve& theta_a, long t_cut,
                             SignMatrixKind kind);

// Just the rows for the given response lags (each lag in [1, t_cut]).
Eigen::MatrixXd build_sign_matrix_rows(const LagCurve& theta_p, const LagCurve& theta_a,
                                       long t_cut, SignMatrixKind kind,
                                       std::span<const long> lags);

// Matrix-vector product: response per share on [1, t_cut] from a kernel
// tabulated on [1, t_cut]. Equals the explicit double-sum superposition
// truncated at t_cut (kernel zero beyond t_cut, history cut at t_cut back).
LagCurve theoretical_response(const SignMatrix& matrix, const LagCurve& kernel);

struct InversionResult {
  LagCurve kernel;   // empirical impact kernel on [1, t_cut]
  double condition;  // estimated condition number of the matrix
};

// Solves matrix * kernel = response_per_share by LU factorization with
// partial pivoting (no explicit inverse). Systems with estimated condition
// above 1e12 are rejected with SingularMatrixError.
InversionResult invert_response(const SignMatrix& matrix, const LagCurve& per_share_response);

inline constexpr double kMaxCondition = 1e12;

// --- Scenario III response --------------------------------------------------

enum class ResponseMode { passive, active };

// Interpolating combination: the fixed Scenario-I per-share curve enters
// with weight w, the free cross-kernel channel is evaluated from s2_kernel.
//   R(tau) = w * R_I(tau) * <f> + [A_s G(s2_kernel)](tau) * <g>
struct ScenarioIIIConfig {
  double weight = 0.5;  // in (0, 1)
  VolumeImpactConstants constants;
  LagCurve s1_passive_per_share;
  LagCurve s1_active_per_share;
  KernelParams s2_kernel;
};

LagCurve scenario3_response(const ScenarioIIIConfig& cfg, const SignMatrix& s_channel_matrix,
                            ResponseMode mode);

// --- theoretical diffusion ---------------------------------------------------

// One (XY) diffusion component: two kernels, two correlators, a volume
// product average and a noise constant. Kernels must cover
// [1, max(lags) + t_cut], correlators [0, max(lags) + t_cut - 1].
struct DiffusionComponentSpec {
  LagCurve g1, g2;
  LagCurve theta1, theta2;
  double v = 1.0;
  double d_eta = 0.0;
};

// Equal-time term + past-difference term + correlation-induced cross term +
// tau * d_eta, history truncated t_cut back.
std::vector<double> theoretical_diffusion_component(const DiffusionComponentSpec& spec,
                                                    std::span<const long> lags, long t_cut);

enum class Scenario { I, II, III };

// Everything the four Table-style components need. The four analytic kernels
// are tabulated internally as far as the requested lags require.
struct DiffusionInputs {
  KernelParams g_self;      // own-liquidity kernel G_ii
  KernelParams g_avg_self;  // partner average <G_jj>
  KernelParams g_passive;   // cross kernel onto the stock
  KernelParams g_active;    // cross kernel from the stock
  LagCurve theta_passive;   // averaged cross-correlators
  LagCurve theta_active;
  LagCurve theta_self;      // own self-correlator
  LagCurve theta_avg_self;  // partner-averaged self-correlator
  VolumeProductAverages v;
  double total_noise = 0.0;  // sum of the component noise constants
};

// Component order: (LL), (II), (LI), (IL). The total noise is carried by the
// first active component; only the sum over components is specified.
std::array<std::vector<double>, 4> theoretical_diffusion_components(const DiffusionInputs& in,
                                                                    std::span<const long> lags,
                                                                    long t_cut);

// Scenario I: (LL) only. Scenario II: (II) only. Scenario III: sum of all
// four components.
std::vector<double> theoretical_diffusion(Scenario sc, const DiffusionInputs& in,
                                          std::span<const long> lags, long t_cut);

}  // namespace impactlab
