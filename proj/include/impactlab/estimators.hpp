#pragma once

#include <map>
#include <span>
#include <vector>

#include "impactlab/core.hpp"
#include "impactlab/fft.hpp"
#include "impactlab/fits.hpp"

namespace impactlab {

// All estimators offer two numerics paths: a direct summation path (the
// reference; plain accumulation in fixed index order) and an FFT path for
// full-size panels. Both are production paths and are equivalence-tested.
struct EstimatorOptions {
  bool use_fft = true;
};

struct ResponseSet {
  StockId i, j;
  LagCurve curve;  // tau in [1, t_max]; NaN where no slot qualified
  std::vector<long long> count;
};

enum class CorrelatorKind { self, cross, avg_passive, avg_active };

struct CorrelatorSet {
  StockId i, j;  // j unset for self and averaged kinds
  CorrelatorKind kind = CorrelatorKind::cross;
  LagCurve curve;  // tau in [0, t_max]
  std::vector<long long> count;
};

struct DiffusionSet {
  StockId stock;
  LagCurve curve;  // tau in [1, t_max]
  std::vector<long long> count;
};

// Per-(stock, day) spectra cache so one day's transforms are shared across
// pair loops. Price spectra are demeaned by the value at valid_from and
// zeroed before it; sign spectra are raw signs as doubles, optionally zeroed
// before a slot. Entries are keyed by series address: reset() at day change.
class DaySpectra {
 public:
  explicit DaySpectra(FftEngine& engine) : engine_(engine) {}
  void reset() { cache_.clear(); }
  FftEngine& engine() { return engine_; }
  const Spectrum& price(const BarSeries& s, int zero_before = -1);
  const Spectrum& sign(const BarSeries& s, int zero_before = 0);

 private:
  FftEngine& engine_;
  std::map<std::tuple<const void*, int, int>, Spectrum> cache_;
};

// Single-day accumulation primitives (num[k] += ..., cnt[k] += ...), used by
// the PairPanel wrappers below and by the batch pipeline. `spectra` may be
// null when opts.use_fft is false.
void accumulate_response_day(const BarSeries& a, const BarSeries& b, long t_max,
                             const EstimatorOptions& opts, DaySpectra* spectra,
                             std::vector<double>& num, std::vector<long long>& cnt);
void accumulate_correlator_day(const BarSeries& a, const BarSeries& b, long t_max,
                               const EstimatorOptions& opts, DaySpectra* spectra,
                               std::vector<double>& num, std::vector<long long>& cnt);
void accumulate_diffusion_day(const BarSeries& a, const BarSeries& b, long t_max,
                              const EstimatorOptions& opts, DaySpectra* spectra,
                              std::vector<double>& num, std::vector<long long>& cnt);

// R_ij(tau): mean over qualifying slots of r_i(t,tau) * eps_j(t). Slots with
// eps_j(t) == 0 are excluded (a zero sign is a lack of trading, not a
// direction); so are slots before stock i's first quote. Averages pool every
// qualifying slot across days equally.
ResponseSet cross_response(const PairPanel& panel, long t_max, const EstimatorOptions& opts = {});

// Theta_ij(tau): plain time average of eps_i(t+tau) * eps_j(t) within
// sessions; zero signs stay in the average and contribute zero.
CorrelatorSet sign_correlator(const PairPanel& panel, long t_max,
                              CorrelatorKind kind = CorrelatorKind::cross,
                              const EstimatorOptions& opts = {});

// Two-sided correlator value at a single lag of either sign. Satisfies
// Theta_ij(tau) == Theta_ji(-tau) exactly (identical products in identical
// order).
double sign_correlator_at(const PairPanel& panel, long lag);

// Unweighted mean across partner curves at each lag; partners lacking a lag
// (NaN) are skipped there. Throws on an empty partner set.
LagCurve average_over_partners(std::span<const LagCurve> partners);
CorrelatorSet average_correlators(std::span<const CorrelatorSet> partners, CorrelatorKind kind);

// D_ij(tau) = <r_ij(t,tau) r_ji(t,tau)>_t for one pair; avg_diffusion pools
// the average over partners j as well.
DiffusionSet pair_diffusion(const PairPanel& panel, long t_max, const EstimatorOptions& opts = {});
DiffusionSet avg_diffusion(std::span<const PairPanel> partner_panels, long t_max,
                           const EstimatorOptions& opts = {});

// sqrt(|D(tau)| / tau) pointwise, tau >= 1.
LagCurve diffusion_scaling(const LagCurve& diffusion);

// --- volume conditioning ----------------------------------------------------

// Which stock's traded volume conditions a profile: the responder's own
// volume (panel.a) for the self response and the sign-cross-correlation
// channel, the trading partner's (panel.b) for the sign-self-correlation
// channel.
enum class ConditioningSide { own, partner };

enum class VolumeScenario { self, scenario1_passive, scenario1_active, scenario2_passive,
                            scenario2_active };

constexpr ConditioningSide conditioning_side(VolumeScenario sc) {
  return (sc == VolumeScenario::scenario2_passive || sc == VolumeScenario::scenario2_active)
             ? ConditioningSide::partner
             : ConditioningSide::own;
}

struct VolumeProfile {
  std::vector<double> bin_edges;    // B+1 increasing
  std::vector<double> bin_center;   // geometric centers
  std::vector<double> response;     // mean r*eps per bin; NaN for empty bins
  std::vector<long long> count;
  std::vector<double> density;      // of the conditioning volume; integrates to 1
};

std::vector<double> log_bins(double v_min, double v_max, int n_bins = 20);

// Non-owning day pair; the pipeline pools many (stock, partner) day pairs
// without copying panels.
struct DayPair {
  const BarSeries* a = nullptr;
  const BarSeries* b = nullptr;
};
std::vector<DayPair> day_pairs(const PairPanel& panel);

// Per-bin mean of r_a(t,tau) * eps_b(t), binned by the conditioning volume.
// Slots with a zero impacting sign or zero conditioning volume are skipped.
VolumeProfile volume_conditioned_response(std::span<const DayPair> days, ConditioningSide side,
                                          long tau, std::span<const double> bin_edges);
VolumeProfile volume_conditioned_response(std::span<const PairPanel> panels, ConditioningSide side,
                                          long tau, std::span<const double> bin_edges);

// Mean of the fitted impact law over qualifying slots with conditioning
// volume in (0, 1] (trades below the average volume).
double mean_fitted_impact(std::span<const DayPair> days, ConditioningSide side,
                          const PowerLawFit& fit);
double mean_fitted_impact(std::span<const PairPanel> panels, ConditioningSide side,
                          const PowerLawFit& fit);

// Average impact-of-volume constants for the four cross-response channels.
struct VolumeImpactConstants {
  double f_self_passive = 0.0;   // <f_i(v_i)>_t
  double f_self_active = 0.0;    // <f_j(v_j)>_{t,j}
  double g_cross_passive = 0.0;  // <g_i(v_j)>_{t,j}
  double g_cross_active = 0.0;   // <g_j(v_i)>_{t,j}
};

// Pointwise division of an averaged response by a volume-impact constant.
LagCurve per_share_response(const LagCurve& avg_response, double constant);

// Time-and-partner means of products of fitted impact laws at simultaneous
// volumes, both volumes restricted to (0, 1].
struct VolumeProductAverages {
  double ll = 0.0;  // <f_i(v_i) f_j(v_j)>
  double ii = 0.0;  // <g_i(v_j) g_j(v_i)>
  double li = 0.0;  // <f_i(v_i) g_j(v_i)>
  double il = 0.0;  // <g_i(v_j) f_j(v_j)>
};
VolumeProductAverages volume_product_averages(std::span<const DayPair> days,
                                              const PowerLawFit& f_i, const PowerLawFit& f_j,
                                              const PowerLawFit& g_i, const PowerLawFit& g_j);
VolumeProductAverages volume_product_averages(std::span<const PairPanel> panels,
                                              const PowerLawFit& f_i, const PowerLawFit& f_j,
                                              const PowerLawFit& g_i, const PowerLawFit& g_j);

}  // namespace impactlab
