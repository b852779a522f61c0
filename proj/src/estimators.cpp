#include "impactlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "impactlab/simd.hpp"

namespace impactlab {

namespace {

// Demeaned log-midpoint array: anchored at valid_from so correlation sums
// never multiply large absolute price levels (returns are differences, so
// the anchor is mathematically neutral), zeroed before zero_before.
std::vector<double> price_array(const BarSeries& s, int zero_before) {
  const int n = s.slots();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (s.valid_from >= n) return out;
  const double anchor = s.log_mid[static_cast<std::size_t>(s.valid_from)];
  const int zb = std::max(zero_before, s.valid_from);
  for (int t = zb; t < n; ++t) out[static_cast<std::size_t>(t)] = s.log_mid[static_cast<std::size_t>(t)] - anchor;
  return out;
}

std::vector<double> sign_array(const BarSeries& s, int zero_before) {
  const int n = s.slots();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int t = std::max(0, zero_before); t < n; ++t)
    out[static_cast<std::size_t>(t)] = static_cast<double>(s.sign[static_cast<std::size_t>(t)]);
  return out;
}

void check_day_pair(const BarSeries& a, const BarSeries& b) {
  if (a.slots() != b.slots()) throw InputError("estimators: day slot counts differ");
  if (a.grid.date != b.grid.date) throw InputError("estimators: day dates differ");
}

long day_max_lag(long t_max, int slots) { return std::min<long>(t_max, slots - 1); }

// Engines per distinct day length, shared across the days of one panel.
class EnginePool {
 public:
  FftEngine& for_day(int slots, long t_max) {
    const long maxlag = day_max_lag(t_max, slots);
    const std::size_t need = FftEngine::good_size(static_cast<std::size_t>(slots + maxlag));
    auto it = engines_.find(need);
    if (it == engines_.end())
      it = engines_.emplace(need, std::make_unique<FftEngine>(need)).first;
    return *it->second;
  }

 private:
  std::map<std::size_t, std::unique_ptr<FftEngine>> engines_;
};

}  // namespace

const Spectrum& DaySpectra::price(const BarSeries& s, int zero_before) {
  const int zb = std::max(zero_before, s.valid_from);
  const auto key = std::make_tuple(static_cast<const void*>(&s), 0, zb);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    const auto arr = price_array(s, zb);
    it = cache_.emplace(key, engine_.forward(arr)).first;
  }
  return it->second;
}

const Spectrum& DaySpectra::sign(const BarSeries& s, int zero_before) {
  const int zb = std::max(0, zero_before);
  const auto key = std::make_tuple(static_cast<const void*>(&s), 1, zb);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    const auto arr = sign_array(s, zb);
    it = cache_.emplace(key, engine_.forward(arr)).first;
  }
  return it->second;
}

void accumulate_response_day(const BarSeries& a, const BarSeries& b, long t_max,
                             const EstimatorOptions& opts, DaySpectra* spectra,
                             std::vector<double>& num, std::vector<long long>& cnt) {
  check_day_pair(a, b);
  const int slots = a.slots();
  const int vfa = a.valid_from;
  const long maxlag = day_max_lag(t_max, slots);
  if (maxlag < 1 || vfa >= slots - 1) return;

  // Qualifying-slot counts: nonzero signs of b at t in [vfa, slots-1-tau].
  std::vector<long long> nnz(static_cast<std::size_t>(slots), 0);
  long long running = 0;
  for (int t = 0; t < slots; ++t) {
    if (t >= vfa && b.sign[static_cast<std::size_t>(t)] != 0) ++running;
    nnz[static_cast<std::size_t>(t)] = running;
  }

  if (opts.use_fft && spectra) {
    FftEngine& eng = spectra->engine();
    const Spectrum& pa = spectra->price(a);
    const Spectrum& sb = spectra->sign(b, vfa);
    std::vector<double> c(static_cast<std::size_t>(maxlag) + 1);
    eng.corr(pa, sb, static_cast<std::size_t>(maxlag), c.data());
    // prefix[u] = sum_{t<=u} pa(t)*sb(t)
    const auto pav = price_array(a, vfa);
    const auto sbv = sign_array(b, vfa);
    std::vector<double> prefix(static_cast<std::size_t>(slots), 0.0);
    double acc = 0.0;
    for (int t = 0; t < slots; ++t) {
      acc += pav[static_cast<std::size_t>(t)] * sbv[static_cast<std::size_t>(t)];
      prefix[static_cast<std::size_t>(t)] = acc;
    }
    for (long tau = 1; tau <= maxlag; ++tau) {
      num[static_cast<std::size_t>(tau)] += c[static_cast<std::size_t>(tau)] -
                                            prefix[static_cast<std::size_t>(slots - 1 - tau)];
      cnt[static_cast<std::size_t>(tau)] += nnz[static_cast<std::size_t>(slots - 1 - tau)];
    }
  } else {
    const auto pav = price_array(a, vfa);
    const auto sbv = sign_array(b, vfa);
    const double* p = pav.data() + vfa;
    const double* s = sbv.data() + vfa;
    const long len = slots - vfa;
    for (long tau = 1; tau <= std::min(maxlag, len - 1); ++tau) {
      const std::size_t m = static_cast<std::size_t>(len - tau);
      num[static_cast<std::size_t>(tau)] += simd::dot(p + tau, s, m) - simd::dot(p, s, m);
      cnt[static_cast<std::size_t>(tau)] += nnz[static_cast<std::size_t>(slots - 1 - tau)];
    }
  }
}

void accumulate_correlator_day(const BarSeries& a, const BarSeries& b, long t_max,
                               const EstimatorOptions& opts, DaySpectra* spectra,
                               std::vector<double>& num, std::vector<long long>& cnt) {
  check_day_pair(a, b);
  const int slots = a.slots();
  const long maxlag = day_max_lag(t_max, slots);
  if (maxlag < 0) return;

  if (opts.use_fft && spectra) {
    FftEngine& eng = spectra->engine();
    const Spectrum& sa = spectra->sign(a, 0);
    const Spectrum& sb = spectra->sign(b, 0);
    std::vector<double> c(static_cast<std::size_t>(maxlag) + 1);
    eng.corr(sa, sb, static_cast<std::size_t>(maxlag), c.data());
    for (long tau = 0; tau <= maxlag; ++tau) {
      num[static_cast<std::size_t>(tau)] += c[static_cast<std::size_t>(tau)];
      cnt[static_cast<std::size_t>(tau)] += slots - tau;
    }
  } else {
    for (long tau = 0; tau <= maxlag; ++tau) {
      double acc = 0.0;
      for (int t = 0; t + tau < slots; ++t)
        acc += static_cast<double>(a.sign[static_cast<std::size_t>(t + tau)] *
                                   b.sign[static_cast<std::size_t>(t)]);
      num[static_cast<std::size_t>(tau)] += acc;
      cnt[static_cast<std::size_t>(tau)] += slots - tau;
    }
  }
}

void accumulate_diffusion_day(const BarSeries& a, const BarSeries& b, long t_max,
                              const EstimatorOptions& opts, DaySpectra* spectra,
                              std::vector<double>& num, std::vector<long long>& cnt) {
  check_day_pair(a, b);
  const int slots = a.slots();
  const int mv = std::max(a.valid_from, b.valid_from);
  const long len = slots - mv;
  const long maxlag = std::min<long>(t_max, len - 1);
  if (maxlag < 1) return;

  if (opts.use_fft && spectra) {
    FftEngine& eng = spectra->engine();
    const Spectrum& pa = spectra->price(a);
    const Spectrum& pb_z = spectra->price(b, mv);
    const Spectrum& pb = spectra->price(b);
    const Spectrum& pa_z = spectra->price(a, mv);
    std::vector<double> c3(static_cast<std::size_t>(maxlag) + 1);
    std::vector<double> c4(static_cast<std::size_t>(maxlag) + 1);
    eng.corr(pa, pb_z, static_cast<std::size_t>(maxlag), c3.data());
    eng.corr(pb, pa_z, static_cast<std::size_t>(maxlag), c4.data());
    const auto pav = price_array(a, a.valid_from);
    const auto pbv = price_array(b, b.valid_from);
    std::vector<double> prefix(static_cast<std::size_t>(slots), 0.0);
    double acc = 0.0;
    for (int t = 0; t < slots; ++t) {
      const double prod = (t >= mv) ? pav[static_cast<std::size_t>(t)] * pbv[static_cast<std::size_t>(t)] : 0.0;
      acc += prod;
      prefix[static_cast<std::size_t>(t)] = acc;
    }
    const double total = prefix[static_cast<std::size_t>(slots - 1)];
    for (long tau = 1; tau <= maxlag; ++tau) {
      const double t1 = total - prefix[static_cast<std::size_t>(mv + tau - 1)];
      const double t2 = prefix[static_cast<std::size_t>(slots - 1 - tau)];
      num[static_cast<std::size_t>(tau)] +=
          t1 + t2 - c3[static_cast<std::size_t>(tau)] - c4[static_cast<std::size_t>(tau)];
      cnt[static_cast<std::size_t>(tau)] += len - tau;
    }
  } else {
    const auto pav = price_array(a, a.valid_from);
    const auto pbv = price_array(b, b.valid_from);
    const double* x = pav.data() + mv;
    const double* y = pbv.data() + mv;
    for (long tau = 1; tau <= maxlag; ++tau) {
      num[static_cast<std::size_t>(tau)] +=
          simd::diff_dot(x, y, static_cast<std::size_t>(len), static_cast<std::size_t>(tau));
      cnt[static_cast<std::size_t>(tau)] += len - tau;
    }
  }
}

namespace {

struct Accumulated {
  std::vector<double> num;
  std::vector<long long> cnt;
};

template <typename DayFn>
Accumulated accumulate_panel(const PairPanel& panel, long t_max, const EstimatorOptions& opts,
                             DayFn&& day_fn) {
  if (panel.days() == 0) throw EmptyPanelError("estimator: empty panel");
  if (t_max < 0) throw RangeError("estimator: negative t_max");
  Accumulated acc;
  acc.num.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
  acc.cnt.assign(static_cast<std::size_t>(t_max) + 1, 0);
  EnginePool pool;
  for (std::size_t d = 0; d < panel.days(); ++d) {
    const BarSeries& a = panel.a[d];
    const BarSeries& b = panel.b[d];
    if (opts.use_fft) {
      DaySpectra spectra(pool.for_day(a.slots(), t_max));
      day_fn(a, b, &spectra, acc);
    } else {
      day_fn(a, b, nullptr, acc);
    }
  }
  return acc;
}

LagCurve finalize_curve(const Accumulated& acc, long min_lag, long t_max,
                        std::vector<long long>* counts_out) {
  LagCurve curve;
  curve.min_lag = min_lag;
  curve.values.resize(static_cast<std::size_t>(t_max - min_lag + 1));
  if (counts_out) counts_out->resize(curve.values.size());
  for (long tau = min_lag; tau <= t_max; ++tau) {
    const auto ai = static_cast<std::size_t>(tau);
    const auto ci = static_cast<std::size_t>(tau - min_lag);
    curve.values[ci] = acc.cnt[ai] > 0 ? acc.num[ai] / static_cast<double>(acc.cnt[ai]) : kNaN;
    if (counts_out) (*counts_out)[ci] = acc.cnt[ai];
  }
  return curve;
}

}  // namespace

ResponseSet cross_response(const PairPanel& panel, long t_max, const EstimatorOptions& opts) {
  if (t_max < 1) throw RangeError("cross_response: t_max must be >= 1");
  const auto acc = accumulate_panel(panel, t_max, opts,
                                    [&](const BarSeries& a, const BarSeries& b, DaySpectra* sp,
                                        Accumulated& out) {
                                      accumulate_response_day(a, b, t_max, opts, sp, out.num,
                                                              out.cnt);
                                    });
  ResponseSet rs;
  rs.i = panel.a.front().stock;
  rs.j = panel.b.front().stock;
  rs.curve = finalize_curve(acc, 1, t_max, &rs.count);
  return rs;
}

CorrelatorSet sign_correlator(const PairPanel& panel, long t_max, CorrelatorKind kind,
                              const EstimatorOptions& opts) {
  if (kind != CorrelatorKind::self && kind != CorrelatorKind::cross)
    throw InputError("sign_correlator: averaged kinds come from average_correlators");
  const auto acc = accumulate_panel(panel, t_max, opts,
                                    [&](const BarSeries& a, const BarSeries& b, DaySpectra* sp,
                                        Accumulated& out) {
                                      accumulate_correlator_day(a, b, t_max, opts, sp, out.num,
                                                                out.cnt);
                                    });
  CorrelatorSet cs;
  cs.i = panel.a.front().stock;
  cs.j = panel.b.front().stock;
  cs.kind = kind;
  cs.curve = finalize_curve(acc, 0, t_max, &cs.count);
  return cs;
}

double sign_correlator_at(const PairPanel& panel, long lag) {
  if (panel.days() == 0) throw EmptyPanelError("sign_correlator_at: empty panel");
  double acc = 0.0;
  long long n = 0;
  for (std::size_t d = 0; d < panel.days(); ++d) {
    const BarSeries& a = panel.a[d];
    const BarSeries& b = panel.b[d];
    check_day_pair(a, b);
    const int slots = a.slots();
    const long l = std::labs(lag);
    if (l >= slots) continue;
    if (lag >= 0) {
      for (int t = 0; t + lag < slots; ++t)
        acc += static_cast<double>(a.sign[static_cast<std::size_t>(t + lag)] *
                                   b.sign[static_cast<std::size_t>(t)]);
    } else {
      for (int t = static_cast<int>(l); t < slots; ++t)
        acc += static_cast<double>(a.sign[static_cast<std::size_t>(t + lag)] *
                                   b.sign[static_cast<std::size_t>(t)]);
    }
    n += slots - l;
  }
  if (n == 0) throw RangeError("sign_correlator_at: lag exceeds every session");
  return acc / static_cast<double>(n);
}

LagCurve average_over_partners(std::span<const LagCurve> partners) {
  if (partners.empty()) throw InputError("average_over_partners: empty partner set");
  const long lo = partners.front().min_lag;
  const std::size_t n = partners.front().values.size();
  for (const LagCurve& c : partners)
    if (c.min_lag != lo || c.values.size() != n)
      throw InputError("average_over_partners: partner curves have different supports");
  LagCurve out;
  out.min_lag = lo;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    int used = 0;
    for (const LagCurve& c : partners) {
      if (std::isnan(c.values[k])) continue;
      acc += c.values[k];
      ++used;
    }
    out.values[k] = used > 0 ? acc / used : kNaN;
  }
  return out;
}

CorrelatorSet average_correlators(std::span<const CorrelatorSet> partners, CorrelatorKind kind) {
  if (partners.empty()) throw InputError("average_correlators: empty partner set");
  std::vector<LagCurve> curves;
  curves.reserve(partners.size());
  for (const auto& p : partners) curves.push_back(p.curve);
  CorrelatorSet out;
  out.i = partners.front().i;
  out.kind = kind;
  out.curve = average_over_partners(curves);
  out.count.assign(out.curve.values.size(), 0);
  for (const auto& p : partners)
    for (std::size_t k = 0; k < p.count.size() && k < out.count.size(); ++k)
      out.count[k] += p.count[k];
  return out;
}

DiffusionSet pair_diffusion(const PairPanel& panel, long t_max, const EstimatorOptions& opts) {
  if (t_max < 1) throw RangeError("pair_diffusion: t_max must be >= 1");
  const auto acc = accumulate_panel(panel, t_max, opts,
                                    [&](const BarSeries& a, const BarSeries& b, DaySpectra* sp,
                                        Accumulated& out) {
                                      accumulate_diffusion_day(a, b, t_max, opts, sp, out.num,
                                                               out.cnt);
                                    });
  DiffusionSet ds;
  ds.stock = panel.a.front().stock;
  ds.curve = finalize_curve(acc, 1, t_max, &ds.count);
  return ds;
}

DiffusionSet avg_diffusion(std::span<const PairPanel> partner_panels, long t_max,
                           const EstimatorOptions& opts) {
  if (partner_panels.empty()) throw EmptyPanelError("avg_diffusion: no partner panels");
  Accumulated acc;
  acc.num.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
  acc.cnt.assign(static_cast<std::size_t>(t_max) + 1, 0);
  EnginePool pool;
  for (const PairPanel& panel : partner_panels) {
    for (std::size_t d = 0; d < panel.days(); ++d) {
      const BarSeries& a = panel.a[d];
      const BarSeries& b = panel.b[d];
      if (opts.use_fft) {
        DaySpectra spectra(pool.for_day(a.slots(), t_max));
        accumulate_diffusion_day(a, b, t_max, opts, &spectra, acc.num, acc.cnt);
      } else {
        accumulate_diffusion_day(a, b, t_max, opts, nullptr, acc.num, acc.cnt);
      }
    }
  }
  DiffusionSet ds;
  ds.stock = partner_panels.front().a.front().stock;
  ds.curve = finalize_curve(acc, 1, t_max, &ds.count);
  return ds;
}

LagCurve diffusion_scaling(const LagCurve& diffusion) {
  const long lo = std::max<long>(1, diffusion.min_lag);
  if (lo > diffusion.max_lag()) throw RangeError("diffusion_scaling: curve has no lag >= 1");
  LagCurve out;
  out.min_lag = lo;
  out.values.resize(static_cast<std::size_t>(diffusion.max_lag() - lo + 1));
  for (long tau = lo; tau <= diffusion.max_lag(); ++tau) {
    const double d = diffusion.at(tau);
    out.values[static_cast<std::size_t>(tau - lo)] =
        std::isnan(d) ? kNaN : std::sqrt(std::fabs(d) / static_cast<double>(tau));
  }
  return out;
}

std::vector<double> log_bins(double v_min, double v_max, int n_bins) {
  if (!(v_min > 0.0) || !(v_max > v_min) || n_bins < 1)
    throw InputError("log_bins: need 0 < v_min < v_max and n_bins >= 1");
  std::vector<double> edges(static_cast<std::size_t>(n_bins) + 1);
  const double step = std::log(v_max / v_min) / n_bins;
  for (int k = 0; k <= n_bins; ++k) edges[static_cast<std::size_t>(k)] = v_min * std::exp(step * k);
  edges.back() = v_max;  // exact upper edge
  return edges;
}

std::vector<DayPair> day_pairs(const PairPanel& panel) {
  std::vector<DayPair> out;
  out.reserve(panel.days());
  for (std::size_t d = 0; d < panel.days(); ++d) out.push_back({&panel.a[d], &panel.b[d]});
  return out;
}

namespace {

std::vector<DayPair> day_pairs(std::span<const PairPanel> panels) {
  std::vector<DayPair> out;
  for (const PairPanel& panel : panels)
    for (std::size_t d = 0; d < panel.days(); ++d) out.push_back({&panel.a[d], &panel.b[d]});
  return out;
}

}  // namespace

VolumeProfile volume_conditioned_response(std::span<const DayPair> days, ConditioningSide side,
                                          long tau, std::span<const double> bin_edges) {
  if (days.empty()) throw EmptyPanelError("volume_conditioned_response: no day pairs");
  if (bin_edges.size() < 2) throw InputError("volume_conditioned_response: need >= 2 bin edges");
  if (tau < 1) throw RangeError("volume_conditioned_response: tau must be >= 1");
  for (std::size_t k = 1; k < bin_edges.size(); ++k)
    if (!(bin_edges[k] > bin_edges[k - 1]))
      throw InputError("volume_conditioned_response: bin edges not increasing");

  const std::size_t n_bins = bin_edges.size() - 1;
  std::vector<double> acc(n_bins, 0.0);
  std::vector<long long> cnt(n_bins, 0);

  for (const DayPair& dp : days) {
    const BarSeries& a = *dp.a;
    const BarSeries& b = *dp.b;
    check_day_pair(a, b);
    const int slots = a.slots();
    for (int t = a.valid_from; t + tau < slots; ++t) {
      const SignValue sb = b.sign[static_cast<std::size_t>(t)];
      if (sb == 0) continue;
      const double v = (side == ConditioningSide::own) ? a.volume[static_cast<std::size_t>(t)]
                                                       : b.volume[static_cast<std::size_t>(t)];
      if (!(v > 0.0) || v < bin_edges.front() || v > bin_edges.back()) continue;
      const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
      const std::size_t bin =
          std::min(n_bins - 1, static_cast<std::size_t>(std::distance(bin_edges.begin(), it)) - 1);
      const double r = a.log_mid[static_cast<std::size_t>(t + tau)] -
                       a.log_mid[static_cast<std::size_t>(t)];
      acc[bin] += r * static_cast<double>(sb);
      ++cnt[bin];
    }
  }

  VolumeProfile prof;
  prof.bin_edges.assign(bin_edges.begin(), bin_edges.end());
  prof.bin_center.resize(n_bins);
  prof.response.resize(n_bins);
  prof.count = cnt;
  prof.density.resize(n_bins);
  long long total = 0;
  for (long long c : cnt) total += c;
  for (std::size_t k = 0; k < n_bins; ++k) {
    prof.bin_center[k] = std::sqrt(bin_edges[k] * bin_edges[k + 1]);
    prof.response[k] = cnt[k] > 0 ? acc[k] / static_cast<double>(cnt[k]) : kNaN;
    const double width = bin_edges[k + 1] - bin_edges[k];
    prof.density[k] =
        total > 0 ? static_cast<double>(cnt[k]) / (static_cast<double>(total) * width) : 0.0;
  }
  return prof;
}

VolumeProfile volume_conditioned_response(std::span<const PairPanel> panels, ConditioningSide side,
                                          long tau, std::span<const double> bin_edges) {
  const auto days = day_pairs(panels);
  return volume_conditioned_response(std::span<const DayPair>(days), side, tau, bin_edges);
}

double mean_fitted_impact(std::span<const DayPair> days, ConditioningSide side,
                          const PowerLawFit& fit) {
  if (days.empty()) throw EmptyPanelError("mean_fitted_impact: no day pairs");
  double acc = 0.0;
  long long n = 0;
  for (const DayPair& dp : days) {
    const BarSeries& a = *dp.a;
    const BarSeries& b = *dp.b;
    check_day_pair(a, b);
    const int slots = a.slots();
    for (int t = a.valid_from; t < slots; ++t) {
      if (b.sign[static_cast<std::size_t>(t)] == 0) continue;
      const double v = (side == ConditioningSide::own) ? a.volume[static_cast<std::size_t>(t)]
                                                       : b.volume[static_cast<std::size_t>(t)];
      if (!(v > 0.0) || v > 1.0) continue;
      acc += fit.eval(v);
      ++n;
    }
  }
  if (n == 0) throw FitError("mean_fitted_impact: no qualifying slot with volume in (0,1]");
  return acc / static_cast<double>(n);
}

double mean_fitted_impact(std::span<const PairPanel> panels, ConditioningSide side,
                          const PowerLawFit& fit) {
  const auto days = day_pairs(panels);
  return mean_fitted_impact(std::span<const DayPair>(days), side, fit);
}

LagCurve per_share_response(const LagCurve& avg_response, double constant) {
  if (!(constant > 0.0)) throw Error("per_share_response: constant must be positive");
  LagCurve out = avg_response;
  for (double& v : out.values) v /= constant;
  return out;
}

VolumeProductAverages volume_product_averages(std::span<const DayPair> days,
                                              const PowerLawFit& f_i, const PowerLawFit& f_j,
                                              const PowerLawFit& g_i, const PowerLawFit& g_j) {
  if (days.empty()) throw EmptyPanelError("volume_product_averages: no day pairs");
  double ll = 0, ii = 0, li = 0, il = 0;
  long long n_both = 0, n_i = 0, n_j = 0;
  for (const DayPair& dp : days) {
    const BarSeries& a = *dp.a;
    const BarSeries& b = *dp.b;
    check_day_pair(a, b);
    const int slots = a.slots();
    for (int t = 0; t < slots; ++t) {
      const double vi = a.volume[static_cast<std::size_t>(t)];
      const double vj = b.volume[static_cast<std::size_t>(t)];
      const bool oki = vi > 0.0 && vi <= 1.0;
      const bool okj = vj > 0.0 && vj <= 1.0;
      if (oki && okj) {
        ll += f_i.eval(vi) * f_j.eval(vj);
        ii += g_i.eval(vj) * g_j.eval(vi);
        ++n_both;
      }
      if (oki) {
        li += f_i.eval(vi) * g_j.eval(vi);
        ++n_i;
      }
      if (okj) {
        il += g_i.eval(vj) * f_j.eval(vj);
        ++n_j;
      }
    }
  }
  if (n_both == 0 || n_i == 0 || n_j == 0)
    throw FitError("volume_product_averages: no qualifying simultaneous volumes");
  return {ll / static_cast<double>(n_both), ii / static_cast<double>(n_both),
          li / static_cast<double>(n_i), il / static_cast<double>(n_j)};
}

VolumeProductAverages volume_product_averages(std::span<const PairPanel> panels,
                                              const PowerLawFit& f_i, const PowerLawFit& f_j,
                                              const PowerLawFit& g_i, const PowerLawFit& g_j) {
  const auto days = day_pairs(panels);
  return volume_product_averages(std::span<const DayPair>(days), f_i, f_j, g_i, g_j);
}

}  // namespace impactlab
