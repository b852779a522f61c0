#include "impactlab/calibrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "impactlab/fits.hpp"

namespace impactlab {

ResponseObjective::ResponseObjective(Eigen::MatrixXd rows, Eigen::VectorXd empirical)
    : rows_(std::move(rows)), empirical_(std::move(empirical)) {
  base_ = Eigen::VectorXd::Zero(empirical_.size());
  init();
}

ResponseObjective::ResponseObjective(Eigen::MatrixXd rows, Eigen::VectorXd empirical,
                                     Eigen::VectorXd base, double scale)
    : rows_(std::move(rows)), empirical_(std::move(empirical)), base_(std::move(base)),
      scale_(scale) {
  init();
}

void ResponseObjective::init() {
  if (rows_.rows() != empirical_.size() || base_.size() != empirical_.size())
    throw Error("ResponseObjective: dimension mismatch");
  if (!empirical_.allFinite())
    throw InputError("ResponseObjective: empirical curve has gaps on the lag grid");
  emp_norm2_ = empirical_.squaredNorm();
  if (emp_norm2_ == 0.0) throw FitError("ResponseObjective: all-zero empirical curve");
}

Eigen::VectorXd ResponseObjective::model(const KernelParams& p) const {
  const long t_cut = rows_.cols();
  Eigen::VectorXd g(t_cut);
  for (long s = 1; s <= t_cut; ++s) g(s - 1) = kernel_eval(p, static_cast<double>(s));
  return base_ + scale_ * (rows_ * g);
}

double ResponseObjective::operator()(const KernelParams& p) const {
  const Eigen::VectorXd m = model(p);
  return (empirical_ - m).squaredNorm() / emp_norm2_;
}

namespace {

constexpr long kRefineEvery = 10000;

double sample_range(const ParamRange& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (r.log_scale) {
    if (!(r.lo > 0.0) || !(r.hi > r.lo))
      throw CalibrationError("SearchSpace: log-scale range needs 0 < lo < hi");
    return r.lo * std::exp(u(rng) * std::log(r.hi / r.lo));
  }
  return r.lo + u(rng) * (r.hi - r.lo);
}

double refine_value(double incumbent, const ParamRange& r, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double v;
  if (r.log_scale) {
    v = incumbent * std::exp(u(rng) * scale);
  } else {
    // relative move plus a small absolute one so values near zero stay mobile
    v = incumbent * std::exp(u(rng) * scale) + u(rng) * scale * 0.01 * (r.hi - r.lo);
  }
  return std::clamp(v, r.lo, r.hi);
}

}  // namespace

CalibrationResult calibrate_scenario(const ResponseObjective& objective,
                                     const SearchSpace& space) {
  if (space.budget < 1) throw CalibrationError("calibrate_scenario: budget must be >= 1");
  std::mt19937_64 rng(space.seed);

  CalibrationResult result;
  result.iterations = space.budget;
  double best = std::numeric_limits<double>::infinity();
  bool have_best = false;

  // First block is pure global sampling; afterwards proposals center on the
  // incumbent with a multiplicative scale halving every block, one global
  // probe in ten kept so the search never locks into a basin.
  for (long it = 1; it <= space.budget; ++it) {
    const long block = (it - 1) / kRefineEvery;
    const bool global = !have_best || block == 0 || it % 10 == 0;
    KernelParams p;
    if (global) {
      p.gamma_perm = sample_range(space.gamma_perm, rng);
      p.gamma_temp = sample_range(space.gamma_temp, rng);
      p.tau0 = sample_range(space.tau0, rng);
      p.beta = sample_range(space.beta, rng);
    } else {
      const double scale = std::pow(0.5, static_cast<double>(block));
      p.gamma_perm = refine_value(result.best.gamma_perm, space.gamma_perm, scale, rng);
      p.gamma_temp = refine_value(result.best.gamma_temp, space.gamma_temp, scale, rng);
      p.tau0 = refine_value(result.best.tau0, space.tau0, scale, rng);
      p.beta = refine_value(result.best.beta, space.beta, scale, rng);
    }
    const double chi2 = objective(p);
    if (std::isfinite(chi2) && chi2 < best) {
      best = chi2;
      result.best = p;
      have_best = true;
      result.trace.push_back({it, chi2, p});
    }
  }
  if (!have_best)
    throw CalibrationError("calibrate_scenario: no finite objective within budget");

  // Compass polish of the incumbent: one coordinate at a time with halving
  // steps, deterministic. Counted on top of the sampling budget above (at
  // most budget / 5 extra evaluations).
  const long polish_budget = space.budget / 5;
  long polish_used = 0;
  double step = 0.25;
  const ParamRange* ranges[4] = {&space.gamma_perm, &space.gamma_temp, &space.tau0, &space.beta};
  // single-coordinate moves plus diagonal pair moves; the diagonals follow
  // the (gamma_temp, tau0, beta) trade-off ridges
  std::vector<std::array<int, 4>> directions;
  for (int k = 0; k < 4; ++k)
    for (int sgn : {1, -1}) {
      std::array<int, 4> d{0, 0, 0, 0};
      d[static_cast<std::size_t>(k)] = sgn;
      directions.push_back(d);
    }
  for (int k1 = 1; k1 < 4; ++k1)
    for (int k2 = k1 + 1; k2 < 4; ++k2)
      for (int s1 : {1, -1})
        for (int s2 : {1, -1}) {
          std::array<int, 4> d{0, 0, 0, 0};
          d[static_cast<std::size_t>(k1)] = s1;
          d[static_cast<std::size_t>(k2)] = s2;
          directions.push_back(d);
        }

  auto apply_move = [&](const KernelParams& base, const std::array<int, 4>& d,
                        double s) -> KernelParams {
    KernelParams p = base;
    double* fields[4] = {&p.gamma_perm, &p.gamma_temp, &p.tau0, &p.beta};
    for (int k = 0; k < 4; ++k) {
      if (d[static_cast<std::size_t>(k)] == 0) continue;
      const double dir = static_cast<double>(d[static_cast<std::size_t>(k)]);
      *fields[k] = std::clamp(*fields[k] * std::exp(dir * s) +
                                  dir * s * 1e-3 * (ranges[k]->hi - ranges[k]->lo),
                              ranges[k]->lo, ranges[k]->hi);
    }
    return p;
  };

  while (polish_used < polish_budget && step > 1e-7) {
    bool improved = false;
    for (const auto& d : directions) {
      if (polish_used >= polish_budget) break;
      const KernelParams p = apply_move(result.best, d, step);
      ++polish_used;
      const double chi2 = objective(p);
      if (std::isfinite(chi2) && chi2 < best) {
        best = chi2;
        result.best = p;
        result.trace.push_back({space.budget + polish_used, chi2, p});
        improved = true;
        break;
      }
    }
    if (!improved) step *= 0.5;
  }
  result.iterations = space.budget + polish_used;

  result.chi2_response = best;
  return result;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<WeightResult> scan_weights(const WeightScanInputs& inputs,
                                       std::span<const double> weights,
                                       const SearchSpace& space) {
  if (weights.empty()) throw CalibrationError("scan_weights: empty weight grid");
  std::vector<WeightResult> out;
  out.reserve(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = weights[k];
    if (!(w > 0.0 && w < 1.0)) throw CalibrationError("scan_weights: weight outside (0, 1)");
    WeightResult wr;
    wr.weight = w;

    const ResponseObjective passive(
        inputs.rows_passive, inputs.emp_passive,
        (w * inputs.constants.f_self_passive) * inputs.s1_passive, inputs.constants.g_cross_passive);
    const ResponseObjective active(
        inputs.rows_active, inputs.emp_active,
        (w * inputs.constants.f_self_active) * inputs.s1_active, inputs.constants.g_cross_active);

    SearchSpace sp = space;
    sp.seed = mix_seed(space.seed, 2 * k);
    wr.passive = calibrate_scenario(passive, sp);
    wr.passive.weight = w;
    sp.seed = mix_seed(space.seed, 2 * k + 1);
    wr.active = calibrate_scenario(active, sp);
    wr.active.weight = w;
    out.push_back(std::move(wr));
  }
  return out;
}

std::vector<WeightResult> rank_by_diffusion(std::vector<WeightResult> results,
                                            const LagCurve& empirical_scaling,
                                            const DiffusionRankContext& ctx) {
  if (ctx.lags.empty()) throw CalibrationError("rank_by_diffusion: empty lag grid");
  std::vector<double> emp;
  emp.reserve(ctx.lags.size());
  for (long lag : ctx.lags) emp.push_back(empirical_scaling.at(lag));

  for (WeightResult& wr : results) {
    DiffusionInputs in;
    in.g_self = ctx.g_self;
    in.g_avg_self = ctx.g_avg_self;
    in.g_passive = wr.passive.best;
    in.g_active = wr.active.best;
    in.theta_passive = ctx.theta_passive;
    in.theta_active = ctx.theta_active;
    in.theta_self = ctx.theta_self;
    in.theta_avg_self = ctx.theta_avg_self;
    in.v = ctx.v;
    in.total_noise = ctx.total_noise;
    const auto d = theoretical_diffusion(Scenario::III, in, ctx.lags, ctx.t_cut);
    std::vector<double> model;
    model.reserve(d.size());
    for (std::size_t k = 0; k < d.size(); ++k)
      model.push_back(std::sqrt(std::fabs(d[k]) / static_cast<double>(ctx.lags[k])));
    const double chi2 = chi2_normalized(std::span<const double>(emp),
                                        std::span<const double>(model));
    wr.chi2_diffusion = chi2;
    wr.passive.chi2_diffusion = chi2;
    wr.active.chi2_diffusion = chi2;
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const WeightResult& a, const WeightResult& b) {
                     return a.chi2_diffusion < b.chi2_diffusion;
                   });
  return results;
}

}  // namespace impactlab
