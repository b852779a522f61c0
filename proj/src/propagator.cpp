#include "impactlab/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "impactlab/simd.hpp"

namespace impactlab {

double kernel_eval(const KernelParams& p, double tau) {
  if (!(p.tau0 > 0.0)) throw Error("kernel_eval: tau0 must be positive");
  if (p.beta == 0.0) return p.gamma_temp + p.gamma_perm;
  const double ratio = tau / p.tau0;
  const double x2 = ratio * ratio;
  const double decay = std::exp(-0.5 * p.beta * std::log1p(x2));
  return p.gamma_temp * decay + p.gamma_perm;
}

LagCurve kernel_curve(const KernelParams& p, long min_lag, long max_lag) {
  if (min_lag > max_lag) throw RangeError("kernel_curve: empty lag range");
  LagCurve out;
  out.min_lag = min_lag;
  out.values.resize(static_cast<std::size_t>(max_lag - min_lag + 1));
  for (long lag = min_lag; lag <= max_lag; ++lag)
    out.values[static_cast<std::size_t>(lag - min_lag)] = kernel_eval(p, static_cast<double>(lag));
  return out;
}

namespace {

// Dense [0, t_hi] correlator table; rejects gaps.
std::vector<double> theta_table(const LagCurve& theta, long t_hi, const char* name) {
  if (!theta.covers(0, t_hi))
    throw RangeError(std::string(name) + ": correlator must cover lags [0, " +
                     std::to_string(t_hi) + "]");
  std::vector<double> out(static_cast<std::size_t>(t_hi) + 1);
  for (long g = 0; g <= t_hi; ++g) {
    const double v = theta.at(g);
    if (std::isnan(v))
      throw InputError(std::string(name) + ": correlator has a gap at lag " + std::to_string(g));
    out[static_cast<std::size_t>(g)] = v;
  }
  return out;
}

void pick_matrix_curves(SignMatrixKind kind, const std::vector<double>& tp,
                        const std::vector<double>& ta, const std::vector<double>** first,
                        const std::vector<double>** second) {
  switch (kind) {
    case SignMatrixKind::passive_I:
      *first = &tp;
      *second = &ta;
      return;
    case SignMatrixKind::active_I:
      *first = &ta;
      *second = &tp;
      return;
    case SignMatrixKind::self_II:
    case SignMatrixKind::avg_self_II:
      // Single self-correlator, passed as theta_p (theta_a ignored).
      *first = &tp;
      *second = &tp;
      return;
  }
  throw Error("build_sign_matrix: unknown kind");
}

void fill_matrix_row(double* row, long tau, long t_cut, const std::vector<double>& first,
                     const std::vector<double>& second) {
  for (long tp = 1; tp <= tau; ++tp)
    row[tp - 1] = first[static_cast<std::size_t>(tau - tp)] - second[static_cast<std::size_t>(tp)];
  for (long tp = tau + 1; tp <= t_cut; ++tp)
    row[tp - 1] =
        second[static_cast<std::size_t>(tp - tau)] - second[static_cast<std::size_t>(tp)];
}

}  // namespace

SignMatrix build_sign_matrix(const LagCurve& theta_p, const LagCurve& theta_a, long t_cut,
                             SignMatrixKind kind) {
  if (t_cut < 1) throw RangeError("build_sign_matrix: t_cut must be >= 1");
  const auto tp = theta_table(theta_p, t_cut, "build_sign_matrix");
  const auto ta = (kind == SignMatrixKind::passive_I || kind == SignMatrixKind::active_I)
                      ? theta_table(theta_a, t_cut, "build_sign_matrix")
                      : std::vector<double>{};
  const std::vector<double>*first, *second;
  pick_matrix_curves(kind, tp, ta, &first, &second);

  SignMatrix m;
  m.kind = kind;
  m.t_cut = t_cut;
  m.entries.resize(t_cut, t_cut);
  std::vector<double> row(static_cast<std::size_t>(t_cut));
  for (long tau = 1; tau <= t_cut; ++tau) {
    fill_matrix_row(row.data(), tau, t_cut, *first, *second);
    for (long c = 0; c < t_cut; ++c) m.entries(tau - 1, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

Eigen::MatrixXd build_sign_matrix_rows(const LagCurve& theta_p, const LagCurve& theta_a,
                                       long t_cut, SignMatrixKind kind,
                                       std::span<const long> lags) {
  if (t_cut < 1) throw RangeError("build_sign_matrix_rows: t_cut must be >= 1");
  const auto tp = theta_table(theta_p, t_cut, "build_sign_matrix_rows");
  const auto ta = (kind == SignMatrixKind::passive_I || kind == SignMatrixKind::active_I)
                      ? theta_table(theta_a, t_cut, "build_sign_matrix_rows")
                      : std::vector<double>{};
  const std::vector<double>*first, *second;
  pick_matrix_curves(kind, tp, ta, &first, &second);

  Eigen::MatrixXd rows(static_cast<long>(lags.size()), t_cut);
  std::vector<double> row(static_cast<std::size_t>(t_cut));
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const long tau = lags[k];
    if (tau < 1 || tau > t_cut) throw RangeError("build_sign_matrix_rows: lag outside [1, t_cut]");
    fill_matrix_row(row.data(), tau, t_cut, *first, *second);
    for (long c = 0; c < t_cut; ++c) rows(static_cast<long>(k), c) = row[static_cast<std::size_t>(c)];
  }
  return rows;
}

namespace {

Eigen::VectorXd curve_to_vector(const LagCurve& curve, long t_cut, const char* name) {
  if (!curve.covers(1, t_cut))
    throw RangeError(std::string(name) + ": curve must cover lags [1, " + std::to_string(t_cut) +
                     "]");
  Eigen::VectorXd v(t_cut);
  for (long lag = 1; lag <= t_cut; ++lag) {
    const double x = curve.at(lag);
    if (std::isnan(x))
      throw InputError(std::string(name) + ": curve has a gap at lag " + std::to_string(lag));
    v(lag - 1) = x;
  }
  return v;
}

LagCurve vector_to_curve(const Eigen::VectorXd& v) {
  LagCurve out;
  out.min_lag = 1;
  out.values.assign(v.data(), v.data() + v.size());
  return out;
}

}  // namespace

LagCurve theoretical_response(const SignMatrix& matrix, const LagCurve& kernel) {
  const Eigen::VectorXd g = curve_to_vector(kernel, matrix.t_cut, "theoretical_response");
  return vector_to_curve(matrix.entries * g);
}

InversionResult invert_response(const SignMatrix& matrix, const LagCurve& per_share_response) {
  const Eigen::VectorXd r = curve_to_vector(per_share_response, matrix.t_cut, "invert_response");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix.entries);
  const double rcond = lu.rcond();
  const double condition = (rcond > 0.0) ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition < kMaxCondition))
    throw SingularMatrixError("invert_response: matrix condition " + std::to_string(condition) +
                                  " exceeds " + std::to_string(kMaxCondition),
                              condition);
  InversionResult out;
  out.kernel = vector_to_curve(lu.solve(r));
  out.condition = condition;
  return out;
}

LagCurve scenario3_response(const ScenarioIIIConfig& cfg, const SignMatrix& s_channel_matrix,
                            ResponseMode mode) {
  if (!(cfg.weight > 0.0 && cfg.weight < 1.0))
    throw Error("scenario3_response: weight must lie in (0, 1)");
  const long t_cut = s_channel_matrix.t_cut;
  const LagCurve& s1 =
      (mode == ResponseMode::passive) ? cfg.s1_passive_per_share : cfg.s1_active_per_share;
  const double f_const = (mode == ResponseMode::passive) ? cfg.constants.f_self_passive
                                                         : cfg.constants.f_self_active;
  const double g_const = (mode == ResponseMode::passive) ? cfg.constants.g_cross_passive
                                                         : cfg.constants.g_cross_active;
  const Eigen::VectorXd r1 = curve_to_vector(s1, t_cut, "scenario3_response");
  const Eigen::VectorXd g =
      curve_to_vector(kernel_curve(cfg.s2_kernel, 1, t_cut), t_cut, "scenario3_response");
  const Eigen::VectorXd r =
      cfg.weight * f_const * r1 + g_const * (s_channel_matrix.entries * g);
  return vector_to_curve(r);
}

namespace {

// Dense kernel table g[1..hi] (index 0 unused).
std::vector<double> kernel_table(const LagCurve& g, long hi, const char* name) {
  if (!g.covers(1, hi))
    throw RangeError(std::string(name) + ": kernel must cover lags [1, " + std::to_string(hi) +
                     "]");
  std::vector<double> out(static_cast<std::size_t>(hi) + 1, 0.0);
  for (long s = 1; s <= hi; ++s) {
    const double v = g.at(s);
    if (std::isnan(v)) throw InputError(std::string(name) + ": kernel has a gap");
    out[static_cast<std::size_t>(s)] = v;
  }
  return out;
}

}  // namespace

std::vector<double> theoretical_diffusion_component(const DiffusionComponentSpec& spec,
                                                    std::span<const long> lags, long t_cut) {
  if (t_cut < 1) throw RangeError("theoretical_diffusion_component: t_cut must be >= 1");
  if (lags.empty()) return {};
  long max_lag = 0;
  for (long lag : lags) {
    if (lag < 1) throw RangeError("theoretical_diffusion_component: lags must be >= 1");
    max_lag = std::max(max_lag, lag);
  }
  const long hi = max_lag + t_cut;
  const auto g1 = kernel_table(spec.g1, hi, "theoretical_diffusion_component");
  const auto g2 = kernel_table(spec.g2, hi, "theoretical_diffusion_component");
  const auto th1 = theta_table(spec.theta1, hi - 1, "theoretical_diffusion_component");
  const auto th2 = theta_table(spec.theta2, hi - 1, "theoretical_diffusion_component");
  const std::size_t T = static_cast<std::size_t>(t_cut);

  std::vector<double> out;
  out.reserve(lags.size());

  // Scratch arrays reused across lags.
  std::vector<double> g1d(T + 1), g2d(T + 1), rev1t(T + 1), rev2t(T + 1);
  for (std::size_t m = 0; m <= T; ++m) {
    rev1t[m] = th1[T - m];
    rev2t[m] = th2[T - m];
  }

  for (long lag : lags) {
    const std::size_t tau = static_cast<std::size_t>(lag);
    // future kernel values are g1[1..tau]; past differences G(tau+s) - G(s)
    for (std::size_t s = 1; s <= T; ++s) {
      g1d[s] = g1[tau + s] - g1[s];
      g2d[s] = g2[tau + s] - g2[s];
    }

    // equal-time terms
    double equal_future = 0.0;
    for (std::size_t s = 1; s <= tau; ++s) equal_future += g1[s] * g2[s];
    const double equal_past = simd::dot(g1d.data() + 1, g2d.data() + 1, T);

    // correlation-induced cross terms
    std::vector<double> rev1(tau + 1), rev2(tau + 1);
    for (std::size_t m = 0; m <= tau; ++m) {
      rev1[m] = th1[tau - m];
      rev2[m] = th2[tau - m];
    }
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t a = 2; a <= tau; ++a)
      s1 += g1[a] * simd::dot(g2.data() + 1, rev2.data() + (tau - a) + 1, a - 1);
    for (std::size_t b = 2; b <= tau; ++b)
      s2 += g2[b] * simd::dot(g1.data() + 1, rev1.data() + (tau - b) + 1, b - 1);
    double s3 = 0.0, s4 = 0.0;
    for (std::size_t s = 2; s <= T; ++s)
      s3 += g1d[s] * simd::dot(g2d.data() + 1, rev2t.data() + (T - s) + 1, s - 1);
    for (std::size_t u = 2; u <= T; ++u)
      s4 += g2d[u] * simd::dot(g1d.data() + 1, rev1t.data() + (T - u) + 1, u - 1);
    double s5 = 0.0, s6 = 0.0;
    for (std::size_t b = 0; b < tau; ++b)
      s5 += g2[tau - b] * simd::dot(g1d.data() + 1, th2.data() + b + 1, T);
    for (std::size_t a = 0; a < tau; ++a)
      s6 += g1[tau - a] * simd::dot(g2d.data() + 1, th1.data() + a + 1, T);

    const double delta = s1 + s2 + s3 + s4 + s5 + s6;
    const double value = th1[0] * spec.v * (equal_future + equal_past) + delta * spec.v +
                         static_cast<double>(lag) * spec.d_eta;
    out.push_back(value);
  }
  return out;
}

namespace {

std::array<DiffusionComponentSpec, 4> make_component_specs(const DiffusionInputs& in, long hi) {
  const LagCurve g_self = kernel_curve(in.g_self, 1, hi);
  const LagCurve g_avg_self = kernel_curve(in.g_avg_self, 1, hi);
  const LagCurve g_passive = kernel_curve(in.g_passive, 1, hi);
  const LagCurve g_active = kernel_curve(in.g_active, 1, hi);

  std::array<DiffusionComponentSpec, 4> specs;
  // (LL): own-liquidity x partner-liquidity
  specs[0] = {g_self, g_avg_self, in.theta_passive, in.theta_active, in.v.ll, in.total_noise};
  // (II): information x information
  specs[1] = {g_passive, g_active, in.theta_active, in.theta_passive, in.v.ii, 0.0};
  // (LI): own-liquidity x information from the stock
  specs[2] = {g_self, g_active, in.theta_self, in.theta_self, in.v.li, 0.0};
  // (IL): information onto the stock x partner-liquidity
  specs[3] = {g_passive, g_avg_self, in.theta_avg_self, in.theta_avg_self, in.v.il, 0.0};
  return specs;
}

long max_of(std::span<const long> lags) {
  long m = 1;
  for (long lag : lags) m = std::max(m, lag);
  return m;
}

}  // namespace

std::array<std::vector<double>, 4> theoretical_diffusion_components(const DiffusionInputs& in,
                                                                    std::span<const long> lags,
                                                                    long t_cut) {
  const long hi = max_of(lags) + t_cut;
  const auto specs = make_component_specs(in, hi);
  std::array<std::vector<double>, 4> out;
  for (std::size_t k = 0; k < 4; ++k)
    out[k] = theoretical_diffusion_component(specs[k], lags, t_cut);
  return out;
}

std::vector<double> theoretical_diffusion(Scenario sc, const DiffusionInputs& in,
                                          std::span<const long> lags, long t_cut) {
  const long hi = max_of(lags) + t_cut;
  if (sc == Scenario::I) {
    auto specs = make_component_specs(in, hi);
    specs[0].d_eta = in.total_noise;
    return theoretical_diffusion_component(specs[0], lags, t_cut);
  }
  if (sc == Scenario::II) {
    auto specs = make_component_specs(in, hi);
    specs[1].d_eta = in.total_noise;
    return theoretical_diffusion_component(specs[1], lags, t_cut);
  }
  const auto parts = theoretical_diffusion_components(in, lags, t_cut);
  std::vector<double> total(lags.size(), 0.0);
  for (const auto& part : parts)
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += part[k];
  return total;
}

}  // namespace impactlab
