#include "impactlab/fits.hpp"

#include <algorithm>
#include <cmath>

namespace impactlab {

double PowerLawFit::eval(double x) const {
  const double e = (kind == PowerLawKind::decay) ? -exponent : exponent;
  return amplitude * std::pow(x, e);
}

double LogFit::eval(double x) const { return intercept + slope * std::log(x); }

namespace {

struct LsqLine {
  double intercept, slope;
};

// Plain least squares of v against u.
LsqLine least_squares(const std::vector<double>& u, const std::vector<double>& v) {
  const double n = static_cast<double>(u.size());
  double su = 0, sv = 0, suu = 0, suv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    su += u[k];
    sv += v[k];
    suu += u[k] * u[k];
    suv += u[k] * v[k];
  }
  const double det = n * suu - su * su;
  if (det == 0.0) throw FitError("least_squares: degenerate abscissae");
  const double slope = (n * suv - su * sv) / det;
  const double intercept = (sv - slope * su) / n;
  return {intercept, slope};
}

}  // namespace

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y, double lo,
                          double hi, PowerLawKind kind) {
  if (x.size() != y.size()) throw FitError("fit_power_law: x/y length mismatch");
  if (!(lo < hi)) throw FitError("fit_power_law: degenerate range");
  std::vector<double> lx, ly, fx, fy;
  int dropped = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < lo || x[k] > hi) continue;
    if (std::isnan(y[k])) continue;
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) {
      ++dropped;  // range shrinks around non-positive points
      continue;
    }
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(y[k]));
    fx.push_back(x[k]);
    fy.push_back(y[k]);
  }
  if (lx.size() < 3) throw FitError("fit_power_law: fewer than 3 usable points in range");
  const LsqLine line = least_squares(lx, ly);

  PowerLawFit fit;
  fit.amplitude = std::exp(line.intercept);
  fit.exponent = (kind == PowerLawKind::decay) ? -line.slope : line.slope;
  fit.kind = kind;
  fit.lo = lo;
  fit.hi = hi;
  fit.points_used = static_cast<int>(lx.size());
  fit.points_dropped = dropped;

  std::vector<double> model(fx.size());
  for (std::size_t k = 0; k < fx.size(); ++k) model[k] = fit.eval(fx[k]);
  fit.residual = chi2_normalized(std::span<const double>(fy), std::span<const double>(model));
  return fit;
}

PowerLawFit fit_power_law(const LagCurve& curve, long lag_lo, long lag_hi, PowerLawKind kind) {
  std::vector<double> x, y;
  const long lo = std::max(lag_lo, curve.min_lag);
  const long hi = std::min(lag_hi, curve.max_lag());
  for (long lag = lo; lag <= hi; ++lag) {
    x.push_back(static_cast<double>(lag));
    y.push_back(curve.at(lag));
  }
  return fit_power_law(x, y, static_cast<double>(lag_lo), static_cast<double>(lag_hi), kind);
}

LogFit fit_log(std::span<const double> x, std::span<const double> y, double lo, double hi) {
  if (x.size() != y.size()) throw FitError("fit_log: x/y length mismatch");
  std::vector<double> u, v, fy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < lo || x[k] > hi || !(x[k] > 0.0) || std::isnan(y[k])) continue;
    u.push_back(std::log(x[k]));
    v.push_back(y[k]);
  }
  if (u.size() < 3) throw FitError("fit_log: fewer than 3 usable points in range");
  const LsqLine line = least_squares(u, v);
  LogFit fit;
  fit.intercept = line.intercept;
  fit.slope = line.slope;
  fit.points_used = static_cast<int>(u.size());
  std::vector<double> model(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) model[k] = line.intercept + line.slope * u[k];
  fit.residual = chi2_normalized(std::span<const double>(v), std::span<const double>(model));
  return fit;
}

double chi2_normalized(std::span<const double> empirical, std::span<const double> model) {
  if (empirical.size() != model.size()) throw FitError("chi2_normalized: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < empirical.size(); ++k) {
    if (std::isnan(empirical[k]) || std::isnan(model[k])) continue;
    const double d = empirical[k] - model[k];
    num += d * d;
    den += empirical[k] * empirical[k];
  }
  if (den == 0.0) throw FitError("chi2_normalized: all-zero empirical curve");
  return num / den;
}

double chi2_normalized(const LagCurve& empirical, const LagCurve& model) {
  const long lo = std::max(empirical.min_lag, model.min_lag);
  const long hi = std::min(empirical.max_lag(), model.max_lag());
  if (lo > hi) throw FitError("chi2_normalized: curves share no lag support");
  std::vector<double> e, m;
  for (long lag = lo; lag <= hi; ++lag) {
    e.push_back(empirical.at(lag));
    m.push_back(model.at(lag));
  }
  return chi2_normalized(std::span<const double>(e), std::span<const double>(m));
}

}  // namespace impactlab
