#pragma once

#include <span>
#include <vector>

#include "impactlab/core.hpp"

namespace impactlab {

// Whether the power law is written as a decay y = amplitude / x^exponent
// (sign correlators) or a growth y = amplitude * x^exponent (volume impact).
enum class PowerLawKind { decay, growth };

struct PowerLawFit {
  double amplitude = 0.0;  // prefactor, > 0
  double exponent = 0.0;   // gamma (decay) or delta (growth)
  PowerLawKind kind = PowerLawKind::decay;
  double lo = 0.0, hi = 0.0;
  double residual = 0.0;  // normalized chi^2 over the fitted points, linear space
  int points_used = 0;
  int points_dropped = 0;  // non-positive values removed before the log-log fit

  double eval(double x) const;
};

struct LogFit {
  double intercept = 0.0;  // y = intercept + slope * ln(x)
  double slope = 0.0;
  double residual = 0.0;
  int points_used = 0;

  double eval(double x) const;
};

// Ordinary least squares on (log x, log y) over x in [lo, hi]. Non-positive
// y values inside the range are dropped (counted in points_dropped); fewer
// than 3 usable points is a FitError.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y, double lo,
                          double hi, PowerLawKind kind);

// Convenience overload for a LagCurve with range [lag_lo, lag_hi].
PowerLawFit fit_power_law(const LagCurve& curve, long lag_lo, long lag_hi, PowerLawKind kind);

// Least squares of y against ln(x) over x in [lo, hi].
LogFit fit_log(std::span<const double> x, std::span<const double> y, double lo, double hi);

// Relative sum of squares sum((e-m)^2) / sum(e^2). Dimensionless, >= 0,
// invariant under joint rescaling of both curves. NaN entries on either side
// are skipped. Throws FitError on an all-zero empirical curve.
double chi2_normalized(std::span<const double> empirical, std::span<const double> model);
double chi2_normalized(const LagCurve& empirical, const LagCurve& model);

}  // namespace impactlab
