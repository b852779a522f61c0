#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "impactlab/fits.hpp"

using namespace impactlab;

TEST_CASE("noiseless power law is recovered exactly") {
  std::vector<double> x, y;
  for (int tau = 1; tau <= 1000; ++tau) {
    x.push_back(tau);
    y.push_back(0.1 * std::pow(tau, -0.7));
  }
  const PowerLawFit fit = fit_power_law(x, y, 1, 1000, PowerLawKind::decay);
  CHECK(fit.exponent == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(fit.amplitude == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(fit.residual < 1e-20);
  CHECK(fit.points_used == 1000);
  CHECK(fit.eval(10.0) == doctest::Approx(0.1 * std::pow(10.0, -0.7)));
}

TEST_CASE("constant curve has exponent zero") {
  std::vector<double> x, y;
  for (int v = 1; v <= 50; ++v) {
    x.push_back(v);
    y.push_back(0.37);
  }
  const PowerLawFit fit = fit_power_law(x, y, 1, 50, PowerLawKind::growth);
  CHECK(fit.exponent == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.amplitude == doctest::Approx(0.37));
}

TEST_CASE("exponent is invariant under positive rescaling") {
  std::vector<double> x, y, y2;
  for (int tau = 2; tau <= 400; ++tau) {
    x.push_back(tau);
    y.push_back(0.05 * std::pow(tau, -0.9));
    y2.push_back(7.0 * 0.05 * std::pow(tau, -0.9));
  }
  const auto f1 = fit_power_law(x, y, 2, 400, PowerLawKind::decay);
  const auto f2 = fit_power_law(x, y2, 2, 400, PowerLawKind::decay);
  CHECK(f1.exponent == doctest::Approx(f2.exponent).epsilon(1e-12));
  CHECK(f2.amplitude == doctest::Approx(7.0 * f1.amplitude));
}

TEST_CASE("non-positive values shrink the usable range") {
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> y{1.0, 0.5, -0.1, 0.25, 0.2, 0.17};
  const PowerLawFit fit = fit_power_law(x, y, 1, 6, PowerLawKind::decay);
  CHECK(fit.points_used == 5);
  CHECK(fit.points_dropped == 1);
  CHECK_THROWS_AS(
      fit_power_law(std::vector<double>{1, 2, 3}, std::vector<double>{-1, -1, -1}, 1, 3,
                    PowerLawKind::decay),
      FitError);
}

TEST_CASE("noisy power law: exponent within 0.03 over 100 seeds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x, y;
    for (int tau = 1; tau <= 1000; ++tau) {
      x.push_back(tau);
      y.push_back(0.1 * std::pow(tau, -0.7) * (1.0 + 0.05 * g(rng)));
    }
    const PowerLawFit fit = fit_power_law(x, y, 1, 1000, PowerLawKind::decay);
    CHECK(std::fabs(fit.exponent - 0.7) < 0.03);
  }
}

TEST_CASE("logarithmic fit is exact on a log line") {
  std::vector<double> x, y;
  for (int k = 1; k <= 60; ++k) {
    const double v = 0.05 * k;
    x.push_back(v);
    y.push_back(2.0 + 3.0 * std::log(v));
  }
  const LogFit fit = fit_log(x, y, 0.01, 10.0);
  CHECK(fit.intercept == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.eval(1.0) == doctest::Approx(2.0));

  std::vector<double> flat(x.size(), 1.5);
  const LogFit f2 = fit_log(x, flat, 0.01, 10.0);
  CHECK(f2.slope == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("power law beats log fit on v^0.51 data") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x, y;
  for (int k = 1; k <= 40; ++k) {
    const double v = 0.02 * k;
    x.push_back(v);
    y.push_back(0.3 * std::pow(v, 0.51) * (1.0 + 0.01 * g(rng)));
  }
  const PowerLawFit pf = fit_power_law(x, y, 0.01, 1.0, PowerLawKind::growth);
  const LogFit lf = fit_log(x, y, 0.01, 1.0);
  CHECK(pf.exponent == doctest::Approx(0.51).epsilon(0.02));
  CHECK(pf.residual < lf.residual);
}

TEST_CASE("normalized chi2") {
  const std::vector<double> e{1.0, 1.0};
  SUBCASE("identical curves give zero") {
    CHECK(chi2_normalized(std::span<const double>(e), std::span<const double>(e)) == 0.0);
  }
  SUBCASE("zero model gives one by construction") {
    const std::vector<double> zero{0.0, 0.0};
    CHECK(chi2_normalized(std::span<const double>(e), std::span<const double>(zero)) == 1.0);
  }
  SUBCASE("hand arithmetic") {
    const std::vector<double> m{1.0, 0.0};
    CHECK(chi2_normalized(std::span<const double>(e), std::span<const double>(m)) == 0.5);
  }
  SUBCASE("joint rescaling invariance") {
    const std::vector<double> m{0.9, 1.2};
    std::vector<double> e2{3.0, 3.0}, m2{2.7, 3.6};
    const double a = chi2_normalized(std::span<const double>(e), std::span<const double>(m));
    const double b = chi2_normalized(std::span<const double>(e2), std::span<const double>(m2));
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
  SUBCASE("all-zero empirical curve is an error") {
    const std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(chi2_normalized(std::span<const double>(zero), std::span<const double>(e)),
                    FitError);
  }
  SUBCASE("lag curves intersect supports") {
    LagCurve emp(1, {1.0, 2.0, 3.0});
    LagCurve mod(2, {2.0, 3.0, 4.0});
    CHECK(chi2_normalized(emp, mod) == 0.0);
    LagCurve far(10, {1.0});
    CHECK_THROWS_AS(chi2_normalized(emp, far), FitError);
  }
}
