#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "impactlab/core.hpp"

using namespace impactlab;

namespace {

BarSeries flat_day(const std::string& sym, const std::string& date, int slots, double level) {
  BarSeries b;
  b.stock.symbol = sym;
  b.grid = SessionGrid(date, slots);
  b.log_mid.assign(static_cast<std::size_t>(slots), level);
  b.sign.assign(static_cast<std::size_t>(slots), 0);
  b.volume.assign(static_cast<std::size_t>(slots), 0.0);
  return b;
}

}  // namespace

TEST_CASE("align_pair intersects day lists by date") {
  const std::vector<BarSeries> i{flat_day("A", "2008-01-07", 10, 0.0),
                                 flat_day("A", "2008-01-08", 10, 0.0)};
  const std::vector<BarSeries> j{flat_day("B", "2008-01-08", 10, 0.0),
                                 flat_day("B", "2008-01-09", 10, 0.0)};
  const PairPanel p = align_pair(i, j);
  REQUIRE(p.days() == 1);
  CHECK(p.a[0].grid.date == "2008-01-08");
  CHECK(p.b[0].grid.date == "2008-01-08");

  const PairPanel all = align_pair(i, i);
  CHECK(all.days() == 2);

  const std::vector<BarSeries> k{flat_day("C", "2008-02-01", 10, 0.0)};
  CHECK_THROWS_AS(align_pair(i, k), EmptyPanelError);
}

TEST_CASE("align_pair is commutative up to swapping sides") {
  const std::vector<BarSeries> i{flat_day("A", "2008-01-07", 10, 0.1),
                                 flat_day("A", "2008-01-08", 10, 0.2)};
  const std::vector<BarSeries> j{flat_day("B", "2008-01-08", 10, 0.3)};
  const PairPanel ij = align_pair(i, j);
  const PairPanel ji = align_pair(j, i);
  REQUIRE(ij.days() == ji.days());
  for (std::size_t d = 0; d < ij.days(); ++d) {
    CHECK(ij.a[d].grid.date == ji.b[d].grid.date);
    CHECK(ij.a[d].log_mid == ji.b[d].log_mid);
  }
}

TEST_CASE("align_pair rejects unsorted and duplicate dates") {
  const std::vector<BarSeries> bad{flat_day("A", "2008-01-08", 10, 0.0),
                                   flat_day("A", "2008-01-07", 10, 0.0)};
  const std::vector<BarSeries> dup{flat_day("A", "2008-01-08", 10, 0.0),
                                   flat_day("A", "2008-01-08", 10, 0.0)};
  const std::vector<BarSeries> ok{flat_day("B", "2008-01-08", 10, 0.0)};
  CHECK_THROWS_AS(align_pair(bad, ok), InputError);
  CHECK_THROWS_AS(align_pair(dup, ok), InputError);
}

TEST_CASE("log_return basics") {
  BarSeries b = flat_day("A", "2008-01-07", 10, 1.0);
  SUBCASE("constant midpoint gives zero at every lag") {
    for (int tau = 0; tau < 10; ++tau) CHECK(log_return(b, 0, tau) == 0.0);
  }
  SUBCASE("direct difference") {
    b.log_mid[5] = 1.01;
    CHECK(log_return(b, 0, 5) == doctest::Approx(0.01));
  }
  SUBCASE("zero lag is the identity case") { CHECK(log_return(b, 3, 0) == 0.0); }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(log_return(b, 5, 5), RangeError);
    CHECK_THROWS_AS(log_return(b, 0, 10), RangeError);
  }
}

TEST_CASE("log_return telescopes exactly") {
  // Intraday midpoints stay well within a factor of two of each other, so
  // every pairwise difference is exact and the two-step sum is bit-equal.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  BarSeries b = flat_day("A", "2008-01-07", 200, 0.0);
  double level = 3.9;
  for (auto& m : b.log_mid) {
    level += u(rng);
    m = level;
  }
  for (int t = 0; t < 50; ++t)
    for (int tau1 = 0; tau1 < 20; ++tau1)
      for (int tau2 = 0; tau2 < 20; ++tau2)
        CHECK(log_return(b, t, tau1 + tau2) ==
              log_return(b, t, tau1) + log_return(b, t + tau1, tau2));
}

TEST_CASE("LagCurve access and bounds") {
  LagCurve c(1, {1.0, 2.0, 3.0});
  CHECK(c.max_lag() == 3);
  CHECK(c.at(2) == 2.0);
  CHECK(c.covers(1, 3));
  CHECK(!c.covers(0, 3));
  CHECK_THROWS_AS(c.at(0), RangeError);
  CHECK_THROWS_AS(c.at(4), RangeError);
}

TEST_CASE("BarSeries validation") {
  BarSeries b = flat_day("A", "2008-01-07", 5, 0.0);
  CHECK_NOTHROW(b.validate());
  BarSeries short_arr = b;
  short_arr.volume.pop_back();
  CHECK_THROWS_AS(short_arr.validate(), InputError);
  BarSeries bad_sign = b;
  bad_sign.sign[1] = 2;
  CHECK_THROWS_AS(bad_sign.validate(), InputError);
  BarSeries neg_vol = b;
  neg_vol.volume[2] = -1.0;
  CHECK_THROWS_AS(neg_vol.validate(), InputError);
  BarSeries gap = b;
  gap.log_mid[3] = kNaN;
  CHECK_THROWS_AS(gap.validate(), InputError);
  gap.valid_from = 4;
  CHECK_NOTHROW(gap.validate());
}
