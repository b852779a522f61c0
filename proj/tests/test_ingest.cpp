#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "impactlab/ingest.hpp"

using namespace impactlab;

namespace {

RawDay quotes_only_day(int n_quotes = 5) {
  RawDay raw;
  raw.stock.symbol = "A";
  raw.date = "2008-01-07";
  for (int k = 0; k < n_quotes; ++k)
    raw.quotes.push_back({k * 100, 10.0, 11.0});
  return raw;
}

}  // namespace

TEST_CASE("tick-rule classification") {
  SUBCASE("equal price carries the previous sign") {
    SignState st{1, 10.00};
    const std::vector<TickRecord> trades{{0, 10.00, 1}, {0, 10.01, 1}, {0, 10.01, 1}};
    const auto s = classify_intra_second_signs(trades, st);
    CHECK(s == std::vector<SignValue>{1, 1, 1});
    CHECK(st.prev_sign == 1);
    CHECK(*st.prev_price == 10.01);
  }
  SUBCASE("rises and falls") {
    SignState st{0, 10.00};
    const std::vector<TickRecord> trades{{0, 10.02, 1}, {0, 10.01, 1}};
    CHECK(classify_intra_second_signs(trades, st) == std::vector<SignValue>{1, -1});
  }
  SUBCASE("day's first trade has no predecessor") {
    SignState st;
    const std::vector<TickRecord> trades{{0, 10.00, 1}};
    CHECK(classify_intra_second_signs(trades, st) == std::vector<SignValue>{0});
  }
  SUBCASE("depends only on prices and carried state") {
    SignState st1{-1, 20.0};
    SignState st2{-1, 20.0};
    const std::vector<TickRecord> a{{0, 20.5, 10}, {0, 20.5, 99}};
    const std::vector<TickRecord> b{{7, 20.5, 1}, {7, 20.5, 2}};
    CHECK(classify_intra_second_signs(a, st1) == classify_intra_second_signs(b, st2));
  }
}

TEST_CASE("per-second aggregation") {
  CHECK(aggregate_second(std::vector<SignValue>{1, 1, -1}) == 1);
  CHECK(aggregate_second(std::vector<SignValue>{1, -1}) == 0);  // buy/sell balance
  CHECK(aggregate_second(std::vector<SignValue>{}) == 0);
  CHECK(aggregate_second(std::vector<SignValue>{-1}) == -1);
}

TEST_CASE("bar building") {
  SUBCASE("no trades: all signs and volumes zero, midpoint defined") {
    const RawDay raw = quotes_only_day();
    const BarSeries b = build_bar_series(raw);
    CHECK(b.valid_from == 0);
    for (int t = 0; t < b.slots(); ++t) {
      CHECK(b.sign[static_cast<std::size_t>(t)] == 0);
      CHECK(b.volume[static_cast<std::size_t>(t)] == 0.0);
    }
    CHECK(b.log_mid[100] == doctest::Approx(std::log(10.5)));
    CHECK(b.log_mid.back() == doctest::Approx(std::log(10.5)));
  }
  SUBCASE("single trade lands in its slot") {
    RawDay raw = quotes_only_day();
    raw.trades.push_back({17, 10.6, 300});
    const BarSeries b = build_bar_series(raw);
    CHECK(b.volume[17] == 300.0);
    CHECK(b.sign[17] == 0);  // first trade of the day carries no sign
    raw.trades.push_back({18, 10.7, 50});
    const BarSeries b2 = build_bar_series(raw);
    CHECK(b2.sign[18] == 1);
    for (int t = 0; t < b.slots(); ++t)
      if (t != 17) CHECK(b.volume[static_cast<std::size_t>(t)] == 0.0);
  }
  SUBCASE("state carries across slots within the day") {
    RawDay raw = quotes_only_day();
    raw.trades.push_back({10, 10.5, 10});   // first: sign 0
    raw.trades.push_back({20, 10.6, 10});   // rise: +1
    raw.trades.push_back({30, 10.6, 10});   // equal: carries +1
    raw.trades.push_back({40, 10.4, 10});   // fall: -1
    const BarSeries b = build_bar_series(raw);
    CHECK(b.sign[10] == 0);
    CHECK(b.sign[20] == 1);
    CHECK(b.sign[30] == 1);
    CHECK(b.sign[40] == -1);
  }
  SUBCASE("midpoint carries forward from the first quote") {
    RawDay raw;
    raw.stock.symbol = "A";
    raw.date = "2008-01-07";
    raw.quotes.push_back({50, 10.0, 11.0});
    raw.quotes.push_back({60, 12.0, 13.0});
    const BarSeries b = build_bar_series(raw);
    CHECK(b.valid_from == 50);
    CHECK(std::isnan(b.log_mid[49]));
    CHECK(b.log_mid[55] == doctest::Approx(std::log(10.5)));
    CHECK(b.log_mid[60] == doctest::Approx(std::log(12.5)));
  }
  SUBCASE("crossed quotes are dropped and counted") {
    RawDay raw = quotes_only_day();
    raw.quotes.insert(raw.quotes.begin() + 1, {150, 11.5, 11.0});
    BuildStats stats;
    const BarSeries b = build_bar_series(raw, &stats);
    CHECK(stats.crossed_quotes_dropped == 1);
    CHECK(b.log_mid[160] == doctest::Approx(std::log(10.5)));
  }
  SUBCASE("day without quotes is rejected") {
    RawDay raw;
    raw.stock.symbol = "A";
    raw.date = "2008-01-07";
    raw.trades.push_back({5, 10.0, 10});
    CHECK_THROWS_AS(build_bar_series(raw), InputError);
  }
}

TEST_CASE("aggregated signs flip under price-path reflection") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dt(0, 3);
  std::uniform_int_distribution<int> dp(-2, 2);
  RawDay raw = quotes_only_day();
  RawDay mirrored = raw;
  int ts = 0;
  double price = 50.0;
  for (int k = 0; k < 200 && ts < SessionGrid::kSessionSlots - 4; ++k) {
    ts += dt(rng);
    const double step = 0.01 * dp(rng);
    price += step;
    raw.trades.push_back({ts, price, 10});
    mirrored.trades.push_back({ts, 100.0 - price, 10});  // negates every increment
  }
  const BarSeries b = build_bar_series(raw);
  const BarSeries m = build_bar_series(mirrored);
  for (int t = 0; t < b.slots(); ++t)
    CHECK(static_cast<int>(b.sign[static_cast<std::size_t>(t)]) ==
          -static_cast<int>(m.sign[static_cast<std::size_t>(t)]));
}

TEST_CASE("volume normalization") {
  auto make_day = [](const std::string& date, double v) {
    RawDay raw = quotes_only_day();
    raw.date = date;
    BarSeries b = build_bar_series(raw);
    for (auto& x : b.volume) x = v;
    return b;
  };
  SUBCASE("uniform volumes become exactly one") {
    auto r = normalize_volumes({make_day("2008-01-07", 500.0), make_day("2008-01-08", 500.0)});
    CHECK(r.mean_volume == 500.0);
    for (const auto& d : r.days)
      for (double v : d.volume) CHECK(v == 1.0);
  }
  SUBCASE("single burst over two days") {
    std::vector<BarSeries> days{make_day("2008-01-07", 0.0), make_day("2008-01-08", 0.0)};
    days[0].volume[3] = 44400.0;  // grand mean over 2 x 22200 slots is 1
    auto r = normalize_volumes(std::move(days));
    CHECK(r.mean_volume == doctest::Approx(1.0));
    CHECK(r.days[0].volume[3] == doctest::Approx(44400.0));
    double total = 0.0;
    long slots = 0;
    for (const auto& d : r.days) {
      for (double v : d.volume) total += v;
      slots += d.grid.slots;
    }
    CHECK(total / static_cast<double>(slots) == doctest::Approx(1.0));
  }
  SUBCASE("idempotent") {
    auto r = normalize_volumes({make_day("2008-01-07", 123.0)});
    auto r2 = normalize_volumes(r.days);
    CHECK(r2.mean_volume == doctest::Approx(1.0));
    for (std::size_t t = 0; t < r.days[0].volume.size(); ++t)
      CHECK(r2.days[0].volume[t] == doctest::Approx(r.days[0].volume[t]));
  }
  SUBCASE("all-zero volumes fail") {
    CHECK_THROWS_AS(normalize_volumes({make_day("2008-01-07", 0.0)}), NormalizationError);
  }
}
