#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "impactlab/core.hpp"

namespace impactlab {

// One trade: integer second since 9:40:00, trade price, share count.
struct TickRecord {
  int timestamp = 0;
  double price = 0.0;
  long shares = 0;
};

// One quote update: integer second since 9:40:00, best bid and ask.
struct QuoteRecord {
  int timestamp = 0;
  double bid = 0.0;
  double ask = 0.0;
};

// Raw tick data for one (stock, day), both lists sorted by timestamp.
struct RawDay {
  StockId stock;
  std::string date;
  std::vector<TickRecord> trades;
  std::vector<QuoteRecord> quotes;
};

// Classification state carried across slots within one day, never across days.
struct SignState {
  SignValue prev_sign = 0;
  std::optional<double> prev_price;
};

// Tick-rule classification of consecutive trades: sign of the price change
// when prices differ, otherwise the preceding sign. The first trade of a day
// (no previous price) gets sign 0 and therefore contributes nothing to its
// slot's aggregate. Updates state in place.
std::vector<SignValue> classify_intra_second_signs(std::span<const TickRecord> trades,
                                                   SignState& state);

// Single trade sign for one second: sign of the sum of per-trade signs,
// 0 for an empty second or a buy/sell balance.
SignValue aggregate_second(std::span<const SignValue> signs);

struct BuildStats {
  long crossed_quotes_dropped = 0;
  long trades_total = 0;
};

// Builds the one-second BarSeries for one raw day: log-midpoint from the
// latest quote at or before each slot, carried forward; aggregated trade
// sign; summed share volume (un-normalized). Crossed quotes (bid > ask) are
// dropped and counted. A day without a single usable quote is rejected
// (InputError).
BarSeries build_bar_series(const RawDay& raw, BuildStats* stats = nullptr);

// Divides every volume of one stock by the grand mean over all slots of all
// days (zero slots included), so the panel mean becomes exactly 1 up to
// rounding. Throws NormalizationError when every volume is zero.
struct NormalizeResult {
  std::vector<BarSeries> days;
  double mean_volume = 0.0;  // shares per slot before scaling
};
NormalizeResult normalize_volumes(std::vector<BarSeries> days);

}  // namespace impactlab
