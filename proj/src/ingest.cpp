#include "impactlab/ingest.hpp"

#include <algorithm>
#include <cmath>

namespace impactlab {

std::vector<SignValue> classify_intra_second_signs(std::span<const TickRecord> trades,
                                                   SignState& state) {
  std::vector<SignValue> out;
  out.reserve(trades.size());
  for (const TickRecord& tr : trades) {
    SignValue s;
    if (!state.prev_price.has_value()) {
      s = 0;  // day's first trade has no predecessor
    } else if (tr.price != *state.prev_price) {
      s = (tr.price > *state.prev_price) ? SignValue{1} : SignValue{-1};
    } else {
      s = state.prev_sign;
    }
    out.push_back(s);
    state.prev_sign = s;
    state.prev_price = tr.price;
  }
  return out;
}

SignValue aggregate_second(std::span<const SignValue> signs) {
  long total = 0;
  for (SignValue s : signs) total += s;
  if (total > 0) return 1;
  if (total < 0) return -1;
  return 0;
}

BarSeries build_bar_series(const RawDay& raw, BuildStats* stats) {
  if (raw.stock.symbol.empty()) throw InputError("build_bar_series: empty stock symbol");
  BarSeries bars;
  bars.stock = raw.stock;
  bars.grid = SessionGrid(raw.date);
  const int slots = bars.grid.slots;
  bars.log_mid.assign(static_cast<std::size_t>(slots), kNaN);
  bars.sign.assign(static_cast<std::size_t>(slots), 0);
  bars.volume.assign(static_cast<std::size_t>(slots), 0.0);

  BuildStats local;
  BuildStats& st = stats ? *stats : local;

  // Midpoint: last usable quote at or before each slot, carried forward.
  double last_log_mid = kNaN;
  int first_quote_slot = -1;
  std::size_t q = 0;
  for (int t = 0; t < slots; ++t) {
    while (q < raw.quotes.size() && raw.quotes[q].timestamp <= t) {
      const QuoteRecord& quote = raw.quotes[q];
      ++q;
      if (quote.timestamp < 0 || quote.timestamp >= slots)
        throw InputError("build_bar_series: quote timestamp outside session");
      if (!(quote.bid > 0.0) || !(quote.ask > 0.0))
        throw InputError("build_bar_series: non-positive quote price");
      if (quote.bid > quote.ask) {
        ++st.crossed_quotes_dropped;
        continue;
      }
      last_log_mid = std::log(0.5 * (quote.ask + quote.bid));
      if (first_quote_slot < 0) first_quote_slot = t;
    }
    bars.log_mid[static_cast<std::size_t>(t)] = last_log_mid;
  }
  if (first_quote_slot < 0)
    throw InputError("build_bar_series: no usable quote on " + raw.date + " for " +
                     raw.stock.symbol);
  bars.valid_from = first_quote_slot;

  // Signs and volumes: classification state carries across slots within the
  // day; each slot aggregates to a single sign and a summed volume.
  SignState state;
  std::size_t lo = 0;
  while (lo < raw.trades.size()) {
    const int t = raw.trades[lo].timestamp;
    if (t < 0 || t >= slots) throw InputError("build_bar_series: trade timestamp outside session");
    std::size_t hi = lo;
    while (hi < raw.trades.size() && raw.trades[hi].timestamp == t) {
      if (raw.trades[hi].timestamp < raw.trades[lo].timestamp)
        throw InputError("build_bar_series: trades not sorted by timestamp");
      ++hi;
    }
    const std::span<const TickRecord> in_slot(raw.trades.data() + lo, hi - lo);
    const auto trade_signs = classify_intra_second_signs(in_slot, state);
    bars.sign[static_cast<std::size_t>(t)] = aggregate_second(trade_signs);
    double vol = 0.0;
    for (const TickRecord& tr : in_slot) {
      if (tr.shares <= 0 || !(tr.price > 0.0))
        throw InputError("build_bar_series: invalid trade record");
      vol += static_cast<double>(tr.shares);
    }
    bars.volume[static_cast<std::size_t>(t)] = vol;
    st.trades_total += static_cast<long>(hi - lo);
    lo = hi;
  }
  return bars;
}

NormalizeResult normalize_volumes(std::vector<BarSeries> days) {
  double total = 0.0;
  long slots = 0;
  for (const BarSeries& d : days) {
    for (double v : d.volume) total += v;
    slots += d.grid.slots;
  }
  if (slots == 0 || total == 0.0)
    throw NormalizationError("normalize_volumes: no nonzero volume in the panel");
  const double mean = total / static_cast<double>(slots);
  for (BarSeries& d : days)
    for (double& v : d.volume) v /= mean;
  return {std::move(days), mean};
}

}  // namespace impactlab
