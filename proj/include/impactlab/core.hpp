#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "impactlab/errors.hpp"

namespace impactlab {

// Ticker symbol. Unique within a universe.
struct StockId {
  std::string symbol;

  bool operator==(const StockId&) const = default;
};

// One trading day on the one-second physical grid, 9:40 to 15:50 local,
// i.e. 22200 one-second slots. Lags are integer second counts; nothing in
// the library resolves below one second.
struct SessionGrid {
  static constexpr int kSessionSlots = 22200;

  std::string date;  // ISO yyyy-mm-dd
  int slots = kSessionSlots;

  SessionGrid() = default;
  explicit SessionGrid(std::string d) : date(std::move(d)) {}
  // Non-standard slot counts are for synthetic panels and tests only; real
  // sessions are always 22200 slots.
  SessionGrid(std::string d, int n) : date(std::move(d)), slots(n) {
    if (n <= 0) throw RangeError("SessionGrid: slots must be positive");
  }
};

using SignValue = std::int8_t;  // -1 sell, 0 none/balanced, +1 buy

// Per (stock, day) aligned one-second arrays. The universal input panel.
//
// log_mid carries the last known log-midpoint forward; slots before the
// first quote of the day hold NaN and are excluded from every average via
// valid_from. sign(t) == 0 whenever no trade occurred in slot t, and
// volume(t) == 0 iff no trade occurred.
struct BarSeries {
  StockId stock;
  SessionGrid grid;
  std::vector<double> log_mid;
  std::vector<SignValue> sign;
  std::vector<double> volume;
  int valid_from = 0;  // first slot with a defined midpoint

  int slots() const { return grid.slots; }
  void validate() const;
};

// Mapping from contiguous integer lags to real values. Carrier for response,
// correlator, kernel and diffusion curves. Entries may be NaN where a lag had
// no qualifying samples (such lags are omitted on output).
struct LagCurve {
  long min_lag = 0;
  std::vector<double> values;

  LagCurve() = default;
  LagCurve(long lo, std::vector<double> v) : min_lag(lo), values(std::move(v)) {}
  static LagCurve zeros(long lo, long hi) {
    return LagCurve(lo, std::vector<double>(static_cast<std::size_t>(hi - lo + 1), 0.0));
  }

  long max_lag() const { return min_lag + static_cast<long>(values.size()) - 1; }
  bool covers(long lo, long hi) const {
    return !values.empty() && min_lag <= lo && hi <= max_lag();
  }
  double at(long lag) const {
    if (values.empty() || lag < min_lag || lag > max_lag())
      throw RangeError("LagCurve: lag " + std::to_string(lag) + " outside [" +
                       std::to_string(min_lag) + ", " + std::to_string(max_lag()) + "]");
    return values[static_cast<std::size_t>(lag - min_lag)];
  }
  double& ref(long lag) {
    if (values.empty() || lag < min_lag || lag > max_lag())
      throw RangeError("LagCurve: lag out of range");
    return values[static_cast<std::size_t>(lag - min_lag)];
  }
};

// Day-aligned pair of BarSeries lists for stocks (i, j). Only days where
// trading took place in both stocks are retained; within each retained day
// the grids align slot by slot.
struct PairPanel {
  std::vector<BarSeries> a;  // stock i
  std::vector<BarSeries> b;  // stock j
  std::size_t days() const { return a.size(); }
};

// Intersects the two day lists by date. Both inputs must be sorted by date
// with no duplicates. Throws EmptyPanelError when no common day exists.
PairPanel align_pair(const std::vector<BarSeries>& days_i, const std::vector<BarSeries>& days_j);

// Log-return of s over [t, t+tau], within one session.
inline double log_return(const BarSeries& s, int t, int tau) {
  const int end = t + tau;
  if (t < 0 || tau < 0 || end >= s.slots())
    throw RangeError("log_return: t+tau outside session");
  return s.log_mid[static_cast<std::size_t>(end)] - s.log_mid[static_cast<std::size_t>(t)];
}

inline bool is_nan(double x) { return std::isnan(x); }
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace impactlab
