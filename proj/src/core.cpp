#include "impactlab/core.hpp"

#include <algorithm>

namespace impactlab {

void BarSeries::validate() const {
  if (stock.symbol.empty()) throw InputError("BarSeries: empty stock symbol");
  const auto n = static_cast<std::size_t>(grid.slots);
  if (log_mid.size() != n || sign.size() != n || volume.size() != n)
    throw InputError("BarSeries: array lengths do not match grid.slots");
  if (valid_from < 0 || valid_from > grid.slots)
    throw InputError("BarSeries: valid_from outside session");
  for (std::size_t t = 0; t < n; ++t) {
    if (sign[t] < -1 || sign[t] > 1) throw InputError("BarSeries: sign outside {-1,0,+1}");
    if (volume[t] < 0.0) throw InputError("BarSeries: negative volume");
    if (static_cast<int>(t) >= valid_from && !std::isfinite(log_mid[t]))
      throw InputError("BarSeries: non-finite log_mid after valid_from");
  }
}

PairPanel align_pair(const std::vector<BarSeries>& days_i, const std::vector<BarSeries>& days_j) {
  auto check_sorted = [](const std::vector<BarSeries>& days, const char* which) {
    for (std::size_t k = 1; k < days.size(); ++k)
      if (days[k - 1].grid.date >= days[k].grid.date)
        throw InputError(std::string("align_pair: ") + which +
                         " day list not strictly sorted by date");
  };
  check_sorted(days_i, "first");
  check_sorted(days_j, "second");

  PairPanel panel;
  std::size_t ia = 0, ib = 0;
  while (ia < days_i.size() && ib < days_j.size()) {
    const auto& da = days_i[ia].grid.date;
    const auto& db = days_j[ib].grid.date;
    if (da < db) {
      ++ia;
    } else if (db < da) {
      ++ib;
    } else {
      if (days_i[ia].grid.slots != days_j[ib].grid.slots)
        throw InputError("align_pair: slot counts differ on " + da);
      panel.a.push_back(days_i[ia]);
      panel.b.push_back(days_j[ib]);
      ++ia;
      ++ib;
    }
  }
  if (panel.a.empty())
    throw EmptyPanelError("align_pair: no common trading day between the two stocks");
  return panel;
}

}  // namespace impactlab
