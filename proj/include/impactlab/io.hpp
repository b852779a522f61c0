#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "impactlab/core.hpp"
#include "impactlab/ingest.hpp"

namespace impactlab::io {

// Every emitted file starts with this line; readers skip any leading '#'
// comment lines. All files are UTF-8 with '\n' line endings and doubles
// are written with "%.17g" so rereads round-trip bit-exactly.
inline constexpr const char* kFormatHeader = "# impactlab-format v1";

std::string format_double(double v);

// --- tick files: trades "ts,price,shares", quotes "ts,bid,ask" -------------

void write_trades_csv(const std::filesystem::path& path, std::span<const TickRecord> trades);
void write_quotes_csv(const std::filesystem::path& path, std::span<const QuoteRecord> quotes);
std::vector<TickRecord> read_trades_csv(const std::filesystem::path& path);
std::vector<QuoteRecord> read_quotes_csv(const std::filesystem::path& path);

// --- bar files: "slot,log_mid,sign,volume" ----------------------------------

void write_bar_csv(const std::filesystem::path& path, const BarSeries& bars);
BarSeries read_bar_csv(const std::filesystem::path& path);

// --- curves: "tau,value,count" (lags without samples are omitted) -----------

void write_curve_csv(const std::filesystem::path& path, const LagCurve& curve,
                     const std::vector<long long>* counts = nullptr);
LagCurve read_curve_csv(const std::filesystem::path& path,
                        std::vector<long long>* counts = nullptr);

// --- generic small table with a header row ----------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_table_csv(const std::filesystem::path& path, const Table& table);
Table read_table_csv(const std::filesystem::path& path);

}  // namespace impactlab::io
