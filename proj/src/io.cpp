#include "impactlab/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace impactlab::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary: '\n' endings everywhere
  if (!out) throw InputError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open for reading: " + path.string());
  return in;
}

// Reads the next data line, skipping '#' comments and blank lines.
bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  if (s == "nan") return kNaN;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw InputError("malformed number '" + s + "' in " + path.string());
  return v;
}

long parse_long(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw InputError("malformed integer '" + s + "' in " + path.string());
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trades_csv(const std::filesystem::path& path, std::span<const TickRecord> trades) {
  auto out = open_out(path);
  out << kFormatHeader << "\n" << "ts,price,shares\n";
  for (const TickRecord& t : trades)
    out << t.timestamp << ',' << format_double(t.price) << ',' << t.shares << "\n";
}

void write_quotes_csv(const std::filesystem::path& path, std::span<const QuoteRecord> quotes) {
  auto out = open_out(path);
  out << kFormatHeader << "\n" << "ts,bid,ask\n";
  for (const QuoteRecord& q : quotes)
    out << q.timestamp << ',' << format_double(q.bid) << ',' << format_double(q.ask) << "\n";
}

std::vector<TickRecord> read_trades_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!next_line(in, line) || line != "ts,price,shares")
    throw InputError("bad trades header in " + path.string());
  std::vector<TickRecord> out;
  while (next_line(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 3) throw InputError("bad trades row in " + path.string());
    out.push_back({static_cast<int>(parse_long(f[0], path)), parse_double(f[1], path),
                   parse_long(f[2], path)});
  }
  return out;
}

std::vector<QuoteRecord> read_quotes_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!next_line(in, line) || line != "ts,bid,ask")
    throw InputError("bad quotes header in " + path.string());
  std::vector<QuoteRecord> out;
  while (next_line(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 3) throw InputError("bad quotes row in " + path.string());
    out.push_back({static_cast<int>(parse_long(f[0], path)), parse_double(f[1], path),
                   parse_double(f[2], path)});
  }
  return out;
}

void write_bar_csv(const std::filesystem::path& path, const BarSeries& bars) {
  auto out = open_out(path);
  out << kFormatHeader << "\n";
  out << "# stock=" << bars.stock.symbol << " date=" << bars.grid.date
      << " slots=" << bars.grid.slots << " valid_from=" << bars.valid_from << "\n";
  out << "slot,log_mid,sign,volume\n";
  for (int t = 0; t < bars.grid.slots; ++t) {
    const auto u = static_cast<std::size_t>(t);
    out << t << ',' << format_double(bars.log_mid[u]) << ',' << static_cast<int>(bars.sign[u])
        << ',' << format_double(bars.volume[u]) << "\n";
  }
}

BarSeries read_bar_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  BarSeries bars;
  int slots = -1;
  // metadata comment
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string kv;
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "stock") bars.stock.symbol = val;
        else if (key == "date") bars.grid.date = val;
        else if (key == "slots") slots = static_cast<int>(parse_long(val, path));
        else if (key == "valid_from") bars.valid_from = static_cast<int>(parse_long(val, path));
      }
      continue;
    }
    break;
  }
  if (line != "slot,log_mid,sign,volume") throw InputError("bad bar header in " + path.string());
  if (bars.stock.symbol.empty() || bars.grid.date.empty() || slots <= 0)
    throw InputError("missing bar metadata in " + path.string());
  bars.grid = SessionGrid(bars.grid.date, slots);
  bars.log_mid.assign(static_cast<std::size_t>(slots), kNaN);
  bars.sign.assign(static_cast<std::size_t>(slots), 0);
  bars.volume.assign(static_cast<std::size_t>(slots), 0.0);
  while (next_line(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 4) throw InputError("bad bar row in " + path.string());
    const long t = parse_long(f[0], path);
    if (t < 0 || t >= slots) throw InputError("bar slot out of range in " + path.string());
    const auto u = static_cast<std::size_t>(t);
    bars.log_mid[u] = parse_double(f[1], path);
    const long s = parse_long(f[2], path);
    if (s < -1 || s > 1) throw InputError("bar sign out of range in " + path.string());
    bars.sign[u] = static_cast<SignValue>(s);
    bars.volume[u] = parse_double(f[3], path);
  }
  bars.validate();
  return bars;
}

void write_curve_csv(const std::filesystem::path& path, const LagCurve& curve,
                     const std::vector<long long>* counts) {
  if (counts && counts->size() != curve.values.size())
    throw InputError("write_curve_csv: counts length mismatch");
  auto out = open_out(path);
  out << kFormatHeader << "\n" << "tau,value,count\n";
  for (std::size_t k = 0; k < curve.values.size(); ++k) {
    if (std::isnan(curve.values[k])) continue;  // lag omitted: no qualifying samples
    const long long c = counts ? (*counts)[k] : 0;
    out << (curve.min_lag + static_cast<long>(k)) << ',' << format_double(curve.values[k]) << ','
        << c << "\n";
  }
}

LagCurve read_curve_csv(const std::filesystem::path& path, std::vector<long long>* counts) {
  auto in = open_in(path);
  std::string line;
  if (!next_line(in, line) || line != "tau,value,count")
    throw InputError("bad curve header in " + path.string());
  std::vector<long> lags;
  std::vector<double> vals;
  std::vector<long long> cnts;
  while (next_line(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != 3) throw InputError("bad curve row in " + path.string());
    lags.push_back(parse_long(f[0], path));
    vals.push_back(parse_double(f[1], path));
    cnts.push_back(parse_long(f[2], path));
  }
  if (lags.empty()) throw InputError("empty curve in " + path.string());
  LagCurve curve;
  curve.min_lag = lags.front();
  const long hi = lags.back();
  curve.values.assign(static_cast<std::size_t>(hi - curve.min_lag + 1), kNaN);
  if (counts) counts->assign(curve.values.size(), 0);
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const auto idx = static_cast<std::size_t>(lags[k] - curve.min_lag);
    if (lags[k] < curve.min_lag || lags[k] > hi)
      throw InputError("unsorted curve rows in " + path.string());
    curve.values[idx] = vals[k];
    if (counts) (*counts)[idx] = cnts[k];
  }
  return curve;
}

void write_table_csv(const std::filesystem::path& path, const Table& table) {
  auto out = open_out(path);
  out << kFormatHeader << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << table.columns[c] << (c + 1 < table.columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw InputError("write_table_csv: ragged row");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << format_double(row[c]) << (c + 1 < row.size() ? "," : "");
    out << "\n";
  }
}

Table read_table_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!next_line(in, line)) throw InputError("empty table in " + path.string());
  Table table;
  table.columns = split_csv(line);
  while (next_line(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != table.columns.size()) throw InputError("ragged table in " + path.string());
    std::vector<double> row;
    row.reserve(f.size());
    for (const auto& s : f) row.push_back(parse_double(s, path));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace impactlab::io
