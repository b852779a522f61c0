#include "impactlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include "json.hpp"

namespace impactlab::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path bars_dir(const RunConfig& c) { return c.out_dir / "bars"; }
fs::path curves_dir(const RunConfig& c) { return c.out_dir / "curves"; }
fs::path volume_dir(const RunConfig& c) { return c.out_dir / "volume"; }
fs::path fits_dir(const RunConfig& c) { return c.out_dir / "fits"; }
fs::path calib_dir(const RunConfig& c) { return c.out_dir / "calib"; }
fs::path report_dir(const RunConfig& c) { return c.out_dir / "report"; }

json kernel_to_json(const KernelParams& p) {
  return json{{"gamma_perm", p.gamma_perm},
              {"gamma_temp", p.gamma_temp},
              {"tau0_s", p.tau0},
              {"beta", p.beta}};
}

KernelParams kernel_from_json(const json& j) {
  KernelParams p;
  p.gamma_perm = j.value("gamma_perm", 0.0);
  p.gamma_temp = j.value("gamma_temp", 0.0);
  p.tau0 = j.value("tau0_s", 1.0);
  p.beta = j.value("beta", 0.5);
  return p;
}

json fit_to_json(const PowerLawFit& f) {
  return json{{"amplitude", f.amplitude},
              {"exponent", f.exponent},
              {"kind", f.kind == PowerLawKind::decay ? "decay" : "growth"},
              {"range", {f.lo, f.hi}},
              {"chi2", f.residual},
              {"points_used", f.points_used},
              {"points_dropped", f.points_dropped}};
}

PowerLawFit fit_from_json(const json& j) {
  PowerLawFit f;
  f.amplitude = j.at("amplitude").get<double>();
  f.exponent = j.at("exponent").get<double>();
  f.kind = j.value("kind", "decay") == "decay" ? PowerLawKind::decay : PowerLawKind::growth;
  f.lo = j.at("range")[0].get<double>();
  f.hi = j.at("range")[1].get<double>();
  f.residual = j.value("chi2", 0.0);
  f.points_used = j.value("points_used", 0);
  f.points_dropped = j.value("points_dropped", 0);
  return f;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open for reading: " + path.string());
  json j;
  in >> j;
  return j;
}

int effective_threads(const RunConfig& c) {
  if (c.threads > 0) return c.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string pair_name(const std::string& stat, const std::string& i, const std::string& j) {
  return stat + "_" + i + "_" + j + ".csv";
}
std::string stock_name(const std::string& stat, const std::string& i) {
  return stat + "_" + i + ".csv";
}

}  // namespace

RunConfig load_config(const fs::path& json_path) {
  const json j = read_json(json_path);
  RunConfig c;
  c.universe = j.value("universe", std::vector<std::string>{});
  c.data_dir = j.value("data_dir", std::string{});
  c.out_dir = j.value("out_dir", std::string{});
  c.t_max = j.value("t_max", 3000L);
  c.t_cut = j.value("t_cut", 3000L);
  c.scenario = j.value("scenario", std::string("III"));
  c.weights = j.value("weights", std::vector<double>{0.10, 0.30, 0.50, 0.70, 0.90});
  c.seed = j.value("seed", 1ULL);
  c.budget = j.value("budget", 1000000L);
  c.threads = j.value("threads", 0);
  c.calibrate_stock = j.value("calibrate_stock", std::string{});
  c.use_fitted_correlators = j.value("use_fitted_correlators", true);
  c.total_noise_d_eta = j.value("total_noise_d_eta", 1e-8);
  c.fit_lo = j.value("fit_lo", 10L);
  c.fit_hi = j.value("fit_hi", 1000L);
  c.volume_bins = j.value("volume_bins", 20);
  c.emit_ticks = j.value("emit_ticks", false);

  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    c.sim.n_stocks = s.value("n_stocks", 2);
    c.sim.n_days = s.value("n_days", 1);
    if (s.contains("kernel_self")) c.sim.kernel_self = kernel_from_json(s.at("kernel_self"));
    if (s.contains("kernel_cross")) c.sim.kernel_cross = kernel_from_json(s.at("kernel_cross"));
    if (s.contains("signs")) {
      const json& g = s.at("signs");
      c.sim.sign_spec.gamma_self = g.value("gamma_self", 0.8);
      c.sim.sign_spec.theta_self = g.value("theta_self", 0.3);
      c.sim.sign_spec.cross_loading = g.value("cross_loading", 0.0);
      c.sim.sign_spec.participation = g.value("participation", 1.0);
    }
    c.sim.volume_law.sigma = s.value("volume_sigma", 1.1);
    c.sim.impact_exponent = s.value("impact_exponent", 0.5);
    c.sim.noise_std = s.value("noise_std", 0.0);
    c.sim.initial_log_price = s.value("initial_log_price", 0.0);
    c.sim.t_cut = s.value("t_cut", c.t_cut);
    c.sim.burn_in = s.value("burn_in", -1L);
    c.sim.slots_per_day = s.value("slots_per_day", SessionGrid::kSessionSlots);
    c.sim.start_date = s.value("start_date", std::string("2008-01-02"));
  }
  c.sim.seed = j.value("sim_seed", c.seed);
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json j{{"universe", c.universe},
         {"data_dir", c.data_dir.string()},
         {"out_dir", c.out_dir.string()},
         {"t_max", c.t_max},
         {"t_cut", c.t_cut},
         {"scenario", c.scenario},
         {"weights", c.weights},
         {"seed", c.seed},
         {"budget", c.budget},
         {"threads", c.threads},
         {"calibrate_stock", c.calibrate_stock},
         {"use_fitted_correlators", c.use_fitted_correlators},
         {"total_noise_d_eta", c.total_noise_d_eta},
         {"fit_lo", c.fit_lo},
         {"fit_hi", c.fit_hi},
         {"volume_bins", c.volume_bins},
         {"emit_ticks", c.emit_ticks}};
  j["simulate"] = json{{"n_stocks", c.sim.n_stocks},
                       {"n_days", c.sim.n_days},
                       {"kernel_self", kernel_to_json(c.sim.kernel_self)},
                       {"kernel_cross", kernel_to_json(c.sim.kernel_cross)},
                       {"signs",
                        json{{"gamma_self", c.sim.sign_spec.gamma_self},
                             {"theta_self", c.sim.sign_spec.theta_self},
                             {"cross_loading", c.sim.sign_spec.cross_loading},
                             {"participation", c.sim.sign_spec.participation}}},
                       {"volume_sigma", c.sim.volume_law.sigma},
                       {"impact_exponent", c.sim.impact_exponent},
                       {"noise_std", c.sim.noise_std},
                       {"initial_log_price", c.sim.initial_log_price},
                       {"t_cut", c.sim.t_cut},
                       {"burn_in", c.sim.burn_in},
                       {"slots_per_day", c.sim.slots_per_day},
                       {"start_date", c.sim.start_date}};
  return j.dump(2);
}

std::vector<long> make_lag_grid(long lo, long hi, int points_per_decade) {
  if (lo < 1 || hi < lo) throw RangeError("make_lag_grid: need 1 <= lo <= hi");
  std::vector<long> out;
  const double step = std::pow(10.0, 1.0 / points_per_decade);
  double x = static_cast<double>(lo);
  long last = 0;
  while (x <= static_cast<double>(hi) + 0.5) {
    const long lag = std::lround(x);
    if (lag != last && lag >= lo && lag <= hi) {
      out.push_back(lag);
      last = lag;
    }
    x *= step;
  }
  if (out.empty() || out.back() != hi) out.push_back(hi);
  return out;
}

LagCurve materialize_fitted_theta(double theta0, const PowerLawFit& fit, long hi) {
  LagCurve out;
  out.min_lag = 0;
  out.values.resize(static_cast<std::size_t>(hi) + 1);
  out.values[0] = theta0;
  for (long g = 1; g <= hi; ++g)
    out.values[static_cast<std::size_t>(g)] = fit.eval(static_cast<double>(g));
  return out;
}

// --- ingest -------------------------------------------------------------------

std::string cmd_ingest(const RunConfig& config) {
  if (config.universe.empty()) throw InputError("ingest: empty universe");
  if (!fs::exists(config.data_dir))
    throw InputError("ingest: data_dir does not exist: " + config.data_dir.string());

  json summary;
  json errors = json::array();
  long files_seen = 0;
  for (const std::string& sym : config.universe) {
    // collect dates from <SYM>_<DATE>_trades.csv
    std::vector<std::string> dates;
    const std::string prefix = sym + "_";
    for (const auto& entry : fs::directory_iterator(config.data_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind(prefix, 0) != 0) continue;
      const std::string suffix = "_trades.csv";
      if (name.size() <= prefix.size() + suffix.size()) continue;
      if (name.substr(name.size() - suffix.size()) != suffix) continue;
      dates.push_back(name.substr(prefix.size(), name.size() - prefix.size() - suffix.size()));
      ++files_seen;
    }
    std::sort(dates.begin(), dates.end());

    std::vector<BarSeries> days;
    long rejected = 0;
    long crossed = 0;
    for (const std::string& date : dates) {
      const fs::path trades_path = config.data_dir / (sym + "_" + date + "_trades.csv");
      const fs::path quotes_path = config.data_dir / (sym + "_" + date + "_quotes.csv");
      try {
        if (!fs::exists(quotes_path)) throw InputError("missing quotes file for " + date);
        RawDay raw;
        raw.stock.symbol = sym;
        raw.date = date;
        raw.trades = io::read_trades_csv(trades_path);
        raw.quotes = io::read_quotes_csv(quotes_path);
        BuildStats stats;
        days.push_back(build_bar_series(raw, &stats));
        crossed += stats.crossed_quotes_dropped;
      } catch (const Error& e) {
        ++rejected;
        errors.push_back({{"stock", sym}, {"date", date}, {"error", e.what()}});
      }
    }
    if (days.empty()) {
      summary[sym] = {{"days_built", 0}, {"days_rejected", rejected}};
      continue;
    }
    auto normalized = normalize_volumes(std::move(days));
    for (const BarSeries& bars : normalized.days)
      io::write_bar_csv(bars_dir(config) / (sym + "_" + bars.grid.date + ".csv"), bars);
    summary[sym] = {{"days_built", normalized.days.size()},
                    {"days_rejected", rejected},
                    {"crossed_quotes_dropped", crossed},
                    {"mean_shares_per_slot", normalized.mean_volume}};
  }
  if (files_seen == 0)
    throw InputError("ingest: no <STOCK>_<DATE>_trades.csv files for universe in " +
                     config.data_dir.string());

  json out{{"stage", "ingest"}, {"stocks", summary}};
  if (!errors.empty()) out["errors"] = errors;
  write_json(bars_dir(config) / "summary.json", out);
  if (!errors.empty())
    throw InputError("ingest: " + std::to_string(errors.size()) +
                     " malformed or incomplete day(s); see bars/summary.json");
  return out.dump();
}

// --- simulate -----------------------------------------------------------------

void emit_ticks_for_day(const BarSeries& bars, const fs::path& data_dir, double shares_scale) {
  std::vector<TickRecord> trades;
  std::vector<QuoteRecord> quotes;
  const int slots = bars.grid.slots;
  quotes.reserve(static_cast<std::size_t>(slots));
  long k = 0;  // running signed trade count drives a strictly monotone price code
  bool first_trade = true;
  for (int t = 0; t < slots; ++t) {
    const double mid = std::exp(bars.log_mid[static_cast<std::size_t>(t)]);
    quotes.push_back({t, mid - 0.005 * mid, mid + 0.005 * mid});
    const SignValue s = bars.sign[static_cast<std::size_t>(t)];
    if (s == 0) continue;
    const long shares = std::max<long>(2, std::llround(bars.volume[static_cast<std::size_t>(t)] *
                                                       shares_scale));
    if (first_trade) {
      // primer so the day's first classified trade carries the intended sign
      trades.push_back({t, 50.0 * std::exp(2e-4 * static_cast<double>(k)), 1});
      k += s;
      trades.push_back({t, 50.0 * std::exp(2e-4 * static_cast<double>(k)), shares - 1});
      first_trade = false;
    } else {
      k += s;
      trades.push_back({t, 50.0 * std::exp(2e-4 * static_cast<double>(k)), shares});
    }
  }
  const std::string sym = bars.stock.symbol;
  io::write_trades_csv(data_dir / (sym + "_" + bars.grid.date + "_trades.csv"), trades);
  io::write_quotes_csv(data_dir / (sym + "_" + bars.grid.date + "_quotes.csv"), quotes);
}

std::string cmd_simulate(const RunConfig& config) {
  SimConfig sim = config.sim;
  if (!config.universe.empty() && static_cast<int>(config.universe.size()) != sim.n_stocks)
    throw InputError("simulate: universe size differs from simulate.n_stocks");

  SyntheticPanel panel = simulate_market(sim);
  for (std::size_t s = 0; s < panel.stocks.size(); ++s) {
    const std::string sym =
        config.universe.empty() ? panel.stocks[s].front().stock.symbol : config.universe[s];
    for (BarSeries& bars : panel.stocks[s]) {
      bars.stock.symbol = sym;
      io::write_bar_csv(bars_dir(config) / (sym + "_" + bars.grid.date + ".csv"), bars);
      if (config.emit_ticks) emit_ticks_for_day(bars, config.data_dir);
    }
  }

  json truth = json::parse(config_to_json(config))["simulate"];
  truth["latent_exponent"] = panel.latent_exponent;
  truth["seed"] = sim.seed;
  write_json(config.out_dir / "ground_truth.json", truth);

  json out{{"stage", "simulate"},
           {"n_stocks", sim.n_stocks},
           {"n_days", sim.n_days},
           {"latent_exponent", panel.latent_exponent},
           {"emit_ticks", config.emit_ticks}};
  return out.dump();
}

// --- estimate -----------------------------------------------------------------

std::map<std::string, std::vector<BarSeries>> load_bars(const fs::path& out_dir,
                                                        const std::vector<std::string>& universe) {
  const fs::path dir = out_dir / "bars";
  if (!fs::exists(dir)) throw InputError("estimate: bars directory missing: " + dir.string());
  std::map<std::string, std::vector<BarSeries>> out;
  for (const std::string& sym : universe) {
    std::vector<fs::path> files;
    const std::string prefix = sym + "_";
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind(prefix, 0) == 0 && name.substr(name.size() - 4) == ".csv")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<BarSeries> days;
    days.reserve(files.size());
    for (const fs::path& f : files) days.push_back(io::read_bar_csv(f));
    if (days.empty()) throw InputError("estimate: no bar files for " + sym);
    out.emplace(sym, std::move(days));
  }
  return out;
}

namespace {

struct PairAccum {
  std::vector<double> num;
  std::vector<long long> cnt;
  void init(long t_max) {
    num.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
    cnt.assign(static_cast<std::size_t>(t_max) + 1, 0);
  }
  void merge(const PairAccum& other) {
    for (std::size_t k = 0; k < num.size(); ++k) {
      num[k] += other.num[k];
      cnt[k] += other.cnt[k];
    }
  }
};

struct EstimateAccums {
  // ordered (i, j) flattened, diagonal included for self response/correlator
  std::vector<PairAccum> response, theta;
  // unordered i < j
  std::vector<PairAccum> diffusion;
  std::size_t universe = 0;

  void init(std::size_t u, long t_max) {
    universe = u;
    response.resize(u * u);
    theta.resize(u * u);
    diffusion.resize(u * u);
    for (std::size_t i = 0; i < u; ++i)
      for (std::size_t j = 0; j < u; ++j) {
        response[i * u + j].init(t_max);
        theta[i * u + j].init(t_max);
        if (i < j) diffusion[i * u + j].init(t_max);
      }
  }
  void merge(const EstimateAccums& other) {
    for (std::size_t i = 0; i < universe; ++i)
      for (std::size_t j = 0; j < universe; ++j) {
        response[i * universe + j].merge(other.response[i * universe + j]);
        theta[i * universe + j].merge(other.theta[i * universe + j]);
        if (i < j) diffusion[i * universe + j].merge(other.diffusion[i * universe + j]);
      }
  }
};

LagCurve accum_to_curve(const PairAccum& acc, long min_lag, long t_max,
                        std::vector<long long>* counts) {
  LagCurve curve;
  curve.min_lag = min_lag;
  curve.values.resize(static_cast<std::size_t>(t_max - min_lag + 1));
  if (counts) counts->resize(curve.values.size());
  for (long tau = min_lag; tau <= t_max; ++tau) {
    const auto ai = static_cast<std::size_t>(tau);
    const auto ci = static_cast<std::size_t>(tau - min_lag);
    curve.values[ci] =
        acc.cnt[ai] > 0 ? acc.num[ai] / static_cast<double>(acc.cnt[ai]) : kNaN;
    if (counts) (*counts)[ci] = acc.cnt[ai];
  }
  return curve;
}

}  // namespace

std::string cmd_estimate(const RunConfig& config) {
  if (config.universe.size() < 2) throw InputError("estimate: universe must list >= 2 stocks");
  const auto bars = load_bars(config.out_dir, config.universe);
  const std::size_t u = config.universe.size();
  const long t_max = config.t_max;

  // date-major accumulation so each day's transforms are shared across pairs
  std::set<std::string> date_set;
  for (const auto& [sym, days] : bars)
    for (const BarSeries& d : days) date_set.insert(d.grid.date);
  const std::vector<std::string> dates(date_set.begin(), date_set.end());

  std::map<std::string, std::map<std::string, const BarSeries*>> by_date;
  for (const auto& [sym, days] : bars)
    for (const BarSeries& d : days) by_date[d.grid.date][sym] = &d;

  const int n_threads =
      std::max(1, std::min<int>(effective_threads(config), static_cast<int>(dates.size())));
  std::vector<EstimateAccums> chunks(static_cast<std::size_t>(n_threads));
  const EstimatorOptions opts{true};

  auto worker = [&](int w) {
    EstimateAccums& acc = chunks[static_cast<std::size_t>(w)];
    acc.init(u, t_max);
    EstimatorOptions day_opts = opts;
    std::map<std::size_t, std::unique_ptr<FftEngine>> engines;
    for (std::size_t di = static_cast<std::size_t>(w); di < dates.size();
         di += static_cast<std::size_t>(n_threads)) {
      const auto& present = by_date.at(dates[di]);
      // one engine per day length
      int slots = 0;
      for (const auto& [sym, series] : present) slots = std::max(slots, series->grid.slots);
      const long maxlag = std::min<long>(t_max, slots - 1);
      const std::size_t need = FftEngine::good_size(static_cast<std::size_t>(slots + maxlag));
      auto it = engines.find(need);
      if (it == engines.end()) it = engines.emplace(need, std::make_unique<FftEngine>(need)).first;
      DaySpectra spectra(*it->second);

      for (std::size_t i = 0; i < u; ++i) {
        const auto ai = present.find(config.universe[i]);
        if (ai == present.end()) continue;
        for (std::size_t j = 0; j < u; ++j) {
          const auto aj = present.find(config.universe[j]);
          if (aj == present.end()) continue;
          PairAccum& r = acc.response[i * u + j];
          accumulate_response_day(*ai->second, *aj->second, t_max, day_opts, &spectra, r.num,
                                  r.cnt);
          PairAccum& th = acc.theta[i * u + j];
          accumulate_correlator_day(*ai->second, *aj->second, t_max, day_opts, &spectra, th.num,
                                    th.cnt);
          if (i < j) {
            PairAccum& df = acc.diffusion[i * u + j];
            accumulate_diffusion_day(*ai->second, *aj->second, t_max, day_opts, &spectra, df.num,
                                     df.cnt);
          }
        }
      }
    }
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) threads.emplace_back(worker, w);
    for (auto& t : threads) t.join();
  }
  EstimateAccums total = std::move(chunks.front());
  for (std::size_t w = 1; w < chunks.size(); ++w) total.merge(chunks[w]);

  // finalize and write curves
  const fs::path cdir = curves_dir(config);
  std::vector<std::vector<LagCurve>> resp_curves(u, std::vector<LagCurve>(u));
  std::vector<std::vector<LagCurve>> theta_curves(u, std::vector<LagCurve>(u));
  for (std::size_t i = 0; i < u; ++i) {
    for (std::size_t j = 0; j < u; ++j) {
      std::vector<long long> counts;
      resp_curves[i][j] = accum_to_curve(total.response[i * u + j], 1, t_max, &counts);
      const std::string& si = config.universe[i];
      const std::string& sj = config.universe[j];
      if (i == j) {
        io::write_curve_csv(cdir / stock_name("response_self", si), resp_curves[i][j], &counts);
      } else {
        io::write_curve_csv(cdir / pair_name("response", si, sj), resp_curves[i][j], &counts);
      }
      theta_curves[i][j] = accum_to_curve(total.theta[i * u + j], 0, t_max, &counts);
      if (i == j) {
        io::write_curve_csv(cdir / stock_name("theta_self", si), theta_curves[i][j], &counts);
      } else {
        io::write_curve_csv(cdir / pair_name("theta_cross", si, sj), theta_curves[i][j], &counts);
      }
    }
  }
  for (std::size_t i = 0; i < u; ++i) {
    const std::string& si = config.universe[i];
    std::vector<LagCurve> rp, ra, tp, ta, ts;
    for (std::size_t j = 0; j < u; ++j) {
      if (j == i) continue;
      rp.push_back(resp_curves[i][j]);
      ra.push_back(resp_curves[j][i]);
      tp.push_back(theta_curves[i][j]);
      ta.push_back(theta_curves[j][i]);
      ts.push_back(theta_curves[j][j]);
    }
    io::write_curve_csv(cdir / stock_name("response_passive", si), average_over_partners(rp));
    io::write_curve_csv(cdir / stock_name("response_active", si), average_over_partners(ra));
    io::write_curve_csv(cdir / stock_name("theta_passive", si), average_over_partners(tp));
    io::write_curve_csv(cdir / stock_name("theta_active", si), average_over_partners(ta));
    io::write_curve_csv(cdir / stock_name("theta_avgself", si), average_over_partners(ts));

    PairAccum pooled;
    pooled.init(t_max);
    for (std::size_t j = 0; j < u; ++j) {
      if (j == i) continue;
      pooled.merge(total.diffusion[std::min(i, j) * u + std::max(i, j)]);
    }
    std::vector<long long> counts;
    const LagCurve di = accum_to_curve(pooled, 1, t_max, &counts);
    io::write_curve_csv(cdir / stock_name("diffusion", si), di, &counts);
  }

  // volume profiles at tau = 1
  const fs::path vdir = volume_dir(config);
  for (std::size_t i = 0; i < u; ++i) {
    const std::string& si = config.universe[i];
    std::vector<DayPair> self_days, passive_days, active_days;
    const auto& days_i = bars.at(si);
    for (const BarSeries& d : days_i) self_days.push_back({&d, &d});
    for (std::size_t j = 0; j < u; ++j) {
      if (j == i) continue;
      const auto& days_j = bars.at(config.universe[j]);
      std::size_t ki = 0, kj = 0;
      while (ki < days_i.size() && kj < days_j.size()) {
        if (days_i[ki].grid.date < days_j[kj].grid.date) ++ki;
        else if (days_j[kj].grid.date < days_i[ki].grid.date) ++kj;
        else {
          passive_days.push_back({&days_i[ki], &days_j[kj]});
          active_days.push_back({&days_j[kj], &days_i[ki]});
          ++ki;
          ++kj;
        }
      }
    }
    // shared log bins over the stock's observed nonzero volumes
    double v_min = std::numeric_limits<double>::infinity(), v_max = 0.0;
    for (const BarSeries& d : days_i)
      for (double v : d.volume)
        if (v > 0.0) {
          v_min = std::min(v_min, v);
          v_max = std::max(v_max, v);
        }
    if (!(v_max > 0.0)) throw InputError("estimate: stock " + si + " has no traded volume");
    if (v_min >= v_max) v_min = v_max * 0.5;
    const auto edges = log_bins(v_min, v_max, config.volume_bins);

    auto write_profile = [&](const std::string& stat, const VolumeProfile& prof) {
      io::Table t;
      t.columns = {"bin_lo", "bin_hi", "v_center", "response", "count", "density"};
      for (std::size_t k = 0; k + 1 < prof.bin_edges.size(); ++k)
        t.rows.push_back({prof.bin_edges[k], prof.bin_edges[k + 1], prof.bin_center[k],
                          prof.response[k], static_cast<double>(prof.count[k]),
                          prof.density[k]});
      io::write_table_csv(vdir / stock_name(stat, si), t);
    };
    write_profile("profile_self",
                  volume_conditioned_response(std::span<const DayPair>(self_days),
                                              ConditioningSide::own, 1, edges));
    write_profile("profile_c_passive",
                  volume_conditioned_response(std::span<const DayPair>(passive_days),
                                              ConditioningSide::own, 1, edges));
    write_profile("profile_c_active",
                  volume_conditioned_response(std::span<const DayPair>(active_days),
                                              ConditioningSide::own, 1, edges));
    write_profile("profile_s_passive",
                  volume_conditioned_response(std::span<const DayPair>(passive_days),
                                              ConditioningSide::partner, 1, edges));
    write_profile("profile_s_active",
                  volume_conditioned_response(std::span<const DayPair>(active_days),
                                              ConditioningSide::partner, 1, edges));
  }

  json out{{"stage", "estimate"},
           {"stocks", config.universe.size()},
           {"pairs", u * (u - 1)},
           {"days", dates.size()},
           {"t_max", t_max}};
  return out.dump();
}

// --- fit ----------------------------------------------------------------------

namespace {

PowerLawFit fit_profile(const io::Table& profile, double hi_cap) {
  std::vector<double> x, y;
  for (const auto& row : profile.rows) {
    x.push_back(row[2]);  // v_center
    y.push_back(row[3]);  // response
  }
  const double lo = *std::min_element(x.begin(), x.end());
  return fit_power_law(x, y, lo * 0.999, hi_cap, PowerLawKind::growth);
}

}  // namespace

StockFits load_fits(const fs::path& out_dir, const std::string& stock) {
  const json j = read_json(out_dir / "fits" / ("fits_" + stock + ".json"));
  StockFits f;
  f.theta_self = fit_from_json(j.at("theta").at("self"));
  f.theta_passive = fit_from_json(j.at("theta").at("passive"));
  f.theta_active = fit_from_json(j.at("theta").at("active"));
  f.theta_avgself = fit_from_json(j.at("theta").at("avgself"));
  f.theta0_self = j.at("theta").at("self").at("theta0").get<double>();
  f.theta0_passive = j.at("theta").at("passive").at("theta0").get<double>();
  f.theta0_active = j.at("theta").at("active").at("theta0").get<double>();
  f.theta0_avgself = j.at("theta").at("avgself").at("theta0").get<double>();
  f.vol_self = fit_from_json(j.at("volume").at("self"));
  f.vol_c_passive = fit_from_json(j.at("volume").at("c_passive"));
  f.vol_c_active = fit_from_json(j.at("volume").at("c_active"));
  f.vol_s_passive = fit_from_json(j.at("volume").at("s_passive"));
  f.vol_s_active = fit_from_json(j.at("volume").at("s_active"));
  f.constants.f_self_passive = j.at("constants").at("f_self_passive").get<double>();
  f.constants.f_self_active = j.at("constants").at("f_self_active").get<double>();
  f.constants.g_cross_passive = j.at("constants").at("g_cross_passive").get<double>();
  f.constants.g_cross_active = j.at("constants").at("g_cross_active").get<double>();
  f.v_products.ll = j.at("v_products").at("ll").get<double>();
  f.v_products.ii = j.at("v_products").at("ii").get<double>();
  f.v_products.li = j.at("v_products").at("li").get<double>();
  f.v_products.il = j.at("v_products").at("il").get<double>();
  return f;
}

std::string cmd_fit(const RunConfig& config) {
  if (config.universe.empty()) throw InputError("fit: empty universe");
  const auto bars = load_bars(config.out_dir, config.universe);
  const fs::path cdir = curves_dir(config);
  const fs::path vdir = volume_dir(config);

  for (const std::string& sym : config.universe) {
    json jf;
    // correlator fits over [fit_lo, fit_hi]
    for (const std::string stat : {"self", "passive", "active", "avgself"}) {
      const std::string file =
          (stat == "self") ? stock_name("theta_self", sym) : stock_name("theta_" + stat, sym);
      const LagCurve curve = io::read_curve_csv(cdir / file);
      const PowerLawFit fit =
          fit_power_law(curve, config.fit_lo, std::min(config.fit_hi, curve.max_lag()),
                        PowerLawKind::decay);
      json node = fit_to_json(fit);
      node["theta0"] = curve.at(0);
      jf["theta"][stat] = node;
    }
    // volume-impact fits restricted to below-average volumes (v <= 1)
    const std::map<std::string, std::string> profs{{"self", "profile_self"},
                                                   {"c_passive", "profile_c_passive"},
                                                   {"c_active", "profile_c_active"},
                                                   {"s_passive", "profile_s_passive"},
                                                   {"s_active", "profile_s_active"}};
    std::map<std::string, PowerLawFit> vol_fits;
    for (const auto& [key, stat] : profs) {
      const io::Table prof = io::read_table_csv(vdir / stock_name(stat, sym));
      vol_fits[key] = fit_profile(prof, 1.0);
      jf["volume"][key] = fit_to_json(vol_fits[key]);
    }

    // impact constants and volume product averages need the bars again
    const auto& days_i = bars.at(sym);
    std::vector<DayPair> self_days, passive_days, active_days;
    for (const BarSeries& d : days_i) self_days.push_back({&d, &d});
    for (const std::string& other : config.universe) {
      if (other == sym) continue;
      const auto& days_j = bars.at(other);
      std::size_t ki = 0, kj = 0;
      while (ki < days_i.size() && kj < days_j.size()) {
        if (days_i[ki].grid.date < days_j[kj].grid.date) ++ki;
        else if (days_j[kj].grid.date < days_i[ki].grid.date) ++kj;
        else {
          passive_days.push_back({&days_i[ki], &days_j[kj]});
          active_days.push_back({&days_j[kj], &days_i[ki]});
          ++ki;
          ++kj;
        }
      }
    }
    VolumeImpactConstants constants;
    constants.f_self_passive = mean_fitted_impact(std::span<const DayPair>(self_days),
                                                  ConditioningSide::own, vol_fits["c_passive"]);
    constants.f_self_active = mean_fitted_impact(std::span<const DayPair>(active_days),
                                                 ConditioningSide::own, vol_fits["c_active"]);
    constants.g_cross_passive = mean_fitted_impact(std::span<const DayPair>(passive_days),
                                                   ConditioningSide::partner,
                                                   vol_fits["s_passive"]);
    constants.g_cross_active = mean_fitted_impact(std::span<const DayPair>(active_days),
                                                  ConditioningSide::partner,
                                                  vol_fits["s_active"]);
    jf["constants"] = {{"f_self_passive", constants.f_self_passive},
                       {"f_self_active", constants.f_self_active},
                       {"g_cross_passive", constants.g_cross_passive},
                       {"g_cross_active", constants.g_cross_active}};

    const VolumeProductAverages v = volume_product_averages(
        std::span<const DayPair>(passive_days), vol_fits["c_passive"], vol_fits["c_active"],
        vol_fits["s_passive"], vol_fits["s_active"]);
    jf["v_products"] = {{"ll", v.ll}, {"ii", v.ii}, {"li", v.li}, {"il", v.il}};

    write_json(fits_dir(config) / ("fits_" + sym + ".json"), jf);
  }
  json out{{"stage", "fit"}, {"stocks", config.universe.size()}};
  return out.dump();
}

// --- calibrate ------------------------------------------------------------------

namespace {

Eigen::VectorXd curve_on_grid(const LagCurve& curve, std::span<const long> lags,
                              const char* name) {
  Eigen::VectorXd v(static_cast<long>(lags.size()));
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const double x = curve.at(lags[k]);
    if (std::isnan(x))
      throw InputError(std::string(name) + ": empirical curve lacks lag " +
                       std::to_string(lags[k]));
    v(static_cast<long>(k)) = x;
  }
  return v;
}

}  // namespace

CalibrationOutcome run_calibration(const RunConfig& config) {
  const std::string ref =
      config.calibrate_stock.empty() ? config.universe.front() : config.calibrate_stock;
  const fs::path cdir = curves_dir(config);
  const StockFits fits = load_fits(config.out_dir, ref);
  const long t_cut = config.t_cut;

  const LagCurve resp_passive = io::read_curve_csv(cdir / stock_name("response_passive", ref));
  const LagCurve resp_active = io::read_curve_csv(cdir / stock_name("response_active", ref));
  const LagCurve diffusion = io::read_curve_csv(cdir / stock_name("diffusion", ref));

  // correlator curves entering matrices: fitted tail by default
  LagCurve th_p, th_a, th_s, th_as;
  if (config.use_fitted_correlators) {
    th_p = materialize_fitted_theta(fits.theta0_passive, fits.theta_passive, t_cut);
    th_a = materialize_fitted_theta(fits.theta0_active, fits.theta_active, t_cut);
    th_s = materialize_fitted_theta(fits.theta0_self, fits.theta_self, t_cut);
    th_as = materialize_fitted_theta(fits.theta0_avgself, fits.theta_avgself, t_cut);
  } else {
    th_p = io::read_curve_csv(cdir / stock_name("theta_passive", ref));
    th_a = io::read_curve_csv(cdir / stock_name("theta_active", ref));
    th_s = io::read_curve_csv(cdir / stock_name("theta_self", ref));
    th_as = io::read_curve_csv(cdir / stock_name("theta_avgself", ref));
  }

  // response lag grid, restricted to lags present in both empirical curves
  std::vector<long> grid = make_lag_grid(1, std::min(config.fit_hi, config.t_max));
  {
    std::vector<long> kept;
    for (long lag : grid)
      if (resp_passive.covers(lag, lag) && !std::isnan(resp_passive.at(lag)) &&
          resp_active.covers(lag, lag) && !std::isnan(resp_active.at(lag)))
        kept.push_back(lag);
    grid = std::move(kept);
    if (grid.size() < 8) throw InputError("calibrate: too few usable response lags");
  }

  const Eigen::MatrixXd rows_p1 =
      build_sign_matrix_rows(th_p, th_a, t_cut, SignMatrixKind::passive_I, grid);
  const Eigen::MatrixXd rows_a1 =
      build_sign_matrix_rows(th_p, th_a, t_cut, SignMatrixKind::active_I, grid);
  const Eigen::MatrixXd rows_s2p =
      build_sign_matrix_rows(th_as, th_as, t_cut, SignMatrixKind::avg_self_II, grid);
  const Eigen::MatrixXd rows_s2a =
      build_sign_matrix_rows(th_s, th_s, t_cut, SignMatrixKind::self_II, grid);

  const Eigen::VectorXd emp_p = curve_on_grid(resp_passive, grid, "calibrate");
  const Eigen::VectorXd emp_a = curve_on_grid(resp_active, grid, "calibrate");

  SearchSpace space;
  space.budget = config.budget;

  CalibrationOutcome out;
  // Scenario I: all response attributed to the sign cross-correlators
  {
    SearchSpace sp = space;
    sp.seed = child_seed(config.seed, 101, 0);
    out.s1_passive =
        calibrate_scenario(ResponseObjective(rows_p1, emp_p / fits.constants.f_self_passive), sp);
    sp.seed = child_seed(config.seed, 102, 0);
    out.s1_active =
        calibrate_scenario(ResponseObjective(rows_a1, emp_a / fits.constants.f_self_active), sp);
  }
  // Scenario II: all response attributed to the sign self-correlators
  {
    SearchSpace sp = space;
    sp.seed = child_seed(config.seed, 201, 0);
    out.s2_passive = calibrate_scenario(
        ResponseObjective(rows_s2p, emp_p / fits.constants.g_cross_passive), sp);
    sp.seed = child_seed(config.seed, 202, 0);
    out.s2_active = calibrate_scenario(
        ResponseObjective(rows_s2a, emp_a / fits.constants.g_cross_active), sp);
  }
  // Scenario III: fixed Scenario-I curves, refit the cross-kernel channel per weight
  {
    WeightScanInputs inputs;
    inputs.rows_passive = rows_s2p;
    inputs.rows_active = rows_s2a;
    inputs.emp_passive = emp_p;
    inputs.emp_active = emp_a;
    Eigen::VectorXd g1(t_cut), g2(t_cut);
    for (long s = 1; s <= t_cut; ++s) {
      g1(s - 1) = kernel_eval(out.s1_passive.best, static_cast<double>(s));
      g2(s - 1) = kernel_eval(out.s1_active.best, static_cast<double>(s));
    }
    inputs.s1_passive = rows_p1 * g1;
    inputs.s1_active = rows_a1 * g2;
    inputs.constants = fits.constants;
    SearchSpace sp = space;
    sp.seed = child_seed(config.seed, 301, 0);
    auto results = scan_weights(inputs, config.weights, sp);

    // diffusion ranking
    DiffusionRankContext ctx;
    ctx.g_self = out.s1_passive.best;
    ctx.g_avg_self = out.s1_active.best;
    ctx.v = fits.v_products;
    ctx.total_noise = config.total_noise_d_eta;
    ctx.t_cut = t_cut;
    for (long lag = 1; lag <= std::min<long>(1024, config.t_max); lag *= 2)
      ctx.lags.push_back(lag);
    const LagCurve emp_scaling_full = diffusion_scaling(diffusion);
    {
      std::vector<long> kept;
      for (long lag : ctx.lags)
        if (emp_scaling_full.covers(lag, lag) && !std::isnan(emp_scaling_full.at(lag)))
          kept.push_back(lag);
      ctx.lags = std::move(kept);
      if (ctx.lags.empty()) throw InputError("calibrate: empirical diffusion curve unusable");
    }
    const long theta_hi = ctx.lags.back() + t_cut;
    if (config.use_fitted_correlators) {
      ctx.theta_passive = materialize_fitted_theta(fits.theta0_passive, fits.theta_passive, theta_hi);
      ctx.theta_active = materialize_fitted_theta(fits.theta0_active, fits.theta_active, theta_hi);
      ctx.theta_self = materialize_fitted_theta(fits.theta0_self, fits.theta_self, theta_hi);
      ctx.theta_avg_self =
          materialize_fitted_theta(fits.theta0_avgself, fits.theta_avgself, theta_hi);
    } else {
      if (config.t_max < theta_hi)
        throw InputError("calibrate: raw correlators do not reach lag " +
                         std::to_string(theta_hi) + "; use fitted correlators");
      ctx.theta_passive = io::read_curve_csv(cdir / stock_name("theta_passive", ref));
      ctx.theta_active = io::read_curve_csv(cdir / stock_name("theta_active", ref));
      ctx.theta_self = io::read_curve_csv(cdir / stock_name("theta_self", ref));
      ctx.theta_avg_self = io::read_curve_csv(cdir / stock_name("theta_avgself", ref));
    }
    out.ranked = rank_by_diffusion(std::move(results), emp_scaling_full, ctx);
    out.selected_weight = out.ranked.front().weight;

    // Scenario I / II diffusion errors for the same comparison
    std::vector<double> emp;
    for (long lag : ctx.lags) emp.push_back(emp_scaling_full.at(lag));
    DiffusionInputs din;
    din.g_self = ctx.g_self;
    din.g_avg_self = ctx.g_avg_self;
    din.g_passive = out.s2_passive.best;
    din.g_active = out.s2_active.best;
    din.theta_passive = ctx.theta_passive;
    din.theta_active = ctx.theta_active;
    din.theta_self = ctx.theta_self;
    din.theta_avg_self = ctx.theta_avg_self;
    din.v = fits.v_products;
    din.total_noise = ctx.total_noise;
    auto scaling_chi2 = [&](Scenario sc) {
      const auto d = theoretical_diffusion(sc, din, ctx.lags, t_cut);
      std::vector<double> model;
      for (std::size_t k = 0; k < d.size(); ++k)
        model.push_back(std::sqrt(std::fabs(d[k]) / static_cast<double>(ctx.lags[k])));
      return chi2_normalized(std::span<const double>(emp), std::span<const double>(model));
    };
    out.chi2_diffusion_s1 = scaling_chi2(Scenario::I);
    out.chi2_diffusion_s2 = scaling_chi2(Scenario::II);
  }
  return out;
}

std::string cmd_calibrate(const RunConfig& config) {
  if (config.universe.empty()) throw InputError("calibrate: empty universe");
  const CalibrationOutcome outcome = run_calibration(config);

  auto result_to_json = [](const CalibrationResult& r) {
    json t = json::array();
    for (const TracePoint& p : r.trace)
      t.push_back({{"iteration", p.iteration}, {"chi2", p.chi2}});
    return json{{"params", kernel_to_json(r.best)},
                {"chi2_response", r.chi2_response},
                {"chi2_diffusion", r.chi2_diffusion},
                {"iterations", r.iterations},
                {"trace", t}};
  };
  json scen3 = json::array();
  for (const WeightResult& wr : outcome.ranked)
    scen3.push_back({{"w", wr.weight},
                     {"passive", result_to_json(wr.passive)},
                     {"active", result_to_json(wr.active)},
                     {"chi2_diffusion", wr.chi2_diffusion}});
  const json report{
      {"stage", "calibrate"},
      {"stock", config.calibrate_stock.empty() ? config.universe.front() : config.calibrate_stock},
      {"seed", config.seed},
      {"budget", config.budget},
      {"scenario_I",
       {{"passive", result_to_json(outcome.s1_passive)},
        {"active", result_to_json(outcome.s1_active)},
        {"chi2_diffusion", outcome.chi2_diffusion_s1}}},
      {"scenario_II",
       {{"passive", result_to_json(outcome.s2_passive)},
        {"active", result_to_json(outcome.s2_active)},
        {"chi2_diffusion", outcome.chi2_diffusion_s2}}},
      {"scenario_III", scen3},
      {"selected_w", outcome.selected_weight}};
  write_json(calib_dir(config) / "calibration.json", report);
  json out{{"stage", "calibrate"},
           {"selected_w", outcome.selected_weight},
           {"chi2_response_s3_passive", outcome.ranked.front().passive.chi2_response},
           {"chi2_diffusion_s3", outcome.ranked.front().chi2_diffusion}};
  return out.dump();
}

// --- report -------------------------------------------------------------------

std::string cmd_report(const RunConfig& config) {
  if (config.universe.empty()) throw InputError("report: empty universe");
  const std::string ref =
      config.calibrate_stock.empty() ? config.universe.front() : config.calibrate_stock;
  const fs::path cdir = curves_dir(config);
  const fs::path vdir = volume_dir(config);
  const fs::path rdir = report_dir(config);
  const long t_cut = config.t_cut;

  const json calib = read_json(calib_dir(config) / "calibration.json");
  const StockFits fits = load_fits(config.out_dir, ref);
  const LagCurve resp_passive = io::read_curve_csv(cdir / stock_name("response_passive", ref));
  const LagCurve resp_active = io::read_curve_csv(cdir / stock_name("response_active", ref));
  const LagCurve diffusion = io::read_curve_csv(cdir / stock_name("diffusion", ref));

  // 1) self response vs volume with both candidate laws
  {
    const io::Table prof = io::read_table_csv(vdir / stock_name("profile_self", ref));
    std::vector<double> x, y;
    for (const auto& row : prof.rows) {
      x.push_back(row[2]);
      y.push_back(row[3]);
    }
    const double lo = *std::min_element(x.begin(), x.end());
    const PowerLawFit pf = fit_power_law(x, y, lo * 0.999, 1.0, PowerLawKind::growth);
    const LogFit lf = fit_log(x, y, lo * 0.999, 1.0);
    io::Table t;
    t.columns = {"v_center", "response", "power_law_fit", "log_fit", "density"};
    for (const auto& row : prof.rows)
      t.rows.push_back({row[2], row[3], pf.eval(row[2]), lf.eval(row[2]), row[5]});
    io::write_table_csv(rdir / "fig_volume_response_self.csv", t);
  }
  // 2) cross responses vs volume, four channels
  {
    io::Table t;
    t.columns = {"v_center", "c_passive", "c_active", "s_passive", "s_active"};
    const io::Table cp = io::read_table_csv(vdir / stock_name("profile_c_passive", ref));
    const io::Table ca = io::read_table_csv(vdir / stock_name("profile_c_active", ref));
    const io::Table sp = io::read_table_csv(vdir / stock_name("profile_s_passive", ref));
    const io::Table sa = io::read_table_csv(vdir / stock_name("profile_s_active", ref));
    for (std::size_t k = 0; k < cp.rows.size(); ++k)
      t.rows.push_back(
          {cp.rows[k][2], cp.rows[k][3], ca.rows[k][3], sp.rows[k][3], sa.rows[k][3]});
    io::write_table_csv(rdir / "fig_volume_response_cross.csv", t);
  }
  // 3) volume densities (own and partner conditioning)
  {
    const io::Table own = io::read_table_csv(vdir / stock_name("profile_self", ref));
    const io::Table partner = io::read_table_csv(vdir / stock_name("profile_s_passive", ref));
    io::Table t;
    t.columns = {"v_center", "density_own", "density_partner"};
    for (std::size_t k = 0; k < own.rows.size(); ++k)
      t.rows.push_back({own.rows[k][2], own.rows[k][5], partner.rows[k][5]});
    io::write_table_csv(rdir / "fig_volume_density.csv", t);
  }

  // fitted-correlator matrices for inversion and theoretical curves
  const LagCurve th_p = materialize_fitted_theta(fits.theta0_passive, fits.theta_passive, t_cut);
  const LagCurve th_a = materialize_fitted_theta(fits.theta0_active, fits.theta_active, t_cut);
  const LagCurve th_s = materialize_fitted_theta(fits.theta0_self, fits.theta_self, t_cut);
  const LagCurve th_as = materialize_fitted_theta(fits.theta0_avgself, fits.theta_avgself, t_cut);
  const SignMatrix m_p1 = build_sign_matrix(th_p, th_a, t_cut, SignMatrixKind::passive_I);
  const SignMatrix m_a1 = build_sign_matrix(th_p, th_a, t_cut, SignMatrixKind::active_I);
  const SignMatrix m_s2p = build_sign_matrix(th_as, th_as, t_cut, SignMatrixKind::avg_self_II);
  const SignMatrix m_s2a = build_sign_matrix(th_s, th_s, t_cut, SignMatrixKind::self_II);

  const KernelParams k_s1p = kernel_from_json(calib.at("scenario_I").at("passive").at("params"));
  const KernelParams k_s1a = kernel_from_json(calib.at("scenario_I").at("active").at("params"));
  const KernelParams k_s2p = kernel_from_json(calib.at("scenario_II").at("passive").at("params"));
  const KernelParams k_s2a = kernel_from_json(calib.at("scenario_II").at("active").at("params"));

  const LagCurve per_share_p1 = per_share_response(resp_passive, fits.constants.f_self_passive);
  const LagCurve per_share_a1 = per_share_response(resp_active, fits.constants.f_self_active);
  const LagCurve per_share_p2 = per_share_response(resp_passive, fits.constants.g_cross_passive);
  const LagCurve per_share_a2 = per_share_response(resp_active, fits.constants.g_cross_active);

  // 4) per-share responses, empirical vs calibrated theory (Scenarios I and II)
  {
    const LagCurve theo_p1 = theoretical_response(m_p1, kernel_curve(k_s1p, 1, t_cut));
    const LagCurve theo_a1 = theoretical_response(m_a1, kernel_curve(k_s1a, 1, t_cut));
    const LagCurve theo_p2 = theoretical_response(m_s2p, kernel_curve(k_s2p, 1, t_cut));
    const LagCurve theo_a2 = theoretical_response(m_s2a, kernel_curve(k_s2a, 1, t_cut));
    io::Table t;
    t.columns = {"tau",         "emp_passive_I", "theo_passive_I", "emp_active_I",
                 "theo_active_I", "emp_passive_II", "theo_passive_II", "emp_active_II",
                 "theo_active_II"};
    for (long lag : make_lag_grid(1, std::min(config.fit_hi, t_cut))) {
      t.rows.push_back({static_cast<double>(lag), per_share_p1.at(lag), theo_p1.at(lag),
                        per_share_a1.at(lag), theo_a1.at(lag), per_share_p2.at(lag),
                        theo_p2.at(lag), per_share_a2.at(lag), theo_a2.at(lag)});
    }
    io::write_table_csv(rdir / "fig_response_per_share.csv", t);
  }
  // 5) empirical kernels from inversion vs fitted forms
  {
    const InversionResult inv_self = invert_response(m_p1, per_share_p1);
    const InversionResult inv_avg = invert_response(m_a1, per_share_a1);
    const InversionResult inv_p = invert_response(m_s2p, per_share_p2);
    const InversionResult inv_a = invert_response(m_s2a, per_share_a2);
    std::cerr << "report: inversion conditions " << inv_self.condition << " " << inv_avg.condition
              << " " << inv_p.condition << " " << inv_a.condition << "\n";
    io::Table t;
    t.columns = {"tau",      "g_self_emp", "g_self_fit", "g_avgself_emp", "g_avgself_fit",
                 "g_p_emp",  "g_p_fit",    "g_a_emp",    "g_a_fit"};
    for (long lag : make_lag_grid(1, t_cut)) {
      t.rows.push_back({static_cast<double>(lag), inv_self.kernel.at(lag),
                        kernel_eval(k_s1p, static_cast<double>(lag)), inv_avg.kernel.at(lag),
                        kernel_eval(k_s1a, static_cast<double>(lag)), inv_p.kernel.at(lag),
                        kernel_eval(k_s2p, static_cast<double>(lag)), inv_a.kernel.at(lag),
                        kernel_eval(k_s2a, static_cast<double>(lag))});
    }
    io::write_table_csv(rdir / "fig_kernels_empirical.csv", t);
  }

  // Scenario III curves per weight
  const json& scen3 = calib.at("scenario_III");
  {
    io::Table t;
    t.columns = {"tau"};
    std::vector<LagCurve> passive_curves, active_curves;
    std::vector<double> ws;
    for (const auto& node : scen3) {
      const double w = node.at("w").get<double>();
      ws.push_back(w);
      ScenarioIIIConfig cfg;
      cfg.weight = w;
      cfg.constants = fits.constants;
      cfg.s1_passive_per_share = theoretical_response(m_p1, kernel_curve(k_s1p, 1, t_cut));
      cfg.s1_active_per_share = theoretical_response(m_a1, kernel_curve(k_s1a, 1, t_cut));
      cfg.s2_kernel = kernel_from_json(node.at("passive").at("params"));
      passive_curves.push_back(scenario3_response(cfg, m_s2p, ResponseMode::passive));
      cfg.s2_kernel = kernel_from_json(node.at("active").at("params"));
      active_curves.push_back(scenario3_response(cfg, m_s2a, ResponseMode::active));
      char buf[32];
      std::snprintf(buf, sizeof(buf), "passive_w%.2f", w);
      t.columns.push_back(buf);
      std::snprintf(buf, sizeof(buf), "active_w%.2f", w);
      t.columns.push_back(buf);
    }
    for (long lag : make_lag_grid(1, std::min(config.fit_hi, t_cut))) {
      std::vector<double> row{static_cast<double>(lag)};
      for (std::size_t k = 0; k < ws.size(); ++k) {
        row.push_back(passive_curves[k].at(lag));
        row.push_back(active_curves[k].at(lag));
      }
      t.rows.push_back(row);
    }
    io::write_table_csv(rdir / "fig_scenario3_responses.csv", t);
  }
  // 7) calibrated kernels at the selected weight
  {
    const double selected = calib.at("selected_w").get<double>();
    KernelParams g_p = k_s2p, g_a = k_s2a;
    for (const auto& node : scen3)
      if (node.at("w").get<double>() == selected) {
        g_p = kernel_from_json(node.at("passive").at("params"));
        g_a = kernel_from_json(node.at("active").at("params"));
      }
    io::Table t;
    t.columns = {"tau", "G_self", "G_passive", "G_active"};
    for (long lag : make_lag_grid(1, t_cut))
      t.rows.push_back({static_cast<double>(lag), kernel_eval(k_s1p, static_cast<double>(lag)),
                        kernel_eval(g_p, static_cast<double>(lag)),
                        kernel_eval(g_a, static_cast<double>(lag))});
    io::write_table_csv(rdir / "fig_kernels_calibrated.csv", t);
  }
  // 8) diffusion scaling: empirical vs one theoretical column per weight
  {
    std::vector<long> lags;
    for (long lag = 1; lag <= std::min<long>(1024, config.t_max); lag *= 2) lags.push_back(lag);
    const LagCurve emp_scaling = diffusion_scaling(diffusion);
    DiffusionInputs din;
    din.g_self = k_s1p;
    din.g_avg_self = k_s1a;
    din.theta_passive = materialize_fitted_theta(fits.theta0_passive, fits.theta_passive,
                                                 lags.back() + t_cut);
    din.theta_active =
        materialize_fitted_theta(fits.theta0_active, fits.theta_active, lags.back() + t_cut);
    din.theta_self =
        materialize_fitted_theta(fits.theta0_self, fits.theta_self, lags.back() + t_cut);
    din.theta_avg_self =
        materialize_fitted_theta(fits.theta0_avgself, fits.theta_avgself, lags.back() + t_cut);
    din.v = fits.v_products;
    din.total_noise = config.total_noise_d_eta;

    io::Table t;
    t.columns = {"tau", "empirical"};
    std::vector<std::vector<double>> theo;
    for (const auto& node : scen3) {
      din.g_passive = kernel_from_json(node.at("passive").at("params"));
      din.g_active = kernel_from_json(node.at("active").at("params"));
      theo.push_back(theoretical_diffusion(Scenario::III, din, lags, t_cut));
      char buf[32];
      std::snprintf(buf, sizeof(buf), "theo_w%.2f", node.at("w").get<double>());
      t.columns.push_back(buf);
    }
    for (std::size_t k = 0; k < lags.size(); ++k) {
      std::vector<double> row{static_cast<double>(lags[k]),
                              emp_scaling.covers(lags[k], lags[k]) ? emp_scaling.at(lags[k])
                                                                   : kNaN};
      for (const auto& column : theo)
        row.push_back(std::sqrt(std::fabs(column[k]) / static_cast<double>(lags[k])));
      t.rows.push_back(row);
    }
    io::write_table_csv(rdir / "fig_diffusion_scaling.csv", t);
  }

  json out{{"stage", "report"}, {"stock", ref}, {"files", 8}};
  return out.dump();
}

}  // namespace impactlab::pipeline
