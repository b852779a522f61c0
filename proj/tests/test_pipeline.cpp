#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "impactlab/pipeline.hpp"

using namespace impactlab;
using pipeline::RunConfig;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

RunConfig small_config(const fs::path& root) {
  RunConfig c;
  c.universe = {"S0", "S1", "S2"};
  c.data_dir = root / "ticks";
  c.out_dir = root / "out";
  c.t_max = 300;
  c.t_cut = 300;
  c.seed = 11;
  c.budget = 4000;
  c.threads = 1;
  c.fit_lo = 5;
  c.fit_hi = 200;
  c.volume_bins = 10;
  c.weights = {0.3, 0.5, 0.7};
  c.sim.n_stocks = 3;
  c.sim.n_days = 2;
  c.sim.slots_per_day = 3000;
  c.sim.t_cut = 300;
  c.sim.seed = 11;
  c.sim.kernel_self = {0.0, 5e-4, 5.0, 0.35};
  c.sim.kernel_cross = {0.0, 8e-5, 5.0, 0.35};
  c.sim.sign_spec = {0.75, 0.3, 0.35, 0.7};
  c.sim.volume_law.sigma = 0.9;
  fs::create_directories(c.data_dir);
  return c;
}

}  // namespace

TEST_CASE("config json round trip") {
  const fs::path root = fresh_dir("impactlab_cfg_test");
  RunConfig c = small_config(root);
  const fs::path cfg_path = root / "config.json";
  {
    std::ofstream out(cfg_path, std::ios::binary);
    out << pipeline::config_to_json(c);
  }
  const RunConfig r = pipeline::load_config(cfg_path);
  CHECK(r.universe == c.universe);
  CHECK(r.t_cut == 300);
  CHECK(r.budget == 4000);
  CHECK(r.weights == c.weights);
  CHECK(r.sim.n_days == 2);
  CHECK(r.sim.kernel_self.gamma_temp == 5e-4);
  CHECK(r.sim.sign_spec.participation == 0.7);
}

TEST_CASE("lag grids are unique, sorted, and span the range") {
  const auto grid = pipeline::make_lag_grid(1, 1000);
  CHECK(grid.front() == 1);
  CHECK(grid.back() == 1000);
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] > grid[k - 1]);
  CHECK(grid.size() > 20);
  CHECK(grid.size() < 100);
}

TEST_CASE("full synthetic pipeline on a small universe") {
  const fs::path root = fresh_dir("impactlab_pipe_test");
  RunConfig c = small_config(root);

  pipeline::cmd_simulate(c);
  CHECK(fs::exists(c.out_dir / "bars" / "S0_2008-01-02.csv"));
  CHECK(fs::exists(c.out_dir / "ground_truth.json"));

  pipeline::cmd_estimate(c);
  // two-stock check scaled up: every ordered pair plus per-stock aggregates
  for (const std::string& s : c.universe) {
    CHECK(fs::exists(c.out_dir / "curves" / ("response_passive_" + s + ".csv")));
    CHECK(fs::exists(c.out_dir / "curves" / ("response_active_" + s + ".csv")));
    CHECK(fs::exists(c.out_dir / "curves" / ("theta_self_" + s + ".csv")));
    CHECK(fs::exists(c.out_dir / "curves" / ("diffusion_" + s + ".csv")));
    CHECK(fs::exists(c.out_dir / "volume" / ("profile_self_" + s + ".csv")));
  }
  CHECK(fs::exists(c.out_dir / "curves" / "response_S0_S1.csv"));
  CHECK(fs::exists(c.out_dir / "curves" / "theta_cross_S2_S1.csv"));

  pipeline::cmd_fit(c);
  CHECK(fs::exists(c.out_dir / "fits" / "fits_S0.json"));
  const auto fits = pipeline::load_fits(c.out_dir, "S0");
  CHECK(fits.constants.f_self_passive > 0.0);
  CHECK(fits.v_products.ll > 0.0);
  CHECK(fits.theta_self.exponent > 0.2);
  CHECK(fits.theta_self.exponent < 1.5);

  pipeline::cmd_calibrate(c);
  CHECK(fs::exists(c.out_dir / "calib" / "calibration.json"));

  pipeline::cmd_report(c);
  const char* figs[] = {"fig_volume_response_self.csv", "fig_volume_response_cross.csv",
                        "fig_volume_density.csv",       "fig_response_per_share.csv",
                        "fig_kernels_empirical.csv",    "fig_scenario3_responses.csv",
                        "fig_kernels_calibrated.csv",   "fig_diffusion_scaling.csv"};
  int n_figs = 0;
  for (const char* f : figs) {
    CHECK(fs::exists(c.out_dir / "report" / f));
    ++n_figs;
  }
  CHECK(n_figs == 8);

  SUBCASE("kernel figure carries the calibrated columns") {
    const io::Table t = io::read_table_csv(c.out_dir / "report" / "fig_kernels_calibrated.csv");
    REQUIRE(t.columns.size() == 4);
    CHECK(t.columns[0] == "tau");
    CHECK(t.columns[1] == "G_self");
    CHECK(t.columns[2] == "G_passive");
    CHECK(t.columns[3] == "G_active");
  }
  SUBCASE("diffusion figure has one theoretical column per weight") {
    const io::Table t = io::read_table_csv(c.out_dir / "report" / "fig_diffusion_scaling.csv");
    CHECK(t.columns.size() == 2 + c.weights.size());
  }

  SUBCASE("stages are idempotent: rerunning reproduces files byte for byte") {
    const std::string resp = slurp(c.out_dir / "curves" / "response_S0_S1.csv");
    const std::string calib = slurp(c.out_dir / "calib" / "calibration.json");
    const std::string fig = slurp(c.out_dir / "report" / "fig_diffusion_scaling.csv");
    pipeline::cmd_estimate(c);
    pipeline::cmd_fit(c);
    pipeline::cmd_calibrate(c);
    pipeline::cmd_report(c);
    CHECK(slurp(c.out_dir / "curves" / "response_S0_S1.csv") == resp);
    CHECK(slurp(c.out_dir / "calib" / "calibration.json") == calib);
    CHECK(slurp(c.out_dir / "report" / "fig_diffusion_scaling.csv") == fig);
  }
}

TEST_CASE("synthetic ticks survive the ingest path") {
  const fs::path root = fresh_dir("impactlab_ticks_test");
  RunConfig c = small_config(root);
  c.emit_ticks = true;
  c.sim.n_days = 1;
  c.sim.slots_per_day = 2000;
  pipeline::cmd_simulate(c);
  CHECK(fs::exists(c.data_dir / "S0_2008-01-02_trades.csv"));

  // reread the simulator's bars, then rebuild them from the ticks
  const auto direct = pipeline::load_bars(c.out_dir, c.universe);
  RunConfig c2 = c;
  c2.out_dir = root / "out2";
  pipeline::cmd_ingest(c2);
  const auto rebuilt = pipeline::load_bars(c2.out_dir, c.universe);

  for (const std::string& sym : c.universe) {
    const BarSeries& a = direct.at(sym)[0];
    const BarSeries& b = rebuilt.at(sym)[0];
    REQUIRE(a.slots() == b.slots());
    CHECK(a.sign == b.sign);  // tick classification reproduces every sign
    for (int t = 0; t < a.slots(); ++t) {
      CHECK(b.log_mid[static_cast<std::size_t>(t)] ==
            doctest::Approx(a.log_mid[static_cast<std::size_t>(t)]).epsilon(1e-9));
      if (a.volume[static_cast<std::size_t>(t)] > 0.0)
        CHECK(b.volume[static_cast<std::size_t>(t)] ==
              doctest::Approx(a.volume[static_cast<std::size_t>(t)]).epsilon(0.05));
    }
  }
}

TEST_CASE("ingest error contract") {
  const fs::path root = fresh_dir("impactlab_ingest_err");
  RunConfig c = small_config(root);
  SUBCASE("empty data dir names the missing inputs") {
    CHECK_THROWS_AS(pipeline::cmd_ingest(c), InputError);
  }
  SUBCASE("malformed tick file is reported per file") {
    {
      std::ofstream out(c.data_dir / "S0_2008-01-02_trades.csv", std::ios::binary);
      out << "ts,price,shares\n0,oops,10\n";
    }
    {
      std::ofstream out(c.data_dir / "S0_2008-01-02_quotes.csv", std::ios::binary);
      out << "ts,bid,ask\n0,10.0,10.1\n";
    }
    CHECK_THROWS_AS(pipeline::cmd_ingest(c), InputError);
    CHECK(fs::exists(c.out_dir / "bars" / "summary.json"));
  }
}
