// impactlab: batch frontend for the two-component price-impact pipeline.
//
//   impactlab ingest|simulate|estimate|fit|calibrate|report --config cfg.json
//
// Stages communicate only through files under out_dir. Logging goes to
// stderr; stdout carries a single JSON summary line per command. Exit codes:
// 0 success, 1 computation failure, 2 input error.
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "impactlab/pipeline.hpp"

namespace {

using impactlab::pipeline::RunConfig;

struct CliOverrides {
  std::string config_path;
  long t_cut = -1;
  long t_max = -1;
  long budget = -1;
  int threads = -1;
  std::string seed;
  std::string scenario;
  std::string calibrate_stock;
  std::vector<double> weights;
  std::string data_dir, out_dir;
  bool emit_ticks = false;
};

void add_common(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON configuration file")->required();
  cmd->add_option("--t-cut", ov.t_cut, "matrix/history cutoff in seconds");
  cmd->add_option("--t-max", ov.t_max, "largest estimated lag in seconds");
  cmd->add_option("--budget", ov.budget, "calibration iteration budget");
  cmd->add_option("--threads", ov.threads, "stage-internal worker threads");
  cmd->add_option("--seed", ov.seed, "master RNG seed");
  cmd->add_option("--scenario", ov.scenario, "I, II or III");
  cmd->add_option("--weights", ov.weights, "Scenario III weight grid");
  cmd->add_option("--calibrate-stock", ov.calibrate_stock, "reference stock");
  cmd->add_option("--data-dir", ov.data_dir, "tick data directory");
  cmd->add_option("--out-dir", ov.out_dir, "artifact directory");
  cmd->add_flag("--emit-ticks", ov.emit_ticks, "simulate: also write tick CSVs");
}

RunConfig apply_overrides(const CliOverrides& ov) {
  RunConfig c = impactlab::pipeline::load_config(ov.config_path);
  if (ov.t_cut >= 0) c.t_cut = ov.t_cut;
  if (ov.t_max >= 0) c.t_max = ov.t_max;
  if (ov.budget >= 0) c.budget = ov.budget;
  if (ov.threads >= 0) c.threads = ov.threads;
  if (!ov.seed.empty()) {
    c.seed = std::stoull(ov.seed);
    c.sim.seed = c.seed;
  }
  if (!ov.scenario.empty()) c.scenario = ov.scenario;
  if (!ov.weights.empty()) c.weights = ov.weights;
  if (!ov.calibrate_stock.empty()) c.calibrate_stock = ov.calibrate_stock;
  if (!ov.data_dir.empty()) c.data_dir = ov.data_dir;
  if (!ov.out_dir.empty()) c.out_dir = ov.out_dir;
  if (ov.emit_ticks) c.emit_ticks = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-component price-impact pipeline"};
  app.require_subcommand(1);

  CliOverrides ov;
  std::string stage;
  for (const char* name : {"ingest", "simulate", "estimate", "fit", "calibrate", "report"}) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common(cmd, ov);
    cmd->callback([&stage, name] { stage = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig config = apply_overrides(ov);
    std::string summary;
    if (stage == "ingest") summary = impactlab::pipeline::cmd_ingest(config);
    else if (stage == "simulate") summary = impactlab::pipeline::cmd_simulate(config);
    else if (stage == "estimate") summary = impactlab::pipeline::cmd_estimate(config);
    else if (stage == "fit") summary = impactlab::pipeline::cmd_fit(config);
    else if (stage == "calibrate") summary = impactlab::pipeline::cmd_calibrate(config);
    else if (stage == "report") summary = impactlab::pipeline::cmd_report(config);
    std::cout << summary << "\n";
    return 0;
  } catch (const impactlab::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
