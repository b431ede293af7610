// Command line front end: run one scenario, fit the aggregate models, compare
// all scenarios, or run the oracle suites.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dhflex/config.hpp"
#include "dhflex/econ.hpp"
#include "dhflex/engine.hpp"
#include "dhflex/errors.hpp"
#include "dhflex/report.hpp"
#include "dhflex_oracles/suites.hpp"

namespace fs = std::filesystem;
using namespace dhflex;

namespace {

engine::ScenarioConfig load_config(const std::string& path) {
  return path.empty() ? engine::ScenarioConfig{} : config::load(path);
}

fs::path run_dir(const std::string& out, engine::Scenario s) {
  return fs::path(out) / engine::scenario_name(s);
}

engine::SimulationResult run_and_write(engine::ScenarioConfig cfg, engine::Scenario s,
                                       const std::string& out) {
  cfg.scenario = s;
  std::cerr << "running " << engine::scenario_name(s) << " ...\n";
  engine::SimulationResult r = engine::run(cfg);
  report::write_run(r, cfg, run_dir(out, s).string());
  const econ::ProfitBreakdown p = econ::settle(r, cfg.economics);
  std::cerr << engine::scenario_name(s) << ": profit " << p.profit << " EUR, " << r.elapsed_s
            << " s\n";
  return r;
}

nlohmann::json model_json(const engine::FitReport& f) {
  nlohmann::json j;
  j["samples"] = f.samples;
  j["holdout_rms_c"] = f.holdout_rms;
  if (f.building) {
    const fit::AggregateBuildingModel& m = f.building->model;
    j["building"] = {{"c_a", m.c_a}, {"c_m", m.c_m},         {"u_a", m.u_a},
                     {"h_m", m.h_m}, {"gamma_a", m.gamma_a}, {"gamma_m", m.gamma_m},
                     {"rms_c", m.rms}};
  }
  if (f.tank) {
    const fit::AggregateTankModel& m = *f.tank;
    j["tank"] = {{"c_s", m.c_s}, {"u_s", m.u_s}, {"gamma_s", m.gamma_s}, {"rms_c", m.rms}};
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"District heating flexibility simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", tag;
  bool rerun = false;

  CLI::App* run = app.add_subcommand("run", "simulate one scenario");
  run->add_option("--scenario", tag, "reference, central_active, distributed_active or no_buffer_active")
      ->required();
  run->add_option("--config", config_path, "JSON config; defaults apply without one");
  run->add_option("--out", out_dir, "output directory; the run lands in <out>/<scenario>");

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit the aggregate models on a reference pre-run");
  fit_cmd->add_option("--config", config_path, "JSON config");
  std::string fit_out;
  fit_cmd->add_option("--out", fit_out, "also write fit.json into this directory");

  CLI::App* compare = app.add_subcommand("compare", "compare all four scenarios");
  compare->add_option("--out", out_dir, "directory holding or receiving <scenario>/summary.json");
  compare->add_option("--config", config_path, "JSON config for scenarios that still need a run");
  compare->add_flag("--rerun", rerun, "run every scenario even when a summary exists");

  CLI::App* validate = app.add_subcommand("validate", "run the oracle suites");
  validate->add_option("--config", config_path, "JSON config for the reference fit check");

  CLI11_PARSE(app, argc, argv);

  try {
    const engine::ScenarioConfig cfg = load_config(config_path);

    if (*run) {
      run_and_write(cfg, engine::parse_scenario(tag), out_dir);
      std::cout << run_dir(out_dir, engine::parse_scenario(tag)).string() << "\n";
      return 0;
    }

    if (*fit_cmd) {
      const engine::FitReport f = engine::fit_models(cfg);
      const std::string text = model_json(f).dump(2);
      std::cout << text << "\n";
      if (!fit_out.empty()) {
        fs::create_directories(fit_out);
        std::ofstream(fs::path(fit_out) / "fit.json") << text << "\n";
      }
      return 0;
    }

    if (*compare) {
      std::vector<econ::ReportRow> rows;
      for (engine::Scenario s : engine::kAllScenarios) {
        const fs::path summary = run_dir(out_dir, s) / "summary.json";
        if (rerun || !fs::exists(summary)) run_and_write(cfg, s, out_dir);
        rows.push_back(report::read_summary(summary.string()));
      }
      econ::fill_deltas(rows);
      report::write_comparison(rows, out_dir);
      std::cout << econ::table5_csv(rows) << "\n" << econ::profit_csv(rows);
      const econ::Verdict v = econ::ordering_verdict(rows);
      std::cout << "\nprofit ordering " << (v.holds() ? "holds" : "does not hold") << "\n";
      return 0;
    }

    if (*validate) {
      bool all = true;
      for (const oracle::Check& c : oracle::oracle_suites(cfg)) {
        std::cout << oracle::format_check(c) << "\n";
        all = all && c.pass;
      }
      return all ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
