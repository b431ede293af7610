#include "dhflex/report.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dhflex/config.hpp"
#include "dhflex/csv.hpp"
#include "dhflex/errors.hpp"

namespace dhflex::report {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string summary_json(const engine::SimulationResult& r, const engine::ScenarioConfig& c) {
  const engine::Tallies& t = r.tallies;
  const econ::ProfitBreakdown p = econ::settle(r, c.economics);
  json j;
  j["scenario"] = engine::scenario_name(r.scenario);
  j["week"] = r.week;
  j["week_start_s"] = r.week_start_s;
  j["week_mean_ambient_c"] = r.week_mean_ambient;
  j["energy_kwh"] = {{"consumed", t.consumed},
                     {"produced", t.produced},
                     {"chp_heat", t.chp_heat},
                     {"boiler_heat", t.boiler_heat},
                     {"electricity", t.electricity},
                     {"gas_chp", t.gas_chp},
                     {"gas_boiler", t.gas_boiler},
                     {"network_loss", t.network_loss},
                     {"tank_loss", t.tank_loss},
                     {"central_tank_loss", t.central_tank_loss},
                     {"pump_hydraulic", t.pump_hydraulic},
                     {"dumped", t.dumped},
                     {"storage_change", t.storage_change}};
  j["closure_error"] = t.closure_error;
  j["grid_efficiency"] = t.produced > 0.0 ? t.consumed / t.produced : 0.0;
  j["chp_starts"] = t.chp_starts;
  j["indoor_c"] = {{"min", t.t_i_min}, {"max", t.t_i_max}, {"spread", r.t_i_spread}};
  j["middle_tercile_fraction"] = engine::middle_tercile_fraction(r.trace, r.chp_max_heat);
  j["profit_eur"] = {{"gas_cost", p.gas_cost},
                     {"pump_cost", p.pump_cost},
                     {"heat_revenue", p.heat_revenue},
                     {"electricity_revenue", p.electricity_revenue},
                     {"profit", p.profit}};
  j["planner"] = {{"relaxed_plans", r.relaxed_plans}, {"failed_plans", r.failed_plans}};
  if (r.fit.building) {
    const fit::AggregateBuildingModel& m = r.fit.building->model;
    j["building_model"] = {{"c_a", m.c_a}, {"c_m", m.c_m},         {"u_a", m.u_a},
                           {"h_m", m.h_m}, {"gamma_a", m.gamma_a}, {"gamma_m", m.gamma_m},
                           {"rms", m.rms}};
  }
  if (r.fit.tank) {
    const fit::AggregateTankModel& m = *r.fit.tank;
    j["tank_model"] = {{"c_s", m.c_s}, {"u_s", m.u_s}, {"gamma_s", m.gamma_s}, {"rms", m.rms}};
  }
  j["elapsed_s"] = r.elapsed_s;
  j["config"] = json::parse(config::dump(c));
  return j.dump(2);
}

void write_run(const engine::SimulationResult& r, const engine::ScenarioConfig& c,
               const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    csv::Writer w((fs::path(dir) / "trace.csv").string(),
                  {"time_s", "spot_eur_mwh", "ambient_c", "chp_heat_kw", "boiler_heat_kw",
                   "production_kw", "chp_el_kw", "gas_chp_kw", "gas_boiler_kw", "delivered_kw",
                   "controllable_kw", "network_loss_kw", "tank_loss_kw", "pump_kw", "dumped_kw",
                   "t_supply_c", "t_return_c", "chp_on_fraction", "t_i_mean_c", "t_i_min_c",
                   "t_i_q25_c", "t_i_median_c", "t_i_q75_c", "t_i_max_c", "t_i_std_k",
                   "tank_mean_c", "lambda_eff_eur_mwh", "p_star_kw", "p_b_star_kw", "p_w_star_kw",
                   "priority", "u_pi_kw", "measured_kw"});
    for (const engine::TraceRow& t : r.trace) {
      w.row({t.t_s,        t.spot,       t.ambient,    t.chp_heat,     t.boiler_heat,
             t.production, t.p_el,       t.gas_chp,    t.gas_boiler,   t.delivered,
             t.controllable, t.network_loss, t.tank_loss, t.pump_kw,   t.dumped,
             t.t_supply,   t.t_return,   t.chp_on,     t.t_i_mean,     t.t_i_min,
             t.t_i_q25,    t.t_i_median, t.t_i_q75,    t.t_i_max,      t.t_i_std,
             t.tank_mean,  t.lambda_eff, t.p_star,     t.p_b_star,     t.p_w_star,
             t.p_r,        t.u_pi,       t.measured});
    }
  }
  {
    std::ofstream out(fs::path(dir) / "population.csv");
    out.precision(10);
    out << "building,r_h,r_ih,r_ie,r_ea,r_ia,c_i,c_h,c_e,design_kw,tank\n";
    for (std::size_t b = 0; b < r.population.size(); ++b) {
      const building::Params& p = r.population[b];
      out << b << ',' << p.r_h << ',' << p.r_ih << ',' << p.r_ie << ',' << p.r_ea << ',' << p.r_ia
          << ',' << p.c_i << ',' << p.c_h << ',' << p.c_e << ',' << p.design_kw << ','
          << (b < r.tank_types.size() ? storage::variant_name(r.tank_types[b]) : "none") << '\n';
    }
  }
  write_text(fs::path(dir) / "network.csv", r.network_csv);
  write_text(fs::path(dir) / "summary.json", summary_json(r, c));
}

econ::ReportRow read_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot read " + path, 0);
  try {
    const json j = json::parse(in);
    econ::ReportRow row;
    row.scenario = engine::parse_scenario(j.at("scenario").get<std::string>());
    const json& e = j.at("energy_kwh");
    row.consumed = e.at("consumed").get<double>();
    row.produced = e.at("produced").get<double>();
    row.chp = e.at("chp_heat").get<double>();
    row.boiler = e.at("boiler_heat").get<double>();
    const json& p = j.at("profit_eur");
    row.profit.gas_cost = p.at("gas_cost").get<double>();
    row.profit.pump_cost = p.at("pump_cost").get<double>();
    row.profit.heat_revenue = p.at("heat_revenue").get<double>();
    row.profit.electricity_revenue = p.at("electricity_revenue").get<double>();
    row.profit.profit = p.at("profit").get<double>();
    return row;
  } catch (const json::exception& e) {
    throw IngestError(path + ": " + e.what(), 0);
  } catch (const ConfigError& e) {
    throw IngestError(path + ": " + e.what(), 0);
  }
}

void write_comparison(const std::vector<econ::ReportRow>& rows, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_text(fs::path(dir) / "table5.csv", econ::table5_csv(rows));
  write_text(fs::path(dir) / "profit.csv", econ::profit_csv(rows));
  json j;
  for (const econ::ReportRow& r : rows) {
    j["scenarios"][engine::scenario_name(r.scenario)] = {
        {"profit_eur", r.profit.profit},
        {"profit_delta_pct", r.d_profit},
        {"grid_efficiency", r.grid_efficiency},
        {"consumed_delta_pct", r.d_consumed},
        {"chp_delta_pct", r.d_chp},
        {"boiler_delta_pct", r.d_boiler}};
  }
  bool all = rows.size() >= 4;
  if (all) {
    try {
      const econ::Verdict v = econ::ordering_verdict(rows);
      j["verdict"] = {{"distributed_ge_no_buffer", v.distributed_vs_no_buffer},
                      {"no_buffer_gt_central", v.no_buffer_above_central},
                      {"central_gt_reference", v.central_above_reference},
                      {"reference_lowest_by_10pct", v.reference_lowest_by_10pct},
                      {"ordering_holds", v.holds()}};
    } catch (const ContractViolation&) {
      all = false;
    }
  }
  if (!all) j["verdict"] = nullptr;
  write_text(fs::path(dir) / "comparison.json", j.dump(2));
}

}  // namespace dhflex::report
