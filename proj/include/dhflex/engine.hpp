#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dhflex/building.hpp"
#include "dhflex/dispatch.hpp"
#include "dhflex/fit.hpp"
#include "dhflex/hydronet.hpp"
#include "dhflex/plant.hpp"
#include "dhflex/storage.hpp"

namespace dhflex::engine {

enum class Scenario { reference, central_active, distributed_active, no_buffer_active };

const char* scenario_name(Scenario s);
// Throws ConfigError for an unknown tag.
Scenario parse_scenario(const std::string& tag);
bool is_active(Scenario s);
inline constexpr Scenario kAllScenarios[] = {Scenario::reference, Scenario::central_active,
                                             Scenario::distributed_active,
                                             Scenario::no_buffer_active};

struct Economics {
  double gas_price = 39.9;       // EUR/MWh
  double heat_price = 54.5;      // EUR/MWh delivered
  double pump_tariff = 150.0;    // EUR/MWh electricity
  double pump_efficiency = 0.7;
};

struct ControlSettings {
  double comfort_min = 19.5;  // C, active band for building mass
  double comfort_max = 21.5;
  double tank_min = 40.0;     // C, band of the mean storage temperature
  double tank_max = 80.0;
  double building_margin = 0.3;  // planning band tightening for the cluster mean, K
  double tank_margin = 3.0;
  int horizon = 96;           // control steps
  double alpha = 5.0;         // EUR per MW change
  double slack_penalty = 1000.0;
  dispatch::PiGains pi;
  double charge_turnover_s = 3600.0;  // local tank charge flow: tank mass per this time
  double central_charge_temp = 80.0;
  int forecast_days = 7;      // history used for the off-take profile forecast
};

struct ScenarioConfig {
  Scenario scenario = Scenario::reference;
  hydronet::TopologyConfig topology;
  std::uint64_t population_seed = 1;
  std::uint64_t profile_seed = 11;       // hot water draws, gain profiles, tank types
  std::uint64_t excitation_seed = 3;     // pre-run excitation
  std::string weather_path;              // empty: bundled data
  std::string price_path;
  double physics_step = 60.0;            // s
  double control_step = 900.0;           // s
  int week = 46;                         // 0 selects the representative week
  int prerun_days = 10;
  bool prerun_excitation = true;         // thermostat and storage set-point steps in the pre-run
  Economics economics;
  ControlSettings control;
  plant::PlantConfig plant;
  double dp_set = 50e3;                  // Pa at the least favoured open substation
  double head_min = 20e3;
  double head_max = 800e3;
  double valve_open_k = 5e4 / (0.4 * 0.4);  // Pa/(kg/s)^2, fully open substation valve
  double header_mass_kg = 1000.0;
  bool parallel = true;
  // Degenerate-case switches.
  bool airtight = false;
  bool hot_water = true;
  bool internal_gains = true;
  std::optional<double> constant_ambient;
};

// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& config);

// One control step of the evaluated week; powers are step means in kW.
struct TraceRow {
  double t_s = 0.0;
  double spot = 0.0;
  double ambient = 0.0;
  double chp_heat = 0.0, boiler_heat = 0.0, production = 0.0;
  double p_el = 0.0, gas_chp = 0.0, gas_boiler = 0.0;
  double delivered = 0.0;     // at substations
  double controllable = 0.0;  // delivered to dispatched devices
  double network_loss = 0.0;
  double tank_loss = 0.0;
  double pump_kw = 0.0;       // hydraulic
  double dumped = 0.0;
  double t_supply = 0.0, t_return = 0.0;
  double chp_on = 0.0;        // fraction of the step
  double t_i_mean = 0.0, t_i_min = 0.0, t_i_q25 = 0.0, t_i_median = 0.0, t_i_q75 = 0.0,
         t_i_max = 0.0, t_i_std = 0.0;
  double tank_mean = 0.0;
  double lambda_eff = 0.0;
  double p_star = 0.0, p_b_star = 0.0, p_w_star = 0.0;
  double p_r = 0.0, u_pi = 0.0;
  double measured = 0.0;
};

// Week totals in kWh.
struct Tallies {
  double consumed = 0.0;
  double produced = 0.0;
  double chp_heat = 0.0;
  double boiler_heat = 0.0;
  double electricity = 0.0;
  double gas_chp = 0.0;
  double gas_boiler = 0.0;
  double network_loss = 0.0;
  double tank_loss = 0.0;        // all storage vessels
  double central_tank_loss = 0.0;
  double pump_hydraulic = 0.0;
  double dumped = 0.0;
  double storage_change = 0.0;   // pipes, plant header and central vessel
  double closure_error = 0.0;    // relative to production
  int chp_starts = 0;
  double min_switch_interval_s = 0.0;  // shortest time between CHP state changes
  double t_i_min = 0.0, t_i_max = 0.0;
};

struct FitReport {
  std::optional<fit::BuildingFit> building;
  std::optional<fit::AggregateTankModel> tank;
  double holdout_rms = 0.0;     // building model, one-step, held-out day
  int samples = 0;
  std::vector<fit::BuildingSample> building_samples;
  std::vector<fit::TankSample> tank_samples;
};

struct SimulationResult {
  Scenario scenario = Scenario::reference;
  int week = 0;
  double week_start_s = 0.0;
  double week_mean_ambient = 0.0;
  double control_step_h = 0.25;
  std::vector<TraceRow> trace;
  Tallies tallies;
  FitReport fit;
  double t_i_spread = 0.0;       // week mean of the across-building std of T_i
  double chp_max_heat = 0.0;     // kW at a 40 C return, for histogram terciles
  int relaxed_plans = 0;
  int failed_plans = 0;
  double elapsed_s = 0.0;
  std::vector<building::Params> population;
  std::vector<storage::Variant> tank_types;  // distributed scenario only
  std::string network_csv;
};

// Pre-run with the reference controller followed by the evaluated week.
// Any module failure is rethrown as SimulationError with module and time.
SimulationResult run(const ScenarioConfig& config);

// Runs prerun_days + 1 days with the reference controller, fits on the
// first prerun_days and reports the held-out one-step error on the last day.
FitReport fit_models(const ScenarioConfig& config);

// Fraction of trace steps whose production lies in the middle third of [0, chp_max].
double middle_tercile_fraction(const std::vector<TraceRow>& trace, double chp_max);

// Default bundled inputs.
std::string default_weather_path();
std::string default_price_path();

}  // namespace dhflex::engine
