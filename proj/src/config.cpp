#include "dhflex/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dhflex/errors.hpp"

namespace dhflex::config {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + where + key + "'");
  }
}

template <typename T>
void read(const json& j, const std::string& where, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + where + key + "' has the wrong type");
  }
}

std::string resolve(const std::string& p, const std::string& base) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

}  // namespace

engine::ScenarioConfig parse(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"scenario", "population_seed", "profile_seed", "excitation_seed", "weather",
                     "prices", "physics_step_s", "control_step_s", "week", "prerun_days",
                     "prerun_excitation", "parallel", "topology", "economics", "control",
                     "hydraulics", "header_mass_kg", "airtight", "hot_water", "internal_gains",
                     "constant_ambient"});
  engine::ScenarioConfig c;
  std::string tag = engine::scenario_name(c.scenario);
  read(j, "", "scenario", tag);
  c.scenario = engine::parse_scenario(tag);
  read(j, "", "population_seed", c.population_seed);
  read(j, "", "profile_seed", c.profile_seed);
  read(j, "", "excitation_seed", c.excitation_seed);
  read(j, "", "weather", c.weather_path);
  read(j, "", "prices", c.price_path);
  c.weather_path = resolve(c.weather_path, base_dir);
  c.price_path = resolve(c.price_path, base_dir);
  read(j, "", "physics_step_s", c.physics_step);
  read(j, "", "control_step_s", c.control_step);
  read(j, "", "week", c.week);
  read(j, "", "prerun_days", c.prerun_days);
  read(j, "", "prerun_excitation", c.prerun_excitation);
  read(j, "", "parallel", c.parallel);
  read(j, "", "header_mass_kg", c.header_mass_kg);
  read(j, "", "airtight", c.airtight);
  read(j, "", "hot_water", c.hot_water);
  read(j, "", "internal_gains", c.internal_gains);
  if (j.contains("constant_ambient") && !j["constant_ambient"].is_null()) {
    double v = 0.0;
    read(j, "", "constant_ambient", v);
    c.constant_ambient = v;
  }
  if (j.contains("topology")) {
    const json& t = j["topology"];
    check_keys(t, "topology.", {"buildings", "streets", "trunk_length_m", "tee_spacing_m",
                                "service_length_m", "max_gradient_pa_m"});
    read(t, "topology.", "buildings", c.topology.buildings);
    read(t, "topology.", "streets", c.topology.streets);
    read(t, "topology.", "trunk_length_m", c.topology.trunk_length);
    read(t, "topology.", "tee_spacing_m", c.topology.tee_spacing);
    read(t, "topology.", "service_length_m", c.topology.service_length);
    read(t, "topology.", "max_gradient_pa_m", c.topology.max_gradient);
  }
  if (j.contains("economics")) {
    const json& e = j["economics"];
    check_keys(e, "economics.", {"gas_price", "heat_price", "pump_tariff", "pump_efficiency"});
    read(e, "economics.", "gas_price", c.economics.gas_price);
    read(e, "economics.", "heat_price", c.economics.heat_price);
    read(e, "economics.", "pump_tariff", c.economics.pump_tariff);
    read(e, "economics.", "pump_efficiency", c.economics.pump_efficiency);
  }
  if (j.contains("control")) {
    const json& k = j["control"];
    check_keys(k, "control.", {"comfort_min", "comfort_max", "tank_min", "tank_max",
                               "building_margin", "tank_margin", "horizon", "alpha",
                               "slack_penalty", "kp", "ki", "charge_turnover_s",
                               "central_charge_temp", "forecast_days"});
    engine::ControlSettings& s = c.control;
    read(k, "control.", "comfort_min", s.comfort_min);
    read(k, "control.", "comfort_max", s.comfort_max);
    read(k, "control.", "tank_min", s.tank_min);
    read(k, "control.", "tank_max", s.tank_max);
    read(k, "control.", "building_margin", s.building_margin);
    read(k, "control.", "tank_margin", s.tank_margin);
    read(k, "control.", "horizon", s.horizon);
    read(k, "control.", "alpha", s.alpha);
    read(k, "control.", "slack_penalty", s.slack_penalty);
    read(k, "control.", "kp", s.pi.kp);
    read(k, "control.", "ki", s.pi.ki);
    read(k, "control.", "charge_turnover_s", s.charge_turnover_s);
    read(k, "control.", "central_charge_temp", s.central_charge_temp);
    read(k, "control.", "forecast_days", s.forecast_days);
  }
  if (j.contains("hydraulics")) {
    const json& h = j["hydraulics"];
    check_keys(h, "hydraulics.", {"dp_set_pa", "head_min_pa", "head_max_pa", "valve_open_k"});
    read(h, "hydraulics.", "dp_set_pa", c.dp_set);
    read(h, "hydraulics.", "head_min_pa", c.head_min);
    read(h, "hydraulics.", "head_max_pa", c.head_max);
    read(h, "hydraulics.", "valve_open_k", c.valve_open_k);
  }
  if (!c.weather_path.empty() && !std::filesystem::exists(c.weather_path)) {
    throw ConfigError("weather file not found: " + c.weather_path);
  }
  if (!c.price_path.empty() && !std::filesystem::exists(c.price_path)) {
    throw ConfigError("price file not found: " + c.price_path);
  }
  engine::validate(c);
  return c;
}

engine::ScenarioConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  return parse(ss.str(), base.string());
}

std::string dump(const engine::ScenarioConfig& c) {
  json j;
  j["scenario"] = engine::scenario_name(c.scenario);
  j["population_seed"] = c.population_seed;
  j["profile_seed"] = c.profile_seed;
  j["excitation_seed"] = c.excitation_seed;
  j["weather"] = c.weather_path;
  j["prices"] = c.price_path;
  j["physics_step_s"] = c.physics_step;
  j["control_step_s"] = c.control_step;
  j["week"] = c.week;
  j["prerun_days"] = c.prerun_days;
  j["prerun_excitation"] = c.prerun_excitation;
  j["parallel"] = c.parallel;
  j["header_mass_kg"] = c.header_mass_kg;
  j["airtight"] = c.airtight;
  j["hot_water"] = c.hot_water;
  j["internal_gains"] = c.internal_gains;
  j["constant_ambient"] = c.constant_ambient ? json(*c.constant_ambient) : json(nullptr);
  j["topology"] = {{"buildings", c.topology.buildings},
                   {"streets", c.topology.streets},
                   {"trunk_length_m", c.topology.trunk_length},
                   {"tee_spacing_m", c.topology.tee_spacing},
                   {"service_length_m", c.topology.service_length},
                   {"max_gradient_pa_m", c.topology.max_gradient}};
  j["economics"] = {{"gas_price", c.economics.gas_price},
                    {"heat_price", c.economics.heat_price},
                    {"pump_tariff", c.economics.pump_tariff},
                    {"pump_efficiency", c.economics.pump_efficiency}};
  const engine::ControlSettings& s = c.control;
  j["control"] = {{"comfort_min", s.comfort_min},
                  {"comfort_max", s.comfort_max},
                  {"tank_min", s.tank_min},
                  {"tank_max", s.tank_max},
                  {"building_margin", s.building_margin},
                  {"tank_margin", s.tank_margin},
                  {"horizon", s.horizon},
                  {"alpha", s.alpha},
                  {"slack_penalty", s.slack_penalty},
                  {"kp", s.pi.kp},
                  {"ki", s.pi.ki},
                  {"charge_turnover_s", s.charge_turnover_s},
                  {"central_charge_temp", s.central_charge_temp},
                  {"forecast_days", s.forecast_days}};
  j["hydraulics"] = {{"dp_set_pa", c.dp_set},
                     {"head_min_pa", c.head_min},
                     {"head_max_pa", c.head_max},
                     {"valve_open_k", c.valve_open_k}};
  return j.dump(2);
}

}  // namespace dhflex::config
