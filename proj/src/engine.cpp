#include "dhflex/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include "dhflex/constants.hpp"
#include "dhflex/errors.hpp"
#include "dhflex/planner.hpp"
#include "dhflex/profiles.hpp"
#include "dhflex/thermonet.hpp"

namespace dhflex::engine {

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::reference: return "reference";
    case Scenario::central_active: return "central_active";
    case Scenario::distributed_active: return "distributed_active";
    case Scenario::no_buffer_active: return "no_buffer_active";
  }
  return "?";
}

Scenario parse_scenario(const std::string& tag) {
  for (Scenario s : kAllScenarios) {
    if (tag == scenario_name(s)) return s;
  }
  throw ConfigError("unknown scenario '" + tag +
                    "' (expected reference, central_active, distributed_active or no_buffer_active)");
}

bool is_active(Scenario s) { return s != Scenario::reference; }

std::string default_weather_path() { return std::string(DHFLEX_DATA_DIR) + "/weather.csv"; }
std::string default_price_path() { return std::string(DHFLEX_DATA_DIR) + "/prices.csv"; }

void validate(const ScenarioConfig& c) {
  if (!(c.physics_step > 0.0) || c.physics_step > 60.0) {
    throw ConfigError("physics_step must lie in (0, 60] s");
  }
  const double ratio = c.control_step / c.physics_step;
  if (!(c.control_step > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ConfigError("physics_step must divide control_step evenly");
  }
  if (std::abs(kControlStep / c.control_step - std::round(kControlStep / c.control_step)) > 1e-9) {
    throw ConfigError("control_step must divide 15 min evenly");
  }
  if (c.week < 0 || c.week > 52) throw ConfigError("week must be 0 (automatic) or 1..52");
  if (c.prerun_days < 2) throw ConfigError("prerun_days must be at least 2");
  if (c.topology.buildings < 1) throw ConfigError("topology.buildings must be at least 1");
  if (c.control.horizon < 2) throw ConfigError("control.horizon must be at least 2");
  if (!(c.control.comfort_min < c.control.comfort_max)) {
    throw ConfigError("control.comfort_min must be below comfort_max");
  }
  if (!(c.control.tank_min < c.control.tank_max)) {
    throw ConfigError("control.tank_min must be below tank_max");
  }
  if (c.economics.gas_price < 0 || c.economics.heat_price < 0 || c.economics.pump_tariff < 0) {
    throw ConfigError("economics prices must be non-negative");
  }
  if (!(c.economics.pump_efficiency > 0.0 && c.economics.pump_efficiency <= 1.0)) {
    throw ConfigError("economics.pump_efficiency must lie in (0, 1]");
  }
  if (!(c.head_min > 0.0 && c.head_min < c.head_max)) throw ConfigError("head_min must be below head_max");
}

double middle_tercile_fraction(const std::vector<TraceRow>& trace, double chp_max) {
  if (trace.empty()) return 0.0;
  int mid = 0;
  for (const TraceRow& r : trace) {
    if (r.production >= chp_max / 3.0 && r.production < 2.0 * chp_max / 3.0) ++mid;
  }
  return static_cast<double>(mid) / static_cast<double>(trace.size());
}

namespace {

constexpr double kTankRoom = 20.0;    // surroundings of local vessels
constexpr double kPlantRoom = 15.0;
constexpr double kExcitation = 0.5;   // K, thermostat band shift in the pre-run
constexpr double kNoFlow = 1e-7;
constexpr double kIdleFlow = 1e-3;  // kg/s, below this a service pipe reading is stale
constexpr double kChargeEndDifference = 5.0;  // K below supply at the vessel bottom

double clamp_inlet(double t) { return std::clamp(t, 20.0, 90.0); }

// Quantity accumulated over one control step.
struct Accum {
  double chp_heat = 0, boiler_heat = 0, p_el = 0, gas_chp = 0, gas_boiler = 0;
  double delivered = 0, controllable = 0, network_loss = 0, tank_loss = 0, central_loss = 0;
  double pump = 0, dumped = 0, t_supply = 0, t_return = 0, chp_on = 0;
  double spot = 0, ambient = 0;
  double mass_heat = 0, tank_in = 0, tank_out = 0, direct_dhw = 0, central_out = 0;
  int n = 0;
};

struct Unit {
  building::Params p;
  building::State s;
  std::vector<profiles::DhwEvent> dhw;
  double el_scale = 1.0, el_shift = 0.0, solar_scale = 1.0;
  bool has_tank = false;
  bool sh_from_tank = false;  // open vessel feeds the radiators
  storage::Geometry tank_geom;
  storage::State tank;
  bool mass_on = false;       // dispatched space heating
  bool charge_on = false;     // dispatched or hysteresis charging
  double dp_prev = 0.0;
  int supply_node = 0;
  // Per-step values.
  double cmd_sh = 0, cmd_dhw = 0, cmd_charge = 0, cmd = 0, flow = 0;
  double t_ret = 0, delivered = 0, sh_heat = 0, dhw_heat = 0, tank_in = 0, tank_out = 0, tank_loss = 0;
};

class Simulation {
 public:
  Simulation(const ScenarioConfig& c, bool fit_only);

  SimulationResult run();
  FitReport fit_report();

 private:
  // Setup.
  void load_inputs();
  void build_units();
  // Time stepping.
  void physics_step(double t, bool in_week);
  void plant_header(double t, double m, double t_in, double dt, double t_set, bool active);
  void plant_central(double t, double m, double t_in, double dt, double t_set, bool active);
  void control_boundary(double t, bool week_next);
  void reference_decisions(double t);
  void active_decisions(double t);
  void close_interval(double t);
  void do_fit(int first_interval, int last_interval, bool holdout);

  // Inputs at time t.
  std::size_t idx(double t) const {
    return static_cast<std::size_t>(std::lround((t - series_t0_) / cfg_.physics_step));
  }
  double ambient(double t) const { return amb_[idx(t)]; }
  double ambient_24h(double t) const { return amb24_[idx(t)]; }
  double el_gain(const Unit& u, double t) const {
    return cfg_.internal_gains ? u.el_scale * profiles::electric_gain(t + u.el_shift) : 0.0;
  }
  double solar(const Unit& u, double t) const {
    return cfg_.internal_gains ? u.solar_scale * profiles::solar_gain(irr_[idx(t)]) : 0.0;
  }
  double excitation(double t) const;
  // An idle service pipe cools down; its controllers then work from the plant supply.
  double sensed_supply(const Unit& u) const {
    return u.flow > kIdleFlow ? net_.node_temp[u.supply_node] : header_temp_;
  }
  int interval_index(double t) const {
    return static_cast<int>(std::lround((t - t_pre_) / cfg_.control_step));
  }

  double storage_kwh() const;
  std::vector<double> slot_forecast(const std::vector<double>& history, int from, int n) const;

  ScenarioConfig cfg_;
  bool fit_only_;
  Scenario sc_;
  bool active_;
  thermonet::Exec exec_;

  // Time axis.
  double t_pre_ = 0, t_week_ = 0, t_end_ = 0;
  double excitation_end_ = 0;  // the last pre-run day settles under plain control
  double series_t0_ = 0;
  int steps_per_control_ = 15;
  int week_ = 46;
  double week_mean_ambient_ = 0;

  // Inputs on the physics grid.
  std::vector<double> amb_, amb24_, wind_, irr_, price_;
  std::vector<std::pair<double, double>> excitation_;  // switch time, sign

  // Network.
  hydronet::NetworkGraph graph_;
  hydronet::FlowSolution flow_;
  bool have_flow_ = false;
  thermonet::NetworkState net_;
  std::vector<double> valve_k_, substation_return_;

  // Consumers.
  std::vector<Unit> units_;
  std::vector<int> mass_units_;  // network-fed space heating
  bool has_local_tanks_ = false;
  bool has_central_ = false;
  std::vector<storage::Variant> tank_types_;

  // Plant.
  plant::PlantState plant_;
  double header_temp_ = 60.0;
  storage::Geometry central_geom_;
  storage::State central_;
  double central_target_ = 0.0;    // generator heat demand for the vessel, kW
  double central_setpoint_ = 65.0; // pre-run vessel temperature target
  double last_central_out_ = 0.0;
  std::vector<double> chp_switch_times_;
  bool chp_was_on_ = false;

  // Control.
  std::optional<fit::BuildingFit> bfit_;
  std::optional<fit::AggregateTankModel> tfit_;
  double holdout_rms_ = 0.0;
  double t_m_est_ = 20.0;
  dispatch::PiState pi_;
  double prev_target_ = 0.0;
  bool pi_started_ = false;
  std::vector<double> last_plan_;
  int relaxed_ = 0, failed_ = 0;
  TraceRow pending_;  // controller values for the open interval

  // Per-interval records since the pre-run start.
  Accum acc_;
  double interval_ta_ = 0, interval_ts_ = 0;
  std::vector<fit::BuildingSample> bsamples_;
  std::vector<fit::TankSample> tsamples_;
  std::vector<double> hist_offtake_, hist_direct_dhw_, hist_loss_, hist_controllable_;
  std::vector<double> qa_ctrl_, qm_ctrl_, amb_ctrl_, price_ctrl_;

  // Week results.
  std::vector<TraceRow> trace_;
  Tallies tallies_;
  double storage_start_ = 0;
  double spread_sum_ = 0;
  int spread_n_ = 0;
};

Simulation::Simulation(const ScenarioConfig& c, bool fit_only)
    : cfg_(c), fit_only_(fit_only), sc_(c.scenario), active_(is_active(c.scenario)) {
  validate(cfg_);
  exec_ = cfg_.parallel ? thermonet::Exec::parallel : thermonet::Exec::serial;
  steps_per_control_ = static_cast<int>(std::lround(cfg_.control_step / cfg_.physics_step));
  has_local_tanks_ = sc_ == Scenario::distributed_active;
  has_central_ = sc_ == Scenario::central_active;
  load_inputs();
  build_units();
}

void Simulation::load_inputs() {
  const std::string wpath = cfg_.weather_path.empty() ? default_weather_path() : cfg_.weather_path;
  const std::string ppath = cfg_.price_path.empty() ? default_price_path() : cfg_.price_path;
  const profiles::Weather w = profiles::read_weather(wpath);
  const profiles::Prices pr = profiles::read_prices(ppath);
  week_ = cfg_.week == 0 ? profiles::select_representative_week(w) : cfg_.week;
  t_week_ = profiles::week_start_s(week_);
  const int extra_days = fit_only_ ? 1 : 0;
  t_pre_ = t_week_ - cfg_.prerun_days * profiles::kDay;
  t_end_ = fit_only_ ? t_week_ + extra_days * profiles::kDay : t_week_ + 7.0 * profiles::kDay;
  series_t0_ = t_pre_ - profiles::kDay;
  excitation_end_ = t_week_ - profiles::kDay;
  const double series_end = t_end_ + (cfg_.control.horizon + 2) * cfg_.control_step;
  const int n = static_cast<int>(std::lround((series_end - series_t0_) / cfg_.physics_step)) + 1;
  if (series_t0_ < w.time_s.front() || series_t0_ < pr.time_s.front()) {
    throw ConfigError("inputs do not cover the day before the pre-run; choose a later week");
  }
  amb_ = profiles::interpolate(w.time_s, w.ambient, series_t0_, cfg_.physics_step, n);
  wind_ = profiles::interpolate(w.time_s, w.wind, series_t0_, cfg_.physics_step, n);
  irr_ = profiles::interpolate(w.time_s, w.irradiance, series_t0_, cfg_.physics_step, n);
  price_ = profiles::interpolate(pr.time_s, pr.price, series_t0_, cfg_.physics_step, n);
  if (cfg_.constant_ambient) std::fill(amb_.begin(), amb_.end(), *cfg_.constant_ambient);
  amb24_ = profiles::trailing_mean(amb_, cfg_.physics_step, profiles::kDay);
  week_mean_ambient_ = profiles::mean_over(w.time_s, w.ambient, t_week_, t_week_ + 7 * profiles::kDay);
  if (cfg_.constant_ambient) week_mean_ambient_ = *cfg_.constant_ambient;

  // Pre-run excitation: random steps of 2 to 8 hours.
  std::mt19937_64 rng(cfg_.excitation_seed);
  std::uniform_real_distribution<double> hold(2.0, 8.0);
  double t = t_pre_;
  double sign = 1.0;
  while (t < t_end_) {
    excitation_.push_back({t, sign});
    t += hold(rng) * kSecondsPerHour;
    sign = -sign;
  }
}

double Simulation::excitation(double t) const {
  double s = 0.0;
  for (const auto& [start, sign] : excitation_) {
    if (start > t) break;
    s = sign;
  }
  return s;
}

void Simulation::build_units() {
  const int nb = cfg_.topology.buildings;
  std::vector<building::Params> pop = building::sample_population(nb, cfg_.population_seed);
  if (cfg_.airtight) {
    for (building::Params& p : pop) {
      p.a_l = 0.0;
      p.r_ia = std::numeric_limits<double>::infinity();
      p.a_piv = 0.0;
      p.b_piv = 0.0;
    }
  }
  hydronet::TopologyConfig topo = cfg_.topology;
  topo.design_flows.clear();
  for (const building::Params& p : pop) {
    topo.design_flows.push_back(p.design_kw / (kWaterCp * (building::StandardBuilding{}.design_supply -
                                                           building::StandardBuilding{}.design_return)));
  }
  graph_ = hydronet::build_topology(topo);

  std::mt19937_64 rng(cfg_.profile_seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> type(0, 2);
  const double start_set = plant::supply_setpoint(cfg_.plant, ambient_24h(t_pre_));
  units_.resize(nb);
  double total_volume = 0.0;
  for (int b = 0; b < nb; ++b) {
    Unit& u = units_[b];
    u.p = pop[b];
    const double t_i = 19.6 + 0.8 * uni(rng);
    u.s = building::steady_envelope(u.p, t_i, ambient(t_pre_));
    u.s.heating = uni(rng) < 0.3;
    u.el_scale = 0.7 + 0.6 * uni(rng);
    u.el_shift = (uni(rng) - 0.5) * 2.0 * kSecondsPerHour;
    u.solar_scale = 0.6 + 0.8 * uni(rng);
    const std::uint64_t dhw_seed = cfg_.profile_seed * 1000003ULL + static_cast<std::uint64_t>(b);
    const int day0 = static_cast<int>(std::floor(t_pre_ / profiles::kDay));
    const int day1 = static_cast<int>(std::ceil(t_end_ / profiles::kDay)) + 1;
    if (cfg_.hot_water) u.dhw = profiles::dhw_events(day0, day1, dhw_seed);
    const int kind = type(rng);
    const storage::Variant v = kind == 0 ? storage::Variant::open
                               : kind == 1 ? storage::Variant::coil
                                           : storage::Variant::tank_in_tank;
    tank_types_.push_back(v);
    const storage::Geometry g = v == storage::Variant::open   ? storage::open_tank()
                                : v == storage::Variant::coil ? storage::coil_tank()
                                                              : storage::tank_in_tank();
    total_volume += storage::total_volume_l(g);
    if (has_local_tanks_) {
      u.has_tank = true;
      u.tank_geom = g;
      u.tank = storage::uniform_state(g, 60.0);
      u.sh_from_tank = v == storage::Variant::open;
    }
    u.supply_node = graph_.edges[graph_.valve_edges[b]].from;
    u.dp_prev = cfg_.dp_set;
    if (!u.sh_from_tank) mass_units_.push_back(b);
  }
  if (has_central_) {
    central_geom_ = storage::central_tank(total_volume, storage::open_tank().volume_l);
    central_ = storage::uniform_state(central_geom_, 65.0);
  }
  net_ = thermonet::init_network(graph_, start_set, 35.0);
  header_temp_ = start_set;
  valve_k_.assign(nb, hydronet::kClosedValve);
  substation_return_.assign(nb, 35.0);

  // Control-step means of the known inputs over the whole span.
  const int intervals =
      static_cast<int>(std::lround((t_end_ + (cfg_.control.horizon + 1) * cfg_.control_step - t_pre_) /
                                   cfg_.control_step));
  qa_ctrl_.assign(intervals, 0.0);
  qm_ctrl_.assign(intervals, 0.0);
  amb_ctrl_.assign(intervals, 0.0);
  price_ctrl_.assign(intervals, 0.0);
  for (int j = 0; j < intervals; ++j) {
    double qa = 0, qm = 0, am = 0, pr = 0;
    for (int k = 0; k < steps_per_control_; ++k) {
      const double t = t_pre_ + j * cfg_.control_step + k * cfg_.physics_step;
      for (int b : mass_units_) {
        qa += el_gain(units_[b], t);
        qm += solar(units_[b], t);
      }
      am += ambient(t);
      pr += price_[idx(t)];
    }
    qa_ctrl_[j] = qa / steps_per_control_;
    qm_ctrl_[j] = qm / steps_per_control_;
    amb_ctrl_[j] = am / steps_per_control_;
    price_ctrl_[j] = pr / steps_per_control_;
  }
}

double Simulation::storage_kwh() const {
  double kj = thermonet::network_energy_kj(net_);
  if (!has_central_) kj += cfg_.header_mass_kg * kWaterCp * header_temp_;
  if (has_central_) kj += storage::energy_kj(central_geom_, central_);
  return kj / kSecondsPerHour;
}

std::vector<double> Simulation::slot_forecast(const std::vector<double>& history, int from, int n) const {
  const int per_day = static_cast<int>(std::lround(profiles::kDay / cfg_.control_step));
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int j = from + i;
    double sum = 0.0;
    int count = 0;
    for (int d = 1; d <= cfg_.control.forecast_days; ++d) {
      const int k = j - d * per_day;
      if (k >= 0 && k < static_cast<int>(history.size())) {
        sum += history[k];
        ++count;
      }
    }
    if (count == 0 && !history.empty()) {
      sum = history.back();
      count = 1;
    }
    out[i] = count ? sum / count : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plant

void Simulation::plant_header(double t, double m, double t_in, double dt, double t_set, bool active) {
  const double mass = cfg_.header_mass_kg;
  const double md = m * dt;
  double demand = kWaterCp * ((mass + md) * t_set - mass * header_temp_ - md * t_in) / dt;
  demand = std::max(0.0, demand);
  const double tin = clamp_inlet(t_in);
  plant::PlantStep st;
  if (active) {
    const dispatch::SourceChoice c = dispatch::select_source(
        cfg_.plant, plant_, demand, price_[idx(t)], cfg_.economics.gas_price, tin);
    st = plant::operate(cfg_.plant, plant_, c.chp_on, c.chp_fm, c.boiler_heat, tin, dt);
    st.state.supply_setpoint = t_set;
  } else {
    st = plant::reference_dispatch(cfg_.plant, plant_, demand, ambient_24h(t), tin, dt);
  }
  double heat = st.heat_kw;
  double t_new = (mass * header_temp_ + md * t_in + heat * dt / kWaterCp) / (mass + md);
  const double cap = cfg_.plant.max_supply_temp;
  double dumped = 0.0;
  if (t_new > cap) {
    double excess = (t_new - cap) * (mass + md) * kWaterCp / dt;
    // The boiler backs off first; what the CHP cannot shed goes to the emergency cooler.
    const double boiler_cut = std::min(excess, st.boiler.p_out);
    if (boiler_cut > 0.0) {
      st = plant::operate(cfg_.plant, plant_, st.state.chp_on, st.state.chp_fm,
                          st.boiler.p_out - boiler_cut, tin, dt);
      excess -= boiler_cut;
    }
    dumped = std::max(0.0, excess);
    heat = st.heat_kw;
    t_new = cap;
  }
  plant_ = st.state;
  plant_.supply_setpoint = t_set;
  header_temp_ = t_new;
  acc_.chp_heat += st.chp.p_heat;
  acc_.boiler_heat += st.boiler.p_out;
  acc_.p_el += st.chp.p_el;
  acc_.gas_chp += st.chp.p_gas;
  acc_.gas_boiler += st.boiler.p_gas;
  acc_.dumped += dumped;
}

void Simulation::plant_central(double t, double m, double t_in, double dt, double t_set, bool active) {
  const double t_top = storage::top_temperature(central_geom_, central_);
  const double t_bottom = central_.t.front();
  // Network side: mixing valve on the vessel outlet, booster boiler if the top is too cold.
  double m_draw = m;
  double booster = 0.0;
  if (t_top > t_set && t_top > t_in + 1e-6) {
    m_draw = std::clamp(m * (t_set - t_in) / (t_top - t_in), 0.0, m);
  } else {
    booster = m * kWaterCp * std::max(0.0, t_set - t_top);
  }
  // Generator side.
  const double gen_in = clamp_inlet(t_bottom);
  double target = std::max(0.0, central_target_);
  if (t_top >= cfg_.plant.max_supply_temp - 1.0) target = 0.0;
  plant::PlantStep st;
  if (active) {
    const dispatch::SourceChoice c = dispatch::select_source(
        cfg_.plant, plant_, target, price_[idx(t)], cfg_.economics.gas_price, gen_in);
    st = plant::operate(cfg_.plant, plant_, c.chp_on, c.chp_fm, c.boiler_heat + booster, gen_in, dt);
  } else {
    st = plant::reference_dispatch(cfg_.plant, plant_, target, ambient_24h(t), gen_in, dt);
    if (booster > 0.0) {
      st = plant::operate(cfg_.plant, plant_, st.state.chp_on, st.state.chp_fm,
                          st.boiler.p_out + booster, gen_in, dt);
    }
  }
  booster = std::min(booster, st.heat_kw);
  const double charge_heat = std::max(0.0, st.heat_kw - booster);
  storage::Stream charge;
  if (charge_heat > 0.0) {
    const double lift = std::max(cfg_.control.central_charge_temp - t_bottom, 5.0);
    charge.flow = charge_heat / (kWaterCp * lift);
    charge.temp = t_bottom + lift;
  }
  const storage::StepResult r =
      storage::tank_step(central_geom_, central_, charge, {m_draw, t_in}, kPlantRoom, dt);
  // Charge heat not absorbed by the vessel (charge_kw below the generator output) is
  // returned with the charge stream; count it as dumped to keep the balance closed.
  const double unabsorbed = std::max(0.0, charge_heat - r.charge_kw);
  central_ = r.state;
  double t_out = t_set;
  if (m > kNoFlow) {
    t_out = (m_draw * r.discharge_out_temp + (m - m_draw) * t_in) / m + booster / (m * kWaterCp);
  }
  header_temp_ = t_out;
  plant_ = st.state;
  plant_.supply_setpoint = t_set;
  last_central_out_ = r.discharge_kw;
  acc_.chp_heat += st.chp.p_heat;
  acc_.boiler_heat += st.boiler.p_out;
  acc_.p_el += st.chp.p_el;
  acc_.gas_chp += st.chp.p_gas;
  acc_.gas_boiler += st.boiler.p_gas;
  acc_.dumped += unabsorbed;
  acc_.central_loss += r.loss_kw;
  acc_.tank_loss += r.loss_kw;
  acc_.tank_in += r.charge_kw;
  acc_.central_out += r.discharge_kw;
}

// ---------------------------------------------------------------------------
// Physics step

void Simulation::physics_step(double t, bool in_week) {
  const double dt = cfg_.physics_step;
  const std::size_t i = idx(t);
  const double t_a = amb_[i];
  const double t24 = amb24_[i];
  const double t_set = plant::supply_setpoint(cfg_.plant, t24);
  const double circuit_set = cfg_.plant.curve.supply(t24);
  const int nb = static_cast<int>(units_.size());
  const bool active_now = active_ && in_week;
  const double shift = (t < excitation_end_ && cfg_.prerun_excitation) ? kExcitation * excitation(t) : 0.0;
  building::Thermostat band;
  band.lower += shift;
  band.upper += shift;
  const ControlSettings& ctl = cfg_.control;
  const bool dispatched_mass = active_now && (sc_ == Scenario::no_buffer_active ||
                                              sc_ == Scenario::distributed_active);

  std::vector<std::exception_ptr> errors(nb);

  // 1. Circuit commands from the last known supply temperatures.
#pragma omp parallel for schedule(static) if (cfg_.parallel)
  for (int b = 0; b < nb; ++b) {
    try {
      Unit& u = units_[b];
      const double t_sup = sensed_supply(u);
      u.cmd_sh = u.cmd_dhw = u.cmd_charge = 0.0;
      if (u.sh_from_tank) {
        // Radiators run from the vessel, see step 5.
      } else if (dispatched_mass) {
        // Local comfort guard around the dispatched state.
        if (u.s.t_i < ctl.comfort_min) u.mass_on = true;
        if (u.s.t_i > ctl.comfort_max) u.mass_on = false;
        u.s.heating = u.mass_on;
        if (u.mass_on) u.cmd_sh = building::space_heating_flow(u.p, u.s, t_sup, circuit_set);
      } else {
        u.s.heating = building::thermostat(band, u.s.heating, u.s.t_i);
        if (u.s.heating) u.cmd_sh = building::space_heating_flow(u.p, u.s, t_sup, circuit_set);
      }
      const double dhw_kw = cfg_.hot_water ? profiles::dhw_power(u.dhw, t, dt) : 0.0;
      if (!u.has_tank) u.cmd_dhw = building::dhw_flow(dhw_kw, t_sup);
      if (u.has_tank) {
        const double soc = storage::state_of_charge(u.tank_geom, u.tank, ctl.tank_min, ctl.tank_max);
        // The bottom sensor ends a charge once the vessel is as hot as the supply allows.
        const bool full = u.tank.t.front() >= t_sup - kChargeEndDifference;
        // A vessel feeding radiators must stay hot enough for the circuit.
        const bool starved = u.sh_from_tank && u.s.heating &&
                             storage::top_temperature(u.tank_geom, u.tank) < circuit_set;
        if (active_now) {
          if ((soc <= 0.0 || starved) && !full) u.charge_on = true;
          if (soc >= 1.0 || full) u.charge_on = false;
        } else {
          if (soc < 0.35 && !full) u.charge_on = true;
          if (soc > 0.85 || full) u.charge_on = false;
        }
        if (u.charge_on) {
          u.cmd_charge = storage::total_volume_l(u.tank_geom) * 1e-3 * kWaterDensity /
                         ctl.charge_turnover_s;
        }
      }
      u.cmd = u.cmd_sh + u.cmd_dhw + u.cmd_charge;
    } catch (...) {
      errors[b] = std::current_exception();
    }
  }
  for (int b = 0; b < nb; ++b) {
    if (errors[b]) {
      try {
        std::rethrow_exception(errors[b]);
      } catch (const std::exception& e) {
        throw SimulationError("building", t, e.what());
      }
    }
  }

  // 2. Valves and hydraulics.
  for (int b = 0; b < nb; ++b) {
    const Unit& u = units_[b];
    valve_k_[b] = u.cmd < kNoFlow ? hydronet::kClosedValve
                                  : std::max(u.dp_prev / (u.cmd * u.cmd), cfg_.valve_open_k);
  }
  try {
    flow_ = hydronet::solve_with_dp_control(graph_, valve_k_, cfg_.dp_set, cfg_.head_min,
                                            cfg_.head_max, have_flow_ ? &flow_ : nullptr);
    have_flow_ = true;
  } catch (const std::exception& e) {
    throw SimulationError("hydronet", t, e.what());
  }
  for (int b = 0; b < nb; ++b) {
    Unit& u = units_[b];
    u.flow = std::max(0.0, flow_.flows[graph_.valve_edges[b]]);
    if (u.cmd >= kNoFlow) {
      const double dp = hydronet::valve_dp(graph_, flow_, b);
      if (dp > 1.0) u.dp_prev = dp;
    }
  }
  const double m_src = std::max(0.0, flow_.flows[graph_.source_edge]);

  // 3. Plant.
  const double t_ret_plant = net_.node_temp[graph_.return_root];
  try {
    if (has_central_) plant_central(t, m_src, t_ret_plant, dt, t_set, active_now);
    else plant_header(t, m_src, t_ret_plant, dt, t_set, active_now);
  } catch (const SimulationError&) {
    throw;
  } catch (const std::exception& e) {
    throw SimulationError("plant", t, e.what());
  }

  // 4. Supply pipes.
  thermonet::SideResult sup;
  try {
    sup = thermonet::propagate_supply(net_, graph_, flow_, header_temp_, kGroundTemperature, dt, exec_);
  } catch (const std::exception& e) {
    throw SimulationError("thermonet", t, e.what());
  }

  // 5. Substations, buildings and local vessels.
#pragma omp parallel for schedule(static) if (cfg_.parallel)
  for (int b = 0; b < nb; ++b) {
    try {
      Unit& u = units_[b];
      const double t_sup = net_.node_temp[u.supply_node];
      // A starved substation serves space heating first and vessel charging last.
      const double m_sh = std::min(u.cmd_sh, u.flow);
      const double m_dhw = std::min(u.cmd_dhw, u.flow - m_sh);
      const double m_ch = u.cmd > kNoFlow ? u.flow - m_sh - m_dhw : 0.0;
      building::Disturbance d{ambient(t), wind_[idx(t)], solar(u, t), el_gain(u, t)};
      u.sh_heat = u.dhw_heat = u.tank_in = u.tank_out = u.tank_loss = 0.0;
      double enthalpy_back = 0.0;  // m T of the primary return streams

      // Space heating, from the network or from an open vessel.
      building::Coupling k{};
      double m_sh_tank = 0.0, t_src = t_sup;
      if (u.sh_from_tank) {
        t_src = storage::top_temperature(u.tank_geom, u.tank);
        u.s.heating = building::thermostat(band, u.s.heating, u.s.t_i);
        if (u.s.heating) m_sh_tank = building::space_heating_flow(u.p, u.s, t_src, circuit_set);
        k = building::substation_coupling(u.p, m_sh_tank, t_src);
      } else {
        k = building::substation_coupling(u.p, m_sh, t_sup);
      }
      const building::StepResult br = building::step(u.p, u.s, d, k, dt);
      u.s = br.state;
      double sh_return = t_src;
      if (u.sh_from_tank) {
        if (m_sh_tank > kNoFlow) sh_return = t_src - br.heat_kw / (m_sh_tank * kWaterCp);
      } else {
        u.sh_heat = br.heat_kw;
        if (m_sh > kNoFlow) enthalpy_back += m_sh * (t_sup - br.heat_kw / (m_sh * kWaterCp));
      }

      // Hot water.
      const double dhw_kw = cfg_.hot_water ? profiles::dhw_power(u.dhw, t, dt) : 0.0;
      if (!u.has_tank && m_dhw > 0.0) {
        u.dhw_heat = m_dhw * kWaterCp * (t_sup - building::kDhwPrimaryReturn);
        enthalpy_back += m_dhw * building::kDhwPrimaryReturn;
      }

      // Local vessel.
      if (u.has_tank) {
        storage::Stream discharge;
        const double top = storage::top_temperature(u.tank_geom, u.tank);
        double m_tap = 0.0;
        if (dhw_kw > 0.0) m_tap = dhw_kw / (kWaterCp * std::max(top - kColdMainsTemperature, 5.0));
        discharge.flow = m_tap + m_sh_tank;
        if (discharge.flow > 0.0) {
          discharge.temp = (m_tap * kColdMainsTemperature + m_sh_tank * sh_return) / discharge.flow;
        }
        const storage::StepResult tr =
            storage::tank_step(u.tank_geom, u.tank, {m_ch, t_sup}, discharge, kTankRoom, dt);
        u.tank = tr.state;
        u.tank_in = tr.charge_kw;
        u.tank_out = tr.discharge_kw;
        u.tank_loss = tr.loss_kw;
        if (m_ch > 0.0) enthalpy_back += m_ch * tr.charge_out_temp;
      }

      if (u.flow > kNoFlow) {
        u.t_ret = enthalpy_back / u.flow;
        u.delivered = u.flow * kWaterCp * (t_sup - u.t_ret);
      } else {
        u.t_ret = substation_return_[b];
        u.delivered = 0.0;
      }
    } catch (...) {
      errors[b] = std::current_exception();
    }
  }
  for (int b = 0; b < nb; ++b) {
    if (errors[b]) {
      try {
        std::rethrow_exception(errors[b]);
      } catch (const std::exception& e) {
        throw SimulationError(units_[b].has_tank ? "storage" : "building", t, e.what());
      }
    }
  }
  for (int b = 0; b < nb; ++b) substation_return_[b] = units_[b].t_ret;

  // 6. Return pipes.
  thermonet::SideResult ret;
  try {
    ret = thermonet::propagate_return(net_, graph_, flow_, substation_return_, kGroundTemperature, dt,
                                      exec_);
  } catch (const std::exception& e) {
    throw SimulationError("thermonet", t, e.what());
  }

  // Accumulate in a fixed order for reproducibility.
  double delivered = 0, mass_heat = 0, tank_in = 0, tank_out = 0, tank_loss = 0, direct = 0;
  double ctrl = 0;
  for (int b = 0; b < nb; ++b) {
    const Unit& u = units_[b];
    delivered += u.delivered;
    tank_in += u.tank_in;
    tank_out += u.tank_out;
    tank_loss += u.tank_loss;
    direct += u.dhw_heat;
    ctrl += u.sh_heat + u.tank_in;
  }
  for (int b : mass_units_) mass_heat += units_[b].sh_heat;
  acc_.delivered += delivered;
  acc_.controllable += ctrl;
  acc_.mass_heat += mass_heat;
  acc_.tank_in += tank_in;
  acc_.tank_out += tank_out;
  acc_.tank_loss += tank_loss;
  acc_.direct_dhw += direct;
  acc_.network_loss += sup.loss_kw + ret.loss_kw;
  acc_.pump += hydronet::pump_power_kw(flow_, graph_);
  acc_.t_supply += header_temp_;
  acc_.t_return += net_.node_temp[graph_.return_root];
  acc_.chp_on += plant_.chp_on ? 1.0 : 0.0;
  acc_.spot += price_[i];
  acc_.ambient += t_a;
  acc_.n += 1;

  if (plant_.chp_on != chp_was_on_) {
    chp_switch_times_.push_back(t);
    chp_was_on_ = plant_.chp_on;
  }
  if (in_week) {
    for (const Unit& u : units_) {
      tallies_.t_i_min = std::min(tallies_.t_i_min, u.s.t_i);
      tallies_.t_i_max = std::max(tallies_.t_i_max, u.s.t_i);
    }
  }
}

// ---------------------------------------------------------------------------
// Control

void Simulation::reference_decisions(double t) {
  pending_ = TraceRow{};
  if (has_central_) {
    // Pre-run vessel management: hold a stepped temperature target.
    const double step = excitation(t);
    central_setpoint_ = step > 0 ? 72.0 : 55.0;
    const double cap = storage::heat_capacity_kj_per_k(central_geom_) / kSecondsPerHour;  // kWh/K
    const double mean = storage::mean_temperature(central_geom_, central_);
    central_target_ = std::max(0.0, last_central_out_ + cap * (central_setpoint_ - mean) / 3.0);
    pending_.p_star = central_target_;
  }
}

void Simulation::active_decisions(double t) {
  const ControlSettings& ctl = cfg_.control;
  const int j = interval_index(t);
  const int n = ctl.horizon;
  const double t_in = clamp_inlet(net_.node_temp[graph_.return_root]);
  const plant::ChpParams& chp = cfg_.plant.chp;

  planner::Problem pr;
  pr.horizon = n;
  pr.dt_h = cfg_.control_step / kSecondsPerHour;
  pr.alpha = ctl.alpha;
  pr.slack_penalty = ctl.slack_penalty;
  pr.chp_max_heat = plant::chp_heat_at(chp, 1.0, t_in);
  pr.boiler_max_heat = plant::boiler_max_heat(cfg_.plant.boiler, t_in);
  const double boiler_cost =
      dispatch::boiler_heat_cost(cfg_.plant.boiler, 0.5 * pr.boiler_max_heat, t_in, cfg_.economics.gas_price);
  // Heat is priced at the effective CHP cost; production beyond the CHP capacity
  // is priced no lower, which keeps the tiers in merit order.
  for (int s = 0; s < n; ++s) {
    const double lambda =
        dispatch::chp_heat_cost(chp, 1.0, t_in, cfg_.economics.gas_price, price_ctrl_[j + s]);
    pr.chp_cost.push_back(lambda);
    pr.boiler_cost.push_back(std::max(lambda, boiler_cost));
  }
  pending_ = TraceRow{};
  pending_.lambda_eff = pr.chp_cost[0];

  // Uncontrolled production: recent network losses and, without local vessels,
  // direct hot-water draws.
  double loss = 0.0;
  {
    const int per_day = static_cast<int>(std::lround(profiles::kDay / cfg_.control_step));
    const int from = std::max(0, static_cast<int>(hist_loss_.size()) - per_day);
    int cnt = 0;
    for (int k = from; k < static_cast<int>(hist_loss_.size()); ++k, ++cnt) loss += hist_loss_[k];
    if (cnt) loss /= cnt;
  }
  if (sc_ != Scenario::central_active) {
    pr.fixed_demand.assign(n, loss);
    if (!has_local_tanks_) {
      const std::vector<double> dhw = slot_forecast(hist_direct_dhw_, j, n);
      for (int s = 0; s < n; ++s) pr.fixed_demand[s] += dhw[s];
    }
  }

  if (bfit_ && !mass_units_.empty()) {
    planner::BuildingBlock bb;
    bb.model = bfit_->model;
    double ta = 0.0;
    for (int b : mass_units_) ta += units_[b].s.t_i;
    bb.t_a0 = ta / static_cast<double>(mass_units_.size());
    bb.t_m0 = t_m_est_;
    for (int s = 0; s < n; ++s) {
      bb.t_out.push_back(amb_ctrl_[j + s]);
      bb.q_a.push_back(qa_ctrl_[j + s]);
      bb.q_m.push_back(qm_ctrl_[j + s]);
    }
    bb.t_min = ctl.comfort_min + ctl.building_margin;
    bb.t_max = ctl.comfort_max - ctl.building_margin;
    pr.building = bb;
  }
  if (tfit_) {
    planner::TankBlock tb;
    tb.model = *tfit_;
    tb.t_s0 = interval_ts_;
    for (int s = 0; s < n; ++s) tb.t_out.push_back(amb_ctrl_[j + s]);
    tb.demand = slot_forecast(hist_offtake_, j, n);
    tb.t_min = ctl.tank_min + ctl.tank_margin;
    tb.t_max = ctl.tank_max - ctl.tank_margin;
    pr.tank = tb;
  }

  double target = 0.0, target_b = 0.0, target_w = 0.0;
  const planner::Plan plan = planner::plan(pr);
  if (plan.status == lp::Status::optimal) {
    target_b = plan.p_b[0];
    target_w = plan.p_w[0];
    target = plan.p[0];
    last_plan_ = plan.p;
    if (plan.relaxed) ++relaxed_;
  } else {
    ++failed_;
    // Fall back on the previous plan, shifted by one step.
    if (last_plan_.size() > 1) last_plan_.erase(last_plan_.begin());
    target = last_plan_.empty() ? prev_target_ : last_plan_.front();
    target_b = target;
  }
  pending_.p_star = target;
  pending_.p_b_star = target_b;
  pending_.p_w_star = target_w;

  if (has_central_) {
    central_target_ = target;
    pending_.u_pi = target;
    return;
  }

  // Bids of the dispatched devices; devices below their band are on regardless.
  struct Device {
    int unit;
    bool tank;
    dispatch::Bid bid;
  };
  std::vector<Device> devices;
  double forced = 0.0, total = 0.0;
  for (Unit& u : units_) {
    const int b = static_cast<int>(&u - units_.data());
    const double t_sup = sensed_supply(u);
    if (!u.sh_from_tank) {
      const double soc =
          std::clamp((u.s.t_i - ctl.comfort_min) / (ctl.comfort_max - ctl.comfort_min), 0.0, 1.0);
      const double level =
          building::kSubstationEffectiveness / u.p.r_h * std::max(t_sup - u.s.t_h, 0.0);
      devices.push_back({b, false, dispatch::build_bid(soc, level)});
    }
    if (u.has_tank) {
      const double soc = storage::state_of_charge(u.tank_geom, u.tank, ctl.tank_min, ctl.tank_max);
      const double m = storage::total_volume_l(u.tank_geom) * 1e-3 * kWaterDensity / ctl.charge_turnover_s;
      const double level = m * kWaterCp * std::max(t_sup - u.tank.t.front(), 0.0);
      devices.push_back({b, true, dispatch::build_bid(soc, level)});
    }
  }
  std::vector<dispatch::Bid> open_bids;
  std::vector<int> open_index;
  for (std::size_t d = 0; d < devices.size(); ++d) {
    total += devices[d].bid.level;
    if (devices[d].bid.corner >= 1.0) forced += devices[d].bid.level;
    else {
      open_bids.push_back(devices[d].bid);
      open_index.push_back(static_cast<int>(d));
    }
  }
  // The error is taken between the previous target and what the devices drew over
  // that step; pi_trim forms target - measured, so the measurement is shifted.
  const double measured = hist_controllable_.empty() ? target : hist_controllable_.back();
  if (!pi_started_) {
    prev_target_ = measured;
    pi_started_ = true;
  }
  const double u = dispatch::pi_trim(target, measured + (target - prev_target_), ctl.pi, pi_, total);
  prev_target_ = target;
  double priority = 1.0;
  if (!open_bids.empty()) {
    const dispatch::AggregateBid agg = dispatch::aggregate(open_bids);
    priority = dispatch::clear_market(agg, std::max(0.0, u - forced)).priority;
  }
  for (const Device& d : devices) {
    const bool on = d.bid.corner >= 1.0 || priority < d.bid.corner;
    if (d.tank) units_[d.unit].charge_on = on;
    else units_[d.unit].mass_on = on;
  }
  pending_.p_r = priority;
  pending_.u_pi = u;
  pending_.measured = measured;
}

void Simulation::close_interval(double t) {
  const Accum& a = acc_;
  if (a.n == 0) return;
  const double n = a.n;
  const double ctrl = a.controllable / n;
  hist_controllable_.push_back(ctrl);
  hist_loss_.push_back(a.network_loss / n);
  hist_direct_dhw_.push_back(a.direct_dhw / n);
  const double offtake = has_central_ ? a.central_out / n : a.tank_out / n;
  hist_offtake_.push_back(offtake);

  const double t0 = t - cfg_.control_step;
  const int j = interval_index(t0);
  if (!mass_units_.empty()) {
    bsamples_.push_back({interval_ta_, amb_ctrl_[j], a.mass_heat / n, qa_ctrl_[j], qm_ctrl_[j]});
  }
  if (has_local_tanks_ || has_central_) {
    tsamples_.push_back({interval_ts_, amb_ctrl_[j], a.tank_in / n, offtake});
  }
  // Advance the latent mass-temperature estimate with the measured indoor mean.
  if (bfit_ && !mass_units_.empty()) {
    const fit::AggregateBuildingModel& m = bfit_->model;
    t_m_est_ += (cfg_.control_step / kSecondsPerHour) *
                (m.h_m * (interval_ta_ - t_m_est_) + m.gamma_m * qm_ctrl_[j]) / m.c_m;
  }

  if (t0 >= t_week_ - 1e-6 && !fit_only_) {
    TraceRow r = pending_;
    r.t_s = t0;
    r.spot = a.spot / n;
    r.ambient = a.ambient / n;
    r.chp_heat = a.chp_heat / n;
    r.boiler_heat = a.boiler_heat / n;
    r.production = r.chp_heat + r.boiler_heat;
    r.p_el = a.p_el / n;
    r.gas_chp = a.gas_chp / n;
    r.gas_boiler = a.gas_boiler / n;
    r.delivered = a.delivered / n;
    r.controllable = ctrl;
    r.network_loss = a.network_loss / n;
    r.tank_loss = a.tank_loss / n;
    r.pump_kw = a.pump / n;
    r.dumped = a.dumped / n;
    r.t_supply = a.t_supply / n;
    r.t_return = a.t_return / n;
    r.chp_on = a.chp_on / n;
    if (!is_active(sc_) || has_central_) r.measured = ctrl;
    std::vector<double> ti;
    ti.reserve(units_.size());
    for (const Unit& u : units_) ti.push_back(u.s.t_i);
    std::sort(ti.begin(), ti.end());
    const double mean = std::accumulate(ti.begin(), ti.end(), 0.0) / ti.size();
    double var = 0.0;
    for (double v : ti) var += (v - mean) * (v - mean);
    auto q = [&ti](double f) { return ti[static_cast<std::size_t>(std::lround(f * (ti.size() - 1)))]; };
    r.t_i_mean = mean;
    r.t_i_min = ti.front();
    r.t_i_max = ti.back();
    r.t_i_q25 = q(0.25);
    r.t_i_median = q(0.5);
    r.t_i_q75 = q(0.75);
    r.t_i_std = std::sqrt(var / ti.size());
    r.tank_mean = interval_ts_;
    spread_sum_ += r.t_i_std;
    ++spread_n_;
    trace_.push_back(r);
  }
  acc_ = Accum{};
}

void Simulation::control_boundary(double t, bool week_next) {
  close_interval(t);
  // Start-of-interval measurements.
  if (!mass_units_.empty()) {
    double ta = 0.0;
    for (int b : mass_units_) ta += units_[b].s.t_i;
    interval_ta_ = ta / static_cast<double>(mass_units_.size());
  }
  if (has_local_tanks_) {
    double cap = 0.0, e = 0.0;
    for (const Unit& u : units_) {
      const double c = storage::heat_capacity_kj_per_k(u.tank_geom);
      cap += c;
      e += c * storage::mean_temperature(u.tank_geom, u.tank);
    }
    interval_ts_ = e / cap;
  } else if (has_central_) {
    interval_ts_ = storage::mean_temperature(central_geom_, central_);
  }
  if (week_next && active_) active_decisions(t);
  else reference_decisions(t);
}

void Simulation::do_fit(int first, int last, bool holdout) {
  const double dt_h = cfg_.control_step / kSecondsPerHour;
  const bool wants_building = !mass_units_.empty() && sc_ != Scenario::central_active;
  if (wants_building) {
    std::vector<fit::BuildingSample> train(bsamples_.begin() + first, bsamples_.begin() + last);
    bfit_ = fit::fit_building(train, dt_h);
    t_m_est_ = bfit_->t_m_end;
    if (holdout && last < static_cast<int>(bsamples_.size())) {
      std::vector<fit::BuildingSample> test(bsamples_.begin() + last, bsamples_.end());
      holdout_rms_ = fit::one_step_rms(bfit_->model, test, dt_h, bfit_->t_m_end);
    }
  }
  if (has_local_tanks_ || has_central_) {
    std::vector<fit::TankSample> train(tsamples_.begin() + first, tsamples_.begin() + last);
    tfit_ = fit::fit_tank(train, dt_h);
  }
}

SimulationResult Simulation::run() {
  const auto wall0 = std::chrono::steady_clock::now();
  const double dt = cfg_.physics_step;
  const long steps = std::lround((t_end_ - t_pre_) / dt);
  const long week_step = std::lround((t_week_ - t_pre_) / dt);
  tallies_.t_i_min = 1e9;
  tallies_.t_i_max = -1e9;
  for (long s = 0; s <= steps; ++s) {
    const double t = t_pre_ + s * dt;
    if (s % steps_per_control_ == 0) {
      if (s == week_step && !fit_only_) {
        close_interval(t);
        if (active_) {
          try {
            do_fit(0, static_cast<int>(std::max(bsamples_.size(), tsamples_.size())), false);
          } catch (const std::exception& e) {
            throw SimulationError("fit", t, e.what());
          }
        }
        storage_start_ = storage_kwh();
        chp_switch_times_.clear();
      }
      if (s == steps) {
        close_interval(t);
        break;
      }
      control_boundary(t, s >= week_step && !fit_only_);
    }
    physics_step(t, s >= week_step && !fit_only_);
  }

  SimulationResult res;
  res.scenario = sc_;
  res.week = week_;
  res.week_start_s = t_week_;
  res.week_mean_ambient = week_mean_ambient_;
  res.control_step_h = cfg_.control_step / kSecondsPerHour;
  res.trace = trace_;
  Tallies& tl = tallies_;
  const double h = res.control_step_h;
  for (const TraceRow& r : trace_) {
    tl.consumed += r.delivered * h;
    tl.chp_heat += r.chp_heat * h;
    tl.boiler_heat += r.boiler_heat * h;
    tl.electricity += r.p_el * h;
    tl.gas_chp += r.gas_chp * h;
    tl.gas_boiler += r.gas_boiler * h;
    tl.network_loss += r.network_loss * h;
    tl.tank_loss += r.tank_loss * h;
    tl.pump_hydraulic += r.pump_kw * h;
    tl.dumped += r.dumped * h;
  }
  tl.produced = tl.chp_heat + tl.boiler_heat;
  tl.storage_change = storage_kwh() - storage_start_;
  if (has_central_) {
    double central_loss = 0.0;
    for (const TraceRow& r : trace_) central_loss += r.tank_loss * h;
    tl.central_tank_loss = central_loss;
  }
  const double residual = tl.produced - tl.consumed - tl.network_loss - tl.central_tank_loss -
                          tl.dumped - tl.storage_change;
  tl.closure_error = tl.produced > 0.0 ? residual / tl.produced : 0.0;
  tl.chp_starts = 0;
  tl.min_switch_interval_s = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < chp_switch_times_.size(); ++k) {
    tl.min_switch_interval_s =
        std::min(tl.min_switch_interval_s, chp_switch_times_[k] - chp_switch_times_[k - 1]);
  }
  // The plant state flag flips one step after a start; count rising edges.
  {
    bool on = false;
    for (const TraceRow& r : trace_) {
      if (r.chp_on > 0.0 && !on) ++tl.chp_starts;
      on = r.chp_on >= 1.0;
    }
  }
  res.tallies = tl;
  res.fit.building = bfit_;
  res.fit.tank = tfit_;
  res.fit.samples = static_cast<int>(std::max(bsamples_.size(), tsamples_.size()));
  res.t_i_spread = spread_n_ ? spread_sum_ / spread_n_ : 0.0;
  res.chp_max_heat = plant::chp_heat_at(cfg_.plant.chp, 1.0, 40.0);
  res.relaxed_plans = relaxed_;
  res.failed_plans = failed_;
  for (const Unit& u : units_) res.population.push_back(u.p);
  if (has_local_tanks_) res.tank_types = tank_types_;
  res.network_csv = hydronet::edge_list_csv(graph_);
  res.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return res;
}

FitReport Simulation::fit_report() {
  run();
  FitReport rep;
  const int per_day = static_cast<int>(std::lround(profiles::kDay / cfg_.control_step));
  const int train = cfg_.prerun_days * per_day;
  try {
    do_fit(0, train, true);
  } catch (const FitError&) {
    throw;
  }
  rep.building = bfit_;
  rep.tank = tfit_;
  rep.holdout_rms = holdout_rms_;
  rep.samples = static_cast<int>(std::max(bsamples_.size(), tsamples_.size()));
  rep.building_samples = bsamples_;
  rep.tank_samples = tsamples_;
  return rep;
}

}  // namespace

SimulationResult run(const ScenarioConfig& config) {
  Simulation sim(config, false);
  return sim.run();
}

FitReport fit_models(const ScenarioConfig& config) {
  Simulation sim(config, true);
  return sim.fit_report();
}

}  // namespace dhflex::engine
