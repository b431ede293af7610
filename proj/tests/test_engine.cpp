#include <cmath>

#include <doctest.h>

#include "dhflex/econ.hpp"
#include "dhflex/engine.hpp"
#include "dhflex/errors.hpp"
#include "dhflex/fit.hpp"
#include "dhflex_oracles/oracles.hpp"

using namespace dhflex;

namespace {

// Twelve buildings, two streets and a short pre-run keep these runs to seconds.
engine::ScenarioConfig small(engine::Scenario s) {
  engine::ScenarioConfig c;
  c.scenario = s;
  c.topology.buildings = 12;
  c.topology.streets = 2;
  c.prerun_days = 3;
  return c;
}

}  // namespace

TEST_CASE("aggregate model fits recover synthetic parameters") {
  fit::AggregateBuildingModel m;
  m.c_a = 4.0;
  m.c_m = 25.0;
  m.u_a = 0.25;
  m.h_m = 0.9;
  m.gamma_a = 1.1;
  m.gamma_m = 0.4;
  const auto samples = oracle::synthetic_building_trace(m, 1200, 0.25, 21, 19.0);
  const fit::BuildingFit f = fit::fit_building(samples, 0.25);
  CHECK(f.model.c_a == doctest::Approx(m.c_a).epsilon(0.01));
  CHECK(f.model.c_m == doctest::Approx(m.c_m).epsilon(0.01));
  CHECK(f.model.u_a == doctest::Approx(m.u_a).epsilon(0.01));
  CHECK(f.model.h_m == doctest::Approx(m.h_m).epsilon(0.01));
  CHECK(f.t_m0 == doctest::Approx(19.0).epsilon(0.01));
  CHECK(fit::one_step_rms(f.model, samples, 0.25, f.t_m0) < 1e-6);

  fit::AggregateTankModel t{30.0, 0.05, 0.9, 0.0};
  const fit::AggregateTankModel ft = fit::fit_tank(oracle::synthetic_tank_trace(t, 600, 0.25, 4), 0.25);
  CHECK(ft.c_s == doctest::Approx(30.0).epsilon(0.01));
  CHECK(ft.u_s == doctest::Approx(0.05).epsilon(0.01));
  CHECK(ft.gamma_s == doctest::Approx(0.9).epsilon(0.01));

  CHECK_THROWS_AS(fit::fit_building(std::vector<fit::BuildingSample>(5), 0.25), FitError);
  CHECK_THROWS_AS(fit::fit_tank(std::vector<fit::TankSample>(20, {50.0, 10.0, 0.0, 0.0}), 0.25), FitError);
}

TEST_CASE("scenario tags") {
  for (engine::Scenario s : engine::kAllScenarios) CHECK(engine::parse_scenario(engine::scenario_name(s)) == s);
  CHECK_THROWS_AS(engine::parse_scenario("central"), ConfigError);
  CHECK_FALSE(engine::is_active(engine::Scenario::reference));
}

TEST_CASE("config validation") {
  engine::ScenarioConfig c;
  c.physics_step = 90.0;
  CHECK_THROWS_AS(engine::validate(c), ConfigError);
  c = {};
  c.control.comfort_min = 22.0;
  CHECK_THROWS_AS(engine::validate(c), ConfigError);
  c = {};
  c.economics.pump_efficiency = 0.0;
  CHECK_THROWS_AS(engine::validate(c), ConfigError);
}

TEST_CASE("reference run: closure, comfort, timers and determinism") {
  const engine::ScenarioConfig cfg = small(engine::Scenario::reference);
  const engine::SimulationResult a = engine::run(cfg);
  CHECK(a.trace.size() == 7 * 96);
  CHECK(std::abs(a.tallies.closure_error) < 0.005);
  CHECK(a.tallies.t_i_min >= 19.3);
  CHECK(a.tallies.t_i_max <= 20.7);
  if (a.tallies.chp_starts > 1) CHECK(a.tallies.min_switch_interval_s >= 900.0 - 1e-6);
  const double eff = a.tallies.consumed / a.tallies.produced;
  CHECK(eff > 0.5);
  CHECK(eff < 1.0);

  const engine::SimulationResult b = engine::run(cfg);
  REQUIRE(b.trace.size() == a.trace.size());
  bool identical = true;
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    identical = identical && a.trace[k].production == b.trace[k].production &&
                a.trace[k].t_i_mean == b.trace[k].t_i_mean && a.trace[k].t_return == b.trace[k].t_return;
  }
  CHECK(identical);
}

TEST_CASE("serial and parallel runs agree") {
  engine::ScenarioConfig cfg = small(engine::Scenario::reference);
  cfg.parallel = false;
  const engine::SimulationResult s = engine::run(cfg);
  cfg.parallel = true;
  const engine::SimulationResult p = engine::run(cfg);
  CHECK(s.tallies.produced == doctest::Approx(p.tallies.produced).epsilon(1e-9));
  CHECK(s.tallies.consumed == doctest::Approx(p.tallies.consumed).epsilon(1e-9));
}

TEST_CASE("no-load run produces only the standing losses") {
  engine::ScenarioConfig cfg = small(engine::Scenario::reference);
  cfg.airtight = true;
  cfg.hot_water = false;
  cfg.internal_gains = false;
  cfg.constant_ambient = 20.0;
  const engine::SimulationResult r = engine::run(cfg);
  const engine::Tallies& t = r.tallies;
  const double losses = t.network_loss + t.tank_loss + t.storage_change;
  CHECK(t.consumed < 0.05 * t.produced + 1.0);
  CHECK(t.produced == doctest::Approx(t.consumed + losses + t.dumped).epsilon(0.01));
}

TEST_CASE("active scenarios run and close their energy balance") {
  for (engine::Scenario s : {engine::Scenario::central_active, engine::Scenario::distributed_active,
                             engine::Scenario::no_buffer_active}) {
    const engine::SimulationResult r = engine::run(small(s));
    CAPTURE(engine::scenario_name(s));
    CHECK(r.failed_plans == 0);
    CHECK(std::abs(r.tallies.closure_error) < 0.005);
    // The central vessel is the only device the central controller plans.
    if (s == engine::Scenario::central_active) {
      CHECK(r.fit.tank.has_value());
    } else {
      CHECK(r.fit.building.has_value());
    }
    CHECK(r.tallies.t_i_min > 18.5);
    const econ::ProfitBreakdown p = econ::settle(r, small(s).economics);
    CHECK(std::isfinite(p.profit));
  }
}

TEST_CASE("middle tercile fraction") {
  std::vector<engine::TraceRow> t(6);
  const double prod[] = {0.0, 100.0, 400.0, 500.0, 800.0, 1000.0};
  for (int k = 0; k < 6; ++k) t[k].production = prod[k];
  CHECK(engine::middle_tercile_fraction(t, 900.0) == doctest::Approx(2.0 / 6.0));
}
