#include <algorithm>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "dhflex/config.hpp"
#include "dhflex/csv.hpp"
#include "dhflex/econ.hpp"
#include "dhflex/errors.hpp"
#include "dhflex/profiles.hpp"
#include "dhflex/report.hpp"

using namespace dhflex;

namespace {

std::vector<engine::TraceRow> flat_trace(int n, double step_s) {
  std::vector<engine::TraceRow> t(n);
  for (int k = 0; k < n; ++k) {
    t[k].t_s = k * step_s;
    t[k].gas_chp = 1000.0;
    t[k].gas_boiler = 0.0;
    t[k].p_el = 400.0;
    t[k].pump_kw = 7.0;
    t[k].spot = k < n / 2 ? 100.0 : -20.0;
  }
  return t;
}

econ::ReportRow row(engine::Scenario s, double profit, double consumed, double produced) {
  econ::ReportRow r;
  r.scenario = s;
  r.profit.profit = profit;
  r.consumed = consumed;
  r.produced = produced;
  r.chp = produced * 0.8;
  r.boiler = produced * 0.2;
  return r;
}

}  // namespace

TEST_CASE("settlement") {
  const auto trace = flat_trace(8, 900.0);
  std::vector<double> spot;
  for (const auto& r : trace) spot.push_back(r.spot);
  const engine::Economics e;
  const econ::ProfitBreakdown p = econ::settle(trace, spot, 0.25, 2000.0, e);
  CHECK(p.gas_cost == doctest::Approx(8 * 0.25 * 39.9));
  CHECK(p.electricity_revenue == doctest::Approx(0.4 * 0.25 * (4 * 100.0 - 4 * 20.0)));
  CHECK(p.pump_cost == doctest::Approx(7.0 * 2.0 / 0.7 / 1000.0 * 150.0));
  CHECK(p.heat_revenue == doctest::Approx(2.0 * 54.5));
  CHECK(p.profit == doctest::Approx(p.heat_revenue + p.electricity_revenue - p.gas_cost - p.pump_cost));

  std::vector<double> short_spot(spot.begin(), spot.end() - 1);
  CHECK_THROWS_AS(econ::settle(trace, short_spot, 0.25, 0.0, e), AlignmentError);
  auto gap = trace;
  gap[3].t_s += 60.0;
  CHECK_THROWS_AS(econ::settle(gap, spot, 0.25, 0.0, e), AlignmentError);
}

TEST_CASE("comparison deltas and ordering verdict") {
  using engine::Scenario;
  std::vector<econ::ReportRow> rows = {row(Scenario::reference, 1000.0, 900.0, 1000.0),
                                       row(Scenario::central_active, 1150.0, 900.0, 990.0),
                                       row(Scenario::distributed_active, 1190.0, 920.0, 1010.0),
                                       row(Scenario::no_buffer_active, 1200.0, 910.0, 1000.0)};
  econ::fill_deltas(rows);
  CHECK(rows[2].d_consumed == doctest::Approx(100.0 * 20.0 / 900.0));
  CHECK(rows[1].d_profit == doctest::Approx(15.0));
  CHECK(rows[0].grid_efficiency == doctest::Approx(0.9));
  const econ::Verdict v = econ::ordering_verdict(rows);
  CHECK(v.distributed_vs_no_buffer);  // within the 2 % tie
  CHECK(v.holds());

  rows[2].profit.profit = 1100.0;
  CHECK_FALSE(econ::ordering_verdict(rows).distributed_vs_no_buffer);
  rows[1].profit.profit = 1050.0;
  CHECK_FALSE(econ::ordering_verdict(rows).reference_lowest_by_10pct);

  std::vector<econ::ReportRow> no_ref(rows.begin() + 1, rows.end());
  CHECK_THROWS_AS(econ::fill_deltas(no_ref), ContractViolation);
  CHECK_THROWS_AS(econ::ordering_verdict(no_ref), ContractViolation);
}

TEST_CASE("config") {
  SUBCASE("defaults round-trip") {
    const engine::ScenarioConfig c = config::parse(config::dump({}));
    CHECK(c.week == 46);
    CHECK(c.control.horizon == 96);
    CHECK(config::dump(c) == config::dump({}));
  }
  SUBCASE("errors name the key") {
    CHECK_THROWS_WITH_AS(config::parse(R"({"wek": 3})"), doctest::Contains("wek"), ConfigError);
    CHECK_THROWS_WITH_AS(config::parse(R"({"control": {"horizon": "long"}})"),
                         doctest::Contains("control.horizon"), ConfigError);
    CHECK_THROWS_AS(config::parse(R"({"scenario": "greedy"})"), ConfigError);
    CHECK_THROWS_AS(config::parse(R"({"physics_step_s": 120})"), ConfigError);
    CHECK_THROWS_AS(config::parse("{not json"), ConfigError);
    CHECK_THROWS_AS(config::load("/nonexistent/config.json"), ConfigError);
  }
  SUBCASE("bundled example") {
    const engine::ScenarioConfig c = config::load(std::string(DHFLEX_DATA_DIR) + "/config.json");
    CHECK(c.topology.buildings == 100);
    CHECK(std::filesystem::exists(c.weather_path));
  }
}

TEST_CASE("input ingestion") {
  const auto dir = std::filesystem::temp_directory_path() / "dhflex_test_ingest";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "bad.csv") << "time_s,price\n0,10\n3600,abc\n";
  }
  CHECK_THROWS_AS(csv::read((dir / "bad.csv").string()), IngestError);
  try {
    csv::read((dir / "bad.csv").string());
  } catch (const IngestError& e) {
    CHECK(e.row() == 3);
  }
  {
    std::ofstream(dir / "gap.csv") << "time_s,price_eur_mwh\n0,10\n3600,11\n10800,12\n";
  }
  CHECK_THROWS_AS(profiles::read_prices((dir / "gap.csv").string()), IngestError);

  const profiles::Weather w = profiles::read_weather(engine::default_weather_path());
  CHECK(w.time_s.size() >= 8760);
  const int week = profiles::select_representative_week(w);
  const auto weeks = profiles::season_weeks();
  CHECK(std::find(weeks.begin(), weeks.end(), week) != weeks.end());
}

TEST_CASE("summary round trip") {
  engine::SimulationResult r;
  r.scenario = engine::Scenario::central_active;
  r.control_step_h = 0.25;
  r.trace = flat_trace(4, 900.0);
  r.tallies.consumed = 950.0;
  r.tallies.produced = 1000.0;
  r.tallies.chp_heat = 700.0;
  r.tallies.boiler_heat = 300.0;
  const engine::ScenarioConfig cfg;
  const auto dir = std::filesystem::temp_directory_path() / "dhflex_test_summary";
  report::write_run(r, cfg, dir.string());
  const econ::ReportRow back = report::read_summary((dir / "summary.json").string());
  CHECK(back.scenario == engine::Scenario::central_active);
  CHECK(back.consumed == doctest::Approx(950.0));
  CHECK(back.boiler == doctest::Approx(300.0));
  CHECK(back.profit.profit == doctest::Approx(econ::settle(r, cfg.economics).profit));
  CHECK(std::filesystem::exists(dir / "trace.csv"));
  {
    std::ofstream(dir / "broken.json") << "{\"scenario\": 3}";
  }
  CHECK_THROWS_AS(report::read_summary((dir / "broken.json").string()), IngestError);
}
