#include <cmath>
#include <random>

#include <doctest.h>

#include "dhflex/dispatch.hpp"
#include "dhflex/errors.hpp"
#include "dhflex/lp.hpp"
#include "dhflex/planner.hpp"
#include "dhflex_oracles/oracles.hpp"

using namespace dhflex;
using namespace dhflex::dispatch;

TEST_CASE("bids") {
  const Bid b = build_bid(0.3, 12.0);
  CHECK(b.corner == doctest::Approx(0.7));
  CHECK(bid_value(b, 0.5) == 12.0);
  CHECK(bid_value(b, 0.7) == 0.0);
  CHECK(bid_value(b, 0.9) == 0.0);
  CHECK_THROWS_AS(build_bid(1.2, 1.0), ContractViolation);
  CHECK_THROWS_AS(build_bid(0.5, -1.0), ContractViolation);
  // A full device bids nothing, an empty one at every priority below 1.
  CHECK(bid_value(build_bid(1.0, 5.0), 0.0) == 0.0);
  CHECK(bid_value(build_bid(0.0, 5.0), 0.99) == 5.0);
}

TEST_CASE("aggregation and clearing") {
  const std::vector<Bid> bids = {build_bid(0.2, 10.0), build_bid(0.5, 5.0), build_bid(0.5, 3.0), build_bid(0.9, 7.0)};
  const AggregateBid agg = aggregate(bids);
  CHECK(agg.total() == doctest::Approx(25.0));
  CHECK(agg.at(0.0) == doctest::Approx(25.0));
  CHECK(agg.at(0.3) == doctest::Approx(18.0));
  CHECK(agg.at(0.6) == doctest::Approx(10.0));
  CHECK(agg.at(0.85) == 0.0);
  CHECK(clear_market(agg, 18.0).cleared == doctest::Approx(18.0));
  CHECK(clear_market(agg, 0.0).cleared == 0.0);
  CHECK(clear_market(agg, 100.0).priority == 0.0);
  CHECK_THROWS_AS(aggregate({}), ContractViolation);
  CHECK_THROWS_AS(clear_market(agg, -1.0), ContractViolation);
}

TEST_CASE("property: clearing equals the exhaustive scan and is monotone in the target") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Bid> bids;
    const int n = 1 + static_cast<int>(10 * u01(rng));
    for (int i = 0; i < n; ++i) bids.push_back(build_bid(u01(rng), 20.0 * u01(rng)));
    const AggregateBid agg = aggregate(bids);
    double prev_cleared = -1.0;
    for (double frac = 0.0; frac <= 1.2; frac += 0.1) {
      const double u = frac * agg.total();
      const Clearing a = clear_market(agg, u), b = oracle::scan_clearing(bids, u);
      CHECK(a.priority == doctest::Approx(b.priority));
      CHECK(a.cleared == doctest::Approx(b.cleared));
      CHECK(a.cleared >= prev_cleared - 1e-9);
      prev_cleared = a.cleared;
    }
  }
}

TEST_CASE("pi trim") {
  PiState s;
  const PiGains g{0.5, 0.1};
  CHECK(pi_trim(100.0, 100.0, g, s, 1000.0) == doctest::Approx(100.0));
  const double u1 = pi_trim(100.0, 80.0, g, s, 1000.0);
  CHECK(u1 == doctest::Approx(100.0 + 0.5 * 20.0 + 0.1 * 20.0));
  // Saturated output stops the integral.
  PiState sat;
  CHECK(pi_trim(100.0, 0.0, g, sat, 120.0) == 120.0);
  CHECK(sat.integral == 0.0);
  CHECK(pi_trim(0.0, 50.0, g, sat, 120.0) == 0.0);
  CHECK_THROWS_AS(pi_trim(1.0, 1.0, {-1.0, 0.0}, sat, 10.0), ContractViolation);
}

TEST_CASE("source selection follows the spot price") {
  const plant::PlantConfig cfg;
  plant::PlantState idle;
  const SourceChoice cheap_el = select_source(cfg, idle, 500.0, 5.0, 39.9, 40.0);
  const SourceChoice dear_el = select_source(cfg, idle, 500.0, 200.0, 39.9, 40.0);
  CHECK(dear_el.chp_on);
  CHECK_FALSE(cheap_el.chp_on);
  CHECK(cheap_el.boiler_heat == doctest::Approx(500.0).epsilon(1e-6));
  CHECK(dear_el.chp_cost < dear_el.boiler_cost);
  // Electricity revenue lowers the effective heat cost of the CHP.
  CHECK(chp_heat_cost(cfg.chp, 1.0, 40.0, 39.9, 200.0) < chp_heat_cost(cfg.chp, 1.0, 40.0, 39.9, 0.0));
}

TEST_CASE("lp solver") {
  // min -x - 2y, x + y <= 4, x <= 3, y <= 2.5
  lp::Model m;
  const int x = m.add_variable(0.0, 3.0, -1.0);
  const int y = m.add_variable(0.0, 2.5, -2.0);
  m.add_row({{x, 1.0}, {y, 1.0}}, lp::Sense::le, 4.0);
  const lp::Result r = lp::solve(m);
  CHECK(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(-6.5).epsilon(1e-7));
  CHECK(r.x[y] == doctest::Approx(2.5).epsilon(1e-6));

  // Free variable and an equality.
  lp::Model e;
  const int a = e.add_variable(-lp::kInf, lp::kInf, 1.0);
  const int b = e.add_variable(0.0, lp::kInf, 1.0);
  e.add_row({{a, 1.0}, {b, -1.0}}, lp::Sense::eq, -2.0);
  e.add_row({{a, 1.0}}, lp::Sense::ge, -5.0);
  const lp::Result q = lp::solve(e);
  CHECK(q.status == lp::Status::optimal);
  CHECK(q.objective == doctest::Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("property: planner matches enumeration on toy problems") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const oracle::ToyInstance toy = oracle::random_toy(seed);
    const planner::Plan p = planner::plan(oracle::toy_problem(toy));
    const oracle::ToySolution best = oracle::enumerate_toy(toy);
    CHECK(p.status == lp::Status::optimal);
    CHECK(std::abs(p.objective - best.objective) <= 1e-6 * std::max(1.0, std::abs(best.objective)));
  }
}

TEST_CASE("planner shifts production to cheap steps and keeps the tank band") {
  planner::Problem pr;
  pr.horizon = 8;
  pr.dt_h = 0.25;
  pr.chp_max_heat = 800.0;
  pr.boiler_max_heat = 800.0;
  for (int t = 0; t < 8; ++t) {
    pr.chp_cost.push_back(t < 4 ? 20.0 : 60.0);
    pr.boiler_cost.push_back(45.0);
  }
  planner::TankBlock tank;
  tank.model = {20.0, 0.0, 1.0, 0.0};
  tank.t_s0 = 50.0;
  tank.t_min = 45.0;
  tank.t_max = 70.0;
  tank.t_out.assign(8, 10.0);
  tank.demand.assign(8, 200.0);
  pr.tank = tank;
  const planner::Plan p = planner::plan(pr);
  REQUIRE(p.status == lp::Status::optimal);
  CHECK_FALSE(p.relaxed);
  double early = 0.0, late = 0.0;
  for (int t = 0; t < 8; ++t) (t < 4 ? early : late) += p.p[t];
  CHECK(early > late);
  for (double ts : p.t_s) {
    CHECK(ts >= 45.0 - 1e-6);
    CHECK(ts <= 70.0 + 1e-6);
  }
  planner::Problem bad = pr;
  bad.horizon = 1;
  CHECK_THROWS_AS(planner::plan(bad), ContractViolation);
}
