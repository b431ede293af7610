#include <cmath>
#include <random>

#include <doctest.h>

#include "dhflex/constants.hpp"
#include "dhflex/hydronet.hpp"
#include "dhflex/thermonet.hpp"
#include "dhflex_oracles/oracles.hpp"

using namespace dhflex;

namespace {

constexpr double kOpenValve = 5e4 / (0.4 * 0.4);

std::vector<double> valves(int n, double open_share, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> k(n);
  for (double& v : k) v = u01(rng) < open_share ? kOpenValve * (1.0 + 4.0 * u01(rng)) : hydronet::kClosedValve;
  return k;
}

}  // namespace

TEST_CASE("topology") {
  const hydronet::TopologyConfig cfg;
  const hydronet::NetworkGraph g = hydronet::build_topology(cfg);
  CHECK(g.valve_edges.size() == 100);
  CHECK(g.source_edge >= 0);
  CHECK(hydronet::trench_length(cfg) == doctest::Approx(100.0 + 100 * 20.0));
  // Every pipe is sized within the gradient limit at its design flow.
  for (const hydronet::Edge& e : g.edges) {
    if (e.kind != hydronet::EdgeKind::supply || e.design_flow <= 0.0) continue;
    if (e.dn != cfg.catalogue.back().dn) CHECK(hydronet::pressure_gradient(e, e.design_flow) <= cfg.max_gradient * (1 + 1e-9));
  }
  const hydronet::NetworkGraph again = hydronet::build_topology(cfg);
  CHECK(hydronet::edge_list_csv(g) == hydronet::edge_list_csv(again));
}

TEST_CASE("property: flow solutions conserve mass") {
  const hydronet::NetworkGraph g = hydronet::build_topology({});
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::vector<double> k = valves(100, 0.1 * seed, seed);
    const hydronet::FlowSolution sol = hydronet::solve_flows(g, k, 200e3);
    for (int n = 0; n < g.node_count; ++n) {
      if (n == g.supply_root || n == g.return_root) continue;
      CHECK(std::abs(hydronet::node_imbalance(g, sol, n)) < 1e-5);
    }
    CHECK(sol.flows[g.source_edge] >= 0.0);
  }
}

TEST_CASE("differential pressure control") {
  const hydronet::NetworkGraph g = hydronet::build_topology({});
  const std::vector<double> k = valves(100, 0.5, 17);
  const hydronet::FlowSolution sol = hydronet::solve_with_dp_control(g, k, 50e3, 20e3, 800e3);
  double worst = 1e18;
  for (int b = 0; b < 100; ++b) {
    if (k[b] < hydronet::kClosedValve) worst = std::min(worst, hydronet::valve_dp(g, sol, b));
  }
  CHECK(worst == doctest::Approx(50e3).epsilon(1e-3));
  CHECK(hydronet::pump_power_kw(sol, g) > 0.0);

  // Closed valves pass next to nothing.
  const std::vector<double> closed(100, hydronet::kClosedValve);
  const hydronet::FlowSolution none = hydronet::solve_flows(g, closed, 100e3);
  CHECK(std::abs(none.flows[g.source_edge]) < 1e-2);
}

TEST_CASE("pipe transport") {
  const thermonet::PipeParams pp = thermonet::pipe_params(200.0, 0.0825, 0.4, 3000.0);

  SUBCASE("a front arrives after one thermal transit") {
    thermonet::PipeState s = thermonet::make_pipe(pp, 40.0);
    const double flow = 2.0;
    const double transit = pp.capacity / (flow * kWaterCp);
    const int before = static_cast<int>(std::floor(transit / 10.0)) - 1;
    double out = 0.0;
    for (int k = 0; k < before; ++k) out = thermonet::propagate_pipe(s, pp, flow, 70.0, 10.0, 10.0).outlet_temp;
    CHECK(out < 41.0);
    for (int k = 0; k < 3; ++k) out = thermonet::propagate_pipe(s, pp, flow, 70.0, 10.0, 10.0).outlet_temp;
    CHECK(out > 69.0);
  }
  SUBCASE("property: energy balance per step") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    thermonet::PipeState s = thermonet::make_pipe(pp, 50.0);
    for (int k = 0; k < 2000; ++k) {
      const double flow = u01(rng) < 0.1 ? 0.0 : (u01(rng) < 0.2 ? -1.0 : 1.0) * 3.0 * u01(rng);
      const double t_in = 30.0 + 50.0 * u01(rng), dt = 60.0;
      const double e0 = thermonet::pipe_energy_kj(s);
      const thermonet::PipeStep r = thermonet::propagate_pipe(s, pp, flow, t_in, 10.0, dt);
      const double through = std::abs(flow) * kWaterCp * dt;
      const double expected = through * (t_in - r.outlet_temp) - r.loss_kw * dt;
      CHECK(thermonet::pipe_energy_kj(s) - e0 == doctest::Approx(expected).epsilon(1e-9).scale(e0));
    }
  }
  SUBCASE("stagnant pipe cools exponentially") {
    thermonet::PipeState s = thermonet::make_pipe(pp, 80.0);
    const thermonet::PipeStep r = thermonet::propagate_pipe(s, pp, 0.0, 80.0, 10.0, 3600.0);
    const double expected = 10.0 + 70.0 * std::exp(-pp.loss_kw_per_k / pp.capacity * 3600.0);
    CHECK(r.outlet_temp == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("step and ramp agree with the finite-volume oracle") {
    thermonet::PipeState s = thermonet::make_pipe(pp, 45.0);
    oracle::FvPipe fv(1000, pp.capacity, pp.loss_kw_per_k, 45.0);
    for (int k = 0; k < 180; ++k) {
      const double t_in = 45.0 + 25.0 * std::min(1.0, k / 60.0);
      const double a = thermonet::propagate_pipe(s, pp, 1.5, t_in, 10.0, 60.0).outlet_temp;
      CHECK(std::abs(a - fv.advance(1.5, t_in, 10.0, 60.0)) < 0.5);
    }
  }
}

TEST_CASE("network propagation: serial and parallel kernels agree") {
  const hydronet::NetworkGraph g = hydronet::build_topology({});
  const std::vector<double> k = valves(100, 0.6, 23);
  const hydronet::FlowSolution sol = hydronet::solve_with_dp_control(g, k, 50e3, 20e3, 800e3);
  thermonet::NetworkState a = thermonet::init_network(g, 70.0, 40.0);
  thermonet::NetworkState b = a;
  std::vector<double> ret(100, 35.0);
  for (int step = 0; step < 30; ++step) {
    const thermonet::SideResult sa = thermonet::propagate_supply(a, g, sol, 75.0, 10.0, 60.0, thermonet::Exec::serial);
    const thermonet::SideResult sb = thermonet::propagate_supply(b, g, sol, 75.0, 10.0, 60.0, thermonet::Exec::parallel);
    thermonet::propagate_return(a, g, sol, ret, 10.0, 60.0, thermonet::Exec::serial);
    thermonet::propagate_return(b, g, sol, ret, 10.0, 60.0, thermonet::Exec::parallel);
    CHECK(sa.loss_kw == doctest::Approx(sb.loss_kw).epsilon(1e-12));
  }
  for (std::size_t n = 0; n < a.node_temp.size(); ++n) CHECK(a.node_temp[n] == b.node_temp[n]);
  CHECK(thermonet::network_energy_kj(a) == doctest::Approx(thermonet::network_energy_kj(b)).epsilon(1e-12));
}

TEST_CASE("network energy closure on the supply side") {
  const hydronet::NetworkGraph g = hydronet::build_topology({});
  const std::vector<double> k = valves(100, 0.7, 29);
  const hydronet::FlowSolution sol = hydronet::solve_with_dp_control(g, k, 50e3, 20e3, 800e3);
  thermonet::NetworkState st = thermonet::init_network(g, 60.0, 35.0);
  for (int step = 0; step < 60; ++step) {
    const double e0 = thermonet::network_energy_kj(st);
    const thermonet::SideResult r = thermonet::propagate_supply(st, g, sol, 72.0, 10.0, 60.0);
    const thermonet::SideResult q = thermonet::propagate_return(st, g, sol, std::vector<double>(100, 30.0), 10.0, 60.0);
    const double de = thermonet::network_energy_kj(st) - e0;
    const double net = (r.inflow_kw + q.inflow_kw - r.outflow_kw - q.outflow_kw - r.loss_kw - q.loss_kw) * 60.0;
    CHECK(de == doctest::Approx(net).epsilon(1e-9).scale(e0));
  }
}
