// Serial reference against the OpenMP kernels: network heat transport and a
// whole simulation with the per-building fan-out on or off.
#include <vector>

#include <benchmark/benchmark.h>

#include "dhflex/engine.hpp"
#include "dhflex/hydronet.hpp"
#include "dhflex/thermonet.hpp"

using namespace dhflex;

namespace {

void network_step(benchmark::State& state, thermonet::Exec exec) {
  hydronet::TopologyConfig topo;
  topo.buildings = static_cast<int>(state.range(0));
  topo.streets = 4;
  const hydronet::NetworkGraph g = hydronet::build_topology(topo);
  const std::vector<double> valves(topo.buildings, 5e4 / (0.4 * 0.4));
  const hydronet::FlowSolution sol = hydronet::solve_with_dp_control(g, valves, 50e3, 20e3, 800e3);
  thermonet::NetworkState st = thermonet::init_network(g, 70.0, 40.0);
  const std::vector<double> ret(topo.buildings, 35.0);
  for (auto _ : state) {
    thermonet::propagate_supply(st, g, sol, 72.0, 10.0, 60.0, exec);
    thermonet::propagate_return(st, g, sol, ret, 10.0, 60.0, exec);
    benchmark::DoNotOptimize(st.node_temp.data());
  }
}

void BM_NetworkSerial(benchmark::State& s) { network_step(s, thermonet::Exec::serial); }
void BM_NetworkParallel(benchmark::State& s) { network_step(s, thermonet::Exec::parallel); }
BENCHMARK(BM_NetworkSerial)->Arg(25)->Arg(100);
BENCHMARK(BM_NetworkParallel)->Arg(25)->Arg(100);

void simulation(benchmark::State& state, bool parallel) {
  engine::ScenarioConfig cfg;
  cfg.scenario = engine::Scenario::reference;
  cfg.prerun_days = 2;
  cfg.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(engine::run(cfg).tallies.produced);
}

void BM_ReferenceWeekSerial(benchmark::State& s) { simulation(s, false); }
void BM_ReferenceWeekParallel(benchmark::State& s) { simulation(s, true); }
BENCHMARK(BM_ReferenceWeekSerial)->Unit(benchmark::kSecond)->Iterations(1);
BENCHMARK(BM_ReferenceWeekParallel)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
