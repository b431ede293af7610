// One line per acceptance criterion; exit status 1 when any fails.
#include <chrono>
#include <iostream>
#include <vector>

#include "dhflex/engine.hpp"
#include "dhflex_oracles/suites.hpp"

using namespace dhflex;

int main() {
  const engine::ScenarioConfig base;
  std::vector<oracle::Check> checks = oracle::oracle_suites(base);

  std::vector<engine::SimulationResult> results;
  const auto t0 = std::chrono::steady_clock::now();
  for (engine::Scenario s : engine::kAllScenarios) {
    engine::ScenarioConfig cfg = base;
    cfg.scenario = s;
    results.push_back(engine::run(cfg));
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (oracle::Check& c : oracle::scenario_checks(results, base.economics, wall)) checks.push_back(c);

  int failed = 0;
  for (const oracle::Check& c : checks) {
    std::cout << oracle::format_check(c) << "\n";
    if (!c.pass) ++failed;
  }
  std::cout << checks.size() - failed << " of " << checks.size() << " criteria pass\n";
  return failed == 0 ? 0 : 1;
}
