#pragma once

// Acceptance checks shared by the acceptance test binary and `dhflex validate`.
// Every tolerance is pinned here and printed in the check detail.

#include <string>
#include <vector>

#include "dhflex/engine.hpp"

namespace dhflex::oracle {

struct Check {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

Check plant_fidelity();
Check building_physics();
Check pipe_transport();
Check tank_model();
Check clearing_optimality();
Check mpc_optimality();
// Synthetic recovery plus held-out error of the fit on `base` run by the reference controller.
Check fit_identifiability(const engine::ScenarioConfig& base);

// Checks 1 to 7.
std::vector<Check> oracle_suites(const engine::ScenarioConfig& base);

// Checks 8 to 10 on the four scenario results, in any order. `wall_seconds`
// is the elapsed time of all four runs.
std::vector<Check> scenario_checks(const std::vector<engine::SimulationResult>& results,
                                   const engine::Economics& economics, double wall_seconds);

// One line per check: "[PASS] 3 pipe transport: ...".
std::string format_check(const Check& c);

}  // namespace dhflex::oracle
