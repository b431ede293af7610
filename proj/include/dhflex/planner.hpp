#pragma once

#include <optional>
#include <vector>

#include "dhflex/fit.hpp"
#include "dhflex/lp.hpp"

namespace dhflex::planner {

struct BuildingBlock {
  fit::AggregateBuildingModel model;
  double t_a0 = 20.0;
  double t_m0 = 20.0;
  std::vector<double> t_out, q_a, q_m;  // per step
  double t_min = 19.5;
  double t_max = 21.5;
};

struct TankBlock {
  fit::AggregateTankModel model;
  double t_s0 = 60.0;
  std::vector<double> t_out, demand;  // per step
  double t_min = 40.0;
  double t_max = 80.0;
};

// Heat supplied at step t, P_t = P_b,t + P_w,t, is produced by two tiers: the
// CHP up to its heat capacity at chp_cost, the boiler at boiler_cost, both in
// EUR/MWh. `fixed_demand` is uncontrollable production on top (network losses,
// direct hot water draws).
struct Problem {
  int horizon = 96;
  double dt_h = 0.25;
  std::vector<double> chp_cost;
  std::vector<double> boiler_cost;
  double chp_max_heat = 0.0;     // kW
  double boiler_max_heat = 0.0;  // kW
  std::vector<double> fixed_demand;  // kW, empty means zero
  double alpha = 5.0;            // EUR per MW change between steps
  double slack_penalty = 1000.0; // EUR per K of bound violation per step
  std::optional<BuildingBlock> building;
  std::optional<TankBlock> tank;
};

struct Plan {
  lp::Status status = lp::Status::numerical_failure;
  std::vector<double> p, p_b, p_w, p_chp, p_boiler;
  std::vector<double> t_a, t_m, t_s;  // predicted states at step ends
  double objective = 0.0;             // EUR
  bool relaxed = false;               // a temperature bound had to be violated
  double max_slack = 0.0;             // K
};

// Builds and solves the horizon LP: production cost plus alpha |P_t+1 - P_t|,
// discretised aggregate dynamics, temperature bands softened by penalised slacks.
// Throws ContractViolation for a horizon below 2 or inconsistent input lengths.
Plan plan(const Problem& problem);

}  // namespace dhflex::planner
