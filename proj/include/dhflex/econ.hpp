#pragma once

#include <string>
#include <vector>

#include "dhflex/engine.hpp"

namespace dhflex::econ {

struct ProfitBreakdown {
  double gas_cost = 0.0;       // EUR
  double pump_cost = 0.0;
  double heat_revenue = 0.0;
  double electricity_revenue = 0.0;
  double profit = 0.0;
};

// Settles one evaluated week. `spot` holds the price of every trace step
// (EUR/MWh, may be negative). Throws AlignmentError when the trace is not on a
// uniform grid or the price series does not match it step for step.
ProfitBreakdown settle(const std::vector<engine::TraceRow>& trace, const std::vector<double>& spot,
                       double step_h, double delivered_kwh, const engine::Economics& params);
// Uses the prices recorded in the trace.
ProfitBreakdown settle(const engine::SimulationResult& result, const engine::Economics& params);

// Electricity revenue per MWh of electricity generated.
double capture_price(const engine::SimulationResult& result);

struct ReportRow {
  engine::Scenario scenario;
  double consumed = 0.0, produced = 0.0, chp = 0.0, boiler = 0.0;  // kWh
  double d_consumed = 0.0, d_produced = 0.0, d_chp = 0.0, d_boiler = 0.0;  // % vs reference
  double grid_efficiency = 0.0;  // consumed / produced
  ProfitBreakdown profit;
  double d_profit = 0.0;  // % vs reference, relative to |reference profit|
};

// Fills the percentage deltas and grid efficiency from the absolute columns.
// Throws ContractViolation when the reference scenario is missing.
void fill_deltas(std::vector<ReportRow>& rows);

// Throws ContractViolation when the reference scenario is missing.
std::vector<ReportRow> table5_report(const std::vector<engine::SimulationResult>& results,
                                     const engine::Economics& params);

std::string table5_csv(const std::vector<ReportRow>& rows);
std::string profit_csv(const std::vector<ReportRow>& rows);

struct Verdict {
  bool distributed_vs_no_buffer = false;  // distributed >= no_buffer or tied within 2 %
  bool no_buffer_above_central = false;
  bool central_above_reference = false;
  bool reference_lowest_by_10pct = false;
  bool holds() const {
    return distributed_vs_no_buffer && no_buffer_above_central && central_above_reference &&
           reference_lowest_by_10pct;
  }
};

// Needs all four scenarios; throws ContractViolation otherwise.
Verdict ordering_verdict(const std::vector<ReportRow>& rows);

}  // namespace dhflex::econ
