#pragma once

#include <vector>

#include "dhflex/plant.hpp"

namespace dhflex::dispatch {

// Step bid of one flexible load: `level` kW requested for any priority below
// the corner, nothing at or above it.
struct Bid {
  double level = 0.0;
  double corner = 0.0;
};

// corner = 1 - SoC. Throws ContractViolation for SoC outside [0, 1] or a negative level.
Bid build_bid(double soc, double level);
double bid_value(const Bid& b, double priority);

// Pointwise sum of bids, stored as descending-priority breakpoints.
class AggregateBid {
 public:
  explicit AggregateBid(const std::vector<Bid>& bids);

  double at(double priority) const;
  double total() const { return total_; }
  // Candidate clearing priorities: 0 and every distinct corner, ascending.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  // Aggregate value at each breakpoint.
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  double total_ = 0.0;
};

// Throws ContractViolation on an empty bid list.
AggregateBid aggregate(const std::vector<Bid>& bids);

struct Clearing {
  double priority = 0.0;
  double cleared = 0.0;  // aggregate consumption at that priority
};

// Priority minimising |aggregate - u|; the smallest such priority on ties.
Clearing clear_market(const AggregateBid& agg, double u);

struct PiGains {
  double kp = 0.5;
  double ki = 0.1;  // per control step
};

struct PiState {
  double integral = 0.0;  // accumulated error, kW steps
};

// u = target + kp e + ki sum(e), e = target - measured, clamped to [0, u_max].
// The integral only accumulates while the output is not saturated.
double pi_trim(double target, double measured, PiGains gains, PiState& state, double u_max);

// Net cost of one MWh of CHP heat at modulation fm: gas bought minus
// electricity sold, per unit of heat produced.
double chp_heat_cost(const plant::ChpParams& chp, double fm, double t_in, double gas_price,
                     double spot_price);
// Gas cost of one MWh of boiler heat when the boiler delivers `heat_kw`.
double boiler_heat_cost(const plant::BoilerParams& boiler, double heat_kw, double t_in,
                        double gas_price);

enum class Source { off, chp, boiler, mix };

const char* source_name(Source s);

struct SourceChoice {
  Source source = Source::off;
  bool chp_on = false;
  double chp_fm = 0.0;
  double boiler_heat = 0.0;  // kW
  double chp_cost = 0.0;     // EUR/MWh heat at the required modulation
  double boiler_cost = 0.0;
};

// Picks CHP or boiler for `heat_kw` by comparing effective heat costs, then
// applies the CHP on/off timers; the boiler covers anything the CHP cannot and
// any demand below the CHP minimum output.
SourceChoice select_source(const plant::PlantConfig& config, const plant::PlantState& state,
                           double heat_kw, double spot_price, double gas_price, double t_in);

}  // namespace dhflex::dispatch
