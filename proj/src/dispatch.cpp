#include "dhflex/dispatch.hpp"

#include <algorithm>
#include <cmath>

#include "dhflex/errors.hpp"

namespace dhflex::dispatch {

Bid build_bid(double soc, double level) {
  if (!(soc >= 0.0 && soc <= 1.0)) throw ContractViolation("state of charge outside [0, 1]");
  if (!(level >= 0.0)) throw ContractViolation("negative bid level");
  return {level, 1.0 - soc};
}

double bid_value(const Bid& b, double priority) { return priority < b.corner ? b.level : 0.0; }

AggregateBid::AggregateBid(const std::vector<Bid>& bids) {
  std::vector<Bid> sorted = bids;
  std::sort(sorted.begin(), sorted.end(),
            [](const Bid& a, const Bid& b) { return a.corner < b.corner; });
  for (const Bid& b : sorted) total_ += b.level;
  breakpoints_.push_back(0.0);
  values_.push_back(0.0);
  // The value at priority p sums the bids whose corner lies strictly above p.
  double remaining = total_;
  std::size_t i = 0;
  while (i < sorted.size() && sorted[i].corner <= 0.0) remaining -= sorted[i++].level;
  values_[0] = remaining;
  while (i < sorted.size()) {
    const double c = sorted[i].corner;
    while (i < sorted.size() && sorted[i].corner == c) remaining -= sorted[i++].level;
    breakpoints_.push_back(c);
    values_.push_back(std::max(remaining, 0.0));
  }
}

double AggregateBid::at(double priority) const {
  // Last breakpoint not above the priority.
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), priority);
  if (it == breakpoints_.begin()) return total_;
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

AggregateBid aggregate(const std::vector<Bid>& bids) {
  if (bids.empty()) throw ContractViolation("aggregation needs at least one bid");
  return AggregateBid(bids);
}

Clearing clear_market(const AggregateBid& agg, double u) {
  if (!(u >= 0.0)) throw ContractViolation("clearing target must be non-negative");
  Clearing best{agg.breakpoints()[0], agg.values()[0]};
  double best_gap = std::abs(best.cleared - u);
  for (std::size_t i = 1; i < agg.breakpoints().size(); ++i) {
    const double gap = std::abs(agg.values()[i] - u);
    if (gap < best_gap) {
      best = {agg.breakpoints()[i], agg.values()[i]};
      best_gap = gap;
    }
  }
  return best;
}

double pi_trim(double target, double measured, PiGains gains, PiState& state, double u_max) {
  if (gains.kp < 0.0 || gains.ki < 0.0) throw ContractViolation("PI gains must be non-negative");
  const double e = target - measured;
  const double u = target + gains.kp * e + gains.ki * (state.integral + e);
  if (u >= 0.0 && u <= u_max) {
    state.integral += e;
    return u;
  }
  return std::clamp(u, 0.0, std::max(u_max, 0.0));
}

double chp_heat_cost(const plant::ChpParams& chp, double fm, double t_in, double gas_price,
                     double spot_price) {
  const plant::ChpOutput o = plant::chp_evaluate(chp, fm, t_in);
  return (o.p_gas * gas_price - o.p_el * spot_price) / o.p_heat;
}

double boiler_heat_cost(const plant::BoilerParams& boiler, double heat_kw, double t_in,
                        double gas_price) {
  const double heat = std::clamp(heat_kw, 1e-9, plant::boiler_max_heat(boiler, t_in));
  const plant::BoilerOperation op = plant::boiler_for_heat(boiler, heat, t_in);
  return gas_price / op.output.efficiency;
}

const char* source_name(Source s) {
  switch (s) {
    case Source::off: return "off";
    case Source::chp: return "chp";
    case Source::boiler: return "boiler";
    case Source::mix: return "mix";
  }
  return "?";
}

SourceChoice select_source(const plant::PlantConfig& config, const plant::PlantState& state,
                           double heat_kw, double spot_price, double gas_price, double t_in) {
  if (!(heat_kw >= 0.0)) throw ContractViolation("heat demand must be non-negative");
  const plant::ChpParams& chp = config.chp;
  SourceChoice c;
  const double fm_req = plant::chp_modulation_for_heat(chp, std::max(heat_kw, 0.0), t_in);
  c.chp_cost = chp_heat_cost(chp, fm_req, t_in, gas_price, spot_price);
  c.boiler_cost = boiler_heat_cost(config.boiler, heat_kw, t_in, gas_price);

  // Below its minimum output the CHP would overheat the supply; the boiler takes the load.
  const bool coverable = heat_kw >= plant::chp_heat_at(chp, chp.fm_min, t_in);
  bool want_chp = coverable && c.chp_cost < c.boiler_cost;
  bool on = state.chp_on;
  if (on && !want_chp && plant::chp_may_stop(chp, state)) on = false;
  if (!on && want_chp && plant::chp_may_start(chp, state)) on = true;

  c.chp_on = on;
  if (on) {
    // A CHP held on by its timer while the boiler is cheaper idles at minimum.
    c.chp_fm = want_chp ? fm_req : chp.fm_min;
    c.boiler_heat = std::max(0.0, heat_kw - plant::chp_heat_at(chp, c.chp_fm, t_in));
  } else {
    c.boiler_heat = heat_kw;
  }
  if (c.chp_on && c.boiler_heat > 0.0) c.source = Source::mix;
  else if (c.chp_on) c.source = Source::chp;
  else if (c.boiler_heat > 0.0) c.source = Source::boiler;
  return c;
}

}  // namespace dhflex::dispatch
