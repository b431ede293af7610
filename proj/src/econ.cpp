#include "dhflex/econ.hpp"

#include <cmath>
#include <sstream>

#include "dhflex/errors.hpp"

namespace dhflex::econ {

ProfitBreakdown settle(const std::vector<engine::TraceRow>& trace, const std::vector<double>& spot,
                       double step_h, double delivered_kwh, const engine::Economics& params) {
  if (spot.size() != trace.size()) {
    throw AlignmentError("price series has " + std::to_string(spot.size()) + " steps, trace has " +
                         std::to_string(trace.size()));
  }
  if (!(step_h > 0.0)) throw AlignmentError("trace step must be positive");
  const double step_s = step_h * 3600.0;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (std::abs(trace[k].t_s - trace[k - 1].t_s - step_s) > 1e-6) {
      throw AlignmentError("trace step " + std::to_string(k) + " is not on the " +
                           std::to_string(step_s) + " s grid");
    }
  }
  ProfitBreakdown p;
  double gas = 0.0, pump = 0.0, el = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const engine::TraceRow& r = trace[k];
    gas += (r.gas_chp + r.gas_boiler) * step_h;
    pump += r.pump_kw * step_h;
    el += r.p_el * spot[k] * step_h;
  }
  p.gas_cost = gas / 1000.0 * params.gas_price;
  p.pump_cost = pump / params.pump_efficiency / 1000.0 * params.pump_tariff;
  p.electricity_revenue = el / 1000.0;
  p.heat_revenue = delivered_kwh / 1000.0 * params.heat_price;
  p.profit = p.heat_revenue + p.electricity_revenue - p.gas_cost - p.pump_cost;
  return p;
}

ProfitBreakdown settle(const engine::SimulationResult& result, const engine::Economics& params) {
  std::vector<double> spot;
  spot.reserve(result.trace.size());
  for (const engine::TraceRow& r : result.trace) spot.push_back(r.spot);
  return settle(result.trace, spot, result.control_step_h, result.tallies.consumed, params);
}

double capture_price(const engine::SimulationResult& result) {
  double el = 0.0, rev = 0.0;
  for (const engine::TraceRow& r : result.trace) {
    el += r.p_el;
    rev += r.p_el * r.spot;
  }
  return el > 0.0 ? rev / el : 0.0;
}

namespace {

double delta(double v, double ref) { return ref != 0.0 ? 100.0 * (v - ref) / std::abs(ref) : 0.0; }

const ReportRow& find(const std::vector<ReportRow>& rows, engine::Scenario s) {
  for (const ReportRow& r : rows) {
    if (r.scenario == s) return r;
  }
  throw ContractViolation(std::string("scenario missing from report: ") + engine::scenario_name(s));
}

}  // namespace

void fill_deltas(std::vector<ReportRow>& rows) {
  const ReportRow* ref = nullptr;
  for (const ReportRow& r : rows) {
    if (r.scenario == engine::Scenario::reference) ref = &r;
  }
  if (!ref) throw ContractViolation("comparison needs the reference scenario");
  const ReportRow base = *ref;
  for (ReportRow& row : rows) {
    row.d_consumed = delta(row.consumed, base.consumed);
    row.d_produced = delta(row.produced, base.produced);
    row.d_chp = delta(row.chp, base.chp);
    row.d_boiler = delta(row.boiler, base.boiler);
    row.grid_efficiency = row.produced > 0.0 ? row.consumed / row.produced : 0.0;
    row.d_profit = delta(row.profit.profit, base.profit.profit);
  }
}

std::vector<ReportRow> table5_report(const std::vector<engine::SimulationResult>& results,
                                     const engine::Economics& params) {
  std::vector<ReportRow> rows;
  for (const engine::SimulationResult& r : results) {
    ReportRow row;
    row.scenario = r.scenario;
    row.consumed = r.tallies.consumed;
    row.produced = r.tallies.produced;
    row.chp = r.tallies.chp_heat;
    row.boiler = r.tallies.boiler_heat;
    row.profit = settle(r, params);
    rows.push_back(row);
  }
  fill_deltas(rows);
  return rows;
}

std::string table5_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream o;
  o.precision(10);
  o << "scenario,consumed_kwh,consumed_delta_pct,produced_kwh,produced_delta_pct,chp_kwh,"
       "chp_delta_pct,boiler_kwh,boiler_delta_pct,grid_efficiency\n";
  for (const ReportRow& r : rows) {
    o << engine::scenario_name(r.scenario) << ',' << r.consumed << ',' << r.d_consumed << ','
      << r.produced << ',' << r.d_produced << ',' << r.chp << ',' << r.d_chp << ',' << r.boiler << ','
      << r.d_boiler << ',' << r.grid_efficiency << '\n';
  }
  return o.str();
}

std::string profit_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream o;
  o.precision(10);
  o << "scenario,gas_cost_eur,pump_cost_eur,heat_revenue_eur,electricity_revenue_eur,profit_eur,"
       "profit_delta_pct\n";
  for (const ReportRow& r : rows) {
    const ProfitBreakdown& p = r.profit;
    o << engine::scenario_name(r.scenario) << ',' << p.gas_cost << ',' << p.pump_cost << ','
      << p.heat_revenue << ',' << p.electricity_revenue << ',' << p.profit << ',' << r.d_profit
      << '\n';
  }
  return o.str();
}

Verdict ordering_verdict(const std::vector<ReportRow>& rows) {
  using engine::Scenario;
  const double ref = find(rows, Scenario::reference).profit.profit;
  const double cen = find(rows, Scenario::central_active).profit.profit;
  const double dis = find(rows, Scenario::distributed_active).profit.profit;
  const double nob = find(rows, Scenario::no_buffer_active).profit.profit;
  Verdict v;
  v.distributed_vs_no_buffer = dis >= nob || std::abs(dis - nob) <= 0.02 * std::abs(nob);
  v.no_buffer_above_central = nob > cen;
  v.central_above_reference = cen > ref;
  v.reference_lowest_by_10pct = std::min({cen, dis, nob}) >= ref + 0.1 * std::abs(ref);
  return v;
}

}  // namespace dhflex::econ
