#include "dhflex/planner.hpp"

#include <algorithm>

#include "dhflex/errors.hpp"

namespace dhflex::planner {

namespace {

using lp::Sense;
using lp::Term;

void check_length(const std::vector<double>& v, int n, const char* what) {
  if (static_cast<int>(v.size()) < n) {
    throw ContractViolation(std::string("planner input '") + what + "' shorter than the horizon");
  }
}

// Generous physical limits keep every state variable bounded for the solver.
constexpr double kStateLow = -60.0;
constexpr double kStateHigh = 200.0;

}  // namespace

Plan plan(const Problem& pr) {
  const int n = pr.horizon;
  if (n < 2) throw ContractViolation("planning horizon must be at least 2 steps");
  check_length(pr.chp_cost, n, "chp_cost");
  check_length(pr.boiler_cost, n, "boiler_cost");
  if (!pr.fixed_demand.empty()) check_length(pr.fixed_demand, n, "fixed_demand");
  if (pr.building) {
    check_length(pr.building->t_out, n, "building t_out");
    check_length(pr.building->q_a, n, "q_a");
    check_length(pr.building->q_m, n, "q_m");
  }
  if (pr.tank) {
    check_length(pr.tank->t_out, n, "tank t_out");
    check_length(pr.tank->demand, n, "demand");
  }
  const double dt = pr.dt_h;
  const double energy = dt / 1000.0;  // kW step -> MWh

  lp::Model m;
  std::vector<int> pb(n, -1), pw(n, -1), pc(n), po(n);
  std::vector<int> ta(n, -1), tm(n, -1), ts(n, -1);
  std::vector<int> slack;
  for (int t = 0; t < n; ++t) {
    pc[t] = m.add_variable(0.0, pr.chp_max_heat, pr.chp_cost[t] * energy);
    po[t] = m.add_variable(0.0, pr.boiler_max_heat, pr.boiler_cost[t] * energy);
    if (pr.building) pb[t] = m.add_variable(0.0, lp::kInf, 0.0);
    if (pr.tank) pw[t] = m.add_variable(0.0, lp::kInf, 0.0);
    std::vector<Term> balance = {{pc[t], 1.0}, {po[t], 1.0}};
    if (pb[t] >= 0) balance.push_back({pb[t], -1.0});
    if (pw[t] >= 0) balance.push_back({pw[t], -1.0});
    m.add_row(balance, Sense::eq, pr.fixed_demand.empty() ? 0.0 : pr.fixed_demand[t]);
  }

  auto soft_bounds = [&](int var, double lo, double hi) {
    const int s_lo = m.add_variable(0.0, lp::kInf, pr.slack_penalty);
    const int s_hi = m.add_variable(0.0, lp::kInf, pr.slack_penalty);
    slack.push_back(s_lo);
    slack.push_back(s_hi);
    m.add_row({{var, 1.0}, {s_lo, 1.0}}, Sense::ge, lo);
    m.add_row({{var, 1.0}, {s_hi, -1.0}}, Sense::le, hi);
  };

  if (pr.building) {
    const BuildingBlock& b = *pr.building;
    const fit::AggregateBuildingModel& md = b.model;
    const double ka = dt / md.c_a, km = dt / md.c_m;
    for (int t = 0; t < n; ++t) {
      ta[t] = m.add_variable(kStateLow, kStateHigh, 0.0);
      tm[t] = m.add_variable(kStateLow, kStateHigh, 0.0);
    }
    for (int t = 0; t < n; ++t) {
      // T_a,t+1 = (1 - ka (H+U)) T_a,t + ka H T_m,t + ka gamma_a P_b,t + ka (U T_out + Q_a)
      std::vector<Term> row_a = {{ta[t], 1.0}, {pb[t], -ka * md.gamma_a}};
      std::vector<Term> row_m = {{tm[t], 1.0}};
      double rhs_a = ka * (md.u_a * b.t_out[t] + b.q_a[t]);
      double rhs_m = km * md.gamma_m * b.q_m[t];
      const double self_a = 1.0 - ka * (md.h_m + md.u_a);
      const double self_m = 1.0 - km * md.h_m;
      if (t == 0) {
        rhs_a += self_a * b.t_a0 + ka * md.h_m * b.t_m0;
        rhs_m += self_m * b.t_m0 + km * md.h_m * b.t_a0;
      } else {
        row_a.push_back({ta[t - 1], -self_a});
        row_a.push_back({tm[t - 1], -ka * md.h_m});
        row_m.push_back({tm[t - 1], -self_m});
        row_m.push_back({ta[t - 1], -km * md.h_m});
      }
      m.add_row(row_a, Sense::eq, rhs_a);
      m.add_row(row_m, Sense::eq, rhs_m);
      soft_bounds(ta[t], b.t_min, b.t_max);
    }
  }

  if (pr.tank) {
    const TankBlock& k = *pr.tank;
    const fit::AggregateTankModel& md = k.model;
    const double ks = dt / md.c_s;
    const double self = 1.0 - ks * md.u_s;
    for (int t = 0; t < n; ++t) ts[t] = m.add_variable(kStateLow, kStateHigh, 0.0);
    for (int t = 0; t < n; ++t) {
      std::vector<Term> row = {{ts[t], 1.0}, {pw[t], -ks * md.gamma_s}};
      double rhs = ks * (md.u_s * k.t_out[t] - k.demand[t]);
      if (t == 0) rhs += self * k.t_s0;
      else row.push_back({ts[t - 1], -self});
      m.add_row(row, Sense::eq, rhs);
      soft_bounds(ts[t], k.t_min, k.t_max);
    }
  }

  // |P_t+1 - P_t| through z_t >= +-(P_t+1 - P_t).
  auto supply_terms = [&](int t, double sign, std::vector<Term>& row) {
    if (pb[t] >= 0) row.push_back({pb[t], sign});
    if (pw[t] >= 0) row.push_back({pw[t], sign});
  };
  for (int t = 0; t + 1 < n; ++t) {
    const int z = m.add_variable(0.0, lp::kInf, pr.alpha / 1000.0);
    for (double sign : {1.0, -1.0}) {
      std::vector<Term> row = {{z, 1.0}};
      supply_terms(t + 1, -sign, row);
      supply_terms(t, sign, row);
      m.add_row(row, Sense::ge, 0.0);
    }
  }

  const lp::Result res = lp::solve(m);
  Plan out;
  out.status = res.status;
  out.objective = res.objective;
  auto value = [&res](int var) { return var >= 0 ? res.x[var] : 0.0; };
  for (int t = 0; t < n; ++t) {
    out.p_b.push_back(std::max(0.0, value(pb[t])));
    out.p_w.push_back(std::max(0.0, value(pw[t])));
    out.p.push_back(out.p_b.back() + out.p_w.back());
    out.p_chp.push_back(value(pc[t]));
    out.p_boiler.push_back(value(po[t]));
    if (ta[t] >= 0) {
      out.t_a.push_back(value(ta[t]));
      out.t_m.push_back(value(tm[t]));
    }
    if (ts[t] >= 0) out.t_s.push_back(value(ts[t]));
  }
  for (int s : slack) out.max_slack = std::max(out.max_slack, value(s));
  out.relaxed = out.max_slack > 1e-4;
  return out;
}

}  // namespace dhflex::planner
