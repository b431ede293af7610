#include "dhflex/thermonet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dhflex/constants.hpp"
#include "dhflex/errors.hpp"

namespace dhflex::thermonet {

namespace {

using hydronet::EdgeKind;

constexpr double kMergeTolerance = 0.02;  // K, adjacent slugs closer than this are merged
constexpr double kNoFlow = 1e-12;         // kg/s

bool is_pipe(const hydronet::Edge& e) { return e.kind == EdgeKind::supply || e.kind == EdgeKind::ret; }

bool on_side(const hydronet::Edge& e, bool supply) {
  return supply ? e.kind == EdgeKind::supply : e.kind == EdgeKind::ret;
}

// Node the water enters a pipe from under the current flow.
int upstream_node(const hydronet::Edge& e, double q) { return q < 0.0 ? e.to : e.from; }
int downstream_node(const hydronet::Edge& e, double q) { return q < 0.0 ? e.from : e.to; }

double take(std::deque<Slug>& slugs, double cap, bool from_back) {
  double energy = 0.0;
  double remaining = cap;
  while (remaining > 0.0 && !slugs.empty()) {
    Slug& s = from_back ? slugs.back() : slugs.front();
    if (s.cap <= remaining * (1.0 + 1e-12)) {
      energy += s.cap * s.temp;
      remaining -= s.cap;
      if (from_back) slugs.pop_back(); else slugs.pop_front();
    } else {
      energy += remaining * s.temp;
      s.cap -= remaining;
      remaining = 0.0;
    }
  }
  return energy;
}

struct Side {
  bool supply;
  double t_plant;
  const std::vector<double>* substation_return;
};

void mix_node(NetworkState& st, const hydronet::NetworkGraph& g, const hydronet::FlowSolution& sol,
              const Side& side, int n) {
  if (side.supply && n == g.supply_root) {
    st.node_temp[n] = side.t_plant;
    return;
  }
  double flow = 0.0, enthalpy = 0.0;
  for (int ei : st.incident[n]) {
    const hydronet::Edge& e = g.edges[ei];
    const double q = sol.flows[ei];
    if (std::abs(q) <= kNoFlow || downstream_node(e, q) != n) continue;
    if (on_side(e, side.supply)) {
      flow += std::abs(q);
      enthalpy += std::abs(q) * st.pipe_outlet[ei];
    } else if (!side.supply && e.kind == EdgeKind::valve && q > 0.0) {
      flow += q;
      enthalpy += q * (*side.substation_return)[e.building];
    }
  }
  if (flow > kNoFlow) st.node_temp[n] = enthalpy / flow;
}

void advance_pipe(NetworkState& st, const hydronet::NetworkGraph& g, const hydronet::FlowSolution& sol,
                  int ei, double ambient, double dt, SideResult& acc) {
  const hydronet::Edge& e = g.edges[ei];
  const double q = sol.flows[ei];
  const double t_in = st.node_temp[upstream_node(e, q)];
  const PipeStep r = propagate_pipe(st.pipes[ei], st.params[ei], q, t_in, ambient, dt);
  st.pipe_outlet[ei] = r.outlet_temp;
  acc.loss_kw += r.loss_kw;
  acc.inflow_kw += std::abs(q) * kWaterCp * t_in;
  acc.outflow_kw += std::abs(q) * kWaterCp * r.outlet_temp;
}

SideResult propagate_side_serial(NetworkState& st, const hydronet::NetworkGraph& g,
                                 const hydronet::FlowSolution& sol, const Side& side, double ambient,
                                 double dt) {
  std::vector<int> nodes;
  for (int n = 0; n < g.node_count; ++n) {
    if (g.supply_side[n] == side.supply) nodes.push_back(n);
  }
  // Water runs from high to low pressure, so descending pressure is a valid
  // upstream-first order.
  std::stable_sort(nodes.begin(), nodes.end(),
                   [&sol](int a, int b) { return sol.pressures[a] > sol.pressures[b]; });
  SideResult acc;
  for (int n : nodes) {
    mix_node(st, g, sol, side, n);
    for (int ei : st.incident[n]) {
      const hydronet::Edge& e = g.edges[ei];
      if (on_side(e, side.supply) && upstream_node(e, sol.flows[ei]) == n) {
        advance_pipe(st, g, sol, ei, ambient, dt, acc);
      }
    }
  }
  return acc;
}

SideResult propagate_side_parallel(NetworkState& st, const hydronet::NetworkGraph& g,
                                   const hydronet::FlowSolution& sol, const Side& side,
                                   double ambient, double dt) {
  // Kahn levels over the side's pipes under the current flow directions.
  std::vector<int> pending(g.node_count, 0);
  for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
    const hydronet::Edge& e = g.edges[ei];
    if (!on_side(e, side.supply) || std::abs(sol.flows[ei]) <= kNoFlow) continue;
    ++pending[downstream_node(e, sol.flows[ei])];
  }
  std::vector<int> level;
  for (int n = 0; n < g.node_count; ++n) {
    if (g.supply_side[n] == side.supply && pending[n] == 0) level.push_back(n);
  }
  SideResult acc;
  std::vector<int> pipes;
  std::vector<SideResult> parts;
  while (!level.empty()) {
    pipes.clear();
    for (int n : level) {
      mix_node(st, g, sol, side, n);
      for (int ei : st.incident[n]) {
        const hydronet::Edge& e = g.edges[ei];
        if (on_side(e, side.supply) && upstream_node(e, sol.flows[ei]) == n) pipes.push_back(ei);
      }
    }
    parts.assign(pipes.size(), SideResult{});
    const int count = static_cast<int>(pipes.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < count; ++i) advance_pipe(st, g, sol, pipes[i], ambient, dt, parts[i]);
    std::vector<int> next;
    for (int i = 0; i < count; ++i) {
      acc.loss_kw += parts[i].loss_kw;
      acc.inflow_kw += parts[i].inflow_kw;
      acc.outflow_kw += parts[i].outflow_kw;
      const hydronet::Edge& e = g.edges[pipes[i]];
      const double q = sol.flows[pipes[i]];
      if (std::abs(q) <= kNoFlow) continue;
      if (--pending[downstream_node(e, q)] == 0) next.push_back(downstream_node(e, q));
    }
    std::sort(next.begin(), next.end());
    level.swap(next);
  }
  return acc;
}

}  // namespace

PipeParams pipe_params(double length, double inner_d, double loss_w_per_mk, double wall_j_per_mk) {
  PipeParams p;
  const double area = 0.25 * M_PI * inner_d * inner_d;
  p.capacity = length * (kWaterDensity * area * kWaterCp + wall_j_per_mk * 1e-3);
  p.loss_kw_per_k = length * loss_w_per_mk * 1e-3;
  return p;
}

PipeParams pipe_params(const hydronet::Edge& e) {
  if (!is_pipe(e)) return {};
  return pipe_params(e.length, e.inner_d, e.loss_w_per_mk, e.wall_j_per_mk);
}

PipeState make_pipe(const PipeParams& p, double temp) {
  PipeState s;
  if (p.capacity > 0.0) s.slugs.push_back({p.capacity, temp});
  return s;
}

double pipe_energy_kj(const PipeState& s) {
  double e = 0.0;
  for (const Slug& sl : s.slugs) e += sl.cap * sl.temp;
  return e;
}

PipeStep propagate_pipe(PipeState& s, const PipeParams& p, double flow, double inlet_temp,
                        double ambient, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("pipe propagation needs dt > 0");
  PipeStep r;
  if (s.slugs.empty()) {
    r.outlet_temp = inlet_temp;
    return r;
  }
  if (p.loss_kw_per_k > 0.0) {
    const double keep = std::exp(-p.loss_kw_per_k / p.capacity * dt);
    double lost = 0.0;
    for (Slug& sl : s.slugs) {
      const double drop = (sl.temp - ambient) * (1.0 - keep);
      lost += sl.cap * drop;
      sl.temp -= drop;
    }
    r.loss_kw = lost / dt;
  }
  if (std::abs(flow) <= kNoFlow) {
    r.outlet_temp = s.slugs.back().temp;
    return r;
  }
  const double cap_in = std::abs(flow) * kWaterCp * dt;
  const bool forward = flow > 0.0;
  Slug& head = forward ? s.slugs.front() : s.slugs.back();
  if (std::abs(head.temp - inlet_temp) < kMergeTolerance) {
    head.temp = (head.cap * head.temp + cap_in * inlet_temp) / (head.cap + cap_in);
    head.cap += cap_in;
  } else if (forward) {
    s.slugs.push_front({cap_in, inlet_temp});
  } else {
    s.slugs.push_back({cap_in, inlet_temp});
  }
  r.outlet_temp = take(s.slugs, cap_in, forward) / cap_in;
  return r;
}

NetworkState init_network(const hydronet::NetworkGraph& g, double supply_temp, double return_temp) {
  NetworkState st;
  st.params.resize(g.edges.size());
  st.pipes.resize(g.edges.size());
  st.pipe_outlet.assign(g.edges.size(), 0.0);
  st.node_temp.assign(g.node_count, 0.0);
  st.incident.assign(g.node_count, {});
  for (int n = 0; n < g.node_count; ++n) st.node_temp[n] = g.supply_side[n] ? supply_temp : return_temp;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const hydronet::Edge& e = g.edges[i];
    st.incident[e.from].push_back(static_cast<int>(i));
    st.incident[e.to].push_back(static_cast<int>(i));
    if (!is_pipe(e)) continue;
    const double t = e.kind == EdgeKind::supply ? supply_temp : return_temp;
    st.params[i] = pipe_params(e);
    st.pipes[i] = make_pipe(st.params[i], t);
    st.pipe_outlet[i] = t;
  }
  return st;
}

SideResult propagate_supply(NetworkState& st, const hydronet::NetworkGraph& g,
                            const hydronet::FlowSolution& sol, double t_plant, double ambient,
                            double dt, Exec exec) {
  const Side side{true, t_plant, nullptr};
  return exec == Exec::serial ? propagate_side_serial(st, g, sol, side, ambient, dt)
                              : propagate_side_parallel(st, g, sol, side, ambient, dt);
}

SideResult propagate_return(NetworkState& st, const hydronet::NetworkGraph& g,
                            const hydronet::FlowSolution& sol,
                            const std::vector<double>& substation_return, double ambient, double dt,
                            Exec exec) {
  if (substation_return.size() != g.valve_edges.size()) {
    throw ContractViolation("one substation return temperature per building");
  }
  const Side side{false, 0.0, &substation_return};
  return exec == Exec::serial ? propagate_side_serial(st, g, sol, side, ambient, dt)
                              : propagate_side_parallel(st, g, sol, side, ambient, dt);
}

double network_energy_kj(const NetworkState& st) {
  double e = 0.0;
  for (const PipeState& p : st.pipes) e += pipe_energy_kj(p);
  return e;
}

double propagate_pipes(NetworkState& st, const std::vector<double>& flows,
                       const std::vector<double>& inlet_temps, double ambient, double dt,
                       std::vector<double>& outlet_temps) {
  const int n = static_cast<int>(st.pipes.size());
  outlet_temps.assign(n, 0.0);
  std::vector<double> loss(n, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < n; ++i) {
    if (st.params[i].capacity <= 0.0) continue;
    const PipeStep r = propagate_pipe(st.pipes[i], st.params[i], flows[i], inlet_temps[i], ambient, dt);
    outlet_temps[i] = r.outlet_temp;
    loss[i] = r.loss_kw;
  }
  return std::accumulate(loss.begin(), loss.end(), 0.0);
}

}  // namespace dhflex::thermonet
