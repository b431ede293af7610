#include "dhflex/hydronet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "dhflex/constants.hpp"
#include "dhflex/errors.hpp"

namespace dhflex::hydronet {

namespace {

constexpr double kSteelHeatCapacity = 460.0;  // J/(kg K)

double area(double d) { return 0.25 * M_PI * d * d; }

double edge_k(const Edge& e, const std::vector<double>& valve_k) {
  if (e.kind == EdgeKind::valve) return valve_k[e.building];
  return e.k;
}

double edge_slope(double k, double dp) {
  const double dp0 = k * kLinearFlow * kLinearFlow;
  if (std::abs(dp) <= dp0) return 1.0 / (k * kLinearFlow);
  return 0.5 / std::sqrt(k * std::abs(dp));
}

struct Unknowns {
  std::vector<int> index;  // node -> unknown, -1 if fixed
  int count = 0;
};

Unknowns number_unknowns(const NetworkGraph& g) {
  Unknowns u;
  u.index.assign(g.node_count, -1);
  for (int n = 0; n < g.node_count; ++n) {
    if (n == g.supply_root || n == g.return_root) continue;
    u.index[n] = u.count++;
  }
  return u;
}

void residual(const NetworkGraph& g, const std::vector<double>& valve_k, const Unknowns& u,
              const std::vector<double>& p, Eigen::VectorXd& f) {
  f.setZero(u.count);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    if (e.kind == EdgeKind::source) continue;
    const double q = edge_flow(edge_k(e, valve_k), p[e.from] - p[e.to]);
    if (u.index[e.from] >= 0) f(u.index[e.from]) -= q;
    if (u.index[e.to] >= 0) f(u.index[e.to]) += q;
  }
}

// Assembles the weighted graph Laplacian over the unknown nodes with edge
// conductances `c`.
Eigen::SparseMatrix<double> laplacian(const NetworkGraph& g, const Unknowns& u,
                                      const std::vector<double>& c) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    if (e.kind == EdgeKind::source) continue;
    const int a = u.index[e.from], b = u.index[e.to];
    if (a >= 0) trips.emplace_back(a, a, c[i]);
    if (b >= 0) trips.emplace_back(b, b, c[i]);
    if (a >= 0 && b >= 0) {
      trips.emplace_back(a, b, -c[i]);
      trips.emplace_back(b, a, -c[i]);
    }
  }
  Eigen::SparseMatrix<double> m(u.count, u.count);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

std::vector<PipeSize> default_catalogue() {
  // Inner diameters of EN 10220 steel tubes; steel mass per metre from the
  // wall thickness; loss coefficients of insulation series 2.
  return {
      {25, 0.0285, 0.25, 1.99 * kSteelHeatCapacity},
      {32, 0.0372, 0.28, 2.55 * kSteelHeatCapacity},
      {40, 0.0431, 0.30, 2.93 * kSteelHeatCapacity},
      {50, 0.0545, 0.33, 4.11 * kSteelHeatCapacity},
      {65, 0.0703, 0.37, 5.24 * kSteelHeatCapacity},
      {80, 0.0825, 0.40, 6.76 * kSteelHeatCapacity},
      {100, 0.1071, 0.45, 9.83 * kSteelHeatCapacity},
  };
}

double trench_length(const TopologyConfig& c) {
  return c.trunk_length + c.buildings * (c.tee_spacing + c.service_length);
}

double pipe_resistance(double length, double d, double roughness, double design_flow) {
  const double a = area(d);
  const double v = std::max(design_flow, kLinearFlow) / (kWaterDensity * a);
  const double re = v * d / kWaterViscosity;
  double f;
  if (re < 2300.0) {
    f = 64.0 / re;
  } else {
    const double l = std::log10(roughness / (3.7 * d) + 5.74 / std::pow(re, 0.9));
    f = 0.25 / (l * l);
  }
  return f * length / (2.0 * kWaterDensity * d * a * a);
}

double pressure_gradient(const Edge& e, double flow) { return e.k * flow * flow / e.length; }

NetworkGraph build_topology(const TopologyConfig& c) {
  if (c.buildings < 1 || c.streets < 1 || c.streets > c.buildings) {
    throw ContractViolation("topology needs buildings >= streets >= 1");
  }
  if (!(c.tee_spacing > 0.0 && c.service_length > 0.0 && c.trunk_length >= 0.0)) {
    throw ContractViolation("topology lengths must be positive");
  }
  if (!c.design_flows.empty() && static_cast<int>(c.design_flows.size()) != c.buildings) {
    throw ContractViolation("design_flows must have one entry per building");
  }
  if (c.catalogue.empty()) throw ContractViolation("empty diameter catalogue");

  NetworkGraph g;
  g.roughness = c.roughness;
  g.supply_root = 0;
  g.return_root = 1;
  g.node_count = 2;
  g.supply_side = {true, false};
  g.valve_edges.assign(c.buildings, -1);
  auto new_pair = [&g]() {
    g.supply_side.push_back(true);
    g.supply_side.push_back(false);
    g.node_count += 2;
    return g.node_count - 2;  // supply node; return node is +1
  };
  auto add_pipe_pair = [&g](int s_from, int s_to, double length, int building, const std::string& name) {
    Edge s;
    s.from = s_from;
    s.to = s_to;
    s.kind = EdgeKind::supply;
    s.length = length;
    s.building = building;
    s.name = "S:" + name;
    Edge r = s;
    r.from = s_to + 1;
    r.to = s_from + 1;
    r.kind = EdgeKind::ret;
    r.name = "R:" + name;
    g.edges.push_back(s);
    g.edges.push_back(r);
  };

  int hub = g.supply_root;
  if (c.trunk_length > 0.0) {
    hub = new_pair();
    add_pipe_pair(g.supply_root, hub, c.trunk_length, -1, "trunk");
  }
  int building = 0;
  for (int st = 0; st < c.streets; ++st) {
    const int count = c.buildings / c.streets + (st < c.buildings % c.streets ? 1 : 0);
    int prev = hub;
    for (int i = 0; i < count; ++i, ++building) {
      const int tee = new_pair();
      add_pipe_pair(prev, tee, c.tee_spacing, -1,
                    "street" + std::to_string(st) + "/" + std::to_string(i));
      const int sub = new_pair();
      add_pipe_pair(tee, sub, c.service_length, building, "service" + std::to_string(building));
      Edge v;
      v.from = sub;
      v.to = sub + 1;
      v.kind = EdgeKind::valve;
      v.building = building;
      v.design_flow = c.design_flows.empty() ? c.default_design_flow : c.design_flows[building];
      v.name = "valve" + std::to_string(building);
      g.valve_edges[building] = static_cast<int>(g.edges.size());
      g.edges.push_back(v);
      prev = tee;
    }
  }
  Edge src;
  src.from = g.return_root;
  src.to = g.supply_root;
  src.kind = EdgeKind::source;
  src.name = "plant";
  g.source_edge = static_cast<int>(g.edges.size());
  g.edges.push_back(src);

  // Design flows: downstream space-heating design flow plus a DHW allowance
  // growing with the square root of the number of buildings served.
  std::vector<double> node_flow(g.node_count, 0.0);
  std::vector<int> node_count(g.node_count, 0);
  for (int b = 0; b < c.buildings; ++b) {
    const Edge& v = g.edges[g.valve_edges[b]];
    node_flow[v.from] += v.design_flow;
    node_count[v.from] += 1;
  }
  for (int i = static_cast<int>(g.edges.size()) - 1; i >= 0; --i) {
    Edge& e = g.edges[i];
    if (e.kind != EdgeKind::supply) continue;
    e.design_flow = node_flow[e.to] + c.dhw_diversity * std::sqrt(static_cast<double>(node_count[e.to]));
    node_flow[e.from] += node_flow[e.to];
    node_count[e.from] += node_count[e.to];
  }

  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    Edge& e = g.edges[i];
    if (e.kind != EdgeKind::supply) continue;
    bool sized = false;
    for (const PipeSize& size : c.catalogue) {
      const double k = pipe_resistance(e.length, size.inner_d, c.roughness, e.design_flow);
      if (k * e.design_flow * e.design_flow / e.length <= c.max_gradient) {
        e.dn = size.dn;
        e.inner_d = size.inner_d;
        e.k = k;
        e.loss_w_per_mk = size.loss_w_per_mk;
        e.wall_j_per_mk = size.wall_j_per_mk;
        sized = true;
        break;
      }
    }
    if (!sized) {
      throw SizingError("no catalogue diameter keeps segment " + e.name + " within " +
                        std::to_string(c.max_gradient) + " Pa/m at " + std::to_string(e.design_flow) +
                        " kg/s");
    }
    Edge& twin = g.edges[i + 1];
    const std::string name = twin.name;
    const int from = twin.from, to = twin.to;
    twin = e;
    twin.kind = EdgeKind::ret;
    twin.from = from;
    twin.to = to;
    twin.name = name;
  }
  return g;
}

double edge_flow(double k, double dp) {
  const double dp0 = k * kLinearFlow * kLinearFlow;
  if (std::abs(dp) <= dp0) return dp / (k * kLinearFlow);
  return std::copysign(std::sqrt(std::abs(dp) / k), dp);
}

FlowSolution solve_flows(const NetworkGraph& g, const std::vector<double>& valve_k, double pump_head,
                         const FlowSolution* warm, SolverOptions options) {
  if (!(pump_head > 0.0)) throw ContractViolation("pump head must be positive");
  if (valve_k.size() != g.valve_edges.size()) throw ContractViolation("one valve resistance per building");
  bool any_open = false;
  for (double k : valve_k) {
    if (!(k >= 0.0)) throw ContractViolation("valve resistance must be >= 0");
    if (k < kClosedValve) any_open = true;
  }
  std::vector<double> vk(valve_k);
  for (double& k : vk) k = std::max(k, 1.0);

  FlowSolution sol;
  sol.pump_head = pump_head;
  sol.flows.assign(g.edges.size(), 0.0);
  sol.pressures.assign(g.node_count, 0.0);
  for (int n = 0; n < g.node_count; ++n) sol.pressures[n] = g.supply_side[n] ? pump_head : 0.0;
  if (!any_open) return sol;

  const Unknowns u = number_unknowns(g);
  std::vector<double> p = sol.pressures;
  p[g.supply_root] = pump_head;
  p[g.return_root] = 0.0;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  std::vector<double> cond(g.edges.size(), 0.0);
  if (warm && warm->pressures.size() == p.size() && warm->pump_head > 0.0) {
    const double scale = pump_head / warm->pump_head;
    for (int n = 0; n < g.node_count; ++n) {
      if (u.index[n] >= 0) p[n] = warm->pressures[n] * scale;
    }
  } else if (u.count > 0) {
    // Linear start: each edge as a linear resistance at its expected flow.
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const Edge& e = g.edges[i];
      if (e.kind == EdgeKind::source) continue;
      const double k = edge_k(e, vk);
      double q = std::max(e.design_flow, kLinearFlow);
      if (e.kind == EdgeKind::valve) q = std::max(std::min(q, std::sqrt(pump_head / k)), kLinearFlow);
      cond[i] = 1.0 / (k * q);
    }
    const Eigen::SparseMatrix<double> l = laplacian(g, u, cond);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(u.count);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const Edge& e = g.edges[i];
      if (e.kind == EdgeKind::source) continue;
      const int a = u.index[e.from], b = u.index[e.to];
      if (a >= 0 && b < 0) rhs(a) += cond[i] * p[e.to];
      if (b >= 0 && a < 0) rhs(b) += cond[i] * p[e.from];
    }
    ldlt.compute(l);
    const Eigen::VectorXd x = ldlt.solve(rhs);
    for (int n = 0; n < g.node_count; ++n) {
      if (u.index[n] >= 0) p[n] = x(u.index[n]);
    }
  }

  Eigen::VectorXd f;
  residual(g, vk, u, p, f);
  double res = u.count > 0 ? f.cwiseAbs().maxCoeff() : 0.0;
  int it = 0;
  bool analyzed = false;
  while (res >= options.tolerance && it < options.max_iterations) {
    ++it;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const Edge& e = g.edges[i];
      if (e.kind == EdgeKind::source) continue;
      cond[i] = edge_slope(edge_k(e, vk), p[e.from] - p[e.to]);
    }
    const Eigen::SparseMatrix<double> j = laplacian(g, u, cond);
    if (!analyzed) {
      ldlt.analyzePattern(j);
      analyzed = true;
    }
    ldlt.factorize(j);
    if (ldlt.info() != Eigen::Success) throw SolverError("hydraulic Jacobian factorisation failed", res);
    const Eigen::VectorXd delta = ldlt.solve(f);
    const double norm0 = f.norm();
    double step = 1.0;
    std::vector<double> trial = p;
    for (int ls = 0; ls < 30; ++ls) {
      for (int n = 0; n < g.node_count; ++n) {
        if (u.index[n] >= 0) trial[n] = p[n] + step * delta(u.index[n]);
      }
      residual(g, vk, u, trial, f);
      if (f.norm() < norm0 || ls == 29) break;
      step *= 0.5;
    }
    p.swap(trial);
    res = f.cwiseAbs().maxCoeff();
  }
  if (res >= options.tolerance) {
    throw SolverError("hydraulic Newton iteration did not converge, residual " + std::to_string(res) +
                          " kg/s",
                      res);
  }
  sol.pressures = p;
  sol.iterations = it;
  sol.residual = res;
  double source = 0.0;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    if (e.kind == EdgeKind::source) continue;
    sol.flows[i] = edge_flow(edge_k(e, vk), p[e.from] - p[e.to]);
    if (e.from == g.supply_root) source += sol.flows[i];
  }
  sol.flows[g.source_edge] = source;
  return sol;
}

FlowSolution solve_with_dp_control(const NetworkGraph& g, const std::vector<double>& valve_k,
                                   double dp_set, double head_min, double head_max,
                                   const FlowSolution* warm) {
  double head = warm && warm->pump_head > 0.0 ? warm->pump_head : 2.0 * dp_set;
  head = std::clamp(head, head_min, head_max);
  FlowSolution sol = solve_flows(g, valve_k, head, warm);
  for (int pass = 0; pass < 4; ++pass) {
    double dp_min = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < g.valve_edges.size(); ++b) {
      if (valve_k[b] < kClosedValve) dp_min = std::min(dp_min, valve_dp(g, sol, static_cast<int>(b)));
    }
    if (!std::isfinite(dp_min) || dp_min <= 0.0) break;
    const double next = std::clamp(head * dp_set / dp_min, head_min, head_max);
    if (std::abs(next - head) <= 1e-3 * head) break;
    const FlowSolution prev = sol;
    head = next;
    sol = solve_flows(g, valve_k, head, &prev);
  }
  return sol;
}

double node_imbalance(const NetworkGraph& g, const FlowSolution& sol, int node) {
  double balance = 0.0;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (g.edges[i].to == node) balance += sol.flows[i];
    if (g.edges[i].from == node) balance -= sol.flows[i];
  }
  return balance;
}

double valve_dp(const NetworkGraph& g, const FlowSolution& sol, int building) {
  const Edge& v = g.edges[g.valve_edges[building]];
  return sol.pressures[v.from] - sol.pressures[v.to];
}

double pump_power_kw(const FlowSolution& sol, const NetworkGraph& g) {
  return sol.pump_head * sol.flows[g.source_edge] / kWaterDensity * 1e-3;
}

std::string edge_list_csv(const NetworkGraph& g) {
  std::ostringstream os;
  os << "node_from,node_to,length_m,dn,k\n";
  for (const Edge& e : g.edges) {
    if (e.kind != EdgeKind::supply && e.kind != EdgeKind::ret) continue;
    os << e.from << ',' << e.to << ',' << e.length << ',' << e.dn << ',' << e.k << '\n';
  }
  return os.str();
}

}  // namespace dhflex::hydronet
