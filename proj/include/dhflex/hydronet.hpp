#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>

namespace dhflex::hydronet {

struct PipeSize {
  int dn;
  double inner_d;       // m
  double loss_w_per_mk; // W/(m K) to the ground
  double wall_j_per_mk; // J/(m K), steel wall
};

// Steel pre-insulated pipes DN25..DN100.
std::vector<PipeSize> default_catalogue();

struct TopologyConfig {
  int buildings = 100;
  int streets = 4;
  double trunk_length = 100.0;    // m, plant to street hub; 0 puts the hub at the plant
  double tee_spacing = 12.0;      // m between successive service connections
  double service_length = 8.0;    // m, street tee to substation
  double max_gradient = 200.0;    // Pa/m at design flow
  double roughness = 0.05e-3;     // m
  double dhw_diversity = 0.1;     // kg/s per sqrt(downstream buildings)
  std::vector<double> design_flows;  // kg/s per building; empty -> default_design_flow
  double default_design_flow = 0.0957;
  std::vector<PipeSize> catalogue = default_catalogue();
};

double trench_length(const TopologyConfig& config);

enum class EdgeKind { supply, ret, valve, source };

struct Edge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::supply;
  double length = 0.0;    // m
  int dn = 0;
  double inner_d = 0.0;   // m
  double k = 0.0;         // Pa/(kg/s)^2, pipes only
  double loss_w_per_mk = 0.0;
  double wall_j_per_mk = 0.0;
  double design_flow = 0.0;  // kg/s
  int building = -1;      // valve edges and service pipes
  std::string name;
};

struct NetworkGraph {
  int node_count = 0;
  std::vector<Edge> edges;
  int supply_root = 0;   // plant outlet, fixed pressure = pump head
  int return_root = 1;   // plant inlet, reference pressure 0
  int source_edge = -1;
  std::vector<int> valve_edges;  // indexed by building
  std::vector<bool> supply_side; // per node
  double roughness = 0.05e-3;
};

// Sizes every pipe to the smallest catalogue diameter whose design-flow
// gradient stays within the limit. Deterministic for a fixed config.
NetworkGraph build_topology(const TopologyConfig& config);

// Darcy-Weisbach resistance with the Swamee-Jain friction factor at `design_flow`.
double pipe_resistance(double length, double inner_d, double roughness, double design_flow);
double pressure_gradient(const Edge& e, double flow);

struct FlowSolution {
  std::vector<double> flows;      // kg/s per edge, positive from -> to
  std::vector<double> pressures;  // Pa per node
  double pump_head = 0.0;         // Pa
  int iterations = 0;
  double residual = 0.0;          // max nodal imbalance, kg/s
};

inline constexpr double kClosedValve = 1e12;
inline constexpr double kLinearFlow = 1e-4;  // kg/s, friction law linear below this

struct SolverOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;  // kg/s
};

// Nodal Newton-Raphson on pressures with the source edge held at `pump_head`.
// `warm` may carry the previous solution's pressures.
FlowSolution solve_flows(const NetworkGraph& graph, const std::vector<double>& valve_k,
                         double pump_head, const FlowSolution* warm = nullptr,
                         SolverOptions options = {});

// Solves and rescales the head so the smallest differential pressure over the
// open substations equals `dp_set`, within [head_min, head_max].
FlowSolution solve_with_dp_control(const NetworkGraph& graph, const std::vector<double>& valve_k,
                                   double dp_set, double head_min, double head_max,
                                   const FlowSolution* warm = nullptr);

// Flow through an edge with resistance k at pressure difference dp (smoothed law).
double edge_flow(double k, double dp);

double node_imbalance(const NetworkGraph& graph, const FlowSolution& sol, int node);

// Pressure difference across each building's valve edge.
double valve_dp(const NetworkGraph& graph, const FlowSolution& sol, int building);

// Hydraulic power of the pump in kW.
double pump_power_kw(const FlowSolution& sol, const NetworkGraph& graph);

// Edge list as CSV: node_from,node_to,length_m,dn,k
std::string edge_list_csv(const NetworkGraph& graph);

}  // namespace dhflex::hydronet
