#pragma once

#include <deque>
#include <vector>

#include "dhflex/hydronet.hpp"

namespace dhflex::thermonet {

enum class Exec { serial, parallel };

// A parcel of pipe content measured in heat capacity (kJ/K). The steel wall is
// taken to follow the water temperature, so a metre of pipe holds the water and
// wall capacity together and a temperature front moves at the correspondingly
// reduced thermal speed.
struct Slug {
  double cap;
  double temp;
};

struct PipeParams {
  double capacity = 0.0;     // kJ/K, water plus wall over the full length
  double loss_kw_per_k = 0.0;
};

PipeParams pipe_params(const hydronet::Edge& e);
PipeParams pipe_params(double length, double inner_d, double loss_w_per_mk, double wall_j_per_mk);

// Slugs ordered from the `from` end (front) to the `to` end (back).
struct PipeState {
  std::deque<Slug> slugs;
};

PipeState make_pipe(const PipeParams& p, double temp);
double pipe_energy_kj(const PipeState& s);  // relative to 0 C

struct PipeStep {
  double outlet_temp = 0.0;
  double loss_kw = 0.0;
};

// Standing losses over dt, then the inflow m cp dt at `inlet_temp` enters at the
// upstream end and the same capacity leaves downstream. Negative flow runs from
// the `to` end. With zero flow the outlet reports the downstream end temperature.
PipeStep propagate_pipe(PipeState& s, const PipeParams& p, double flow, double inlet_temp,
                        double ambient, double dt);

struct NetworkState {
  std::vector<PipeParams> params;  // per edge; zero for non-pipe edges
  std::vector<PipeState> pipes;
  std::vector<double> node_temp;
  std::vector<double> pipe_outlet;  // last outlet temperature per edge
  std::vector<std::vector<int>> incident;  // edges per node, ascending
};

NetworkState init_network(const hydronet::NetworkGraph& g, double supply_temp, double return_temp);

struct SideResult {
  double loss_kw = 0.0;
  double inflow_kw = 0.0;   // enthalpy entering pipes, relative to 0 C
  double outflow_kw = 0.0;  // enthalpy leaving pipes
};

// Propagates the supply side given the plant outlet temperature. Node
// temperatures are flow-weighted mixes of inflowing pipe outlets; nodes with
// no inflow keep their temperature.
SideResult propagate_supply(NetworkState& st, const hydronet::NetworkGraph& g,
                            const hydronet::FlowSolution& sol, double t_plant, double ambient,
                            double dt, Exec exec = Exec::serial);

// Propagates the return side given each substation's primary return temperature.
SideResult propagate_return(NetworkState& st, const hydronet::NetworkGraph& g,
                            const hydronet::FlowSolution& sol,
                            const std::vector<double>& substation_return, double ambient, double dt,
                            Exec exec = Exec::serial);

double network_energy_kj(const NetworkState& st);

// Per-pipe kernel without junction logic: every pipe advanced with its own
// inlet temperature. Returns the total loss in kW.
double propagate_pipes(NetworkState& st, const std::vector<double>& flows,
                       const std::vector<double>& inlet_temps, double ambient, double dt,
                       std::vector<double>& outlet_temps);

}  // namespace dhflex::thermonet
