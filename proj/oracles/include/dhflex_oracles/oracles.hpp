#pragma once

// Independent reference implementations used only by tests and `dhflex validate`.
// Each one takes a different route from the production code: direct power sums,
// eigen-decomposition, a fine finite-volume grid, closed-form envelopes or plain
// enumeration.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dhflex/building.hpp"
#include "dhflex/dispatch.hpp"
#include "dhflex/fit.hpp"
#include "dhflex/planner.hpp"

namespace dhflex::oracle {

// Plant polynomials written out term by term from the published tables.
struct ChpPoint {
  double p_el, p_heat, p_gas;
};
ChpPoint chp(double fm, double t_in);

struct BoilerPoint {
  double p_gas, efficiency, p_out;
};
BoilerPoint boiler(double fm, double t_in);

// Three-node RC building, assembled from the network conductances.
struct RcSystem {
  Eigen::Matrix3d a;
  Eigen::Vector3d c;
};
RcSystem rc_system(const building::Params& p, const building::Disturbance& d,
                   building::Coupling k);

// Exact solution of x' = A x + c over h hours through the eigen-decomposition of A.
Eigen::Vector3d rc_propagate(const RcSystem& s, const Eigen::Vector3d& x0, double hours);

// Flux-limited (van Leer) finite-volume pipe with lumped water and wall
// capacity, standing loss to a fixed ambient and sub-stepping at a Courant
// number below one.
class FvPipe {
 public:
  FvPipe(int cells, double capacity_kj_per_k, double loss_kw_per_k, double temp);
  // Mean outlet temperature over the step; at zero flow the downstream cell.
  double advance(double flow, double inlet, double ambient, double dt);
  double energy_kj() const;
  const std::vector<double>& temps() const { return t_; }

 private:
  double cell_cap_;
  double loss_;
  std::vector<double> t_;
};

// Heat stored after charging a vessel of capacity `cap_kj_per_k` from a uniform
// `t0` with a stream of `flow` kg/s at `t_in` for `seconds`, without losses.
double mixed_charge_kj(double cap_kj_per_k, double t0, double t_in, double flow, double seconds);
double plug_charge_kj(double cap_kj_per_k, double t0, double t_in, double flow, double seconds);

// Scans 0 and every bid corner, summing the bids directly at each candidate.
dispatch::Clearing scan_clearing(const std::vector<dispatch::Bid>& bids, double u);

// Storage-only toy planning problem on an integer grid: one level is q kW and a
// level held for one step moves the storage temperature by exactly 1 K.
struct ToyInstance {
  int horizon = 3;
  int levels = 10;            // production levels 0 .. levels-1
  double q = 100.0;           // kW per level
  double dt_h = 0.25;
  double alpha = 5.0;
  double slack_penalty = 1e4;
  std::vector<double> price;  // EUR/MWh per step
  std::vector<int> demand;    // levels per step
  int t0 = 50;                // C
  int t_min = 45, t_max = 55;
};

ToyInstance random_toy(std::uint64_t seed);
planner::Problem toy_problem(const ToyInstance& toy);

struct ToySolution {
  double objective = 0.0;
  std::vector<int> levels;
  bool feasible = false;  // a choice without bound violations exists
};
// Enumerates every level sequence and evaluates the planning objective.
ToySolution enumerate_toy(const ToyInstance& toy);

// Noise-free traces of the aggregate models under rich excitation.
std::vector<fit::BuildingSample> synthetic_building_trace(const fit::AggregateBuildingModel& m,
                                                          int samples, double dt_h,
                                                          std::uint64_t seed, double t_m0);
std::vector<fit::TankSample> synthetic_tank_trace(const fit::AggregateTankModel& m, int samples,
                                                  double dt_h, std::uint64_t seed);

}  // namespace dhflex::oracle
