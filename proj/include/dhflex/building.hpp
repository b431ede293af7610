#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace dhflex::building {

// The detached reference house all sampled buildings derive from.
struct StandardBuilding {
  double c_i = 20.13;  // kWh/K
  double c_e = 21.23;
  double c_h = 0.17;
  double r_ie = 1.0;   // K/kW
  double r_ea = 1.87;
  double c_s = 4.35e-4;  // stack coefficient, (L/s)^2/(cm^4 K)
  double c_w = 1.61e-4;  // wind coefficient, (L/s)^2/(cm^4 (m/s)^2)
  double a_l = 621e-4;   // effective leakage area, m2
  double dt0 = 12.5;     // linearisation point, K
  double u0 = 3.5;       // linearisation point, m/s
  double floor_area = 103.0;      // m2
  double reheat = 0.022;          // kW/m2
  double design_indoor = 20.0;
  double design_outdoor = -8.0;
  double design_supply = 70.0;
  double design_return = 30.0;
  double design_wind = 12.34;     // m/s, wind speed for the design infiltration loss
};

struct Params {
  double r_h = 0, r_ih = 0, r_ie = 0, r_ea = 0, r_ia = 0;  // K/kW
  double c_i = 0, c_h = 0, c_e = 0;                       // kWh/K
  double c_s = 0, c_w = 0, a_l = 0;
  double a_piv = 0;  // kW s/m
  double b_piv = 0;  // kW
  double design_kw = 0;
};

struct Infiltration {
  double r_ia;   // K/kW, +inf for an airtight building
  double a_piv;  // kW per m/s
  double b_piv;  // kW
};

// Air density times heat capacity (kJ/(m3 K)) and the conversion from the
// ASHRAE leakage formula (L/s with cm2) to m3/s with m2.
inline constexpr double kAirRhoCp = 1.2 * 1.005;
inline constexpr double kLeakageUnit = 10.0;

// Exact infiltration heat loss (kW) at indoor-outdoor difference dt and wind u.
double infiltration_loss(double c_s, double c_w, double a_l, double dt, double u);
// Tangent-plane linearisation of infiltration_loss around (dt0, u0), written as
// a loss dt/R_ia plus a gain P_iv = A_Piv u + B_Piv.
Infiltration infiltration_linearize(double c_s, double c_w, double a_l, double dt0, double u0);

double static_design_load(const StandardBuilding& std_bld, double r_ie, double r_ea);
// Sizes the heating system from the sampled envelope/infiltration values.
Params size_building(const StandardBuilding& std_bld, double c_i, double c_e, double c_h, double c_w,
                     double c_s, double r_ie, double r_ea);
Params standard_params(const StandardBuilding& std_bld = {});
std::vector<Params> sample_population(int n, std::uint64_t seed, double rel_sd = 0.2,
                                     const StandardBuilding& std_bld = {});

struct State {
  double t_i = 20.0;
  double t_e = 20.0;
  double t_h = 20.0;
  bool heating = false;
};

struct Disturbance {
  double t_a = 0.0;
  double wind = 0.0;
  double solar_kw = 0.0;
  double el_kw = 0.0;
};

// Radiator node coupling: heat into the radiator water is g (t_source - t_h).
// With g = H/R_h and t_source = T_hin this is the plain radiator circuit; with
// a substation it is the heat exchanger conductance seen from the network side.
struct Coupling {
  double g = 0.0;  // kW/K
  double t_source = 0.0;
};

// dx/dt = A x + c, x = (T_i, T_e, T_h), time in hours.
struct LinearSystem {
  Eigen::Matrix3d a;
  Eigen::Vector3d c;
};
LinearSystem linear_system(const Params& p, const Disturbance& d, Coupling k);

State steady_envelope(const Params& p, double t_i, double t_a);

struct StepResult {
  State state;
  double heat_kw = 0.0;  // mean power into the radiator node over the step
};

// Zero-order-hold exact integration of the RC network over dt seconds.
StepResult step(const Params& p, const State& s, const Disturbance& d, Coupling k, double dt);

double stored_energy_kwh(const Params& p, const State& s);

// Substation heat exchanger with constant effectiveness on the smaller
// capacity rate; the secondary (radiator loop) capacity rate is 1/R_h.
inline constexpr double kSubstationEffectiveness = 0.9;
Coupling substation_coupling(const Params& p, double primary_flow, double t_supply);
// Primary flow that makes the radiator loop run at its heating-curve supply
// temperature, capped at the flow where the radiator loop becomes the limiting side.
double space_heating_flow(const Params& p, const State& s, double t_supply, double t_circuit_set);
double max_space_heating_flow(const Params& p);

// Domestic hot water through an instantaneous heat exchanger; the primary side
// leaves at a fixed return temperature.
inline constexpr double kDhwPrimaryReturn = 20.0;
double dhw_flow(double dhw_kw, double t_supply);

struct Thermostat {
  double lower = 19.5;
  double upper = 20.5;
};
bool thermostat(const Thermostat& band, bool heating, double t_i);

}  // namespace dhflex::building
