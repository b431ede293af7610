#pragma once

#include "dhflex/constants.hpp"

namespace dhflex::plant {

// Gas-fired CHP, quasi-static part-load polynomials.
struct ChpParams {
  double p_el_max = 600.0;  // kW
  double fm_min = 0.4;
  double min_on_s = 15 * 60.0;
  double min_off_s = 15 * 60.0;
  // P_gas = a fm^2 + b fm + c
  double gas_alpha = 31.250;
  double gas_beta = 1310.75;
  double gas_gamma = 181.35;
  // P_heat = A(T_in) fm + B(T_in)
  double heat_alpha = 3.1537e-5;
  double heat_beta = -7.4162e-3;
  double heat_gamma = -0.3258;
  double heat_delta = 704.09;
  double heat_epsilon = 6.0633e-4;
  double heat_zeta = -0.1848;
  double heat_eta = 160.01;
};

// Condensing gas boiler; efficiency is cubic in inlet temperature with
// coefficients quadratic in the gas input.
struct BoilerParams {
  double p_gas_nom = 1100.0;  // kW
  double fm_min = 0.1;
  double alpha = -7.758e-13, beta = -1.119e-10, gamma = 3.295e-6;
  double delta = 1.195e-10, epsilon = 2.911e-8, zeta = -4.665e-4;
  double eta = -6.067e-9, theta = -1.558e-6, iota = 1.800e-2;
  double kappa = 1.121e-7, mu = -1.503e-5, nu = 7.675e-1;
};

struct ChpOutput {
  double p_el = 0.0;
  double p_heat = 0.0;
  double p_gas = 0.0;
};

struct BoilerOutput {
  double p_out = 0.0;
  double p_gas = 0.0;
  double efficiency = 0.0;
};

ChpOutput chp_evaluate(const ChpParams& params, double fm, double t_in);
BoilerOutput boiler_evaluate(const BoilerParams& params, double fm, double t_in);

double chp_heat_at(const ChpParams& params, double fm, double t_in);
// Modulation factor that makes the CHP deliver `heat_kw`, clamped to [fm_min, 1].
double chp_modulation_for_heat(const ChpParams& params, double heat_kw, double t_in);

// Boiler operating point for a heat target. Below the minimum modulation the
// boiler cycles at fm_min; `duty` is the on-fraction of the step.
struct BoilerOperation {
  double fm = 0.0;
  double duty = 0.0;
  BoilerOutput output;  // time-averaged over the step
};
BoilerOperation boiler_for_heat(const BoilerParams& params, double heat_kw, double t_in);
double boiler_max_heat(const BoilerParams& params, double t_in);

struct PlantConfig {
  ChpParams chp;
  BoilerParams boiler;
  HeatingCurve curve;
  double supply_offset = 5.0;   // network supply above the building heating curve, K
  double max_supply_temp = 95.0;
};

struct PlantState {
  bool chp_on = false;
  double chp_fm = 0.0;
  double boiler_fm = 0.0;
  double boiler_duty = 0.0;
  double since_switch_s = 1e9;
  double supply_setpoint = 60.0;
};

inline bool chp_may_stop(const ChpParams& p, const PlantState& s) {
  return s.chp_on && s.since_switch_s >= p.min_on_s;
}
inline bool chp_may_start(const ChpParams& p, const PlantState& s) {
  return !s.chp_on && s.since_switch_s >= p.min_off_s;
}

struct PlantStep {
  PlantState state;
  ChpOutput chp;
  BoilerOutput boiler;
  double heat_kw = 0.0;  // chp + boiler heat
};

double supply_setpoint(const PlantConfig& config, double outdoor_mean_24h);

// Heat-driven production: CHP modulates to the demand, the boiler assists above
// CHP maximum and takes over below CHP minimum; on/off timers are enforced and a
// CHP that may not stop yet runs at fm_min.
PlantStep reference_dispatch(const PlantConfig& config, const PlantState& state, double demand_kw,
                             double outdoor_mean_24h, double t_in, double dt);

// Applies a fixed CHP decision and a boiler heat target for one step, updating timers.
PlantStep operate(const PlantConfig& config, const PlantState& state, bool chp_on, double chp_fm,
                  double boiler_heat_kw, double t_in, double dt);

}  // namespace dhflex::plant
