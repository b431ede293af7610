#include "dhflex/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dhflex/errors.hpp"

namespace dhflex::plant {

namespace {

void require_range(double fm, double lo, double hi, const char* unit) {
  constexpr double kSlack = 1e-12;
  if (!(fm >= lo - kSlack && fm <= hi + kSlack)) {
    throw ContractViolation(std::string(unit) + " modulation factor " + std::to_string(fm) +
                            " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

double chp_heat_at(const ChpParams& p, double fm, double t_in) {
  const double a = ((p.heat_alpha * t_in + p.heat_beta) * t_in + p.heat_gamma) * t_in + p.heat_delta;
  const double b = (p.heat_epsilon * t_in + p.heat_zeta) * t_in + p.heat_eta;
  return a * fm + b;
}

ChpOutput chp_evaluate(const ChpParams& p, double fm, double t_in) {
  require_range(fm, p.fm_min, 1.0, "CHP");
  ChpOutput out;
  out.p_el = p.p_el_max * fm;
  out.p_heat = chp_heat_at(p, fm, t_in);
  out.p_gas = (p.gas_alpha * fm + p.gas_beta) * fm + p.gas_gamma;
  return out;
}

double chp_modulation_for_heat(const ChpParams& p, double heat_kw, double t_in) {
  const double b = chp_heat_at(p, 0.0, t_in);
  const double a = chp_heat_at(p, 1.0, t_in) - b;
  return std::clamp((heat_kw - b) / a, p.fm_min, 1.0);
}

BoilerOutput boiler_evaluate(const BoilerParams& p, double fm, double t_in) {
  require_range(fm, p.fm_min, 1.0, "boiler");
  const double g = p.p_gas_nom * fm;
  const double a = (p.alpha * g + p.beta) * g + p.gamma;
  const double b = (p.delta * g + p.epsilon) * g + p.zeta;
  const double c = (p.eta * g + p.theta) * g + p.iota;
  const double d = (p.kappa * g + p.mu) * g + p.nu;
  BoilerOutput out;
  out.p_gas = g;
  out.efficiency = ((a * t_in + b) * t_in + c) * t_in + d;
  out.p_out = out.efficiency * g;
  return out;
}

double boiler_max_heat(const BoilerParams& p, double t_in) { return boiler_evaluate(p, 1.0, t_in).p_out; }

BoilerOperation boiler_for_heat(const BoilerParams& p, double heat_kw, double t_in) {
  BoilerOperation op;
  if (heat_kw <= 0.0) return op;
  const BoilerOutput at_min = boiler_evaluate(p, p.fm_min, t_in);
  if (heat_kw <= at_min.p_out) {
    op.fm = p.fm_min;
    op.duty = heat_kw / at_min.p_out;
    op.output = {heat_kw, at_min.p_gas * op.duty, at_min.efficiency};
    return op;
  }
  const BoilerOutput at_max = boiler_evaluate(p, 1.0, t_in);
  if (heat_kw >= at_max.p_out) {
    op.fm = 1.0;
    op.duty = 1.0;
    op.output = at_max;
    return op;
  }
  // P_out is increasing in fm over the operating range.
  double lo = p.fm_min, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (boiler_evaluate(p, mid, t_in).p_out < heat_kw) lo = mid; else hi = mid;
  }
  op.fm = 0.5 * (lo + hi);
  op.duty = 1.0;
  op.output = boiler_evaluate(p, op.fm, t_in);
  return op;
}

double supply_setpoint(const PlantConfig& config, double outdoor_mean_24h) {
  return config.curve.supply(outdoor_mean_24h) + config.supply_offset;
}

PlantStep operate(const PlantConfig& config, const PlantState& state, bool chp_on, double chp_fm,
                  double boiler_heat_kw, double t_in, double dt) {
  PlantStep step;
  step.state = state;
  if (chp_on != state.chp_on) {
    step.state.chp_on = chp_on;
    step.state.since_switch_s = 0.0;
  }
  step.state.since_switch_s += dt;
  if (chp_on) {
    step.chp = chp_evaluate(config.chp, chp_fm, t_in);
    step.state.chp_fm = chp_fm;
  } else {
    step.state.chp_fm = 0.0;
  }
  const BoilerOperation boiler = boiler_for_heat(config.boiler, boiler_heat_kw, t_in);
  step.boiler = boiler.output;
  step.state.boiler_fm = boiler.fm;
  step.state.boiler_duty = boiler.duty;
  step.heat_kw = step.chp.p_heat + step.boiler.p_out;
  return step;
}

PlantStep reference_dispatch(const PlantConfig& config, const PlantState& state, double demand_kw,
                             double outdoor_mean_24h, double t_in, double dt) {
  const ChpParams& chp = config.chp;
  demand_kw = std::max(0.0, demand_kw);
  const double chp_min_heat = chp_heat_at(chp, chp.fm_min, t_in);

  bool on = state.chp_on;
  const bool wants_chp = demand_kw >= chp_min_heat;
  if (on && !wants_chp && chp_may_stop(chp, state)) on = false;
  if (!on && wants_chp && chp_may_start(chp, state)) on = true;

  double fm = 0.0;
  double boiler_heat = demand_kw;
  if (on) {
    fm = chp_modulation_for_heat(chp, demand_kw, t_in);
    boiler_heat = std::max(0.0, demand_kw - chp_heat_at(chp, fm, t_in));
  }
  PlantStep step = operate(config, state, on, fm, boiler_heat, t_in, dt);
  step.state.supply_setpoint = supply_setpoint(config, outdoor_mean_24h);
  return step;
}

}  // namespace dhflex::plant
