#include "dhflex/storage.hpp"

#include <algorithm>
#include <cmath>

#include "dhflex/constants.hpp"
#include "dhflex/errors.hpp"

namespace dhflex::storage {

namespace {

double layer_mass(double volume_l, int layers) {
  return volume_l * 1e-3 * kWaterDensity / layers;
}

// One explicit upwind advection update for a stack crossed by an in-top /
// out-bottom stream `down` and an out-top / in-bottom stream `up`. Returns the
// enthalpy (kJ, relative to 0 C) carried out by each stream.
struct Advected {
  double down_out_kj = 0.0;
  double up_out_kj = 0.0;
};

Advected advect(std::vector<double>& t, double mass, Stream down, Stream up, double h,
                std::vector<double>& scratch) {
  const int n = static_cast<int>(t.size());
  const double net = down.flow - up.flow;  // downward mass flux through interfaces
  scratch.assign(n, 0.0);
  scratch[n - 1] += down.flow * down.temp - up.flow * t[n - 1];
  scratch[0] += up.flow * up.temp - down.flow * t[0];
  for (int j = 0; j + 1 < n; ++j) {
    const double carried = net > 0.0 ? net * t[j + 1] : net * t[j];
    scratch[j] += carried;
    scratch[j + 1] -= carried;
  }
  Advected out;
  out.down_out_kj = down.flow * t[0] * kWaterCp * h;
  out.up_out_kj = up.flow * t[n - 1] * kWaterCp * h;
  for (int j = 0; j < n; ++j) t[j] += scratch[j] * h / mass;
  return out;
}

void conduct(std::vector<double>& t, double conduct_kw, double mass, double h,
             std::vector<double>& scratch) {
  const int n = static_cast<int>(t.size());
  scratch.assign(n, 0.0);
  for (int j = 0; j + 1 < n; ++j) {
    const double q = conduct_kw * (t[j + 1] - t[j]);
    scratch[j] += q;
    scratch[j + 1] -= q;
  }
  for (int j = 0; j < n; ++j) t[j] += scratch[j] * h / (mass * kWaterCp);
}

double lose(std::vector<double>& t, double ua_layer_kw, double mass, double ambient, double h) {
  double lost_kj = 0.0;
  for (double& tj : t) {
    const double q = ua_layer_kw * (tj - ambient) * h;
    tj -= q / (mass * kWaterCp);
    lost_kj += q;
  }
  return lost_kj;
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::open: return "open";
    case Variant::coil: return "coil";
    case Variant::tank_in_tank: return "tank_in_tank";
    case Variant::central: return "central";
  }
  return "?";
}

Geometry open_tank() {
  Geometry g;
  g.variant = Variant::open;
  g.volume_l = 500.0;
  g.height_m = 1.6;
  return g;
}

Geometry coil_tank() {
  Geometry g;
  g.variant = Variant::coil;
  g.volume_l = 200.0;
  g.height_m = 1.2;
  g.hx_ua_kw = 0.5;
  g.coil_layers = 5;
  return g;
}

Geometry tank_in_tank() {
  Geometry g;
  g.variant = Variant::tank_in_tank;
  g.volume_l = 39.0;
  g.inner_volume_l = 164.0;
  g.height_m = 1.3;
  g.hx_ua_kw = 0.5;
  return g;
}

Geometry central_tank(double volume_l, double reference_volume_l, double reference_ua_w) {
  if (!(volume_l > 0.0 && reference_volume_l > 0.0)) {
    throw ContractViolation("central tank volume must be positive");
  }
  Geometry g;
  g.variant = Variant::central;
  g.volume_l = volume_l;
  g.layers = 50;
  // Slender vessel, height twice the diameter.
  const double v = volume_l * 1e-3;
  const double diameter = std::cbrt(2.0 * v / M_PI);
  g.height_m = 2.0 * diameter;
  g.loss_ua_w = reference_ua_w * std::pow(volume_l / reference_volume_l, 2.0 / 3.0);
  return g;
}

double total_volume_l(const Geometry& g) { return g.volume_l + g.inner_volume_l; }

State uniform_state(const Geometry& g, double temp) {
  if (g.layers < 2 || !(g.volume_l > 0.0)) throw ContractViolation("tank needs >= 2 layers and volume > 0");
  State s;
  s.t.assign(g.layers, temp);
  if (g.variant == Variant::tank_in_tank) s.inner.assign(g.layers, temp);
  return s;
}

void mix_inversions(std::vector<double>& temps, const std::vector<double>& masses) {
  struct Pool {
    double mass;
    double energy;
    int count;
  };
  std::vector<Pool> pools;
  pools.reserve(temps.size());
  for (std::size_t j = 0; j < temps.size(); ++j) {
    pools.push_back({masses[j], masses[j] * temps[j], 1});
    while (pools.size() > 1) {
      const Pool& top = pools.back();
      const Pool& below = pools[pools.size() - 2];
      if (below.energy / below.mass <= top.energy / top.mass) break;
      Pool merged{below.mass + top.mass, below.energy + top.energy, below.count + top.count};
      pools.pop_back();
      pools.back() = merged;
    }
  }
  std::size_t j = 0;
  for (const Pool& p : pools) {
    if (p.count == 1) {
      ++j;
      continue;
    }
    const double t = p.energy / p.mass;
    for (int k = 0; k < p.count; ++k) temps[j++] = t;
  }
}

StepResult tank_step(const Geometry& g, const State& s, Stream charge, Stream discharge,
                     double ambient, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("tank step needs dt > 0");
  if (charge.flow < 0.0 || discharge.flow < 0.0) throw ContractViolation("tank stream flows must be >= 0");
  const int n = g.layers;
  const bool tit = g.variant == Variant::tank_in_tank;
  const bool coil = g.variant == Variant::coil;

  StepResult r;
  r.state = s;
  std::vector<double>& outer = r.state.t;
  std::vector<double>& inner = r.state.inner;

  const double m_outer = layer_mass(g.volume_l, n);
  const double m_inner = tit ? layer_mass(g.inner_volume_l, n) : 0.0;
  const double dz = g.height_m / n;
  const double area_outer = g.volume_l * 1e-3 / g.height_m;
  const double area_inner = tit ? g.inner_volume_l * 1e-3 / g.height_m : 0.0;
  const double cond_outer = g.conductivity * area_outer / dz * 1e-3;
  const double cond_inner = g.conductivity * area_inner / dz * 1e-3;
  const double ua_layer = g.loss_ua_w * 1e-3 / n;
  const double hx_layer = tit ? g.hx_ua_kw / n : (coil ? g.hx_ua_kw / g.coil_layers : 0.0);

  // Stream routing: which stack each stream crosses directly.
  const Stream down_outer = coil ? Stream{} : charge;
  const Stream up_outer = tit ? Stream{} : discharge;
  const Stream up_inner = tit ? discharge : Stream{};

  // Stability: throughput per substep within one layer mass, diffusive and
  // exchanger coefficients within half a layer capacity.
  const double flow_outer = down_outer.flow + up_outer.flow;
  double rate = flow_outer / m_outer;
  rate = std::max(rate, (2.0 * cond_outer + ua_layer + hx_layer) / (m_outer * kWaterCp) * 2.0);
  if (tit) {
    rate = std::max(rate, up_inner.flow / m_inner);
    rate = std::max(rate, (2.0 * cond_inner + hx_layer) / (m_inner * kWaterCp) * 2.0);
  }
  const int substeps = std::max(1, static_cast<int>(std::ceil(rate * dt)));
  const double h = dt / substeps;

  std::vector<double> scratch;
  std::vector<double> masses_outer(n, m_outer);
  std::vector<double> masses_inner(tit ? n : 0, m_inner);
  double charge_out_kj = 0.0, discharge_out_kj = 0.0, lost_kj = 0.0;

  for (int k = 0; k < substeps; ++k) {
    if (coil && charge.flow > 0.0) {
      double t_fluid = charge.temp;
      const double ntu = hx_layer / (charge.flow * kWaterCp);
      const double keep = std::exp(-ntu);
      for (int j = g.coil_layers - 1; j >= 0; --j) {
        const double t_next = outer[j] + (t_fluid - outer[j]) * keep;
        outer[j] += charge.flow * kWaterCp * (t_fluid - t_next) * h / (m_outer * kWaterCp);
        t_fluid = t_next;
      }
      charge_out_kj += charge.flow * kWaterCp * t_fluid * h;
    }
    if (tit && g.hx_ua_kw > 0.0) {
      for (int j = 0; j < n; ++j) {
        const double q = hx_layer * (outer[j] - inner[j]) * h;
        outer[j] -= q / (m_outer * kWaterCp);
        inner[j] += q / (m_inner * kWaterCp);
      }
    }
    const Advected a = advect(outer, m_outer, down_outer, up_outer, h, scratch);
    if (!coil) charge_out_kj += a.down_out_kj;
    if (!tit) discharge_out_kj += a.up_out_kj;
    if (tit) discharge_out_kj += advect(inner, m_inner, Stream{}, up_inner, h, scratch).up_out_kj;
    conduct(outer, cond_outer, m_outer, h, scratch);
    if (tit) conduct(inner, cond_inner, m_inner, h, scratch);
    lost_kj += lose(outer, ua_layer, m_outer, ambient, h);
    mix_inversions(outer, masses_outer);
    if (tit) mix_inversions(inner, masses_inner);
  }

  r.loss_kw = lost_kj / dt;
  if (charge.flow > 0.0) {
    r.charge_out_temp = charge_out_kj / (charge.flow * kWaterCp * dt);
    r.charge_kw = charge.flow * kWaterCp * charge.temp - charge_out_kj / dt;
  } else {
    r.charge_out_temp = outer[0];
  }
  if (discharge.flow > 0.0) {
    r.discharge_out_temp = discharge_out_kj / (discharge.flow * kWaterCp * dt);
    r.discharge_kw = discharge_out_kj / dt - discharge.flow * kWaterCp * discharge.temp;
  } else {
    r.discharge_out_temp = top_temperature(g, r.state);
  }
  return r;
}

double heat_capacity_kj_per_k(const Geometry& g) {
  return total_volume_l(g) * 1e-3 * kWaterDensity * kWaterCp;
}

double energy_kj(const Geometry& g, const State& s) {
  double e = 0.0;
  const double m_outer = layer_mass(g.volume_l, g.layers);
  for (double t : s.t) e += m_outer * kWaterCp * t;
  if (!s.inner.empty()) {
    const double m_inner = layer_mass(g.inner_volume_l, g.layers);
    for (double t : s.inner) e += m_inner * kWaterCp * t;
  }
  return e;
}

double mean_temperature(const Geometry& g, const State& s) {
  return energy_kj(g, s) / heat_capacity_kj_per_k(g);
}

double top_temperature(const Geometry& g, const State& s) {
  return g.variant == Variant::tank_in_tank ? s.inner.back() : s.t.back();
}

double state_of_charge(const Geometry& g, const State& s, double t_min, double t_max) {
  if (!(t_min < t_max)) throw ContractViolation("state of charge needs T_min < T_max");
  return std::clamp((mean_temperature(g, s) - t_min) / (t_max - t_min), 0.0, 1.0);
}

}  // namespace dhflex::storage
