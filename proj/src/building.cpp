#include "dhflex/building.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dhflex/constants.hpp"
#include "dhflex/errors.hpp"

namespace dhflex::building {

namespace {

// Scaling and squaring with a degree-8 Pade approximant; the argument is
// scaled to norm <= 0.5 where the approximant is exact to double precision.
Eigen::Matrix3d expm(const Eigen::Matrix3d& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::Matrix3d a = m / std::ldexp(1.0, squarings);
  constexpr int kDegree = 8;
  double coeff = 1.0;
  Eigen::Matrix3d power = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d num = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d den = Eigen::Matrix3d::Identity();
  for (int k = 1; k <= kDegree; ++k) {
    coeff *= static_cast<double>(kDegree - k + 1) / (k * (2.0 * kDegree - k + 1));
    power = power * a;
    num += coeff * power;
    den += ((k % 2) ? -coeff : coeff) * power;
  }
  Eigen::Matrix3d e = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) e = e * e;
  return e;
}

double truncated_normal(std::mt19937_64& rng, double mean, double rel_sd) {
  if (rel_sd <= 0.0) return mean;
  std::normal_distribution<double> dist(mean, rel_sd * mean);
  for (;;) {
    const double v = dist(rng);
    if (v > 0.0) return v;
  }
}

}  // namespace

double infiltration_loss(double c_s, double c_w, double a_l, double dt, double u) {
  const double radicand = c_s * std::abs(dt) + c_w * u * u;
  return kAirRhoCp * kLeakageUnit * a_l * std::sqrt(std::max(radicand, 0.0)) * dt;
}

Infiltration infiltration_linearize(double c_s, double c_w, double a_l, double dt0, double u0) {
  const double radicand = c_s * dt0 + c_w * u0 * u0;
  if (!(radicand > 0.0)) {
    throw ContractViolation("infiltration linearisation needs C_S dT0 + C_W U0^2 > 0");
  }
  if (a_l == 0.0) return {std::numeric_limits<double>::infinity(), 0.0, 0.0};
  const double k = kAirRhoCp * kLeakageUnit * a_l;
  const double s = std::sqrt(radicand);
  Infiltration out;
  out.r_ia = 2.0 * s / (k * (3.0 * c_s * dt0 + 2.0 * c_w * u0 * u0));
  out.a_piv = -k * c_w * u0 * dt0 / s;
  out.b_piv = k * dt0 * (c_s * dt0 + 2.0 * c_w * u0 * u0) / (2.0 * s);
  return out;
}

double static_design_load(const StandardBuilding& b, double r_ie, double r_ea) {
  return (b.design_indoor - b.design_outdoor) / (r_ie + r_ea);
}

Params size_building(const StandardBuilding& b, double c_i, double c_e, double c_h, double c_w,
                     double c_s, double r_ie, double r_ea) {
  Params p;
  p.c_i = c_i;
  p.c_e = c_e;
  p.c_h = c_h;
  p.c_w = c_w;
  p.c_s = c_s;
  p.a_l = b.a_l;
  p.r_ie = r_ie;
  p.r_ea = r_ea;
  const Infiltration inf = infiltration_linearize(c_s, c_w, b.a_l, b.dt0, b.u0);
  p.r_ia = inf.r_ia;
  p.a_piv = inf.a_piv;
  p.b_piv = inf.b_piv;
  const double dt_design = b.design_indoor - b.design_outdoor;
  p.design_kw = static_design_load(b, r_ie, r_ea) +
                infiltration_loss(c_s, c_w, b.a_l, dt_design, b.design_wind) +
                b.reheat * b.floor_area;
  p.r_h = (b.design_supply - b.design_return) / p.design_kw;
  p.r_ih = (b.design_return - b.design_indoor) / p.design_kw;
  return p;
}

Params standard_params(const StandardBuilding& b) {
  return size_building(b, b.c_i, b.c_e, b.c_h, b.c_w, b.c_s, b.r_ie, b.r_ea);
}

std::vector<Params> sample_population(int n, std::uint64_t seed, double rel_sd,
                                     const StandardBuilding& b) {
  if (n < 1) throw ContractViolation("population size must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<Params> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double c_i = truncated_normal(rng, b.c_i, rel_sd);
    const double c_e = truncated_normal(rng, b.c_e, rel_sd);
    const double c_h = truncated_normal(rng, b.c_h, rel_sd);
    const double c_w = truncated_normal(rng, b.c_w, rel_sd);
    const double c_s = truncated_normal(rng, b.c_s, rel_sd);
    const double r_ie = truncated_normal(rng, b.r_ie, rel_sd);
    const double r_ea = truncated_normal(rng, b.r_ea, rel_sd);
    out.push_back(size_building(b, c_i, c_e, c_h, c_w, c_s, r_ie, r_ea));
  }
  return out;
}

LinearSystem linear_system(const Params& p, const Disturbance& d, Coupling k) {
  const double g_ia = std::isinf(p.r_ia) ? 0.0 : 1.0 / p.r_ia;
  const double g_ih = 1.0 / p.r_ih;
  const double g_ie = 1.0 / p.r_ie;
  const double g_ea = 1.0 / p.r_ea;
  const double p_iv = p.a_piv * d.wind + p.b_piv;
  LinearSystem sys;
  sys.a << -(g_ih + g_ia + g_ie) / p.c_i, g_ie / p.c_i, g_ih / p.c_i,
      g_ie / p.c_e, -(g_ie + g_ea) / p.c_e, 0.0,
      g_ih / p.c_h, 0.0, -(g_ih + k.g) / p.c_h;
  sys.c << (p_iv + d.el_kw + d.solar_kw + g_ia * d.t_a) / p.c_i,
      g_ea * d.t_a / p.c_e,
      k.g * k.t_source / p.c_h;
  return sys;
}

State steady_envelope(const Params& p, double t_i, double t_a) {
  State s;
  s.t_i = t_i;
  s.t_e = t_i + (t_a - t_i) * p.r_ie / (p.r_ie + p.r_ea);
  s.t_h = t_i;
  return s;
}

StepResult step(const Params& p, const State& s, const Disturbance& d, Coupling k, double dt) {
  if (!(dt > 0.0 && dt <= 60.0)) throw ContractViolation("building step needs 0 < dt <= 60 s");
  if (k.g < 0.0) throw ContractViolation("negative radiator coupling");
  const double h = dt / kSecondsPerHour;
  const LinearSystem sys = linear_system(p, d, k);
  const Eigen::Vector3d x0(s.t_i, s.t_e, s.t_h);
  const Eigen::Matrix3d phi = expm(sys.a * h);
  const auto lu = sys.a.partialPivLu();
  const Eigen::Vector3d x1 = phi * x0 + lu.solve((phi - Eigen::Matrix3d::Identity()) * sys.c);
  const Eigen::Vector3d integral = lu.solve(x1 - x0 - sys.c * h);

  StepResult r;
  r.state = s;
  r.state.t_i = x1(0);
  r.state.t_e = x1(1);
  r.state.t_h = x1(2);
  r.heat_kw = k.g * (k.t_source * h - integral(2)) / h;
  return r;
}

double stored_energy_kwh(const Params& p, const State& s) {
  return p.c_i * s.t_i + p.c_e * s.t_e + p.c_h * s.t_h;
}

Coupling substation_coupling(const Params& p, double primary_flow, double t_supply) {
  if (primary_flow < 0.0) throw ContractViolation("negative substation flow");
  return {kSubstationEffectiveness * std::min(primary_flow * kWaterCp, 1.0 / p.r_h), t_supply};
}

double max_space_heating_flow(const Params& p) { return 1.0 / (p.r_h * kWaterCp); }

double space_heating_flow(const Params& p, const State& s, double t_supply, double t_circuit_set) {
  const double wanted_kw = (t_circuit_set - s.t_h) / p.r_h;
  const double lift = t_supply - s.t_h;
  if (wanted_kw <= 0.0 || lift <= 0.0) return 0.0;
  const double g = wanted_kw / lift;
  return std::min(g / (kSubstationEffectiveness * kWaterCp), max_space_heating_flow(p));
}

double dhw_flow(double dhw_kw, double t_supply) {
  if (dhw_kw <= 0.0) return 0.0;
  const double lift = std::max(t_supply - kDhwPrimaryReturn, 5.0);
  return dhw_kw / (kWaterCp * lift);
}

bool thermostat(const Thermostat& band, bool heating, double t_i) {
  if (!(band.lower < band.upper)) throw ContractViolation("thermostat band needs lower < upper");
  if (t_i < band.lower) return true;
  if (t_i > band.upper) return false;
  return heating;
}

}  // namespace dhflex::building
