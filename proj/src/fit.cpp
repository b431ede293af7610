#include "dhflex/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "dhflex/errors.hpp"

namespace dhflex::fit {

void building_model_step(const AggregateBuildingModel& m, double& t_a, double& t_m, double t_out,
                         double p_b, double q_a, double q_m, double dt_h) {
  const double da = m.h_m * (t_m - t_a) + m.u_a * (t_out - t_a) + m.gamma_a * p_b + q_a;
  const double dm = m.h_m * (t_a - t_m) + m.gamma_m * q_m;
  t_a += dt_h * da / m.c_a;
  t_m += dt_h * dm / m.c_m;
}

double tank_model_step(const AggregateTankModel& m, double t_s, double t_out, double p_w, double d,
                       double dt_h) {
  return t_s + dt_h * (m.u_s * (t_out - t_s) + m.gamma_s * p_w - d) / m.c_s;
}

std::vector<double> track_mass_temperature(const AggregateBuildingModel& m,
                                           const std::vector<BuildingSample>& s, double dt_h,
                                           double t_m0) {
  std::vector<double> t_m(s.size());
  double tm = t_m0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    t_m[k] = tm;
    tm += dt_h * (m.h_m * (s[k].t_a - tm) + m.gamma_m * s[k].q_m) / m.c_m;
  }
  return t_m;
}

namespace {

// Parameters live in log-space boxes scaled by the mean heating power: closed-loop
// data leaves the overall scale weakly identified and an unbounded search can drift
// along it without limit.
struct Box {
  double lo[6];
  double hi[6];
};

Box parameter_box(double p_scale) {
  Box b{};
  for (int i = 0; i < 2; ++i) {  // capacities, kWh/K
    b.lo[i] = 1e-2 * p_scale;
    b.hi[i] = 1e3 * p_scale;
  }
  for (int i = 2; i < 4; ++i) {  // conductances, kW/K
    b.lo[i] = 1e-3 * p_scale;
    b.hi[i] = 10.0 * p_scale;
  }
  for (int i = 4; i < 6; ++i) {  // gains
    b.lo[i] = 1e-2;
    b.hi[i] = 1e2;
  }
  return b;
}

double to_param(double x, double lo, double hi) {
  const double w = 1.0 / (1.0 + std::exp(-x));
  return lo * std::pow(hi / lo, w);
}

double to_free(double v, double lo, double hi) {
  const double w = std::clamp(std::log(v / lo) / std::log(hi / lo), 1e-6, 1.0 - 1e-6);
  return std::log(w / (1.0 - w));
}

AggregateBuildingModel unpack(const Eigen::VectorXd& x, const Box& b) {
  double v[6];
  for (int i = 0; i < 6; ++i) v[i] = to_param(x(i), b.lo[i], b.hi[i]);
  AggregateBuildingModel m;
  m.c_a = v[0];
  m.c_m = v[1];
  m.u_a = v[2];
  m.h_m = v[3];
  m.gamma_a = v[4];
  m.gamma_m = v[5];
  return m;
}

// One-step residuals of the indoor temperature with the mass state tracked
// along the measured indoor temperatures.
void residuals(const AggregateBuildingModel& m, double t_m0, const std::vector<BuildingSample>& s,
               double dt_h, Eigen::VectorXd& r) {
  double tm = t_m0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    double ta = s[k].t_a;
    building_model_step(m, ta, tm, s[k].t_out, s[k].p_b, s[k].q_a, s[k].q_m, dt_h);
    r(static_cast<Eigen::Index>(k)) = s[k + 1].t_a - ta;
  }
}

struct Residual : Eigen::DenseFunctor<double> {
  Residual(const std::vector<BuildingSample>& s, double dt_h, const Box& b)
      : Eigen::DenseFunctor<double>(7, static_cast<int>(s.size()) - 1), samples(s), dt(dt_h), box(b) {}

  int operator()(const InputType& x, ValueType& f) const {
    residuals(unpack(x, box), x(6), samples, dt, f);
    if (!f.allFinite()) f.setConstant(1e6);
    return 0;
  }

  const std::vector<BuildingSample>& samples;
  double dt;
  Box box;
};

void require_excitation(const Eigen::MatrixXd& a, const char* what) {
  Eigen::MatrixXd scaled = a;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double n = a.col(j).norm();
    if (n > 0.0) scaled.col(j) /= n;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-7);
  if (qr.rank() < a.cols()) {
    throw FitError(std::string(what) +
                   ": regression is singular; the historic run does not excite the model, "
                   "use a longer pre-run or add excitation");
  }
}

}  // namespace

double one_step_rms(const AggregateBuildingModel& m, const std::vector<BuildingSample>& samples,
                    double dt_h, double t_m0) {
  if (samples.size() < 2) return 0.0;
  Eigen::VectorXd r(static_cast<Eigen::Index>(samples.size()) - 1);
  residuals(m, t_m0, samples, dt_h, r);
  return std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
}

BuildingFit fit_building(const std::vector<BuildingSample>& s, double dt_h) {
  const std::size_t n = s.size();
  if (n < 16) throw FitError("building fit needs at least 16 samples");

  // First-order regression C dT/dt = U (T_out - T) + g P_b + Q_a + g_m Q_m
  // for the excitation check and the starting point.
  Eigen::MatrixXd a(n - 1, 4);
  Eigen::VectorXd y(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    a(k, 0) = s[k].t_out - s[k].t_a;
    a(k, 1) = s[k].p_b;
    a(k, 2) = s[k].q_a;
    a(k, 3) = s[k].q_m;
    y(k) = (s[k + 1].t_a - s[k].t_a) / dt_h;
  }
  require_excitation(a, "building fit");
  const Eigen::Vector4d b = a.colPivHouseholderQr().solve(y);
  // Fall back to generic magnitudes when the first-order fit is not physical.
  const double inv_c = b(2) > 0.0 ? b(2) : 1e-3;
  const double c_tot = 1.0 / inv_c;
  const double u = b(0) > 0.0 ? b(0) * c_tot : 0.05 * c_tot;
  const double g = b(1) > 0.0 ? b(1) * c_tot : 1.0;
  const double gm = b(3) > 0.0 ? b(3) * c_tot : 1.0;

  double p_mean = 0.0;
  for (const BuildingSample& x : s) p_mean += x.p_b;
  const Box box = parameter_box(std::max(p_mean / static_cast<double>(n), 1.0));

  BuildingFit best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double split : {0.5, 0.2, 0.05}) {
    for (double coupling : {2.0, 8.0}) {
      const double start[6] = {split * c_tot, (1.0 - split) * c_tot, u, coupling * u, g, gm};
      Eigen::VectorXd x(7);
      for (int i = 0; i < 6; ++i) x(i) = to_free(start[i], box.lo[i], box.hi[i]);
      x(6) = s[0].t_a;
      Residual functor(s, dt_h, box);
      Eigen::NumericalDiff<Residual> diff(functor);
      Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residual>> lm(diff);
      lm.setMaxfev(4000);
      lm.setXtol(1e-14);
      lm.setFtol(1e-16);
      lm.minimize(x);
      Eigen::VectorXd r(static_cast<Eigen::Index>(n) - 1);
      const AggregateBuildingModel m = unpack(x, box);
      residuals(m, x(6), s, dt_h, r);
      const double cost = r.squaredNorm();
      if (std::isfinite(cost) && cost < best_cost) {
        best_cost = cost;
        best.model = m;
        best.t_m0 = x(6);
      }
    }
  }
  if (!std::isfinite(best_cost)) throw FitError("building fit did not converge");
  best.model.rms = std::sqrt(best_cost / static_cast<double>(n - 1));
  // Mass state one step past the last sample, ready for the next input.
  const std::vector<double> tm = track_mass_temperature(best.model, s, dt_h, best.t_m0);
  const BuildingSample& last = s.back();
  best.t_m_end = tm.back() + dt_h *
                                 (best.model.h_m * (last.t_a - tm.back()) +
                                  best.model.gamma_m * last.q_m) /
                                 best.model.c_m;
  return best;
}

AggregateTankModel fit_tank(const std::vector<TankSample>& s, double dt_h) {
  const std::size_t n = s.size();
  if (n < 8) throw FitError("tank fit needs at least 8 samples");
  Eigen::MatrixXd a(n - 1, 3);
  Eigen::VectorXd y(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    a(k, 0) = s[k].t_out - s[k].t_s;
    a(k, 1) = s[k].p_w;
    a(k, 2) = -s[k].d;
    y(k) = (s[k + 1].t_s - s[k].t_s) / dt_h;
  }
  require_excitation(a, "tank fit");
  const Eigen::Vector3d b = a.colPivHouseholderQr().solve(y);
  if (!(b(2) > 0.0) || !(b(1) > 0.0)) {
    throw FitError("tank fit gives a non-positive capacity or charging gain");
  }
  AggregateTankModel m;
  m.c_s = 1.0 / b(2);
  m.gamma_s = b(1) * m.c_s;
  // Losses too small to resolve are kept at a tiny positive conductance.
  m.u_s = std::max(b(0) * m.c_s, 1e-6 * m.c_s);
  const Eigen::VectorXd r = y - a * b;
  m.rms = std::sqrt((r * dt_h).squaredNorm() / static_cast<double>(n - 1));
  return m;
}

}  // namespace dhflex::fit
