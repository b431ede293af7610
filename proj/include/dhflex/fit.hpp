#pragma once

#include <vector>

namespace dhflex::fit {

// Second-order cluster model, time in hours, powers in kW:
//   C_a dT_a/dt = H_m (T_m - T_a) + U_a (T_out - T_a) + gamma_a P_b + Q_a
//   C_m dT_m/dt = H_m (T_a - T_m) + gamma_m Q_m
// Q_a (appliance gains) enters with unit gain so that every parameter is identifiable.
struct AggregateBuildingModel {
  double c_a = 0.0;  // kWh/K
  double c_m = 0.0;
  double u_a = 0.0;  // kW/K
  double h_m = 0.0;
  double gamma_a = 1.0;
  double gamma_m = 1.0;
  double rms = 0.0;  // one-step residual on the fitting data, K
};

// C_s dT_s/dt = U_s (T_out - T_s) + gamma_s P_w - d
struct AggregateTankModel {
  double c_s = 0.0;  // kWh/K
  double u_s = 0.0;  // kW/K
  double gamma_s = 1.0;
  double rms = 0.0;
};

struct BuildingSample {
  double t_a;    // mean indoor temperature
  double t_out;
  double p_b;    // heat delivered to the cluster
  double q_a;    // appliance gains
  double q_m;    // solar gains
};

struct TankSample {
  double t_s;    // mean storage temperature
  double t_out;
  double p_w;    // heat delivered to the storage
  double d;      // heat taken out
};

// Forward-Euler discretisation shared by fitting, planning and the oracles.
void building_model_step(const AggregateBuildingModel& m, double& t_a, double& t_m, double t_out,
                         double p_b, double q_a, double q_m, double dt_h);
double tank_model_step(const AggregateTankModel& m, double t_s, double t_out, double p_w, double d,
                       double dt_h);

// Latent mass temperature tracked along measured indoor temperatures,
// starting from t_m0. Entry k is T_m at sample k.
std::vector<double> track_mass_temperature(const AggregateBuildingModel& m,
                                           const std::vector<BuildingSample>& s, double dt_h,
                                           double t_m0);

struct BuildingFit {
  AggregateBuildingModel model;
  double t_m0 = 0.0;      // latent state at the first sample
  double t_m_end = 0.0;   // latent state at the last sample
};

// Levenberg-Marquardt on log-parameters and the initial mass temperature,
// minimising one-step-ahead indoor temperature errors. Throws FitError when
// the inputs do not excite the model.
BuildingFit fit_building(const std::vector<BuildingSample>& samples, double dt_h);

// Linear least squares on the discretised tank equation. Throws FitError when
// the regression is singular or yields non-physical parameters.
AggregateTankModel fit_tank(const std::vector<TankSample>& samples, double dt_h);

// RMS of one-step-ahead indoor predictions with the mass state tracked from t_m0.
double one_step_rms(const AggregateBuildingModel& m, const std::vector<BuildingSample>& samples,
                    double dt_h, double t_m0);

}  // namespace dhflex::fit
