#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dhflex/constants.hpp"
#include "dhflex_oracles/oracles.hpp"

namespace dhflex::oracle {

FvPipe::FvPipe(int cells, double capacity_kj_per_k, double loss_kw_per_k, double temp)
    : cell_cap_(capacity_kj_per_k / cells), loss_(loss_kw_per_k / cells), t_(cells, temp) {
  if (cells < 1) throw std::invalid_argument("finite-volume pipe needs cells");
}

double FvPipe::advance(double flow, double inlet, double ambient, double dt) {
  if (flow < 0.0) throw std::invalid_argument("finite-volume pipe runs forward only");
  const double rate = flow * kWaterCp;  // kW/K
  const double courant_dt = rate > 0.0 ? 0.9 * cell_cap_ / rate : dt;
  const int sub = std::max(1, static_cast<int>(std::ceil(dt / courant_dt)));
  const double h = dt / sub;
  const double nu = rate * h / cell_cap_;
  const double keep = std::exp(-loss_ / cell_cap_ * h);
  const std::size_t n = t_.size();
  std::vector<double> face(n + 1);
  double out = 0.0;
  for (int s = 0; s < sub; ++s) {
    for (double& t : t_) t = ambient + (t - ambient) * keep;
    // Second-order upwind faces with the van Leer limiter; the inlet acts as
    // the ghost cell and the outlet face is plain upwind.
    face[0] = inlet;
    for (std::size_t i = 1; i < n; ++i) {
      const double up = t_[i - 1];
      const double upup = i >= 2 ? t_[i - 2] : inlet;
      const double jump = t_[i] - up;
      double phi = 0.0;
      if (jump != 0.0) {
        const double r = (up - upup) / jump;
        phi = (r + std::abs(r)) / (1.0 + std::abs(r));
      }
      face[i] = up + 0.5 * (1.0 - nu) * phi * jump;
    }
    face[n] = t_[n - 1];
    out += face[n];
    for (std::size_t i = 0; i < n; ++i) t_[i] += nu * (face[i] - face[i + 1]);
  }
  return rate > 0.0 ? out / sub : t_.back();
}

double FvPipe::energy_kj() const {
  double e = 0.0;
  for (double t : t_) e += cell_cap_ * t;
  return e;
}

double mixed_charge_kj(double cap, double t0, double t_in, double flow, double seconds) {
  const double tau = cap / (flow * kWaterCp);
  return cap * (t_in - t0) * (1.0 - std::exp(-seconds / tau));
}

double plug_charge_kj(double cap, double t0, double t_in, double flow, double seconds) {
  return std::min(flow * kWaterCp * seconds, cap) * (t_in - t0);
}

}  // namespace dhflex::oracle
