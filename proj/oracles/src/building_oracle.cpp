#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "dhflex_oracles/oracles.hpp"

namespace dhflex::oracle {

RcSystem rc_system(const building::Params& p, const building::Disturbance& d,
                   building::Coupling k) {
  // Nodes: 0 indoor air, 1 envelope, 2 radiator. Conductances in kW/K.
  struct Link {
    int i, j;
    double g;
  };
  const Link links[] = {{0, 1, 1.0 / p.r_ie}, {0, 2, 1.0 / p.r_ih}};
  const double cap[3] = {p.c_i, p.c_e, p.c_h};
  // Conductances to fixed temperatures: ambient via infiltration and the outer
  // wall resistance, the heat source via the coupling.
  const double g_fixed[3] = {std::isinf(p.r_ia) ? 0.0 : 1.0 / p.r_ia, 1.0 / p.r_ea, k.g};
  const double t_fixed[3] = {d.t_a, d.t_a, k.t_source};
  const double gains[3] = {p.a_piv * d.wind + p.b_piv + d.el_kw + d.solar_kw, 0.0, 0.0};

  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  for (const Link& l : links) {
    g(l.i, l.i) -= l.g;
    g(l.j, l.j) -= l.g;
    g(l.i, l.j) += l.g;
    g(l.j, l.i) += l.g;
  }
  RcSystem s;
  for (int i = 0; i < 3; ++i) {
    g(i, i) -= g_fixed[i];
    s.c(i) = (g_fixed[i] * t_fixed[i] + gains[i]) / cap[i];
  }
  for (int i = 0; i < 3; ++i) s.a.row(i) = g.row(i) / cap[i];
  return s;
}

Eigen::Vector3d rc_propagate(const RcSystem& s, const Eigen::Vector3d& x0, double hours) {
  // x(t) = x_eq + V exp(L t) V^-1 (x0 - x_eq), x_eq = -A^-1 c.
  const Eigen::Vector3d x_eq = -s.a.fullPivLu().solve(s.c);
  Eigen::EigenSolver<Eigen::Matrix3d> es(s.a);
  const Eigen::Matrix3cd v = es.eigenvectors();
  const Eigen::Vector3cd lam = es.eigenvalues();
  const Eigen::Vector3cd y0 = v.fullPivLu().solve((x0 - x_eq).cast<std::complex<double>>());
  Eigen::Vector3cd y;
  for (int i = 0; i < 3; ++i) y(i) = std::exp(lam(i) * hours) * y0(i);
  return x_eq + (v * y).real();
}

}  // namespace dhflex::oracle
