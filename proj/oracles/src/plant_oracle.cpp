#include <cmath>

#include "dhflex_oracles/oracles.hpp"

namespace dhflex::oracle {

ChpPoint chp(double fm, double t_in) {
  const double t2 = std::pow(t_in, 2), t3 = std::pow(t_in, 3);
  const double a_heat = 3.1537e-5 * t3 + (-7.4162e-3) * t2 + (-0.3258) * t_in + 704.09;
  const double b_heat = 6.0633e-4 * t2 + (-0.1848) * t_in + 160.01;
  ChpPoint p;
  p.p_el = 600.0 * fm;
  p.p_heat = a_heat * fm + b_heat;
  p.p_gas = 31.250 * std::pow(fm, 2) + 1310.75 * fm + 181.35;
  return p;
}

BoilerPoint boiler(double fm, double t_in) {
  const double g = 1100.0 * fm;
  const double g2 = std::pow(g, 2);
  const double a = -7.758e-13 * g2 + (-1.119e-10) * g + 3.295e-6;
  const double b = 1.195e-10 * g2 + 2.911e-8 * g + (-4.665e-4);
  const double c = -6.067e-9 * g2 + (-1.558e-6) * g + 1.800e-2;
  const double d = 1.121e-7 * g2 + (-1.503e-5) * g + 7.675e-1;
  BoilerPoint p;
  p.p_gas = g;
  p.efficiency = a * std::pow(t_in, 3) + b * std::pow(t_in, 2) + c * t_in + d;
  p.p_out = p.efficiency * g;
  return p;
}

}  // namespace dhflex::oracle
