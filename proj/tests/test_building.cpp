#include <cmath>
#include <random>

#include <doctest.h>

#include "dhflex/building.hpp"
#include "dhflex/errors.hpp"
#include "dhflex_oracles/oracles.hpp"

using namespace dhflex;
using namespace dhflex::building;

TEST_CASE("standard building sizing") {
  const StandardBuilding b;
  const Params p = standard_params();
  CHECK(b.r_ie + b.r_ea == doctest::Approx(2.87));
  CHECK(static_design_load(b, b.r_ie, b.r_ea) == doctest::Approx(9.8).epsilon(0.005));
  CHECK(p.design_kw == doctest::Approx(16.0).epsilon(0.005));
  CHECK(p.r_h == doctest::Approx(2.49).epsilon(0.005));
  CHECK(p.r_ih == doctest::Approx(0.62).epsilon(0.01));
}

TEST_CASE("infiltration tangent plane") {
  const StandardBuilding b;
  const Infiltration lin = infiltration_linearize(b.c_s, b.c_w, b.a_l, b.dt0, b.u0);
  auto linear = [&](double dt, double u) { return dt / lin.r_ia - (lin.a_piv * u + lin.b_piv); };
  auto exact = [&](double dt, double u) { return infiltration_loss(b.c_s, b.c_w, b.a_l, dt, u); };

  // Value and both slopes match at the operating point.
  CHECK(linear(b.dt0, b.u0) == doctest::Approx(exact(b.dt0, b.u0)).epsilon(1e-12));
  const double h = 1e-5;
  CHECK((linear(b.dt0 + h, b.u0) - linear(b.dt0 - h, b.u0)) ==
        doctest::Approx(exact(b.dt0 + h, b.u0) - exact(b.dt0 - h, b.u0)).epsilon(1e-6));
  CHECK((linear(b.dt0, b.u0 + h) - linear(b.dt0, b.u0 - h)) ==
        doctest::Approx(exact(b.dt0, b.u0 + h) - exact(b.dt0, b.u0 - h)).epsilon(1e-6));

  // Away from the operating point the error is second order: halving the
  // offset roughly quarters it.
  for (double ddt : {-5.0, -2.0, 2.0, 5.0}) {
    for (double du : {-1.0, 0.0, 1.0}) {
      const double gap = linear(b.dt0 + ddt, b.u0 + du) - exact(b.dt0 + ddt, b.u0 + du);
      const double half = linear(b.dt0 + ddt / 2, b.u0 + du / 2) - exact(b.dt0 + ddt / 2, b.u0 + du / 2);
      CHECK(std::abs(half) <= 0.35 * std::abs(gap) + 1e-12);
    }
  }
}

TEST_CASE("airtight building has no infiltration") {
  const Infiltration lin = infiltration_linearize(4.35e-4, 1.61e-4, 0.0, 12.5, 3.5);
  CHECK(std::isinf(lin.r_ia));
  CHECK(lin.a_piv == 0.0);
  CHECK(lin.b_piv == 0.0);
  CHECK_THROWS_AS(infiltration_linearize(4.35e-4, 1.61e-4, 0.06, 0.0, 0.0), ContractViolation);
}

TEST_CASE("population") {
  SUBCASE("zero variance reproduces the standard building") {
    const Params s = standard_params();
    const Params p = sample_population(1, 9, 0.0).front();
    CHECK(p.r_h == doctest::Approx(s.r_h));
    CHECK(p.design_kw == doctest::Approx(s.design_kw));
    CHECK(p.r_ia == doctest::Approx(s.r_ia));
  }
  SUBCASE("deterministic per seed") {
    const auto a = sample_population(100, 4), b = sample_population(100, 4);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].c_i == b[i].c_i);
  }
  SUBCASE("property: means stay near the standard building over many seeds") {
    const Params s = standard_params();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      double r_h = 0, c_i = 0, c_e = 0;
      const auto pop = sample_population(100, seed);
      for (const Params& p : pop) {
        r_h += p.r_h / 100;
        c_i += p.c_i / 100;
        c_e += p.c_e / 100;
      }
      CHECK(r_h == doctest::Approx(2.4825).epsilon(0.05));
      CHECK(c_i == doctest::Approx(20.2141).epsilon(0.05));
      CHECK(c_e == doctest::Approx(s.c_e).epsilon(0.05));
    }
  }
}

TEST_CASE("rc step") {
  const Params p = standard_params();

  SUBCASE("equilibrium stays put") {
    Params q = p;
    q.a_piv = q.b_piv = 0.0;
    State s{5.0, 5.0, 5.0, false};
    const StepResult r = step(q, s, {5.0, 0.0, 0.0, 0.0}, {}, 60.0);
    CHECK(r.state.t_i == doctest::Approx(5.0));
    CHECK(r.state.t_e == doctest::Approx(5.0));
    CHECK(r.state.t_h == doctest::Approx(5.0));
  }
  SUBCASE("one hour free float matches the matrix exponential") {
    State s;
    for (int k = 0; k < 60; ++k) s = step(p, s, {0.0, 0.0, 0.0, 0.0}, {}, 60.0).state;
    const Eigen::Vector3d x = oracle::rc_propagate(oracle::rc_system(p, {0.0, 0.0, 0.0, 0.0}, {}),
                                                   Eigen::Vector3d(20, 20, 20), 1.0);
    CHECK(std::abs(s.t_i - x(0)) < 0.01);
    CHECK(std::abs(s.t_e - x(1)) < 0.01);
  }
  SUBCASE("step size is bounded") {
    CHECK_THROWS_AS(step(p, {}, {}, {}, 61.0), ContractViolation);
  }
  SUBCASE("property: stored energy changes by the net inflow") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      State s{15.0 + 10 * u01(rng), 10.0 + 10 * u01(rng), 20.0 + 50 * u01(rng), false};
      const Disturbance d{-10.0 + 25 * u01(rng), 8 * u01(rng), 2 * u01(rng), 0.6 * u01(rng)};
      const Coupling k{u01(rng) < 0.5 ? 0.0 : 1.0 / p.r_h, 40.0 + 30 * u01(rng)};
      const StepResult r = step(p, s, d, k, 60.0);
      // Ambient exchange integrated along the exact trajectory.
      const oracle::RcSystem sys = oracle::rc_system(p, d, k);
      Eigen::Vector3d x(s.t_i, s.t_e, s.t_h);
      auto ambient_kw = [&](const Eigen::Vector3d& y) {
        return (d.t_a - y(0)) / p.r_ia + (d.t_a - y(1)) / p.r_ea;
      };
      double ambient_kwh = 0.0;
      constexpr int kSub = 600;
      for (int i = 0; i < kSub; ++i) {
        const Eigen::Vector3d y = oracle::rc_propagate(sys, x, 60.0 / 3600.0 / kSub);
        ambient_kwh += 0.5 * (ambient_kw(x) + ambient_kw(y)) * 60.0 / 3600.0 / kSub;
        x = y;
      }
      const double gains_kwh = (p.a_piv * d.wind + p.b_piv + d.el_kw + d.solar_kw) / 60.0;
      const double du = stored_energy_kwh(p, r.state) - stored_energy_kwh(p, s);
      const double net = r.heat_kw / 60.0 + gains_kwh + ambient_kwh;
      const double gross = std::abs(r.heat_kw / 60.0) + std::abs(gains_kwh) + std::abs(ambient_kwh);
      CHECK(std::abs(du - net) <= 1e-3 * gross);
    }
  }
}

TEST_CASE("thermostat hysteresis") {
  const Thermostat band;
  CHECK(thermostat(band, false, 19.4));
  CHECK_FALSE(thermostat(band, false, 21.0));
  CHECK_FALSE(thermostat(band, true, 21.0));
  CHECK(thermostat(band, true, 20.0));
  CHECK_FALSE(thermostat(band, false, 20.0));
  CHECK_THROWS_AS(thermostat({20.5, 19.5}, false, 20.0), ContractViolation);
}

TEST_CASE("substation") {
  const Params p = standard_params();
  CHECK(substation_coupling(p, 0.0, 70.0).g == 0.0);
  CHECK_THROWS_AS(substation_coupling(p, -0.1, 70.0), ContractViolation);
  const State cold{19.0, 18.0, 25.0, true};
  const double m = space_heating_flow(p, cold, 70.0, 60.0);
  CHECK(m > 0.0);
  CHECK(m <= max_space_heating_flow(p) + 1e-12);
  CHECK(dhw_flow(10.0, 60.0) == doctest::Approx(10.0 / (4.18 * (60.0 - kDhwPrimaryReturn))));
}
