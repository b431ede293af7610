#include <cmath>
#include <random>

#include <doctest.h>

#include "dhflex/errors.hpp"
#include "dhflex/storage.hpp"
#include "dhflex_oracles/oracles.hpp"

using namespace dhflex;
using namespace dhflex::storage;

TEST_CASE("variant geometries") {
  CHECK(open_tank().volume_l == 500.0);
  CHECK(open_tank().layers == 15);
  CHECK(coil_tank().volume_l == 200.0);
  CHECK(tank_in_tank().inner_volume_l == 164.0);
  CHECK(total_volume_l(tank_in_tank()) == doctest::Approx(203.0));
  CHECK(central_tank(20000.0, 500.0).layers == 50);
  CHECK(central_tank(20000.0, 500.0).loss_ua_w > open_tank().loss_ua_w);
  CHECK_THROWS_AS(central_tank(0.0, 500.0), ContractViolation);
}

TEST_CASE("isolated tank keeps its temperatures") {
  Geometry g = open_tank();
  g.loss_ua_w = 0.0;
  State s = uniform_state(g, 55.0);
  const StepResult r = tank_step(g, s, {}, {}, 20.0, 3600.0);
  for (double t : r.state.t) CHECK(t == doctest::Approx(55.0));
}

TEST_CASE("standing loss follows exponential decay") {
  Geometry g = open_tank();
  g.loss_ua_w = 2.0;
  const State s = uniform_state(g, 60.0);
  const StepResult r = tank_step(g, s, {}, {}, 20.0, 3600.0);
  const double cap = heat_capacity_kj_per_k(g);
  const double tau = cap / (g.loss_ua_w * 1e-3);
  const double expected = cap * 40.0 * (1.0 - std::exp(-3600.0 / tau));
  CHECK(energy_kj(g, s) - energy_kj(g, r.state) == doctest::Approx(expected).epsilon(0.01));
  for (double t : r.state.t) CHECK(t < 60.0);
}

TEST_CASE("charging builds a stratified front inside the analytic envelope") {
  Geometry g = open_tank();
  g.loss_ua_w = 0.0;
  State s = uniform_state(g, 40.0);
  const double e0 = energy_kj(g, s);
  const double cap = heat_capacity_kj_per_k(g);
  for (int minute = 1; minute <= 60; ++minute) {
    s = tank_step(g, s, {0.05, 70.0}, {}, 20.0, 60.0).state;
    CHECK(s.t.back() >= s.t.front());
    const double stored = energy_kj(g, s) - e0;
    CHECK(stored >= oracle::mixed_charge_kj(cap, 40.0, 70.0, 0.05, 60.0 * minute) - 1e-6);
    CHECK(stored <= oracle::plug_charge_kj(cap, 40.0, 70.0, 0.05, 60.0 * minute) + 1e-6);
  }
  CHECK(s.t.back() > 65.0);
  CHECK(s.t.front() < 45.0);
}

TEST_CASE("property: every variant balances energy and stays stratified") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (const Geometry& g : {open_tank(), coil_tank(), tank_in_tank(), central_tank(10000.0, 500.0)}) {
    State s = uniform_state(g, 50.0);
    for (int k = 0; k < 500; ++k) {
      const Stream c{0.2 * u01(rng), 45.0 + 40.0 * u01(rng)};
      const Stream d{0.2 * u01(rng), 10.0 + 20.0 * u01(rng)};
      const double dt = 30.0 + 870.0 * u01(rng);
      const StepResult r = tank_step(g, s, c, d, 15.0, dt);
      const double de = energy_kj(g, r.state) - energy_kj(g, s);
      const double net = (r.charge_kw - r.discharge_kw - r.loss_kw) * dt;
      const double gross = (std::abs(r.charge_kw) + std::abs(r.discharge_kw) + std::abs(r.loss_kw)) * dt;
      CHECK(std::abs(de - net) <= 1e-3 * gross + 1e-9);
      for (std::size_t i = 1; i < r.state.t.size(); ++i) CHECK(r.state.t[i] >= r.state.t[i - 1] - 1e-9);
      s = r.state;
    }
  }
}

TEST_CASE("inversion mixing") {
  std::vector<double> t = {60.0, 40.0, 50.0, 45.0};
  const std::vector<double> m = {1.0, 2.0, 1.0, 3.0};
  double before = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) before += m[i] * t[i];
  mix_inversions(t, m);
  double after = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) after += m[i] * t[i];
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] >= t[i - 1]);
}

TEST_CASE("state of charge") {
  const Geometry g = open_tank();
  CHECK(state_of_charge(g, uniform_state(g, 80.0), 40.0, 80.0) == doctest::Approx(1.0));
  CHECK(state_of_charge(g, uniform_state(g, 40.0), 40.0, 80.0) == doctest::Approx(0.0));
  CHECK(state_of_charge(g, uniform_state(g, 95.0), 40.0, 80.0) == 1.0);
  Geometry even = g;
  even.layers = 14;
  State half = uniform_state(even, 40.0);
  for (int i = 7; i < 14; ++i) half.t[i] = 80.0;
  CHECK(state_of_charge(even, half, 40.0, 80.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(state_of_charge(g, half, 80.0, 40.0), ContractViolation);
}

TEST_CASE("bad stream arguments") {
  const Geometry g = open_tank();
  const State s = uniform_state(g, 50.0);
  CHECK_THROWS_AS(tank_step(g, s, {-0.1, 60.0}, {}, 20.0, 60.0), ContractViolation);
  CHECK_THROWS_AS(tank_step(g, s, {}, {}, 20.0, 0.0), ContractViolation);
  // A flow worth many tank volumes in one step is subdivided, never rejected.
  const StepResult r = tank_step(g, s, {50.0, 70.0}, {}, 20.0, 900.0);
  CHECK(r.state.t.back() == doctest::Approx(70.0).epsilon(1e-3));
}
