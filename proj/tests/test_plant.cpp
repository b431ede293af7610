#include <doctest.h>

#include "dhflex/errors.hpp"
#include "dhflex/plant.hpp"
#include "dhflex_oracles/oracles.hpp"

using namespace dhflex;
using namespace dhflex::plant;

TEST_CASE("chp at full modulation") {
  const ChpOutput o = chp_evaluate({}, 1.0, 40.0);
  CHECK(o.p_gas == 1523.35);
  CHECK(o.p_el == 600.0);
  CHECK(chp_evaluate({}, 0.4, 40.0).p_el == doctest::Approx(240.0));
  CHECK(chp_evaluate({}, 1.0, 70.0).p_heat == doctest::Approx(805.8).epsilon(1e-3));
}

TEST_CASE("plant polynomials agree with the oracle") {
  for (double fm : {0.4, 0.55, 0.8, 1.0}) {
    for (double t : {25.0, 45.0, 70.0, 88.0}) {
      const ChpOutput a = chp_evaluate({}, fm, t);
      const oracle::ChpPoint b = oracle::chp(fm, t);
      CHECK(a.p_heat == doctest::Approx(b.p_heat).epsilon(1e-12));
      CHECK(a.p_gas == doctest::Approx(b.p_gas).epsilon(1e-12));
    }
  }
  for (double fm : {0.1, 0.5, 1.0}) {
    const BoilerOutput a = boiler_evaluate({}, fm, 30.0);
    const oracle::BoilerPoint b = oracle::boiler(fm, 30.0);
    CHECK(a.efficiency == doctest::Approx(b.efficiency).epsilon(1e-12));
  }
}

TEST_CASE("modulation outside the operating range is rejected") {
  CHECK_THROWS_AS(chp_evaluate({}, 0.3, 40.0), ContractViolation);
  CHECK_THROWS_AS(chp_evaluate({}, 1.01, 40.0), ContractViolation);
  CHECK_THROWS_AS(boiler_evaluate({}, 0.05, 40.0), ContractViolation);
  CHECK(boiler_evaluate({}, 0.1, 40.0).p_gas == doctest::Approx(110.0));
}

TEST_CASE("property: condensing boiler is more efficient at a cold return") {
  for (int i = 0; i <= 18; ++i) {
    const double fm = 0.1 + 0.05 * i;
    CHECK(boiler_evaluate({}, fm, 30.0).efficiency > boiler_evaluate({}, fm, 70.0).efficiency);
  }
}

TEST_CASE("property: chp heat and gas rise with modulation, utilisation is plausible") {
  const ChpParams p;
  for (double t = 30.0; t <= 80.0; t += 5.0) {
    ChpOutput prev = chp_evaluate(p, p.fm_min, t);
    for (int i = 1; i <= 60; ++i) {
      const ChpOutput cur = chp_evaluate(p, p.fm_min + (1.0 - p.fm_min) * i / 60.0, t);
      CHECK(cur.p_heat >= prev.p_heat);
      CHECK(cur.p_gas >= prev.p_gas);
      const double util = (cur.p_el + cur.p_heat) / cur.p_gas;
      CHECK(util >= 0.80);
      CHECK(util <= 1.00);
      prev = cur;
    }
  }
}

TEST_CASE("boiler meets a heat target") {
  const BoilerParams p;
  const BoilerOperation mid = boiler_for_heat(p, 500.0, 40.0);
  CHECK(mid.output.p_out == doctest::Approx(500.0).epsilon(1e-6));
  CHECK(mid.duty == 1.0);
  // Below the minimum the boiler cycles at fm_min.
  const BoilerOperation low = boiler_for_heat(p, 20.0, 40.0);
  CHECK(low.fm == p.fm_min);
  CHECK(low.duty < 1.0);
  CHECK(low.output.p_out == doctest::Approx(20.0));
}

TEST_CASE("reference dispatch") {
  const PlantConfig cfg;
  PlantState s;

  SUBCASE("demand above chp capacity brings in the boiler") {
    const PlantStep r = reference_dispatch(cfg, s, 900.0, 0.0, 40.0, 60.0);
    CHECK(r.state.chp_on);
    CHECK(r.state.chp_fm == doctest::Approx(1.0));
    CHECK(r.boiler.p_out > 0.0);
    CHECK(r.heat_kw == doctest::Approx(900.0).epsilon(1e-6));
  }
  SUBCASE("low demand runs the boiler alone") {
    s.chp_on = true;
    s.chp_fm = 0.5;
    s.since_switch_s = 3600.0;
    const PlantStep r = reference_dispatch(cfg, s, 100.0, 0.0, 40.0, 60.0);
    CHECK_FALSE(r.state.chp_on);
    CHECK(r.boiler.p_out == doctest::Approx(100.0).epsilon(1e-6));
  }
  SUBCASE("minimum on time holds the chp at its minimum") {
    s.chp_on = true;
    s.chp_fm = 1.0;
    s.since_switch_s = 300.0;
    const PlantStep r = reference_dispatch(cfg, s, 0.0, 0.0, 40.0, 60.0);
    CHECK(r.state.chp_on);
    CHECK(r.state.chp_fm == doctest::Approx(cfg.chp.fm_min));
  }
}

TEST_CASE("heating curve") {
  const PlantConfig cfg;
  CHECK(cfg.curve.supply(-8.0) == doctest::Approx(70.0));
  CHECK(cfg.curve.supply(-20.0) == doctest::Approx(70.0));
  CHECK(cfg.curve.supply(15.0) == doctest::Approx(40.0));
  CHECK(cfg.curve.supply(3.5) == doctest::Approx(55.0));
}
