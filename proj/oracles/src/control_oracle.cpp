#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dhflex_oracles/oracles.hpp"

namespace dhflex::oracle {

dispatch::Clearing scan_clearing(const std::vector<dispatch::Bid>& bids, double u) {
  std::vector<double> candidates = {0.0};
  for (const dispatch::Bid& b : bids) {
    if (b.corner > 0.0) candidates.push_back(b.corner);
  }
  std::sort(candidates.begin(), candidates.end());
  dispatch::Clearing best{0.0, 0.0};
  double best_gap = std::numeric_limits<double>::infinity();
  for (double p : candidates) {
    double sum = 0.0;
    for (const dispatch::Bid& b : bids) {
      if (p < b.corner) sum += b.level;
    }
    const double gap = std::abs(sum - u);
    if (gap < best_gap) {
      best = {p, sum};
      best_gap = gap;
    }
  }
  return best;
}

ToySolution enumerate_toy(const ToyInstance& toy) {
  const int n = toy.horizon;
  ToySolution best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<int> lv(n, 0);
  int combos = 1;
  for (int t = 0; t < n; ++t) combos *= toy.levels;
  for (int c = 0; c < combos; ++c) {
    int rest = c;
    for (int t = 0; t < n; ++t) {
      lv[t] = rest % toy.levels;
      rest /= toy.levels;
    }
    double cost = 0.0;
    double violation = 0.0;
    int temp = toy.t0;
    for (int t = 0; t < n; ++t) {
      cost += toy.price[t] * lv[t] * toy.q * toy.dt_h / 1000.0;
      if (t + 1 < n) cost += toy.alpha / 1000.0 * std::abs(lv[t + 1] - lv[t]) * toy.q;
      temp += lv[t] - toy.demand[t];
      violation += std::max(0, toy.t_min - temp) + std::max(0, temp - toy.t_max);
    }
    cost += toy.slack_penalty * violation;
    if (cost < best.objective) {
      best.objective = cost;
      best.levels = lv;
      best.feasible = violation == 0.0;
    }
  }
  return best;
}

ToyInstance random_toy(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (;;) {
    ToyInstance toy;
    toy.horizon = std::uniform_int_distribution<int>(2, 3)(rng);
    // Step prices separated by more than 4 alpha / dt: moving heat between two
    // steps then always pays more than the ramp terms it can change, so the
    // optimum follows price order and stays on the level grid.
    const double gap = 4.0 * toy.alpha / toy.dt_h + 20.0;
    std::vector<int> order(toy.horizon);
    for (int t = 0; t < toy.horizon; ++t) order[t] = t;
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> jitter(0.0, 10.0);
    for (int t = 0; t < toy.horizon; ++t) toy.price.push_back(10.0 + gap * order[t] + jitter(rng));
    std::uniform_int_distribution<int> dem(0, toy.levels - 1), band(0, 5);
    for (int t = 0; t < toy.horizon; ++t) toy.demand.push_back(dem(rng));
    toy.t_min = toy.t0 - band(rng);
    toy.t_max = toy.t0 + band(rng);
    if (enumerate_toy(toy).feasible) return toy;
  }
}

planner::Problem toy_problem(const ToyInstance& toy) {
  planner::Problem pr;
  pr.horizon = toy.horizon;
  pr.dt_h = toy.dt_h;
  pr.alpha = toy.alpha;
  pr.slack_penalty = toy.slack_penalty;
  pr.chp_cost = toy.price;
  pr.boiler_cost = toy.price;
  pr.chp_max_heat = (toy.levels - 1) * toy.q;
  pr.boiler_max_heat = 0.0;
  planner::TankBlock tank;
  tank.model.c_s = toy.q * toy.dt_h;
  tank.model.u_s = 0.0;
  tank.model.gamma_s = 1.0;
  tank.t_s0 = toy.t0;
  tank.t_min = toy.t_min;
  tank.t_max = toy.t_max;
  tank.t_out.assign(toy.horizon, 0.0);
  for (int d : toy.demand) tank.demand.push_back(d * toy.q);
  pr.tank = tank;
  return pr;
}

std::vector<fit::BuildingSample> synthetic_building_trace(const fit::AggregateBuildingModel& m,
                                                          int samples, double dt_h,
                                                          std::uint64_t seed, double t_m0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<fit::BuildingSample> out;
  double t_a = 20.0, t_m = t_m0;
  double p_b = 0.0;
  int hold = 0;
  for (int k = 0; k < samples; ++k) {
    const double hour = k * dt_h;
    if (hold-- <= 0) {
      // Random heating levels held for 1 to 8 steps.
      p_b = u01(rng) < 0.3 ? 0.0 : 15.0 * u01(rng);
      hold = 1 + static_cast<int>(8 * u01(rng));
    }
    fit::BuildingSample s;
    s.t_a = t_a;
    s.t_out = 5.0 + 4.0 * std::sin(2.0 * M_PI * hour / 24.0) + 2.0 * std::sin(2.0 * M_PI * hour / 61.0);
    s.p_b = p_b;
    s.q_a = 0.3 + 0.4 * u01(rng);
    s.q_m = std::max(0.0, 2.0 * std::sin(2.0 * M_PI * (hour - 6.0) / 24.0)) * (0.5 + 0.5 * u01(rng));
    out.push_back(s);
    fit::building_model_step(m, t_a, t_m, s.t_out, s.p_b, s.q_a, s.q_m, dt_h);
  }
  return out;
}

std::vector<fit::TankSample> synthetic_tank_trace(const fit::AggregateTankModel& m, int samples,
                                                  double dt_h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<fit::TankSample> out;
  double t_s = 60.0;
  for (int k = 0; k < samples; ++k) {
    fit::TankSample s;
    s.t_s = t_s;
    s.t_out = 15.0 + 3.0 * u01(rng);
    // Charge when cool, rest when hot, so the state stays in a sane band.
    s.p_w = t_s < 55.0 ? 20.0 * (0.5 + 0.5 * u01(rng)) : (u01(rng) < 0.3 ? 10.0 * u01(rng) : 0.0);
    s.d = 6.0 * u01(rng);
    out.push_back(s);
    t_s = fit::tank_model_step(m, t_s, s.t_out, s.p_w, s.d, dt_h);
  }
  return out;
}

}  // namespace dhflex::oracle
