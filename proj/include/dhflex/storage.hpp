#pragma once

#include <vector>

namespace dhflex::storage {

enum class Variant { open, coil, tank_in_tank, central };

const char* variant_name(Variant v);

struct Geometry {
  Variant variant = Variant::open;
  double volume_l = 500.0;   // main stack; for tank-in-tank the outer (network side) shell
  int layers = 15;
  double height_m = 1.6;
  double loss_ua_w = 2.5;    // W/K to the surroundings
  double hx_ua_kw = 0.0;     // coil or inner-wall exchanger
  double inner_volume_l = 0.0;  // tank-in-tank only
  int coil_layers = 0;          // coil only: layers spanned from the bottom
  double conductivity = 0.6;    // W/(m K), water plus wall
};

Geometry open_tank();
Geometry coil_tank();
Geometry tank_in_tank();
// Central vessel of the given volume; losses scale with surface area from a
// reference local tank of `reference_volume_l`.
Geometry central_tank(double volume_l, double reference_volume_l, double reference_ua_w = 2.5);

double total_volume_l(const Geometry& g);

// Layer temperatures bottom to top. `inner` is used by tank-in-tank only.
struct State {
  std::vector<double> t;
  std::vector<double> inner;
};

State uniform_state(const Geometry& g, double temp);

struct Stream {
  double flow = 0.0;  // kg/s
  double temp = 0.0;  // C, inlet temperature of the stream
};

struct StepResult {
  State state;
  double charge_out_temp = 0.0;     // mean leaving temperature of the charge stream
  double discharge_out_temp = 0.0;  // mean leaving temperature of the discharge stream
  double charge_kw = 0.0;           // heat given to the tank by the charge stream
  double discharge_kw = 0.0;        // heat taken from the tank by the discharge stream
  double loss_kw = 0.0;
};

// Advances one step. The charge stream enters at the top and leaves at the
// bottom (through the coil for coil tanks, through the outer shell for
// tank-in-tank). The discharge stream leaves at the top and returns at the
// bottom with `discharge.temp` (for tank-in-tank it passes the inner tank).
// Substeps keep every explicit update within its stability bound.
StepResult tank_step(const Geometry& g, const State& s, Stream charge, Stream discharge,
                     double ambient, double dt);

// Resolves temperature inversions by merging adjacent layers into mass-weighted
// pools until the stack is non-decreasing upwards. Conserves energy.
void mix_inversions(std::vector<double>& temps, const std::vector<double>& masses);

double energy_kj(const Geometry& g, const State& s);
double mean_temperature(const Geometry& g, const State& s);
double heat_capacity_kj_per_k(const Geometry& g);
double top_temperature(const Geometry& g, const State& s);
double state_of_charge(const Geometry& g, const State& s, double t_min, double t_max);

}  // namespace dhflex::storage
