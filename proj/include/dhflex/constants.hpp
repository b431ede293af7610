#pragma once

#include <algorithm>

namespace dhflex {

inline constexpr double kWaterCp = 4.18;          // kJ/(kg K)
inline constexpr double kWaterDensity = 985.0;    // kg/m3, around 55 C
inline constexpr double kWaterViscosity = 0.5e-6; // m2/s, kinematic, around 55 C
inline constexpr double kGroundTemperature = 10.0;  // C, buried-pipe surroundings
inline constexpr double kColdMainsTemperature = 10.0;
inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kControlStep = 900.0;     // s

// Supply temperature as a function of the 24 h mean outdoor temperature.
// Linear between the two anchor points, flat outside them.
struct HeatingCurve {
  double cold_outdoor = -8.0;
  double cold_supply = 70.0;
  double warm_outdoor = 15.0;
  double warm_supply = 40.0;

  double supply(double outdoor_mean) const {
    const double t = std::clamp(outdoor_mean, cold_outdoor, warm_outdoor);
    const double w = (t - cold_outdoor) / (warm_outdoor - cold_outdoor);
    return cold_supply + w * (warm_supply - cold_supply);
  }
};

}  // namespace dhflex
