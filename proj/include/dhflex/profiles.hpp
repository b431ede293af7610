#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dhflex::profiles {

inline constexpr double kDay = 86400.0;
inline constexpr int kDaysPerYear = 365;

// Hourly weather, time in seconds from 1 January 00:00.
struct Weather {
  std::vector<double> time_s;
  std::vector<double> ambient;     // C
  std::vector<double> wind;        // m/s
  std::vector<double> irradiance;  // W/m2, global horizontal
};

struct Prices {
  std::vector<double> time_s;
  std::vector<double> price;  // EUR/MWh
};

// Throws IngestError on missing columns, gaps (step above 1 h) or
// non-increasing timestamps, naming the row.
Weather read_weather(const std::string& path);
Prices read_prices(const std::string& path);
void write_weather(const std::string& path, const Weather& w);
void write_prices(const std::string& path, const Prices& p);

// Seeded year-long stand-ins: a temperate maritime climate and a spot market
// with morning/evening peaks, weekend discount, mean-reverting noise and spikes.
Weather synthesize_weather(std::uint64_t seed);
Prices synthesize_prices(std::uint64_t seed);

// Linear interpolation of (time, value) at t0 + i dt, i < n.
std::vector<double> interpolate(const std::vector<double>& time_s, const std::vector<double>& value,
                                double t0, double dt, int n);

// Calendar weeks are consecutive 7-day blocks from 1 January, numbered from 1.
double week_start_s(int week);
double mean_over(const std::vector<double>& time_s, const std::vector<double>& value, double t0,
                 double t1);
struct SeasonBounds {
  int start_day = 273;  // 1 October, 0-based day of a non-leap year
  int end_day = 120;    // 1 May (exclusive)
};
double season_mean(const Weather& w, SeasonBounds season = {});
// Weeks lying completely inside the season.
std::vector<int> season_weeks(SeasonBounds season = {});
// argmin over season weeks of |week mean - season mean|; earliest week on ties.
int select_representative_week(const Weather& w, SeasonBounds season = {});

// Trailing 24 h mean of a sampled series; the first samples average what is available.
std::vector<double> trailing_mean(const std::vector<double>& samples, double dt, double window_s);

// Domestic hot water: per-building power draws on a one-minute grid.
struct DhwEvent {
  double start_s;
  double duration_s;
  double power_kw;
};
std::vector<DhwEvent> dhw_events(int day_begin, int day_end, std::uint64_t seed);
// Mean power over [t, t + dt) of a sorted event list.
double dhw_power(const std::vector<DhwEvent>& events, double t, double dt);

// Internal gains from appliances, kW, diurnal pattern with mean `mean_kw`.
double electric_gain(double t, double mean_kw = 0.3);
// Solar gain through glazing, kW: peak_kw at 1000 W/m2.
inline double solar_gain(double irradiance, double peak_kw = 2.0) { return peak_kw * irradiance / 1000.0; }

}  // namespace dhflex::profiles
