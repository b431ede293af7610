#include "dhflex/profiles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "dhflex/csv.hpp"
#include "dhflex/errors.hpp"

namespace dhflex::profiles {

namespace {

constexpr int kHours = kDaysPerYear * 24;
constexpr double kHour = 3600.0;

void check_timestamps(const std::vector<double>& t, const std::string& path) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    // Data rows start on file line 2.
    const long line = static_cast<long>(i) + 2;
    if (!(t[i] > t[i - 1])) {
      throw IngestError(path + ": timestamps not increasing at line " + std::to_string(line), line);
    }
    if (t[i] - t[i - 1] > kHour + 1e-6) {
      throw IngestError(path + ": gap above one hour at line " + std::to_string(line), line);
    }
  }
}

std::vector<double> require(const csv::Table& t, const std::string& name, const std::string& path) {
  const int c = t.column(name);
  if (c < 0) throw IngestError(path + ": missing column " + name, 1);
  return t.columns[c];
}

double day_of(double t) { return std::floor(t / kDay); }

bool in_season(int day, SeasonBounds s) {
  const int d = ((day % kDaysPerYear) + kDaysPerYear) % kDaysPerYear;
  if (s.start_day <= s.end_day) return d >= s.start_day && d < s.end_day;
  return d >= s.start_day || d < s.end_day;
}

// Appliance load shape, kW at each hour, mean 0.3 kW.
constexpr std::array<double, 24> kElectricShape = {
    0.16, 0.15, 0.15, 0.15, 0.15, 0.17, 0.26, 0.38, 0.34, 0.24, 0.22, 0.24,
    0.28, 0.24, 0.22, 0.23, 0.28, 0.40, 0.55, 0.58, 0.52, 0.44, 0.32, 0.22};

}  // namespace

Weather read_weather(const std::string& path) {
  const csv::Table t = csv::read(path);
  Weather w;
  w.time_s = require(t, "time_s", path);
  w.ambient = require(t, "ambient_c", path);
  w.wind = require(t, "wind_ms", path);
  w.irradiance = require(t, "irradiance_wm2", path);
  check_timestamps(w.time_s, path);
  return w;
}

Prices read_prices(const std::string& path) {
  const csv::Table t = csv::read(path);
  Prices p;
  p.time_s = require(t, "time_s", path);
  p.price = require(t, "price_eur_mwh", path);
  check_timestamps(p.time_s, path);
  return p;
}

void write_weather(const std::string& path, const Weather& w) {
  csv::Writer out(path, {"time_s", "ambient_c", "wind_ms", "irradiance_wm2"});
  for (std::size_t i = 0; i < w.time_s.size(); ++i) {
    out.row({w.time_s[i], std::round(w.ambient[i] * 100) / 100, std::round(w.wind[i] * 100) / 100,
             std::round(w.irradiance[i] * 10) / 10});
  }
}

void write_prices(const std::string& path, const Prices& p) {
  csv::Writer out(path, {"time_s", "price_eur_mwh"});
  for (std::size_t i = 0; i < p.time_s.size(); ++i) {
    out.row({p.time_s[i], std::round(p.price[i] * 100) / 100});
  }
}

Weather synthesize_weather(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> anomaly(kDaysPerYear + 1), cloud(kDaysPerYear + 1), gust(kDaysPerYear + 1);
  double a = 0.0, c = 0.0, g = 0.0;
  for (int d = 0; d <= kDaysPerYear; ++d) {
    a = 0.75 * a + 2.2 * unit(rng);
    c = 0.6 * c + 0.8 * unit(rng);
    g = 0.65 * g + 0.75 * unit(rng);
    anomaly[d] = a;
    cloud[d] = 1.0 / (1.0 + std::exp(-(c + 0.8)));  // mostly overcast
    gust[d] = g;
  }
  Weather w;
  constexpr double kLatitude = 51.0 * M_PI / 180.0;
  for (int h = 0; h < kHours; ++h) {
    const double t = h * kHour;
    const double day = t / kDay;
    const int d = static_cast<int>(day);
    const double frac = day - d;
    const double hour = frac * 24.0;
    const double season = std::cos(2.0 * M_PI * (day - 20.0) / kDaysPerYear);  // 1 in winter
    const double anom = anomaly[d] + (anomaly[d + 1] - anomaly[d]) * frac;
    const double clear = 1.0 - cloud[d];
    const double diurnal = (2.0 + 2.5 * (1.0 - season) * 0.5 + 2.0 * clear) *
                           std::cos(2.0 * M_PI * (hour - 15.0) / 24.0);
    w.time_s.push_back(t);
    w.ambient.push_back(10.5 - 7.0 * season + anom + diurnal + 0.4 * unit(rng));

    const double decl = 23.45 * M_PI / 180.0 * std::sin(2.0 * M_PI * (284.0 + day) / kDaysPerYear);
    const double omega = (hour - 12.0) * 15.0 * M_PI / 180.0;
    const double sin_elev = std::sin(kLatitude) * std::sin(decl) +
                            std::cos(kLatitude) * std::cos(decl) * std::cos(omega);
    const double clear_sky = sin_elev > 0.0 ? 950.0 * std::pow(sin_elev, 1.15) : 0.0;
    w.irradiance.push_back(clear_sky * (1.0 - 0.75 * std::pow(cloud[d], 3.0)));

    const double mean_wind = 4.2 + 0.8 * season + 1.4 * gust[d];
    const double wind = mean_wind * (1.0 + 0.15 * std::sin(2.0 * M_PI * (hour - 9.0) / 24.0)) +
                        0.5 * unit(rng);
    w.wind.push_back(std::max(0.3, wind));
  }

  // Anchor the heating season at 6.1 C and make week 46 its representative
  // week, as in a typical-year record for a Belgian site.
  const SeasonBounds bounds;
  const double week0 = week_start_s(46), week1 = week0 + 7.0 * kDay;
  const double taper = 12.0 * kHour;
  std::vector<double> bump(kHours, 0.0);
  std::size_t season_hours = 0;
  double bump_in_season = 0.0;
  for (int h = 0; h < kHours; ++h) {
    const double t = h * kHour;
    double v = 0.0;
    if (t >= week0 && t < week1) v = 1.0;
    else if (t >= week0 - taper && t < week0) v = (t - (week0 - taper)) / taper;
    else if (t >= week1 && t < week1 + taper) v = 1.0 - (t - week1) / taper;
    bump[h] = v;
    if (in_season(static_cast<int>(day_of(t)), bounds)) {
      ++season_hours;
      bump_in_season += v;
    }
  }
  const double k = bump_in_season / static_cast<double>(season_hours);
  const double b = (season_mean(w, bounds) - mean_over(w.time_s, w.ambient, week0, week1)) / (1.0 - k);
  for (int h = 0; h < kHours; ++h) w.ambient[h] += b * bump[h];
  const double shift = 6.1 - season_mean(w, bounds);
  for (double& v : w.ambient) v += shift;
  return w;
}

Prices synthesize_prices(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  // Weekday hourly shape, EUR/MWh around the daily level.
  constexpr std::array<double, 24> shape = {-10, -12, -13, -13, -12, -8, 0, 9, 14, 13, 10, 6,
                                            3,   1,   0,   1,   5,   13, 17, 15, 9, 4, -2, -6};
  Prices p;
  double level = 0.0, noise = 0.0;
  for (int h = 0; h < kHours; ++h) {
    const double t = h * kHour;
    const int day = h / 24;
    const int hour = h % 24;
    if (hour == 0) level = 0.7 * level + 4.0 * unit(rng);
    noise = 0.85 * noise + 3.0 * unit(rng);
    const bool weekend = (day % 7) >= 5;
    const double season = 4.0 * std::cos(2.0 * M_PI * (day - 15.0) / kDaysPerYear);
    double price = 44.0 + season + level + noise + (weekend ? 0.5 * shape[hour] - 6.0 : shape[hour]);
    if (shape[hour] >= 9 && uni(rng) < 0.02) price += 20.0 + 40.0 * uni(rng);
    if (hour < 6 && uni(rng) < 0.004) price -= 10.0 + 25.0 * uni(rng);
    p.time_s.push_back(t);
    p.price.push_back(price);
  }
  return p;
}

std::vector<double> interpolate(const std::vector<double>& time_s, const std::vector<double>& value,
                                double t0, double dt, int n) {
  if (time_s.size() < 2 || time_s.size() != value.size()) {
    throw IngestError("series needs at least two samples", 0);
  }
  if (t0 < time_s.front() || t0 + (n - 1) * dt > time_s.back() + 1e-9) {
    throw IngestError("series does not cover the requested window", 0);
  }
  std::vector<double> out(n);
  std::size_t j = 0;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * dt;
    while (j + 2 < time_s.size() && time_s[j + 1] <= t) ++j;
    const double w = (t - time_s[j]) / (time_s[j + 1] - time_s[j]);
    out[i] = value[j] + std::clamp(w, 0.0, 1.0) * (value[j + 1] - value[j]);
  }
  return out;
}

double week_start_s(int week) { return (week - 1) * 7.0 * kDay; }

double mean_over(const std::vector<double>& time_s, const std::vector<double>& value, double t0,
                 double t1) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < time_s.size(); ++i) {
    if (time_s[i] >= t0 && time_s[i] < t1) {
      sum += value[i];
      ++n;
    }
  }
  if (n == 0) throw IngestError("no samples in averaging window", 0);
  return sum / static_cast<double>(n);
}

double season_mean(const Weather& w, SeasonBounds season) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < w.time_s.size(); ++i) {
    if (in_season(static_cast<int>(day_of(w.time_s[i])), season)) {
      sum += w.ambient[i];
      ++n;
    }
  }
  if (n == 0) throw IngestError("weather series does not cover the heating season", 0);
  return sum / static_cast<double>(n);
}

std::vector<int> season_weeks(SeasonBounds season) {
  std::vector<int> weeks;
  for (int week = 1; 7 * week <= kDaysPerYear; ++week) {
    bool inside = true;
    for (int d = 7 * (week - 1); d < 7 * week; ++d) inside = inside && in_season(d, season);
    if (inside) weeks.push_back(week);
  }
  return weeks;
}

int select_representative_week(const Weather& w, SeasonBounds season) {
  const double target = season_mean(w, season);
  int best = -1;
  double best_gap = 0.0;
  for (int week : season_weeks(season)) {
    const double t0 = week_start_s(week);
    const double gap = std::abs(mean_over(w.time_s, w.ambient, t0, t0 + 7.0 * kDay) - target);
    if (best < 0 || gap < best_gap) {
      best = week;
      best_gap = gap;
    }
  }
  return best;
}

std::vector<double> trailing_mean(const std::vector<double>& samples, double dt, double window_s) {
  const std::size_t width = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(window_s / dt)));
  std::vector<double> out(samples.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sum += samples[i];
    if (i >= width) sum -= samples[i - width];
    out[i] = sum / static_cast<double>(std::min(i + 1, width));
  }
  return out;
}

std::vector<DhwEvent> dhw_events(int day_begin, int day_end, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::poisson_distribution<int> small_taps(6.0);
  // Energy of a draw of `litres` heated from the mains to 45 C, kWh.
  auto energy = [](double litres) { return litres * 4.18 * 35.0 / 3600.0; };
  std::vector<DhwEvent> events;
  auto add = [&events, &energy](double start_s, double litres, double power_kw) {
    events.push_back({start_s, energy(litres) * 3600.0 / power_kw, power_kw});
  };
  for (int d = day_begin; d < day_end; ++d) {
    const double base = d * kDay;
    if (uni(rng) < 0.9) add(base + std::clamp(7.0 + 0.75 * unit(rng), 5.0, 10.0) * kHour, 50.0, 20.0);
    if (uni(rng) < 0.7) add(base + std::clamp(20.0 + 1.5 * unit(rng), 17.0, 23.5) * kHour, 50.0, 20.0);
    add(base + (11.0 + 2.0 * uni(rng)) * kHour, 15.0, 15.0);
    add(base + (18.0 + 2.0 * uni(rng)) * kHour, 15.0, 15.0);
    const int taps = small_taps(rng);
    for (int i = 0; i < taps; ++i) add(base + (6.0 + 17.0 * uni(rng)) * kHour, 3.0, 8.0);
  }
  std::sort(events.begin(), events.end(),
            [](const DhwEvent& x, const DhwEvent& y) { return x.start_s < y.start_s; });
  return events;
}

double dhw_power(const std::vector<DhwEvent>& events, double t, double dt) {
  constexpr double kLongest = 600.0;
  auto it = std::lower_bound(events.begin(), events.end(), t - kLongest,
                             [](const DhwEvent& e, double v) { return e.start_s < v; });
  double energy = 0.0;
  for (; it != events.end() && it->start_s < t + dt; ++it) {
    const double overlap = std::min(t + dt, it->start_s + it->duration_s) - std::max(t, it->start_s);
    if (overlap > 0.0) energy += overlap * it->power_kw;
  }
  return energy / dt;
}

double electric_gain(double t, double mean_kw) {
  const double hour = std::fmod(t, kDay) / kHour;
  const int h0 = static_cast<int>(hour) % 24;
  const int h1 = (h0 + 1) % 24;
  const double w = hour - std::floor(hour);
  const double v = kElectricShape[h0] + w * (kElectricShape[h1] - kElectricShape[h0]);
  double mean = 0.0;
  for (double s : kElectricShape) mean += s;
  mean /= 24.0;
  return v * mean_kw / mean;
}

}  // namespace dhflex::profiles
