// Writes the bundled synthetic weather and price years.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dhflex/profiles.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic weather and spot price years"};
  std::string dir = "data";
  std::uint64_t seed = 2024;
  app.add_option("--dir", dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  CLI11_PARSE(app, argc, argv);
  using namespace dhflex::profiles;
  const Weather w = synthesize_weather(seed);
  write_weather(dir + "/weather.csv", w);
  write_prices(dir + "/prices.csv", synthesize_prices(seed));
  std::cout << "representative week " << select_representative_week(w) << ", season mean "
            << season_mean(w) << " C\n";
  return 0;
}
