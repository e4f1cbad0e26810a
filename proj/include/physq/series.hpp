#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace physq {

/// Hourly day-ahead electricity prices in EUR/MWh. Length is always a
/// multiple of 24.
struct PriceSeries {
  std::vector<double> values;
  int start_day = 0;

  int days() const { return static_cast<int>(values.size()) / 24; }
  double at(int day, int hour) const { return values.at(day * 24 + hour); }
};

/// Hourly outside air temperatures in degC, paired one-to-one with a
/// PriceSeries.
struct WeatherSeries {
  std::vector<double> values;

  int days() const { return static_cast<int>(values.size()) / 24; }
  double at(int day, int hour) const { return values.at(day * 24 + hour); }
};

struct SquareWaveParams {
  double lambda_low = 30.0;
  double lambda_high = 120.0;
  int peak_hours = 8;
  int onset_min = 6;   // earliest peak onset hour
  int onset_max = 16;  // latest peak onset hour (inclusive)
};

// Two-level square wave, one peak per day, peak onset shifted
// pseudo-randomly per day. Deterministic given (days, seed).
PriceSeries generate_square_prices(int days, std::uint64_t seed,
                                   const SquareWaveParams& p = {});

// Synthetic stand-in for day-ahead market prices: smooth double-peaked
// daily profile with per-day level scaling and hourly noise.
PriceSeries generate_belpex_like_prices(int days, std::uint64_t seed);

// Daily sinusoid (mean 5 degC, amplitude 5 degC) with seeded Gaussian
// perturbation, sigma = 1 degC.
WeatherSeries generate_weather(int days, std::uint64_t seed);

// CSV with header `hour,price_eur_mwh`, one row per hour. Malformed rows are
// reported with their line number; length must be a multiple of 24.
PriceSeries load_price_csv(const std::string& path);

// CSV with header `hour,t_ambient_c`; values must lie within [-20, 45] degC.
WeatherSeries load_weather_csv(const std::string& path);

void save_price_csv(const PriceSeries& s, const std::string& path);
void save_weather_csv(const WeatherSeries& s, const std::string& path);

}  // namespace physq
