#include "physq/series.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "physq/rng.hpp"

namespace physq {

PriceSeries generate_square_prices(int days, std::uint64_t seed,
                                   const SquareWaveParams& p) {
  if (days < 1) throw std::invalid_argument("generate_square_prices: days < 1");
  Rng rng(mix_seed(seed, 0x5172));
  PriceSeries out;
  out.values.reserve(static_cast<std::size_t>(days) * 24);
  const int span = p.onset_max - p.onset_min + 1;
  for (int d = 0; d < days; ++d) {
    const int onset = p.onset_min + static_cast<int>(rng.uniform_int(span));
    for (int h = 0; h < 24; ++h) {
      const bool peak = h >= onset && h < onset + p.peak_hours;
      out.values.push_back(peak ? p.lambda_high : p.lambda_low);
    }
  }
  return out;
}

PriceSeries generate_belpex_like_prices(int days, std::uint64_t seed) {
  if (days < 1) throw std::invalid_argument("generate_belpex_like_prices: days < 1");
  Rng rng(mix_seed(seed, 0xbe19));
  PriceSeries out;
  out.values.reserve(static_cast<std::size_t>(days) * 24);
  for (int d = 0; d < days; ++d) {
    const double scale = rng.uniform(0.75, 1.35);
    const double morning_peak = rng.uniform(7.0, 10.0);
    const double evening_peak = rng.uniform(17.5, 20.5);
    for (int h = 0; h < 24; ++h) {
      const double hh = h + 0.5;
      double v = 55.0;
      v += 55.0 * std::exp(-0.5 * std::pow((hh - morning_peak) / 1.7, 2));
      v += 75.0 * std::exp(-0.5 * std::pow((hh - evening_peak) / 1.9, 2));
      v -= 25.0 * std::exp(-0.5 * std::pow((hh - 3.5) / 2.2, 2));
      v = scale * v + rng.normal(0.0, 5.0);
      out.values.push_back(std::max(5.0, v));
    }
  }
  return out;
}

WeatherSeries generate_weather(int days, std::uint64_t seed) {
  if (days < 1) throw std::invalid_argument("generate_weather: days < 1");
  Rng rng(mix_seed(seed, 0x7ea1));
  WeatherSeries out;
  out.values.reserve(static_cast<std::size_t>(days) * 24);
  for (int d = 0; d < days; ++d) {
    for (int h = 0; h < 24; ++h) {
      // Coldest around 05:00, warmest around 17:00.
      const double base = 5.0 + 5.0 * std::cos(2.0 * M_PI * (h - 17.0) / 24.0);
      out.values.push_back(base + rng.normal(0.0, 1.0));
    }
  }
  return out;
}

namespace {

std::vector<double> load_two_column_csv(const std::string& path,
                                        const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  // Tolerate trailing CR from Windows-edited files.
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header)
    throw std::runtime_error(path + ": line 1: expected header '" + expected_header + "', got '" + line + "'");
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": missing comma");
    const std::string val_str = line.substr(comma + 1);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(val_str, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": unparsable value '" + val_str + "'");
    }
    while (pos < val_str.size() && std::isspace(static_cast<unsigned char>(val_str[pos]))) ++pos;
    if (pos != val_str.size())
      throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": trailing junk in value '" + val_str + "'");
    if (!std::isfinite(v))
      throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": non-finite value");
    values.push_back(v);
  }
  if (values.empty() || values.size() % 24 != 0)
    throw std::runtime_error(path + ": length " + std::to_string(values.size()) + " is not a positive multiple of 24");
  return values;
}

}  // namespace

PriceSeries load_price_csv(const std::string& path) {
  PriceSeries s;
  s.values = load_two_column_csv(path, "hour,price_eur_mwh");
  return s;
}

WeatherSeries load_weather_csv(const std::string& path) {
  WeatherSeries s;
  s.values = load_two_column_csv(path, "hour,t_ambient_c");
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (s.values[i] < -20.0 || s.values[i] > 45.0)
      throw std::runtime_error(path + ": hour " + std::to_string(i) + ": temperature " + std::to_string(s.values[i]) + " outside [-20, 45]");
  }
  return s;
}

namespace {

void save_two_column_csv(const std::vector<double>& values,
                         const std::string& header, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << header << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i)
    out << i << "," << values[i] << "\n";
}

}  // namespace

void save_price_csv(const PriceSeries& s, const std::string& path) {
  save_two_column_csv(s.values, "hour,price_eur_mwh", path);
}

void save_weather_csv(const WeatherSeries& s, const std::string& path) {
  save_two_column_csv(s.values, "hour,t_ambient_c", path);
}

}  // namespace physq
