#pragma once

#include <map>
#include <string>
#include <vector>

namespace physq {

/// Flat-sectioned key-value configuration file:
///
///   [building]
///   heater_power_max_kw = 10.0
///
/// Keys are addressed as "section.key". Unknown sections/keys are preserved.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& dotted_key) const;
  std::string get_string(const std::string& dotted_key, const std::string& fallback) const;
  double get_double(const std::string& dotted_key, double fallback) const;
  long get_long(const std::string& dotted_key, long fallback) const;
  std::vector<int> get_int_list(const std::string& dotted_key,
                                const std::vector<int>& fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace physq
