#include "physq/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace physq {

namespace {
std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: line " + std::to_string(lineno) + ": empty key");
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

bool ConfigFile::has(const std::string& k) const { return values_.count(k) > 0; }

std::string ConfigFile::get_string(const std::string& k, const std::string& fallback) const {
  const auto it = values_.find(k);
  return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& k, double fallback) const {
  const auto it = values_.find(k);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + k + "': not a number: '" + it->second + "'");
  }
}

long ConfigFile::get_long(const std::string& k, long fallback) const {
  const auto it = values_.find(k);
  if (it == values_.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + k + "': not an integer: '" + it->second + "'");
  }
}

std::vector<int> ConfigFile::get_int_list(const std::string& k,
                                          const std::vector<int>& fallback) const {
  const auto it = values_.find(k);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  std::string item;
  std::istringstream ss(it->second);
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(trim(item)));
    } catch (const std::exception&) {
      throw std::runtime_error("config: key '" + k + "': not an integer list: '" + it->second + "'");
    }
  }
  if (out.empty())
    throw std::runtime_error("config: key '" + k + "': empty list");
  return out;
}

}  // namespace physq
