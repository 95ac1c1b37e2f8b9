#pragma once

#include <fstream>
#include <map>
#include <string>

#include "netmarket/errors.hpp"

namespace netmarket {

/// Parses a flat `key = value` text file: one pair per line, '#' starts a
/// comment, blank lines ignored.  Values stay strings; callers convert.
/// Repeated keys keep the last occurrence.
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw config_error("cannot open config file '" + path + "'");
  }
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config file '" + path + "' line " +
                         std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw config_error("config file '" + path + "' line " +
                         std::to_string(line_no) + ": empty key or value");
    }
    values[key] = value;
  }
  return values;
}

/// Converts a config value to double with full error context.
inline double config_double(const std::map<std::string, std::string>& cfg,
                            const std::string& key, double fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse '" + it->second +
                       "' as a number");
  }
}

/// Converts a config value to a nonnegative integer.
inline long long config_int(const std::map<std::string, std::string>& cfg,
                            const std::string& key, long long fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': cannot parse '" + it->second +
                       "' as an integer");
  }
}

}  // namespace netmarket
