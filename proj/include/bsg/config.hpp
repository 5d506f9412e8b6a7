#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bsg/network.hpp"

namespace bsg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain-text key = value configuration. '#' starts a comment, blank lines
/// are skipped, list values are comma-separated. Keys are case-sensitive.
class Config {
 public:
  static Config from_string(std::string_view text) {
    Config config;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
      const std::size_t eol = text.find('\n', pos);
      std::string_view line = text.substr(
          pos, eol == std::string_view::npos ? std::string_view::npos
                                             : eol - pos);
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = trim(line);
      if (!line.empty()) {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
          throw ConfigError("config line " + std::to_string(line_no) +
                            ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
          throw ConfigError("config line " + std::to_string(line_no) +
                            ": empty key");
        }
        config.values_[std::string(key)] = std::string(value);
      }
      if (eol == std::string_view::npos) break;
      pos = eol + 1;
    }
    return config;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& get_raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      throw ConfigError("missing config key: " + key);
    }
    return it->second;
  }

  int get_int(const std::string& key) const {
    return parse<int>(key, get_raw(key));
  }
  int get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::uint64_t get_uint64(const std::string& key) const {
    return parse<std::uint64_t>(key, get_raw(key));
  }
  std::uint64_t get_uint64(const std::string& key,
                           std::uint64_t fallback) const {
    return has(key) ? get_uint64(key) : fallback;
  }

  double get_double(const std::string& key) const {
    return parse<double>(key, get_raw(key));
  }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    return parse_list<double>(key, get_raw(key));
  }

  std::vector<int> get_int_list(const std::string& key) const {
    return parse_list<int>(key, get_raw(key));
  }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
      s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
      s.remove_suffix(1);
    }
    return s;
  }

  template <typename T>
  static T parse(const std::string& key, std::string_view value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
      throw ConfigError("config key '" + key + "': cannot parse value '" +
                        std::string(value) + "'");
    }
    return out;
  }

  template <typename T>
  std::vector<T> parse_list(const std::string& key,
                            std::string_view value) const {
    std::vector<T> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
      const std::size_t comma = value.find(',', pos);
      const auto item = trim(value.substr(
          pos, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - pos));
      if (item.empty()) {
        throw ConfigError("config key '" + key + "': empty list element");
      }
      out.push_back(parse<T>(key, item));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (out.empty()) {
      throw ConfigError("config key '" + key + "': empty list");
    }
    return out;
  }

  std::map<std::string, std::string> values_;
};

/// Network parameters from the standard config keys K, S, snr_db and the
/// optional w (defaults to a uniform split).
inline NetworkParams params_from_config(const Config& config) {
  const int num_players = config.get_int("K");
  const int num_stations = config.get_int("S");
  const double snr_db = config.get_double("snr_db");
  std::vector<double> fractions = config.has("w")
                                      ? config.get_double_list("w")
                                      : uniform_fractions(num_stations);
  try {
    return params_from_snr(num_players, num_stations, std::move(fractions),
                           snr_db);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid network configuration: ") +
                      e.what());
  }
}

}  // namespace bsg
