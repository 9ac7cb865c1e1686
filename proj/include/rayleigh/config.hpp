#pragma once

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rayleigh/errors.hpp"

namespace rayleigh {

// Flat "section.key = value" text. '#' starts a comment; blank lines are
// ignored. Every key must be on the caller's list.
class Config {
 public:
  static Config parse(const std::string& text, const std::set<std::string>& known) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
      if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
      if (!known.count(key)) throw ValidationError("unknown config key '" + key + "'");
      if (c.values_.count(key)) throw ValidationError("duplicate config key '" + key + "'");
      c.values_[key] = val;
    }
    return c;
  }

  static Config load(const std::string& path, const std::set<std::string>& known) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), known);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("missing config key '" + key + "'");
    return it->second;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  double num(const std::string& key) const { return to_double(key, str(key)); }
  double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

  // Strictly positive number (tolerances, step sizes).
  double positive(const std::string& key, double fallback) const {
    double v = num(key, fallback);
    if (!(v > 0)) throw ValidationError("config key '" + key + "' must be positive");
    return v;
  }

  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    double v = num(key);
    if (v != std::floor(v)) throw ValidationError("config key '" + key + "' must be an integer");
    return static_cast<long>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config key '" + key + "' must be true or false");
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::string s = str(key);
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(to_double(key, item));
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static double to_double(const std::string& key, const std::string& s) {
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
      throw ValidationError("config key '" + key + "': '" + s + "' is not a number");
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace rayleigh
