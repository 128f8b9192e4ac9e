#pragma once

// Flat INI-style experiment configuration: `key = value` lines grouped under
// [section] headers; '#' and ';' start comments. Study sections pick the
// domain, polynomial degree, mesh family, horizon, and dt rule.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "skinfem/core.hpp"
#include "skinfem/geometry.hpp"

namespace skinfem {

class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

  static Config parse(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("bad section header at line " + std::to_string(lineno));
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected key = value at line " + std::to_string(lineno));
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      c.values_[section.empty() ? key : section + "." + key] = val;
    }
    return c;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }
  double get_real(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stod(it->second);
    } catch (...) {
      throw ConfigError("bad real for " + key + ": " + it->second);
    }
  }
  long long get_int(const std::string& key, long long dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stoll(it->second);
    } catch (...) {
      throw ConfigError("bad integer for " + key + ": " + it->second);
    }
  }
  bool get_bool(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError("bad boolean for " + key + ": " + it->second);
  }

  const std::map<std::string, std::string>& raw() const { return values_; }

  /// Domain from `<prefix>domain` and its parameter keys. Built-in defaults
  /// keep diam <= 1 (disk radius 0.5 and so on); explicit keys override.
  SmoothDomain domain(const std::string& prefix = "") const {
    const std::string kind = get_string(prefix + "domain", "disk");
    if (kind == "disk")
      return SmoothDomain::disk(get_real(prefix + "disk.radius", 0.5));
    if (kind == "ellipse")
      return SmoothDomain::ellipse(get_real(prefix + "ellipse.a", 0.5),
                                   get_real(prefix + "ellipse.b", 0.25));
    if (kind == "star")
      return SmoothDomain::star(
          get_real(prefix + "star.base_radius", 0.35),
          get_real(prefix + "star.amplitude", 0.2),
          static_cast<int>(get_int(prefix + "star.frequency", 3)));
    if (kind == "square")
      return SmoothDomain::square(get_real(prefix + "square.side", 1.0));
    throw ConfigError("unknown domain kind: " + kind);
  }

  /// dt rule "c", "c*h", or "c*h^2" evaluated at h.
  double dt_from_rule(const std::string& key, double h, double dflt_coef = 0.5,
                      int dflt_pow = 1) const {
    const std::string rule = get_string(key, "");
    double coef = dflt_coef;
    int power = dflt_pow;
    if (!rule.empty()) {
      const auto star = rule.find("*h");
      if (star == std::string::npos) {
        if (rule == "h") { coef = 1.0; power = 1; }
        else { coef = std::stod(rule); power = 0; }
      } else {
        coef = std::stod(rule.substr(0, star));
        power = 1;
        const auto caret = rule.find('^', star);
        if (caret != std::string::npos)
          power = std::stoi(rule.substr(caret + 1));
      }
    }
    double dt = coef;
    for (int i = 0; i < power; ++i) dt *= h;
    return dt;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace skinfem
