#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace qcool {

/// Flat `key = value` text with `[section]` headers; `#` starts a comment.
/// Keys outside any section land in the "" section. Values are looked up as "section.key".
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  Config() = default;

  static Config parse(std::istream& in) {
    Config c;
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      std::string s = trim(strip_comment(raw));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw parse_error("unterminated section header", lineno);
        section = trim(s.substr(1, s.size() - 2));
        if (section.empty() || section.find_first_of(" \t.=") != std::string::npos) throw parse_error("bad section name '" + section + "'", lineno);
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw parse_error("expected 'key = value'", lineno);
      const std::string key = trim(s.substr(0, eq));
      const std::string val = trim(s.substr(eq + 1));
      if (key.empty() || key.find_first_of(" \t.") != std::string::npos) throw parse_error("bad key '" + key + "'", lineno);
      const std::string path = section.empty() ? key : section + "." + key;
      if (c.entries_.count(path)) throw parse_error("duplicate key '" + path + "'", lineno);
      c.entries_[path] = {val, lineno};
      c.order_.push_back(path);
    }
    return c;
  }

  static Config parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    try {
      return parse(in);
    } catch (const parse_error& e) {
      throw config_error(path + ": " + e.what());
    }
  }

  bool has(const std::string& path) const { return entries_.count(path) != 0; }

  /// Sets or overrides a value (CLI flags, resolved defaults).
  void set(const std::string& path, const std::string& value) {
    auto it = entries_.find(path);
    if (it != entries_.end()) {
      it->second.value = value;
      return;
    }
    order_.push_back(path);
    entries_[path] = {value, 0};
  }

  std::optional<std::string> get(const std::string& path) const {
    auto it = entries_.find(path);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
  }

  std::string str(const std::string& path) const {
    auto v = get(path);
    if (!v) throw config_error(path + ": required key is missing");
    return *v;
  }

  std::string str(const std::string& path, const std::string& fallback) const { return get(path).value_or(fallback); }

  double real(const std::string& path) const { return to_real(path, str(path)); }
  double real(const std::string& path, double fallback) const { return has(path) ? real(path) : fallback; }

  long long integer(const std::string& path) const { return to_integer(path, str(path)); }
  long long integer(const std::string& path, long long fallback) const { return has(path) ? integer(path) : fallback; }

  std::uint64_t u64(const std::string& path) const {
    const std::string v = str(path);
    errno = 0;
    char* end = nullptr;
    const unsigned long long r = std::strtoull(v.c_str(), &end, 0);
    if (v.empty() || v.front() == '-' || errno || *end) throw config_error(where(path) + ": expected unsigned integer, got '" + v + "'");
    return r;
  }

  bool boolean(const std::string& path, bool fallback) const {
    if (!has(path)) return fallback;
    std::string v = str(path);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw config_error(where(path) + ": expected boolean, got '" + v + "'");
  }

  /// Comma-separated reals.
  std::vector<double> reals(const std::string& path) const {
    std::vector<double> out;
    for (const auto& item : split(str(path), ',')) out.push_back(to_real(path, item));
    if (out.empty()) throw config_error(where(path) + ": empty list");
    return out;
  }

  /// Rejects keys not in `allowed`.
  void reject_unknown(const std::set<std::string>& allowed) const {
    for (const auto& p : order_)
      if (!allowed.count(p)) throw config_error(where(p) + ": unknown key");
  }

  const std::vector<std::string>& keys() const { return order_; }

  /// `# section.key = value` lines in insertion order.
  std::string echo() const {
    std::string s;
    for (const auto& p : order_) s += "# " + p + " = " + entries_.at(p).value + "\n";
    return s;
  }

  static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
      cur = trim(cur);
      if (!cur.empty()) out.push_back(cur);
    }
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto h = s.find('#');
    return h == std::string::npos ? s : s.substr(0, h);
  }

  std::string where(const std::string& path) const {
    auto it = entries_.find(path);
    if (it == entries_.end() || it->second.line == 0) return path;
    return path + " (line " + std::to_string(it->second.line) + ")";
  }

  double to_real(const std::string& path, const std::string& v) const {
    errno = 0;
    char* end = nullptr;
    const double r = std::strtod(v.c_str(), &end);
    if (v.empty() || errno || *end || !std::isfinite(r)) throw config_error(where(path) + ": expected real number, got '" + v + "'");
    return r;
  }

  long long to_integer(const std::string& path, const std::string& v) const {
    errno = 0;
    char* end = nullptr;
    const long long r = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || errno || *end) {
      // accept integral reals such as 1e5
      const double d = to_real(path, v);
      if (d != std::floor(d) || std::abs(d) > 9e15) throw config_error(where(path) + ": expected integer, got '" + v + "'");
      return static_cast<long long>(d);
    }
    return r;
  }

  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
};

}  // namespace qcool
