#pragma once

// Flat `key = value` text format:
//
//   # comment
//   n = 5000
//   theta = [1.55, 0.65]
//   noise_t = discrete
//
// Keys are unique; readers mark the keys they consume and `finish()` rejects
// anything left over.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "plrica/distributions.hpp"
#include "plrica/errors.hpp"
#include "plrica/plr.hpp"

namespace plrica {

class KeyValueConfig {
 public:
  struct Entry {
    std::vector<std::string> values;
    bool is_list = false;
    int line = 0;
  };

  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      const auto hash = raw.find('#');
      std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where(lineno) + "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(where(lineno) + "empty key");
      for (char c : key)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
          throw ConfigError(where(lineno) + "bad key '" + key + "'");
      if (cfg.entries_.count(key)) throw ConfigError(where(lineno) + "duplicate key '" + key + "'");
      Entry e;
      e.line = lineno;
      if (!val.empty() && val.front() == '[') {
        if (val.back() != ']') throw ConfigError(where(lineno) + "unterminated list for '" + key + "'");
        e.is_list = true;
        const std::string inner = trim(val.substr(1, val.size() - 2));
        if (!inner.empty())
          for (const auto& item : split(inner, ',')) {
            const std::string t = trim(item);
            if (t.empty()) throw ConfigError(where(lineno) + "empty list item in '" + key + "'");
            e.values.push_back(t);
          }
      } else {
        if (val.empty()) throw ConfigError(where(lineno) + "missing value for '" + key + "'");
        e.values.push_back(val);
      }
      cfg.order_.push_back(key);
      cfg.entries_.emplace(key, std::move(e));
    }
    return cfg;
  }

  static KeyValueConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config '" + path + "'");
    return parse(f);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  /// All items; a scalar value is a one-element list.
  const std::vector<std::string>& list(const std::string& key) {
    return entry(key).values;
  }

  const std::string& scalar(const std::string& key) {
    const Entry& e = entry(key);
    if (e.is_list || e.values.size() != 1)
      throw ConfigError(where(e.line) + "'" + key + "' expects a single value");
    return e.values.front();
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    return has(key) ? scalar(key) : fallback;
  }
  double get_double(const std::string& key, double fallback) {
    return has(key) ? to_double(key, scalar(key)) : fallback;
  }
  long long get_int(const std::string& key, long long fallback) {
    return has(key) ? to_int(key, scalar(key)) : fallback;
  }
  bool get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string& v = scalar(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(where(entries_.at(key).line) + "'" + key + "' expects true/false");
  }
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& v : list(key)) out.push_back(to_double(key, v));
    return out;
  }
  std::vector<long long> get_ints(const std::string& key, std::vector<long long> fallback) {
    if (!has(key)) return fallback;
    std::vector<long long> out;
    for (const auto& v : list(key)) out.push_back(to_int(key, v));
    return out;
  }
  std::vector<std::string> get_strings(const std::string& key, std::vector<std::string> fallback) {
    if (!has(key)) return fallback;
    return list(key);
  }

  /// Throws on the first key nobody read.
  void finish() const {
    for (const auto& k : order_)
      if (!used_.count(k)) throw ConfigError(where(entries_.at(k).line) + "unknown key '" + k + "'");
  }

  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
  std::set<std::string> used_;

  const Entry& entry(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  static std::string where(int line) { return "config line " + std::to_string(line) + ": "; }

  static std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
  }

  double to_double(const std::string& key, const std::string& v) const {
    try {
      return parse_double(v);
    } catch (const InvalidArgument&) {
      throw ConfigError(where(entries_.at(key).line) + "'" + key + "': not a number '" + v + "'");
    }
  }

  long long to_int(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size())
      throw ConfigError(where(entries_.at(key).line) + "'" + key + "': not an integer '" + v + "'");
    return x;
  }
};

// ---------------------------------------------------------------------------
// PlrSpec in config form

namespace detail {

inline NoiseSpec read_noise(KeyValueConfig& cfg, const std::string& role, const NoiseSpec& fallback) {
  NoiseSpec n = fallback;
  if (cfg.has(role)) {
    const NoiseFamily fam = parse_noise_family(cfg.scalar(role));
    if (fam != n.family) {
      n = NoiseSpec{};
      n.family = fam;
      if (fam == NoiseFamily::discrete_symmetric) n = NoiseSpec::three_point();
    }
  }
  n.location = cfg.get_double(role + "_location", n.location);
  n.scale = cfg.get_double(role + "_scale", n.scale);
  n.shape_beta = cfg.get_double(role + "_beta", n.shape_beta);
  n.support = cfg.get_doubles(role + "_support", n.support);
  n.probabilities = cfg.get_doubles(role + "_probabilities", n.probabilities);
  n.validate();
  return n;
}

}  // namespace detail

/// Reads PlrSpec keys from `cfg` starting from `base`. Leaves unrelated keys
/// for the caller.
inline PlrSpec read_plr_spec(KeyValueConfig& cfg, PlrSpec base = {}) {
  PlrSpec s = std::move(base);
  try {
    s.p = cfg.get_int("p", s.p);
    s.m = cfg.get_int("m", s.m);
    if (cfg.has("nuisance")) s.nuisance = parse_nuisance(cfg.scalar("nuisance"));
    s.leaky_slope = cfg.get_double("leaky_slope", s.leaky_slope);
    s.sparsity_keep_prob = cfg.get_double("keep_prob", s.sparsity_keep_prob);
    s.random_coefficients = cfg.get_bool("random_coefficients", s.random_coefficients);
    s.standardize_noise = cfg.get_bool("standardize_noise", s.standardize_noise);
    if (cfg.has("noise")) {
      const NoiseFamily fam = parse_noise_family(cfg.scalar("noise"));
      NoiseSpec n;
      n.family = fam;
      if (fam == NoiseFamily::discrete_symmetric) n = NoiseSpec::three_point();
      s.noise_x = s.noise_t = s.noise_y = n;
    }
    s.noise_x = detail::read_noise(cfg, "noise_x", s.noise_x);
    s.noise_t = detail::read_noise(cfg, "noise_t", s.noise_t);
    s.noise_y = detail::read_noise(cfg, "noise_y", s.noise_y);
    if (cfg.has("theta")) {
      const auto v = cfg.get_doubles("theta", {});
      s.theta = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
    }
    if (cfg.has("a")) {
      const auto v = cfg.get_doubles("a", {});
      if (static_cast<Index>(v.size()) != s.m * s.p) throw ConfigError("'a' must have m*p entries (row-major)");
      s.a_block = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          v.data(), s.m, s.p);
    }
    if (cfg.has("b")) {
      const auto v = cfg.get_doubles("b", {});
      s.b_block = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline PlrSpec load_plr_spec(const std::string& path) {
  KeyValueConfig cfg = KeyValueConfig::load(path);
  PlrSpec s = read_plr_spec(cfg);
  cfg.finish();
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

namespace detail {
inline std::string list_text(const double* v, Index n) {
  std::string out = "[";
  for (Index i = 0; i < n; ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out + "]";
}

inline void write_noise(std::ostream& out, const std::string& role, const NoiseSpec& n) {
  out << role << " = " << to_string(n.family) << '\n';
  out << role << "_location = " << format_double(n.location) << '\n';
  out << role << "_scale = " << format_double(n.scale) << '\n';
  if (n.family == NoiseFamily::generalized_normal)
    out << role << "_beta = " << format_double(n.shape_beta) << '\n';
  if (n.family == NoiseFamily::discrete_symmetric) {
    out << role << "_support = " << list_text(n.support.data(), static_cast<Index>(n.support.size())) << '\n';
    out << role << "_probabilities = "
        << list_text(n.probabilities.data(), static_cast<Index>(n.probabilities.size())) << '\n';
  }
}
}  // namespace detail

inline std::string plr_spec_to_text(const PlrSpec& s) {
  std::ostringstream out;
  out << "p = " << s.p << '\n' << "m = " << s.m << '\n';
  if (s.a_block.size() == s.m * s.p && s.m * s.p > 0) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a = s.a_block;
    out << "a = " << detail::list_text(a.data(), a.size()) << '\n';
  }
  if (s.b_block.size() == s.p) out << "b = " << detail::list_text(s.b_block.data(), s.p) << '\n';
  out << "theta = " << detail::list_text(s.theta.data(), s.theta.size()) << '\n';
  out << "nuisance = " << to_string(s.nuisance) << '\n';
  out << "leaky_slope = " << format_double(s.leaky_slope) << '\n';
  out << "keep_prob = " << format_double(s.sparsity_keep_prob) << '\n';
  out << "random_coefficients = " << (s.random_coefficients ? "true" : "false") << '\n';
  out << "standardize_noise = " << (s.standardize_noise ? "true" : "false") << '\n';
  detail::write_noise(out, "noise_x", s.noise_x);
  detail::write_noise(out, "noise_t", s.noise_t);
  detail::write_noise(out, "noise_y", s.noise_y);
  return out.str();
}

}  // namespace plrica
