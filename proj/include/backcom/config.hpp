#pragma once

// Structured-text configuration files. Three sections are recognized:
//
//   [system]           scalar parameters (K, N, T, P, rho, eta, noise, ...)
//   [distances]        geometry overrides on top of the reference layout
//   [static_channels]  fixed complex coefficients for the static model
//
// Power-like keys accept a _dbm suffix (P_dbm, sigma2_reader_dbm,
// sigma2_tag_dbm) converted to watts at parse time. Distances use d<m><n>
// for reader m -> tag n, dt<m><n> / dr<m><n> for tag-tag / reader-reader
// pairs, and d_t / d_r to set every off-diagonal pair at once (indices are
// 1-based, so explicit keys cover K <= 9). Static coefficients are written
// f<m><n> = re im (one number means a real coefficient). Unknown sections or
// keys, malformed numbers, and contract violations all raise
// std::invalid_argument naming the offending key.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "backcom/topology.hpp"

namespace backcom {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

inline std::vector<ConfigEntry> tokenize_config(const std::string& text) {
  std::vector<ConfigEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config: unterminated section header at line " +
                                    std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "system" && section != "distances" && section != "static_channels") {
        throw std::invalid_argument("config: unknown section '[" + section + "]'");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    }
    if (section.empty()) {
      throw std::invalid_argument("config: key outside any section at line " +
                                  std::to_string(line_no));
    }
    ConfigEntry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    e.line = line_no;
    if (e.key.empty()) {
      throw std::invalid_argument("config: empty key at line " + std::to_string(line_no));
    }
    entries.push_back(e);
  }
  return entries;
}

inline double parse_double_value(const ConfigEntry& e) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *trim(end).c_str() != '\0') {
    throw std::invalid_argument("config: invalid number for '" + e.key + "'");
  }
  return v;
}

inline int parse_int_value(const ConfigEntry& e) {
  const double v = parse_double_value(e);
  const long long r = std::llround(v);
  if (v != static_cast<double>(r)) {
    throw std::invalid_argument("config: '" + e.key + "' must be an integer");
  }
  return static_cast<int>(r);
}

inline bool parse_bool_value(const ConfigEntry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw std::invalid_argument("config: '" + e.key + "' must be true or false");
}

inline cplx parse_complex_value(const ConfigEntry& e) {
  std::istringstream in(e.value);
  double re = 0.0;
  double im = 0.0;
  if (!(in >> re)) {
    throw std::invalid_argument("config: invalid complex value for '" + e.key + "'");
  }
  if (!(in >> im)) im = 0.0;
  std::string rest;
  if (in.clear(), in >> rest) {
    throw std::invalid_argument("config: invalid complex value for '" + e.key + "'");
  }
  return cplx(re, im);
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Splits a key like "d12" / "dt21" / "f11" into 1-based indices.
inline bool parse_pair_indices(const std::string& digits, int k, int& m, int& n) {
  if (digits.size() != 2 || !std::isdigit(static_cast<unsigned char>(digits[0])) ||
      !std::isdigit(static_cast<unsigned char>(digits[1]))) {
    return false;
  }
  m = digits[0] - '0';
  n = digits[1] - '0';
  return m >= 1 && m <= k && n >= 1 && n <= k;
}

inline void apply_system_entry(SystemConfig& cfg, const ConfigEntry& e) {
  const std::string& k = e.key;
  if (k == "K") {
    cfg.K = parse_int_value(e);  // already consumed by the pre-pass
  } else if (k == "N") {
    cfg.N = parse_int_value(e);
  } else if (k == "T") {
    cfg.T = parse_double_value(e);
  } else if (k == "P") {
    cfg.P = parse_double_value(e);
  } else if (k == "P_dbm") {
    cfg.P = dbm_to_watts(parse_double_value(e));
  } else if (k == "rho") {
    cfg.rho = parse_double_value(e);
  } else if (k == "eta") {
    cfg.eta = parse_double_value(e);
  } else if (k == "sigma2_reader") {
    cfg.sigma2_reader = parse_double_value(e);
  } else if (k == "sigma2_reader_dbm") {
    cfg.sigma2_reader = dbm_to_watts(parse_double_value(e));
  } else if (k == "sigma2_tag") {
    cfg.sigma2_tag = parse_double_value(e);
  } else if (k == "sigma2_tag_dbm") {
    cfg.sigma2_tag = dbm_to_watts(parse_double_value(e));
  } else if (k == "lambda") {
    cfg.lambda = parse_double_value(e);
  } else if (k == "E0") {
    cfg.E0 = parse_double_value(e);
  } else if (k == "beta") {
    cfg.beta = parse_double_value(e);
  } else if (k == "channel_model") {
    if (e.value == "rayleigh") {
      cfg.channel_model = ChannelModel::rayleigh;
    } else if (e.value == "static") {
      cfg.channel_model = ChannelModel::static_coeffs;
    } else {
      throw std::invalid_argument("config: channel_model must be rayleigh or static");
    }
  } else if (k == "power_mode") {
    if (e.value == "fcp") {
      cfg.power_mode = PowerMode::fcp;
    } else if (e.value == "fce") {
      cfg.power_mode = PowerMode::fce;
    } else {
      throw std::invalid_argument("config: power_mode must be fcp or fce");
    }
  } else if (k == "couple_tag_detection") {
    cfg.couple_tag_detection = parse_bool_value(e);
  } else {
    throw std::invalid_argument("config: unknown key '" + k + "' in [system]");
  }
}

inline void apply_distance_entry(SystemConfig& cfg, const ConfigEntry& e) {
  const std::string& k = e.key;
  const double v = parse_double_value(e);
  auto bad = [&]() {
    throw std::invalid_argument("config: unknown key '" + k + "' in [distances]");
  };
  if (k == "d_t" || k == "d_r") {
    SquareMat<double>& mat = k == "d_t" ? cfg.d_tag_tag : cfg.d_reader_reader;
    for (int m = 0; m < cfg.K; ++m) {
      for (int n = 0; n < cfg.K; ++n) {
        if (m != n) mat(m, n) = v;
      }
    }
    return;
  }
  if (k.size() == 3 && k[0] == 'd') {
    int m = 0, n = 0;
    if (!parse_pair_indices(k.substr(1), cfg.K, m, n)) bad();
    cfg.d_reader_tag(m - 1, n - 1) = v;
    return;
  }
  if (k.size() == 4 && k[0] == 'd' && (k[1] == 't' || k[1] == 'r')) {
    int m = 0, n = 0;
    if (!parse_pair_indices(k.substr(2), cfg.K, m, n)) bad();
    if (m == n) {
      throw std::invalid_argument("config: '" + k + "' must name two distinct nodes");
    }
    SquareMat<double>& mat = k[1] == 't' ? cfg.d_tag_tag : cfg.d_reader_reader;
    mat(m - 1, n - 1) = v;
    return;
  }
  bad();
}

inline void apply_static_entry(ChannelRealization& ch, int k_links, const ConfigEntry& e) {
  const std::string& k = e.key;
  if (k.size() != 3 || (k[0] != 'f' && k[0] != 'g' && k[0] != 'h')) {
    throw std::invalid_argument("config: unknown key '" + k + "' in [static_channels]");
  }
  int m = 0, n = 0;
  if (!parse_pair_indices(k.substr(1), k_links, m, n)) {
    throw std::invalid_argument("config: unknown key '" + k + "' in [static_channels]");
  }
  const cplx v = parse_complex_value(e);
  if (k[0] == 'f') {
    ch.f(m - 1, n - 1) = v;
  } else if (k[0] == 'g') {
    ch.g(m - 1, n - 1) = v;
  } else {
    ch.h(m - 1, n - 1) = v;
  }
}

}  // namespace detail

// Parses configuration text into a validated SystemConfig. Values start from
// the reference layout of default_config(K), so a file only needs to name
// what it changes.
inline SystemConfig parse_config_text(const std::string& text) {
  const std::vector<detail::ConfigEntry> entries = detail::tokenize_config(text);
  int k_links = 2;
  for (const detail::ConfigEntry& e : entries) {
    if (e.section == "system" && e.key == "K") k_links = detail::parse_int_value(e);
  }
  if (k_links < 2 || k_links > 9) {
    throw std::invalid_argument("config: K must lie in [2, 9]");
  }
  SystemConfig cfg = default_config(k_links);
  ChannelRealization st;
  st.f = SquareMat<cplx>(k_links);
  st.g = SquareMat<cplx>(k_links);
  st.h = SquareMat<cplx>(k_links);
  bool has_static = false;
  for (const detail::ConfigEntry& e : entries) {
    if (e.section == "system") {
      detail::apply_system_entry(cfg, e);
    } else if (e.section == "distances") {
      detail::apply_distance_entry(cfg, e);
    } else {
      detail::apply_static_entry(st, k_links, e);
      has_static = true;
    }
  }
  if (has_static) cfg.static_coeffs = st;
  if (cfg.channel_model == ChannelModel::static_coeffs && !has_static) {
    throw std::invalid_argument(
        "config: channel_model = static requires a [static_channels] section");
  }
  validate(cfg);
  return cfg;
}

inline SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace backcom
