#pragma once

// Named scenarios and one-dimensional parameter sweeps. A scenario pairs the
// closed-form predictions with a Monte Carlo run for each metric it covers
// and yields one ResultRow per (metric, parameter value), ready for CSV or
// JSON emission. All analytic values come from direct library calls on the
// same SystemConfig the simulator ran with.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "backcom/analytic.hpp"
#include "backcom/simulator.hpp"
#include "backcom/topology.hpp"

namespace backcom {

enum class Scenario { two_link_sync, two_link_async, k_link };
enum class OutputFormat { csv, json };

inline const char* scenario_name(Scenario sc) {
  switch (sc) {
    case Scenario::two_link_sync:
      return "two_link_sync";
    case Scenario::two_link_async:
      return "two_link_async";
    default:
      return "k_link";
  }
}

inline Scenario parse_scenario(const std::string& name) {
  if (name == "two_link_sync") return Scenario::two_link_sync;
  if (name == "two_link_async") return Scenario::two_link_async;
  if (name == "k_link") return Scenario::k_link;
  throw std::invalid_argument("unknown scenario '" + name +
                              "' (valid: two_link_sync, two_link_async, k_link)");
}

struct SweepSpec {
  std::string parameter;  // one of rho, N, beta, K, P, E0
  std::vector<double> values;
};

struct ResultRow {
  std::string scenario;
  std::string param;  // swept parameter, or "none"
  double param_value = 0.0;
  std::string metric;  // reader_ber | tag_ber | etr | outage
  double analytic = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  std::uint64_t n_trials = 0;
  std::uint64_t seed = 0;
};

struct RunOptions {
  std::uint64_t n_trials = 1000000;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = available parallelism
  std::optional<SweepSpec> sweep;
};

namespace detail {

inline bool known_sweep_parameter(const std::string& p) {
  return p == "rho" || p == "N" || p == "beta" || p == "K" || p == "P" || p == "E0";
}

inline int sweep_integer(const std::string& param, double v) {
  const long long r = std::llround(v);
  if (std::abs(v - static_cast<double>(r)) > 1e-9 * std::max(1.0, std::abs(v))) {
    throw std::invalid_argument("sweep: " + param + " values must be integers");
  }
  return static_cast<int>(r);
}

}  // namespace detail

// Parses "param=start:stop:steps" (inclusive linear grid) or
// "param=v1,v2,..." (explicit list).
inline SweepSpec parse_sweep(const std::string& text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("sweep: expected param=start:stop:steps or param=v1,v2,...");
  }
  SweepSpec spec;
  spec.parameter = text.substr(0, eq);
  if (!detail::known_sweep_parameter(spec.parameter)) {
    throw std::invalid_argument("sweep: unknown parameter '" + spec.parameter +
                                "' (valid: rho, N, beta, K, P, E0)");
  }
  const std::string body = text.substr(eq + 1);
  auto parse_num = [&](const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
      throw std::invalid_argument("sweep: invalid number '" + s + "'");
    }
    return v;
  };
  if (body.find(':') != std::string::npos) {
    const std::size_t c1 = body.find(':');
    const std::size_t c2 = body.find(':', c1 + 1);
    if (c2 == std::string::npos || body.find(':', c2 + 1) != std::string::npos) {
      throw std::invalid_argument("sweep: grid form is start:stop:steps");
    }
    const double start = parse_num(body.substr(0, c1));
    const double stop = parse_num(body.substr(c1 + 1, c2 - c1 - 1));
    const double steps_d = parse_num(body.substr(c2 + 1));
    const int steps = detail::sweep_integer("steps", steps_d);
    if (steps < 1) throw std::invalid_argument("sweep: steps must be at least 1");
    for (int i = 0; i < steps; ++i) {
      spec.values.push_back(steps == 1 ? start
                                       : start + (stop - start) * i / (steps - 1));
    }
  } else {
    std::size_t pos = 0;
    while (pos <= body.size()) {
      const std::size_t comma = body.find(',', pos);
      const std::string tok =
          comma == std::string::npos ? body.substr(pos) : body.substr(pos, comma - pos);
      spec.values.push_back(parse_num(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (spec.values.empty()) throw std::invalid_argument("sweep: no values given");
  return spec;
}

// Applies one swept value to a copy of the base configuration. Sweeping N
// under fixed chip energy rescales the transmit power so P*T/N stays at the
// base value; sweeping K rebuilds the reference geometry for the new size.
inline SystemConfig apply_sweep_value(const SystemConfig& base, const std::string& param,
                                      double v) {
  SystemConfig cfg = base;
  if (param == "rho") {
    cfg.rho = v;
  } else if (param == "P") {
    cfg.P = v;
  } else if (param == "E0") {
    cfg.E0 = v;
  } else if (param == "beta") {
    cfg.beta = v;
  } else if (param == "N") {
    cfg.N = detail::sweep_integer(param, v);
    if (base.power_mode == PowerMode::fce) {
      cfg.P = base.P * static_cast<double>(cfg.N) / static_cast<double>(base.N);
    }
  } else if (param == "K") {
    const int k = detail::sweep_integer(param, v);
    if (k < 2) throw std::invalid_argument("sweep: K must be at least 2");
    const SystemConfig geo = default_config(k);
    cfg.K = k;
    cfg.d_reader_tag = geo.d_reader_tag;
    cfg.d_tag_tag = geo.d_tag_tag;
    cfg.d_reader_reader = geo.d_reader_reader;
    if (cfg.static_coeffs) {
      throw std::invalid_argument("sweep: K cannot be swept with static channels");
    }
  } else {
    throw std::invalid_argument("sweep: unknown parameter '" + param + "'");
  }
  validate(cfg);
  return cfg;
}

inline std::vector<ResultRow> run_scenario(Scenario sc, const SystemConfig& base,
                                           const RunOptions& opt = {}) {
  validate(base);
  if (opt.sweep && !detail::known_sweep_parameter(opt.sweep->parameter)) {
    throw std::invalid_argument("sweep: unknown parameter '" + opt.sweep->parameter + "'");
  }
  if ((sc == Scenario::two_link_sync || sc == Scenario::two_link_async) && base.K != 2) {
    throw std::invalid_argument(std::string("run_scenario: ") + scenario_name(sc) +
                                " requires K = 2");
  }
  if ((sc == Scenario::two_link_async || sc == Scenario::k_link) &&
      base.channel_model != ChannelModel::rayleigh) {
    throw std::invalid_argument(std::string("run_scenario: ") + scenario_name(sc) +
                                " requires channel_model = rayleigh");
  }

  std::vector<double> values;
  if (opt.sweep) {
    values = opt.sweep->values;
  } else {
    values.push_back(0.0);
  }

  const bool is_static = base.channel_model == ChannelModel::static_coeffs;
  std::vector<const char*> metrics;
  if (sc == Scenario::two_link_async) {
    metrics = {"reader_ber", "tag_ber", "etr"};
  } else {
    metrics = {"reader_ber", "tag_ber", "etr", "outage"};
  }

  struct PointResult {
    double value = 0.0;
    MetricsReport rep;
    double analytic[4] = {0.0, 0.0, 0.0, 0.0};  // indexed like `metrics`
  };
  std::vector<PointResult> points;
  points.reserve(values.size());
  for (const double v : values) {
    PointResult pr;
    pr.value = v;
    const SystemConfig cfg =
        opt.sweep ? apply_sweep_value(base, opt.sweep->parameter, v) : base;
    const SimMode mode = sc == Scenario::two_link_async ? SimMode::async : SimMode::sync;
    pr.rep = run_trials(cfg, opt.n_trials, opt.seed, mode, opt.workers);
    if (sc == Scenario::two_link_sync) {
      pr.analytic[0] = reader_ber_sync(cfg);
      pr.analytic[1] =
          is_static ? tag_ber_static(cfg, *cfg.static_coeffs) : tag_ber_fading(cfg);
      pr.analytic[2] = is_static ? etr_static(cfg, *cfg.static_coeffs) : etr_fading(cfg);
      pr.analytic[3] =
          is_static ? outage_static(cfg, *cfg.static_coeffs) : outage_fading(cfg);
    } else if (sc == Scenario::two_link_async) {
      pr.analytic[0] = reader_ber_async(cfg);
      pr.analytic[1] = tag_ber_async(cfg, cfg.beta);
      pr.analytic[2] = etr_async(cfg);
    } else {
      pr.analytic[0] = reader_ber_klink(cfg);
      pr.analytic[1] = tag_ber_klink(cfg);
      const auto [etr, outage] = klink_et_asymptotics(cfg);
      pr.analytic[2] = etr;
      pr.analytic[3] = outage;
    }
    points.push_back(pr);
  }

  std::vector<ResultRow> rows;
  rows.reserve(points.size() * metrics.size());
  for (std::size_t mi = 0; mi < metrics.size(); ++mi) {
    for (const PointResult& pr : points) {
      ResultRow row;
      row.scenario = scenario_name(sc);
      row.param = opt.sweep ? opt.sweep->parameter : "none";
      row.param_value = opt.sweep ? pr.value : 0.0;
      row.metric = metrics[mi];
      row.analytic = pr.analytic[mi];
      if (metrics[mi] == std::string("reader_ber")) {
        row.mc_mean = pr.rep.reader_ber;
        row.mc_stderr = pr.rep.reader_ber_se;
      } else if (metrics[mi] == std::string("tag_ber")) {
        row.mc_mean = pr.rep.tag_ber;
        row.mc_stderr = pr.rep.tag_ber_se;
      } else if (metrics[mi] == std::string("etr")) {
        row.mc_mean = pr.rep.etr_mean;
        row.mc_stderr = pr.rep.etr_se;
      } else {
        row.mc_mean = pr.rep.outage_prob;
        row.mc_stderr = pr.rep.outage_se;
      }
      row.n_trials = opt.n_trials;
      row.seed = opt.seed;
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::string format_scientific(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

inline void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "scenario,param,param_value,metric,analytic,mc_mean,mc_stderr,n_trials,seed\n";
  for (const ResultRow& r : rows) {
    out << r.scenario << ',' << r.param << ',' << format_scientific(r.param_value) << ','
        << r.metric << ',' << format_scientific(r.analytic) << ','
        << format_scientific(r.mc_mean) << ',' << format_scientific(r.mc_stderr) << ','
        << r.n_trials << ',' << r.seed << '\n';
  }
}

inline nlohmann::json rows_to_json(const std::vector<ResultRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    arr.push_back({{"scenario", r.scenario},
                   {"param", r.param},
                   {"param_value", r.param_value},
                   {"metric", r.metric},
                   {"analytic", r.analytic},
                   {"mc_mean", r.mc_mean},
                   {"mc_stderr", r.mc_stderr},
                   {"n_trials", r.n_trials},
                   {"seed", r.seed}});
  }
  return arr;
}

inline std::vector<ResultRow> rows_from_json(const nlohmann::json& arr) {
  std::vector<ResultRow> rows;
  for (const nlohmann::json& j : arr) {
    ResultRow r;
    r.scenario = j.at("scenario").get<std::string>();
    r.param = j.at("param").get<std::string>();
    r.param_value = j.at("param_value").get<double>();
    r.metric = j.at("metric").get<std::string>();
    r.analytic = j.at("analytic").get<double>();
    r.mc_mean = j.at("mc_mean").get<double>();
    r.mc_stderr = j.at("mc_stderr").get<double>();
    r.n_trials = j.at("n_trials").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    rows.push_back(r);
  }
  return rows;
}

inline void write_json(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << rows_to_json(rows).dump(2) << '\n';
}

// Writes rows to a file in the requested format.
inline void emit(const std::vector<ResultRow>& rows, OutputFormat format,
                 const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit: rows must be non-empty");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit: cannot write '" + path + "'");
  if (format == OutputFormat::csv) {
    write_csv(rows, out);
  } else {
    write_json(rows, out);
  }
  out.flush();
  if (!out) throw std::runtime_error("emit: write to '" + path + "' failed");
}

}  // namespace backcom
