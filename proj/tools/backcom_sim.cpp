// Command-line driver: loads a configuration, runs one named scenario with an
// optional one-dimensional parameter sweep, and writes analytic-vs-simulated
// rows as CSV or JSON. Identical command line, config, and seed give
// byte-identical output regardless of worker count.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "backcom/config.hpp"
#include "backcom/sweep.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Backscatter interference network simulator and analytic benchmark"};

  std::string config_path;
  std::string scenario_name;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 0;
  std::vector<std::string> sweep_args;
  std::string out_path;
  std::string format_name = "csv";
  unsigned workers = 0;

  app.add_option("--config", config_path, "Configuration file path");
  app.add_option("--scenario", scenario_name,
                 "Scenario: two_link_sync, two_link_async, or k_link")
      ->required();
  app.add_option("--trials", trials, "Monte Carlo trials per parameter value");
  app.add_option("--seed", seed, "Base rng seed");
  app.add_option("--sweep", sweep_args,
                 "Sweep spec param=start:stop:steps or param=v1,v2,... "
                 "(at most one; params: rho, N, beta, K, P, E0)");
  app.add_option("--out", out_path, "Output file (default: stdout)");
  app.add_option("--format", format_name, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", workers,
                 "Worker threads (0 = available parallelism; never affects results)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
    return app.exit(e);  // --help and friends
  }

  try {
    const backcom::Scenario scenario = backcom::parse_scenario(scenario_name);
    backcom::SystemConfig cfg =
        config_path.empty() ? backcom::default_config(2) : backcom::load_config(config_path);

    backcom::RunOptions opt;
    opt.n_trials = trials;
    opt.seed = seed;
    opt.workers = workers;
    if (sweep_args.size() > 1) {
      throw std::invalid_argument("sweep: at most one sweep per invocation");
    }
    if (!sweep_args.empty()) opt.sweep = backcom::parse_sweep(sweep_args.front());

    const std::vector<backcom::ResultRow> rows =
        backcom::run_scenario(scenario, cfg, opt);
    const backcom::OutputFormat format =
        format_name == "json" ? backcom::OutputFormat::json : backcom::OutputFormat::csv;
    if (out_path.empty()) {
      if (format == backcom::OutputFormat::csv) {
        backcom::write_csv(rows, std::cout);
      } else {
        backcom::write_json(rows, std::cout);
      }
    } else {
      backcom::emit(rows, format, out_path);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
