#include "hydrolab/config.hpp"
#include "hydrolab/experiments.hpp"
#include "hydrolab/io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw hydrolab::ConfigError("", "cannot read config file " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void print_catalogue() {
  for (const auto& e : hydrolab::catalogue()) {
    std::printf("%-22s %s\n", e.id.c_str(), e.anchor.c_str());
  }
}

void print_summary(const hydrolab::RunReport& report, const std::string& dir) {
  for (const auto& c : report.result.checks) {
    if (!c.gating) continue;
    if (c.statistical) {
      std::printf("%-4s %-20s %s: %s (se %s, expected %s, z %.2f)\n", c.pass ? "ok" : "FAIL", c.id.c_str(),
                  c.statistic.c_str(), hydrolab::format_double(c.value).c_str(),
                  hydrolab::format_double(c.std_error).c_str(), hydrolab::format_double(c.expected).c_str(), c.z);
    } else {
      std::printf("%-4s %-20s %s: %s (tolerance %s)\n", c.pass ? "ok" : "FAIL", c.id.c_str(), c.statistic.c_str(),
                  hydrolab::format_double(c.value).c_str(), hydrolab::format_double(c.tolerance).c_str());
    }
  }
  std::printf("%s: %s in %.1f s, config %s, report %s/report.json\n", report.config.experiment.c_str(),
              report.result.pass ? "PASS" : "FAIL", report.wall_seconds, report.hash.c_str(), dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-classical lattice gases, hydrodynamic limits and fluctuation experiments"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list", list, "List the experiment catalogue");

  auto* run_cmd = app.add_subcommand("run", "Run one experiment");
  std::string config_path;
  std::string experiment;
  std::uint64_t seed = 0;
  std::string out;
  run_cmd->add_option("config", config_path, "Flat key = value config file");
  auto* exp_opt = run_cmd->add_option("--experiment", experiment, "Experiment id (overrides the config)");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Master seed (overrides the config)");
  run_cmd->add_option("--out", out, "Output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (list) {
    print_catalogue();
    return 0;
  }
  if (!run_cmd->parsed()) {
    std::cout << app.help();
    return 2;
  }

  try {
    const std::string text = config_path.empty() ? std::string() : read_file(config_path);
    std::optional<std::string> exp_override;
    if (exp_opt->count() > 0) exp_override = experiment;
    std::optional<std::uint64_t> seed_override;
    if (seed_opt->count() > 0) seed_override = seed;
    hydrolab::RunConfig config = hydrolab::parse_config(text, hydrolab::default_config, exp_override, seed_override);
    if (!out.empty()) config.out = out;

    hydrolab::RunReport report = hydrolab::run(config);
    hydrolab::write_report(report, config.out);
    print_summary(report, config.out);
    return hydrolab::exit_status(report);
  } catch (const hydrolab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
