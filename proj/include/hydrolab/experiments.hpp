#pragma once

#include "hydrolab/config.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace hydrolab {

/// One line of a report. Statistical checks carry a z-score against
/// `expected`; deterministic checks compare `value` with `tolerance`.
/// Checks with gating = false are diagnostics and never affect the verdict.
struct Check {
  std::string id;
  std::string statistic;
  double value = 0.0;
  double std_error = 0.0;
  double expected = 0.0;
  double z = 0.0;
  double tolerance = 0.0;
  bool statistical = false;
  bool gating = true;
  bool pass = false;
};

/// |value| < tolerance (or value <= tolerance when `inclusive`).
Check deterministic_check(std::string id, std::string statistic, double value, double tolerance,
                          bool inclusive = false);
/// A yes/no condition, reported as 1 or 0.
Check condition_check(std::string id, std::string statistic, bool holds);

struct Artifact {
  std::string name;  // file name inside the output directory
  std::string content;
};

struct ExperimentResult {
  std::vector<Check> checks;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<Artifact> artifacts;
  /// Set by the experiment from its own pass rule (usually: every gating
  /// check passes, or at least min_pass of a family of statistical checks).
  bool pass = false;
};

struct ExperimentDescriptor {
  std::string id;
  std::string anchor;  // the result of the theory the experiment probes
  std::string summary;
  std::function<RunConfig()> defaults;
  std::function<ExperimentResult(const RunConfig&)> run;
};

/// Stable-sorted by id.
const std::vector<ExperimentDescriptor>& catalogue();

/// Throws ConfigError("experiment") listing the valid ids.
const ExperimentDescriptor& find_experiment(const std::string& id);

/// The experiment's defaults with `experiment` set and no seed.
RunConfig default_config(const std::string& id);

struct RunReport {
  RunConfig config;
  std::string hash;
  ExperimentResult result;
  double wall_seconds = 0.0;
  std::vector<std::string> files;
};

/// Runs the configured experiment. Throws ConfigError for invalid settings
/// and propagates engine errors with the experiment id prepended.
RunReport run(const RunConfig& config);

nlohmann::json report_json(const RunReport& report);

/// Writes report.json and every artifact (CSV files start with a
/// "# config <hash>" line) into `dir`; fills report.files.
void write_report(RunReport& report, const std::filesystem::path& dir);

/// Process exit status: 0 all verdicts pass, 1 a failed verdict.
int exit_status(const RunReport& report);

}  // namespace hydrolab
