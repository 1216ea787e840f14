#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hydrolab {

/// Invalid configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Everything a run depends on. Experiments fill in their own defaults and a
/// config file overrides them key by key.
struct RunConfig {
  std::string experiment;
  std::optional<std::uint64_t> seed;

  // model
  std::string model = "sep";  // sep | zrp
  double h_left = 0.8;        // sep: reservoir densities, zrp: entry rates
  double h_right = 0.2;
  std::vector<double> g;  // zrp g(1), g(2), ...; the last value repeats; empty = 1
  int n_max = 6;

  // geometry
  int d = 1;
  std::vector<long> N = {100};
  double nu = 1.0;
  int sites = 3;  // exact small systems

  // solvers
  std::vector<long> grid = {128};
  double pde_dt = 1e-3;
  std::string scheme = "crank-nicolson";
  double tolerance = 1e-12;

  // ensembles and statistics
  std::size_t paths = 16;
  double t_end = 10.0;  // macroscopic time per path
  double sample_dt = 0.01;
  std::string burn_in = "auto";  // auto | none
  double z_limit = 3.0;
  double min_pass = 1.0;  // fraction of gating checks that must pass
  std::vector<double> lags;
  std::vector<double> eps;
  double x0 = 0.5;
  double window = 0.05;
  std::vector<std::string> functions;
  std::vector<std::pair<std::string, std::string>> pairs;
  int gauge_samples = 16;

  std::string out = "out";
};

/// Keys of the flat config format, in schema order.
std::vector<std::string> config_keys();

using DefaultsProvider = std::function<RunConfig(const std::string& experiment)>;

/// Parses "key = value" lines ('#' starts a comment). The experiment id is
/// read first (or taken from the override), `defaults` supplies the base
/// config, then every other key is applied with validation. Unknown or
/// repeated keys, malformed values and a missing seed are ConfigErrors.
RunConfig parse_config(std::string_view text, const DefaultsProvider& defaults,
                       const std::optional<std::string>& experiment_override = {},
                       std::optional<std::uint64_t> seed_override = {});

/// Sets one key from its text form, with validation.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Text form of one key.
std::string config_value(const RunConfig& config, const std::string& key);

/// All keys, one "key = value" line each, in schema order. Parsing this text
/// reproduces the config.
std::string canonical_text(const RunConfig& config);

/// 16 hex digits identifying the resolved config.
std::string config_hash(const RunConfig& config);

}  // namespace hydrolab
