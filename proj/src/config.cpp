#include "hydrolab/config.hpp"

#include "hydrolab/io.hpp"
#include "hydrolab/test_functions.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace hydrolab {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x)) throw ConfigError(key, "'" + v + "' is not a finite number");
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  long x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key, "'" + v + "' is not an integer");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key, "'" + v + "' is not an unsigned 64-bit integer");
  return x;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

template <typename T>
std::string join(const std::vector<T>& v, auto&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

std::string str(double v) { return format_double(v); }

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

Field real(std::string key, double RunConfig::*member, double lo, double hi, bool open_lo) {
  return {key,
          [=](RunConfig& c, const std::string& v) {
            const double x = to_double(key, v);
            const bool above = open_lo ? x > lo : x >= lo;
            require(above && x <= hi, key,
                    v + " outside " + (open_lo ? "(" : "[") + str(lo) + ", " + str(hi) + "]");
            c.*member = x;
          },
          [=](const RunConfig& c) { return str(c.*member); }};
}

Field integer(std::string key, int RunConfig::*member, long lo, long hi) {
  return {key,
          [=](RunConfig& c, const std::string& v) {
            const long x = to_long(key, v);
            require(x >= lo && x <= hi, key, v + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            c.*member = static_cast<int>(x);
          },
          [=](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field choice(std::string key, std::string RunConfig::*member, std::vector<std::string> allowed) {
  return {key,
          [=](RunConfig& c, const std::string& v) {
            for (const auto& a : allowed) {
              if (a == v) {
                c.*member = v;
                return;
              }
            }
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError(key, "'" + v + "' is not one of " + list);
          },
          [=](const RunConfig& c) { return c.*member; }};
}

Field real_list(std::string key, std::vector<double> RunConfig::*member, double lo, double hi, bool open_lo) {
  return {key,
          [=](RunConfig& c, const std::string& v) {
            std::vector<double> out;
            for (const auto& item : split(v, ',')) {
              const double x = to_double(key, item);
              const bool above = open_lo ? x > lo : x >= lo;
              require(above && x <= hi, key, item + " outside " + (open_lo ? "(" : "[") + str(lo) + ", " + str(hi) + "]");
              out.push_back(x);
            }
            c.*member = std::move(out);
          },
          [=](const RunConfig& c) { return join(c.*member, str); }};
}

Field integer_list(std::string key, std::vector<long> RunConfig::*member, long lo, long hi) {
  return {key,
          [=](RunConfig& c, const std::string& v) {
            std::vector<long> out;
            for (const auto& item : split(v, ',')) {
              const long x = to_long(key, item);
              require(x >= lo && x <= hi, key,
                      item + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
              out.push_back(x);
            }
            require(!out.empty(), key, "needs at least one value");
            c.*member = std::move(out);
          },
          [=](const RunConfig& c) { return join(c.*member, [](long x) { return std::to_string(x); }); }};
}

void check_function_id(const std::string& key, const std::string& id) {
  try {
    (void)catalogue_function(id);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key, "unknown test function id '" + id + "'");
  }
}

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back({"experiment", [](RunConfig& c, const std::string& v) { c.experiment = v; },
                 [](const RunConfig& c) { return c.experiment; }});
    f.push_back({"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
                 [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); }});
    f.push_back(choice("model", &RunConfig::model, {"sep", "zrp"}));
    f.push_back(real("h_left", &RunConfig::h_left, 0.0, 1e6, true));
    f.push_back(real("h_right", &RunConfig::h_right, 0.0, 1e6, true));
    f.push_back(real_list("g", &RunConfig::g, 0.0, 1e6, true));
    f.push_back(integer("n_max", &RunConfig::n_max, 1, 255));
    f.push_back(integer("d", &RunConfig::d, 1, 3));
    f.push_back(integer_list("N", &RunConfig::N, 2, 100000));
    f.push_back(real("nu", &RunConfig::nu, 0.0, 1e6, true));
    f.push_back(integer("sites", &RunConfig::sites, 1, 12));
    f.push_back(integer_list("grid", &RunConfig::grid, 3, 100000));
    f.push_back(real("pde_dt", &RunConfig::pde_dt, 0.0, 1.0, true));
    f.push_back(choice("scheme", &RunConfig::scheme, {"backward-euler", "crank-nicolson", "explicit"}));
    f.push_back(real("tolerance", &RunConfig::tolerance, 0.0, 1e6, true));
    f.push_back({"paths",
                 [](RunConfig& c, const std::string& v) {
                   const long x = to_long("paths", v);
                   require(x >= 1 && x <= 1000000, "paths", v + " outside [1, 1000000]");
                   c.paths = static_cast<std::size_t>(x);
                 },
                 [](const RunConfig& c) { return std::to_string(c.paths); }});
    f.push_back(real("t_end", &RunConfig::t_end, 0.0, 1e6, true));
    f.push_back(real("sample_dt", &RunConfig::sample_dt, 0.0, 1e3, true));
    f.push_back(choice("burn_in", &RunConfig::burn_in, {"auto", "none"}));
    f.push_back(real("z_limit", &RunConfig::z_limit, 0.0, 100.0, true));
    f.push_back(real("min_pass", &RunConfig::min_pass, 0.0, 1.0, true));
    f.push_back(real_list("lags", &RunConfig::lags, 0.0, 1e3, false));
    f.push_back(real_list("eps", &RunConfig::eps, 0.0, 1.0, true));
    f.push_back(real("x0", &RunConfig::x0, 0.0, 1.0, true));
    f.push_back(real("window", &RunConfig::window, 0.0, 1e3, true));
    f.push_back({"functions",
                 [](RunConfig& c, const std::string& v) {
                   auto ids = split(v, ',');
                   for (const auto& id : ids) check_function_id("functions", id);
                   c.functions = std::move(ids);
                 },
                 [](const RunConfig& c) { return join(c.functions, [](const std::string& s) { return s; }); }});
    f.push_back({"pairs",
                 [](RunConfig& c, const std::string& v) {
                   std::vector<std::pair<std::string, std::string>> out;
                   for (const auto& item : split(v, ',')) {
                     const auto parts = split(item, ':');
                     require(parts.size() == 2, "pairs", "'" + item + "' is not of the form f:g");
                     check_function_id("pairs", parts[0]);
                     check_function_id("pairs", parts[1]);
                     out.emplace_back(parts[0], parts[1]);
                   }
                   c.pairs = std::move(out);
                 },
                 [](const RunConfig& c) {
                   return join(c.pairs, [](const auto& p) { return p.first + ":" + p.second; });
                 }});
    f.push_back(integer("gauge_samples", &RunConfig::gauge_samples, 1, 10000));
    f.push_back({"out", [](RunConfig& c, const std::string& v) { c.out = v; },
                 [](const RunConfig& c) { return c.out; }});
    return f;
  }();
  return fields;
}

const Field& field(const std::string& key) {
  for (const auto& f : schema()) {
    if (f.key == key) return f;
  }
  throw ConfigError(key, "unknown key");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : schema()) keys.push_back(f.key);
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  field(key).set(config, trim(value));
}

std::string config_value(const RunConfig& config, const std::string& key) { return field(key).get(config); }

RunConfig parse_config(std::string_view text, const DefaultsProvider& defaults,
                       const std::optional<std::string>& experiment_override,
                       std::optional<std::uint64_t> seed_override) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::istringstream is{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    (void)field(key);
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
    entries.emplace_back(std::move(key), trim(std::string_view(line).substr(eq + 1)));
  }

  std::string experiment;
  for (const auto& [k, v] : entries) {
    if (k == "experiment") experiment = v;
  }
  if (experiment_override) experiment = *experiment_override;
  if (experiment.empty()) throw ConfigError("experiment", "missing");

  RunConfig config = defaults(experiment);
  config.experiment = experiment;
  for (const auto& [k, v] : entries) {
    if (k != "experiment") set_config_value(config, k, v);
  }
  if (seed_override) config.seed = seed_override;
  if (!config.seed) throw ConfigError("seed", "a master seed is mandatory");
  return config;
}

std::string canonical_text(const RunConfig& config) {
  std::string out;
  for (const auto& f : schema()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string config_hash(const RunConfig& config) { return hex64(fnv1a64(canonical_text(config))); }

}  // namespace hydrolab
