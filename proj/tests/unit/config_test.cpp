#include "doctest.h"

#include "hydrolab/config.hpp"
#include "hydrolab/experiments.hpp"
#include "hydrolab/io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hydrolab;

namespace {

RunConfig parse(const std::string& text) { return parse_config(text, default_config); }

std::string error_field(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse(
      "# comment line\n"
      "experiment = long-range\n"
      "seed = 12345678901234\n"
      "N = 16, 32   # trailing comment\n"
      "h_left = 0.7\n"
      "pairs = bump-0.30-0.20:bump-0.70-0.20\n");
  CHECK(c.experiment == "long-range");
  CHECK(*c.seed == 12345678901234ULL);
  CHECK(c.N == std::vector<long>{16, 32});
  CHECK(c.h_left == 0.7);
  REQUIRE(c.pairs.size() == 1);
  CHECK(c.pairs[0].second == "bump-0.70-0.20");
  CHECK(c.tolerance == default_config("long-range").tolerance);
}

TEST_CASE("config errors name the field") {
  CHECK(error_field("seed = 1\n") == "experiment");
  CHECK(error_field("experiment = long-range\n") == "seed");
  CHECK(error_field("experiment = nonsense\nseed = 1\n") == "experiment");
  CHECK(error_field("experiment = long-range\nseed = 1\ncolour = red\n") == "colour");
  CHECK(error_field("experiment = long-range\nseed = 1\nseed = 2\n") == "seed");
  CHECK(error_field("experiment = long-range\nseed = 1\nN = 0\n") == "N");
  CHECK(error_field("experiment = long-range\nseed = 1\nh_left = -0.5\n") == "h_left");
  CHECK(error_field("experiment = long-range\nseed = 1\nt_end = abc\n") == "t_end");
  CHECK(error_field("experiment = long-range\nseed = 1\nmodel = ising\n") == "model");
  CHECK(error_field("experiment = long-range\nseed = 1\npairs = bump-0.30-0.20\n") == "pairs");
  CHECK(error_field("experiment = long-range\nseed = 1\nfunctions = nope\n") == "functions");
  CHECK(error_field("experiment = long-range\nseed = -3\n") == "seed");
  CHECK(error_field("experiment = long-range\nseed = 1\nno equals sign\n").empty());
}

TEST_CASE("overrides") {
  const RunConfig c = parse_config("experiment = long-range\n", default_config, std::string("regression"), 7);
  CHECK(c.experiment == "regression");
  CHECK(*c.seed == 7);
  CHECK(c.lags == default_config("regression").lags);
}

TEST_CASE("canonical text round trip and hash") {
  RunConfig c = default_config("regression");
  c.seed = 99;
  c.lags = {0.05, 0.1};
  const std::string text = canonical_text(c);
  CHECK(text.find("lags = 0.050000000000000003, 0.10000000000000001\n") != std::string::npos);
  const RunConfig back = parse(text);
  CHECK(canonical_text(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  c.seed = 100;
  CHECK(config_hash(c) != config_hash(back));
  CHECK(config_keys().front() == "experiment");
  CHECK(config_value(c, "seed") == "100");
  set_config_value(c, "paths", "5");
  CHECK(c.paths == 5);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");

  CsvTable t({"name", "value"});
  t.row().cell("a,b").cell(1.0 / 3.0);
  t.row().cell("plain").cell(7);
  CHECK(t.str() == "name,value\n\"a,b\",0.33333333333333331\nplain,7\n");

  nlohmann::json j = {{"b", 0.1}, {"a", {1, 2.5}}, {"c", NAN}};
  const std::string text = to_json_text(j, 0);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("null") != std::string::npos);
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  CHECK(nlohmann::json::parse(text)["b"].get<double>() == 0.1);

  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("catalogue") {
  const auto& cat = catalogue();
  CHECK(std::is_sorted(cat.begin(), cat.end(), [](const auto& a, const auto& b) { return a.id < b.id; }));
  for (const char* id : {"consistency-sep", "consistency-zrp", "gauge-covariance", "stationary-uniqueness",
                         "lift-state", "profile-zrp", "profile-sep", "hydro-convergence", "static-covariance",
                         "long-range", "regression", "chaoticity", "local-equilibrium", "ou-crosscheck", "numerics"}) {
    CHECK_NOTHROW(find_experiment(id));
  }
  CHECK(find_experiment("long-range").anchor.find("inverse Dirichlet Laplacian") != std::string::npos);
  CHECK(find_experiment("consistency-sep").anchor.find("restriction") != std::string::npos);
  for (const auto& e : cat) {
    CHECK_FALSE(e.anchor.empty());
    CHECK_FALSE(default_config(e.id).seed.has_value());
  }
  try {
    find_experiment("bogus");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "experiment");
    CHECK(std::string(e.what()).find("profile-sep") != std::string::npos);
  }
}

TEST_CASE("experiment report") {
  RunConfig c = default_config("consistency-sep");
  c.seed = 1;
  RunReport report = run(c);
  CHECK(report.result.pass);
  CHECK(exit_status(report) == 0);
  const auto dir = std::filesystem::temp_directory_path() / "hydrolab-report-test";
  std::filesystem::remove_all(dir);
  write_report(report, dir);
  const auto j = nlohmann::json::parse(read_file(dir / "report.json"));
  CHECK(j["config_hash"] == report.hash);
  CHECK(j["checks"].is_array());
  for (const auto& f : report.files) {
    CHECK(std::filesystem::exists(dir / f));
    if (f.ends_with(".csv")) CHECK(read_file(dir / f).rfind("# config " + report.hash + "\n", 0) == 0);
  }
  std::filesystem::remove_all(dir);

  RunConfig unseeded = default_config("consistency-sep");
  CHECK_THROWS_AS(run(unseeded), ConfigError);

  report.result.pass = false;
  CHECK(exit_status(report) == 1);
}

TEST_CASE("check helpers") {
  CHECK(deterministic_check("a", "s", 1e-13, 1e-12).pass);
  CHECK_FALSE(deterministic_check("a", "s", 1e-12, 1e-12).pass);
  CHECK(deterministic_check("a", "s", 1e-12, 1e-12, true).pass);
  CHECK(condition_check("a", "s", true).value == 1.0);
  CHECK_FALSE(condition_check("a", "s", false).pass);
}
