// Runs the catalogue experiments behind each acceptance criterion with their
// default settings and prints one PASS/FAIL line per criterion.

#include "hydrolab/experiments.hpp"
#include "hydrolab/io.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace {

struct Criterion {
  int number;
  std::string title;
  std::vector<std::string> experiments;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c = {
      {1, "quantum-classical restriction", {"consistency-sep", "consistency-zrp"}},
      {2, "gauge covariance", {"gauge-covariance"}},
      {3, "stationary state, uniqueness and lifted classical state", {"stationary-uniqueness", "lift-state"}},
      {4, "zero range product form", {"profile-zrp"}},
      {5, "exclusion stationary profile", {"profile-sep"}},
      {6, "hydrodynamic convergence", {"hydro-convergence"}},
      {7, "long-range covariance", {"long-range", "static-covariance"}},
      {8, "regression", {"regression"}},
      {9, "chaoticity", {"chaoticity"}},
      {10, "local equilibrium", {"local-equilibrium"}},
      {11, "Ornstein-Uhlenbeck cross-validation", {"ou-crosscheck"}},
      {12, "numerical infrastructure", {"numerics"}},
  };
  return c;
}

// Worst gating check of a report, for the summary line.
std::string worst_check(const hydrolab::RunReport& r) {
  const hydrolab::Check* worst = nullptr;
  double score = -1.0;
  int passed = 0, gating = 0;
  for (const auto& c : r.result.checks) {
    if (!c.gating) continue;
    ++gating;
    passed += c.pass ? 1 : 0;
    const double s = c.statistical ? std::abs(c.z) / 3.0 : (c.tolerance > 0 ? std::abs(c.value) / c.tolerance : 0.0);
    const double rank = (c.pass ? 0.0 : 1e6) + s;
    if (rank > score) {
      score = rank;
      worst = &c;
    }
  }
  std::string out = std::to_string(passed) + "/" + std::to_string(gating) + " checks";
  if (worst) {
    out += ", worst " + worst->id + " [" + worst->statistic + "] ";
    out += worst->statistical ? "z=" + hydrolab::format_double(worst->z)
                              : "value=" + hydrolab::format_double(worst->value) +
                                    " tol=" + hydrolab::format_double(worst->tolerance);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::uint64_t seed = 2718;
  std::vector<int> only;
  std::string out;
  app.add_option("--seed", seed, "master seed");
  app.add_option("--only", only, "criterion numbers to run");
  app.add_option("--out", out, "directory for the experiment reports");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(only.begin(), only.end());
  int failures = 0, ran = 0;
  for (const auto& crit : criteria()) {
    if (!selected.empty() && !selected.contains(crit.number)) continue;
    ++ran;
    bool pass = true;
    std::string detail;
    for (const auto& id : crit.experiments) {
      hydrolab::RunConfig config = hydrolab::default_config(id);
      config.seed = seed;
      std::string line;
      try {
        hydrolab::RunReport report = hydrolab::run(config);
        if (!out.empty()) hydrolab::write_report(report, std::filesystem::path(out) / id);
        pass = pass && report.result.pass;
        char time[32];
        std::snprintf(time, sizeof time, "%.1f s", report.wall_seconds);
        line = id + " " + (report.result.pass ? "pass" : "fail") + " (" + worst_check(report) + "; " + time + ")";
      } catch (const std::exception& e) {
        pass = false;
        line = id + " error: " + e.what();
      }
      detail += (detail.empty() ? "" : "; ") + line;
    }
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", crit.number, crit.title.c_str(),
                detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed (seed %llu)\n", ran - failures, ran, static_cast<unsigned long long>(seed));
  return failures == 0 ? 0 : 1;
}
