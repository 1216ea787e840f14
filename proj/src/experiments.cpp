#include "hydrolab/experiments.hpp"

#include "hydrolab/classical.hpp"
#include "hydrolab/fluctuation.hpp"
#include "hydrolab/hydro.hpp"
#include "hydrolab/io.hpp"
#include "hydrolab/lattice.hpp"
#include "hydrolab/oracles.hpp"
#include "hydrolab/ornstein_uhlenbeck.hpp"
#include "hydrolab/quantum.hpp"
#include "hydrolab/rng.hpp"
#include "hydrolab/test_functions.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <chrono>
#include <map>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace hydrolab {

namespace {

constexpr const char* kVersion = "1.0.0";

using Clock = std::chrono::steady_clock;

/// Short form for labels; reports carry the full values.
std::string label_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------
// checks and pass rules

Check from_hypothesis(const HypothesisCheck& h, std::string id) {
  Check c;
  c.id = std::move(id);
  c.statistic = h.statistic;
  c.value = h.value;
  c.std_error = h.std_error;
  c.expected = h.expected;
  c.z = h.z;
  c.statistical = true;
  c.pass = h.pass;
  return c;
}

Check statistical_check(std::string id, std::string statistic, const CovarianceEstimate& e, double expected,
                        double z_limit) {
  return from_hypothesis(make_check(id, std::move(statistic), e, expected, z_limit), id);
}

Check diagnostic(Check c) {
  c.gating = false;
  return c;
}

bool gating_checks_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.gating || c.pass; });
}

/// At least ceil(fraction * count) of the gating checks with this id pass.
bool family_passes(const std::vector<Check>& checks, const std::string& id, double fraction) {
  std::size_t count = 0, passed = 0;
  for (const auto& c : checks) {
    if (c.id != id || !c.gating) continue;
    ++count;
    if (c.pass) ++passed;
  }
  const auto needed = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(count) - 1e-9));
  return count > 0 && passed >= needed;
}

/// Every gating check outside the families passes, and each family passes
/// its fraction rule.
bool verdict(const std::vector<Check>& checks, const std::vector<std::string>& families, double fraction) {
  for (const auto& c : checks) {
    const bool in_family = std::find(families.begin(), families.end(), c.id) != families.end();
    if (c.gating && !in_family && !c.pass) return false;
  }
  for (const auto& f : families) {
    if (!family_passes(checks, f, fraction)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// models

RateFunction rate_table(const std::vector<double>& table) {
  if (table.empty()) return constant_rate();
  return [table](int k) -> double {
    if (k <= 0) return 0.0;
    return table[std::min(static_cast<std::size_t>(k), table.size()) - 1];
  };
}

bool is_sep(const RunConfig& c) { return c.model == "sep"; }

ClassicalModel sep_model(const RunConfig& c, const LatticeGeometry& g) {
  if (!(c.h_left < 1.0)) throw ConfigError("h_left", "exclusion reservoir densities must lie in (0, 1)");
  if (!(c.h_right < 1.0)) throw ConfigError("h_right", "exclusion reservoir densities must lie in (0, 1)");
  return make_exclusion_model(
      g, two_sided_reservoir(sep_entry_rate_for_density(c.h_left), sep_entry_rate_for_density(c.h_right)));
}

ClassicalModel zrp_model(const RunConfig& c, const LatticeGeometry& g, int n_max) {
  return make_zero_range_model(g, two_sided_reservoir(c.h_left, c.h_right), rate_table(c.g), n_max);
}

ClassicalModel classical_model(const RunConfig& c, const LatticeGeometry& g) {
  return is_sep(c) ? sep_model(c, g) : zrp_model(c, g, c.n_max);
}

FluxFunction flux_for(const RunConfig& c, const ClassicalModel& m) {
  return is_sep(c) ? identity_flux() : zrp_flux_function(m);
}

/// Dirichlet data for Phi: reservoir densities for the exclusion process
/// (Phi = identity), reservoir fugacities h / r for the zero range process.
BoundaryData boundary_for(const RunConfig& c) { return {c.h_left, c.h_right}; }

std::function<double(double)> stationary_density(const BoundaryData& h, const FluxFunction& phi) {
  return [h, phi](double x) { return phi.inverse(h.left + (h.right - h.left) * x); };
}

LatticeGeometry interval_lattice(const RunConfig& c, long N) {
  if (c.d != 1) throw ConfigError("d", "this experiment is one-dimensional");
  return build_lattice(1, N, c.nu, Region::unit_cube(1));
}

/// Stationary site means and covariances: exact moments for the exclusion
/// process, the product measure for the zero range process.
struct ExactMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

ExactMoments exact_moments(const RunConfig& c, const ClassicalModel& m, const LatticeGeometry& g) {
  if (is_sep(c)) {
    const SepMoments s = sep_moment_oracle(m, g);
    return {s.density, s.covariance()};
  }
  const ZeroRangeProductMeasure p = zrp_product_measure(m, g);
  return {p.density(), Eigen::MatrixXd(p.variance().asDiagonal())};
}

Eigen::MatrixXd product_marginals(const RunConfig& c, const ClassicalModel& m, const Eigen::VectorXd& density) {
  if (is_sep(c)) return bernoulli_marginals(density);
  Eigen::MatrixXd out(density.size(), m.cap + 1);
  for (Eigen::Index s = 0; s < density.size(); ++s) {
    out.row(s) = zero_range_marginal(m, zrp_fugacity_for_density(m, density(s))).transpose();
  }
  return out;
}

Eigen::VectorXd site_positions(const LatticeGeometry& g) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(g.size()));
  for (std::size_t s = 0; s < g.size(); ++s) x(static_cast<Eigen::Index>(s)) = g.position(s)(0);
  return x;
}

Eigen::Index samples_for(const RunConfig& c) {
  const double n = std::round(c.t_end / c.sample_dt);
  if (n < 8) throw ConfigError("t_end", "covers fewer than 8 sampling steps");
  return static_cast<Eigen::Index>(n) + 1;
}

Eigen::Index steps_of(const RunConfig& c, const std::string& key, double t) {
  const double n = t / c.sample_dt;
  if (std::abs(n - std::round(n)) > 1e-6) {
    throw ConfigError(key, format_double(t) + " is not a multiple of sample_dt");
  }
  return static_cast<Eigen::Index>(std::round(n));
}

EnsembleOptions ensemble_options(const RunConfig& c, std::uint64_t first_stream = 0) {
  EnsembleOptions o;
  o.paths = c.paths;
  o.samples = samples_for(c);
  o.sample_dt = c.sample_dt;
  o.seed = *c.seed;
  o.first_stream = first_stream;
  o.burn_in = c.burn_in == "auto";
  return o;
}

Observable observe(const LatticeGeometry& g, const TestFunction& f, const Eigen::VectorXd& mean) {
  return fluctuation_observable(g, lattice_values(f, g), mean, f.id);
}

double burn_in_time(const std::vector<OccupationPath>& paths, Eigen::Index full_samples) {
  double longest = 0.0;
  for (const auto& p : paths) {
    longest = std::max(longest, static_cast<double>(full_samples - p.samples()) * p.dt);
  }
  return longest;
}

std::string function_catalogue_csv() {
  CsvTable t({"id", "kind", "center", "half_width", "mode", "amplitude"});
  for (const auto& f : test_function_catalogue()) {
    t.row().cell(f.id).cell(f.kind == TestFunction::Kind::Bump ? "bump" : "sine").cell(f.center).cell(
        f.half_width).cell(f.mode).cell(f.amplitude);
  }
  return t.str();
}

/// Relative error when the reference is resolvable, otherwise absolute error
/// against `scale`.
Check relative_check(std::string id, std::string statistic, double value, double reference, double scale,
                     double tolerance) {
  const bool relative = std::abs(reference) > 1e-3 * scale;
  const double err = relative ? std::abs(value - reference) / std::abs(reference) : std::abs(value - reference) / scale;
  Check c = deterministic_check(std::move(id), std::move(statistic) + (relative ? " (relative)" : " (absolute/scale)"),
                                err, tolerance);
  c.expected = reference;
  return c;
}

/// Integral over the whole real line of an expression in a bump of half
/// width w centred at 0.
double bump_line_integral(double w, const std::function<double(double)>& u) {
  return 2.0 * w * integrate_unit_interval([&](double s) { return u(w * (2.0 * s - 1.0)); });
}

// ---------------------------------------------------------------------------
// quantum-classical experiments

struct SmallSystem {
  LatticeGeometry geometry;
  ClassicalModel model;
  FockSpace space;
  LindbladModel lindblad;
  std::string label;
};

SmallSystem small_sep(const RunConfig& c) {
  LatticeGeometry g = build_interval(c.sites + 1);
  ClassicalModel m = sep_model(c.model == "sep" ? c : RunConfig{}, g);
  FockSpace space(g.size(), Statistics::Fermion);
  LindbladModel L = assemble_lindblad(m, space, g);
  return {std::move(g), std::move(m), std::move(space), std::move(L), "sep"};
}

SmallSystem small_zrp(const RunConfig& c, int sites, int n_max) {
  LatticeGeometry g = build_interval(sites + 1);
  RunConfig zc = c;
  if (c.model != "zrp") {
    zc.h_left = 0.3;
    zc.h_right = 0.1;
  }
  ClassicalModel m = zrp_model(zc, g, n_max);
  FockSpace space(g.size(), Statistics::Boson, n_max);
  LindbladModel L = assemble_lindblad(m, space, g);
  return {std::move(g), std::move(m), std::move(space), std::move(L), "zrp"};
}

std::string generator_csv(const Eigen::SparseMatrix<double, Eigen::RowMajor>& G) {
  CsvTable t({"from", "to", "rate"});
  for (Eigen::Index r = 0; r < G.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(G, r); it; ++it) {
      t.row().cell(static_cast<long>(it.row())).cell(static_cast<long>(it.col())).cell(it.value());
    }
  }
  return t.str();
}

void restriction_checks(const SmallSystem& s, const RunConfig& c, ExperimentResult& r, const std::string& tag) {
  const auto t0 = Clock::now();
  const auto G = build_generator_matrix(s.model, s.geometry);
  const LindbladModel L = assemble_lindblad(s.model, s.space, s.geometry);
  const double dev = check_classical_restriction(L, G);
  const double elapsed = seconds_since(t0);
  r.checks.push_back(deterministic_check("restriction", tag + " max |G(F) - G_cl F|", dev, c.tolerance));
  r.checks.push_back(deterministic_check("runtime", tag + " seconds", elapsed, 1.0));
  r.metrics[tag] = {{"sites", s.geometry.size()},
                    {"cap", s.model.cap},
                    {"dimension", s.space.dimension()},
                    {"jump_operators", L.jumps.size()},
                    {"max_deviation", dev},
                    {"seconds", elapsed}};
  r.artifacts.push_back({tag + "_generator.csv", generator_csv(G)});
}

ExperimentResult run_consistency_sep(const RunConfig& c) {
  ExperimentResult r;
  RunConfig sc = c;
  sc.model = "sep";
  restriction_checks(small_sep(sc), sc, r, "sep");
  r.pass = gating_checks_pass(r.checks);
  return r;
}

ExperimentResult run_consistency_zrp(const RunConfig& c) {
  ExperimentResult r;
  RunConfig zc = c;
  zc.model = "zrp";
  restriction_checks(small_zrp(zc, c.sites, c.n_max), zc, r, "zrp");
  // the identity holds at every truncation level
  restriction_checks(small_zrp(zc, c.sites, c.n_max + 2), zc, r, "zrp_cap_plus_2");
  r.pass = gating_checks_pass(r.checks);
  return r;
}

ExperimentResult run_gauge_covariance(const RunConfig& c) {
  ExperimentResult r;
  Engine rng = make_stream(*c.seed, 0);
  for (const SmallSystem& s : {small_sep(c), small_zrp(c, std::max(1, c.sites - 1), c.n_max)}) {
    const double dev = check_gauge_covariance(s.lindblad, s.space, c.gauge_samples, rng);
    r.checks.push_back(deterministic_check("gauge-covariance", s.label + " max |gamma G(A) - G(gamma A)|", dev,
                                           c.tolerance));
    r.metrics[s.label] = {{"dimension", s.space.dimension()}, {"samples", c.gauge_samples}, {"max_deviation", dev}};
  }
  r.pass = gating_checks_pass(r.checks);
  return r;
}

ExperimentResult run_stationary_uniqueness(const RunConfig& c) {
  ExperimentResult r;
  for (const SmallSystem& s : {small_sep(c), small_zrp(c, std::max(1, c.sites - 1), c.n_max)}) {
    const StationaryState st = stationary_state(s.lindblad);
    r.checks.push_back(condition_check("null-space", s.label + " dim ker G_* = 1", st.null_dimension == 1));
    r.checks.push_back(condition_check("commutant", s.label + " commutant dimension = 1", st.commutant_dimension == 1));
    r.checks.push_back(deterministic_check("residual", s.label + " max |G_*(rho)|", st.residual, c.tolerance));
    r.metrics[s.label] = {{"dimension", s.space.dimension()},
                          {"null_dimension", st.null_dimension},
                          {"commutant_dimension", st.commutant_dimension},
                          {"residual", st.residual},
                          {"hermitization_shift", st.hermitization_shift}};
    std::ostringstream os;
    write_triplets(os, st.rho, 1e-14);
    r.artifacts.push_back({s.label + "_stationary_rho.txt", os.str()});
  }
  r.pass = gating_checks_pass(r.checks);
  return r;
}

ExperimentResult run_lift_state(const RunConfig& c) {
  ExperimentResult r;
  for (const SmallSystem& s : {small_sep(c), small_zrp(c, std::max(1, c.sites - 1), c.n_max)}) {
    const auto G = build_generator_matrix(s.model, s.geometry);
    const StationaryDistribution pi = stationary_distribution(G);
    const DenseOperator lifted = lift_state(pi.probability);
    const double residual = schrodinger_generator(s.lindblad, lifted).cwiseAbs().maxCoeff();
    const StationaryState st = stationary_state(s.lindblad);
    const double match = (lifted - st.rho).cwiseAbs().maxCoeff();
    r.checks.push_back(condition_check("classical-uniqueness", s.label + " one closed class", pi.unique()));
    r.checks.push_back(deterministic_check("lift-residual", s.label + " max |G_*(lift pi)|", residual, c.tolerance));
    r.checks.push_back(
        deterministic_check("lift-match", s.label + " max |lift pi - rho_stationary|", match, 10.0 * c.tolerance));
    r.metrics[s.label] = {{"states", pi.probability.size()}, {"residual", residual}, {"match", match}};
    CsvTable t({"index", "occupation", "pi"});
    for (Eigen::Index i = 0; i < pi.probability.size(); ++i) {
      std::string occ;
      for (auto n : s.space.occupation(i).n) occ += std::to_string(n);
      t.row().cell(static_cast<long>(i)).cell(occ).cell(pi.probability(i));
    }
    r.artifacts.push_back({s.label + "_classical_stationary.csv", t.str()});
  }
  r.pass = gating_checks_pass(r.checks);
  return r;
}

// ---------------------------------------------------------------------------
// stationary profiles

ExperimentResult run_profile_zrp(const RunConfig& c) {
  ExperimentResult r;
  RunConfig zc = c;
  zc.model = "zrp";

  // exact stationary vector of a small truncated system
  const LatticeGeometry small = build_interval(c.sites + 1);
  const ClassicalModel sm = zrp_model(zc, small, c.n_max);
  const ConfigurationSpace space(small.size(), sm.cap);
  const StationaryDistribution pi = stationary_distribution(build_generator_matrix(sm, small));
  const Eigen::Index sites = static_cast<Eigen::Index>(small.size());
  Eigen::MatrixXd marginals = Eigen::MatrixXd::Zero(sites, sm.cap + 1);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Configuration cfg = space.decode(i);
    for (Eigen::Index x = 0; x < sites; ++x) marginals(x, cfg.n[x]) += pi.probability(static_cast<Eigen::Index>(i));
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Configuration cfg = space.decode(i);
    double product = 1.0;
    for (Eigen::Index x = 0; x < sites; ++x) product *= marginals(x, cfg.n[x]);
    tv += std::abs(pi.probability(static_cast<Eigen::Index>(i)) - product);
  }
  tv *= 0.5;

  // fugacity read off the exact marginals, z = g(1) P(1) / P(0), and its
  // discrete harmonicity with the reservoir condition at the boundary
  Eigen::VectorXd z(sites);
  for (Eigen::Index x = 0; x < sites; ++x) z(x) = sm.g(1) * marginals(x, 1) / marginals(x, 0);
  double harmonic = 0.0;
  for (Eigen::Index x = 0; x < sites; ++x) {
    double res = 0.0;
    for (std::size_t y : small.neighbors(static_cast<std::size_t>(x))) res += z(static_cast<Eigen::Index>(y)) - z(x);
    res += -small.exit_multiplicity(static_cast<std::size_t>(x)) * z(x) + sm.entry[static_cast<std::size_t>(x)];
    harmonic = std::max(harmonic, std::abs(res));
  }
  const ZeroRangeProductMeasure oracle = zrp_product_measure(sm, small);
  const double oracle_gap = (z - oracle.fugacity).cwiseAbs().maxCoeff();

  r.checks.push_back(condition_check("uniqueness", "one closed class", pi.unique()));
  r.checks.push_back(deterministic_check("product-form", "TV(pi, product of marginals)", tv, 1e-8));
  r.checks.push_back(deterministic_check("harmonic-fugacity", "max fugacity equation residual", harmonic, c.tolerance));
  r.checks.push_back(diagnostic(deterministic_check("oracle-fugacity", "max |z_exact - z_oracle|", oracle_gap, 1e-8)));
  r.metrics["small_system"] = {{"sites", sites},
                               {"n_max", sm.cap},
                               {"states", space.size()},
                               {"total_variation", tv},
                               {"harmonic_residual", harmonic},
                               {"cap_mass", oracle.cap_mass()}};

  CsvTable mt({"site", "n", "exact", "product_measure"});
  for (Eigen::Index x = 0; x < sites; ++x) {
    for (int n = 0; n <= sm.cap; ++n) mt.row().cell(static_cast<long>(x)).cell(n).cell(marginals(x, n)).cell(oracle.marginals(x, n));
  }
  r.artifacts.push_back({"marginals.csv", mt.str()});

  // large system: product-measure density against the hydrodynamic profile
  const long N = c.N.front();
  const LatticeGeometry g = interval_lattice(c, N);
  const ClassicalModel m = zrp_model(zc, g, c.n_max);
  const ZeroRangeProductMeasure p = zrp_product_measure(m, g);
  const FluxFunction phi = zrp_flux_function(m);
  const auto qbar = stationary_density(boundary_for(zc), phi);
  const Eigen::VectorXd x = site_positions(g);
  const Eigen::VectorXd rho = p.density();
  double sup = 0.0;
  CsvTable pt({"x", "fugacity", "density", "hydro_density"});
  for (Eigen::Index s = 0; s < x.size(); ++s) {
    const double q = qbar(x(s));
    sup = std::max(sup, std::abs(rho(s) - q));
    pt.row().cell(x(s)).cell(p.fugacity(s)).cell(rho(s)).cell(q);
  }
  r.checks.push_back(deterministic_check("hydro-profile", "sup |rho_N - qbar| at N = " + std::to_string(N), sup,
                                         2.0 / static_cast<double>(N)));
  r.metrics["profile"] = {{"N", N}, {"sup_error", sup}, {"cap_mass", p.cap_mass()}};
  r.artifacts.push_back({"profile.csv", pt.str()});
  r.pass = gating_checks_pass(r.checks);
  return r;
}

ExperimentResult run_profile_sep(const RunConfig& c) {
  ExperimentResult r;
  RunConfig sc = c;
  sc.model = "sep";
  const long N = c.N.front();
  const LatticeGeometry g = interval_lattice(sc, N);
  const ClassicalModel m = sep_model(sc, g);
  const SepMoments oracle = sep_moment_oracle(m, g);
  const auto qbar = stationary_density(boundary_for(sc), identity_flux());
  const Eigen::VectorXd x = site_positions(g);

  double sup = 0.0;
  for (Eigen::Index s = 0; s < x.size(); ++s) sup = std::max(sup, std::abs(oracle.density(s) - qbar(x(s))));
  r.checks.push_back(deterministic_check("oracle-ramp", "sup |oracle - qbar|", sup, 2.0 / static_cast<double>(N)));

  const EnsembleOptions opts = ensemble_options(sc);
  const auto paths = run_ensemble(m, g, bernoulli_marginals(oracle.density), opts);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(x.size(), x.size());
  const auto est = estimate_statistics(paths, identity);

  CsvTable t({"x", "monte_carlo", "std_error", "oracle", "hydro", "z"});
  int failures = 0;
  double worst = 0.0;
  for (Eigen::Index s = 0; s < x.size(); ++s) {
    Check ch = statistical_check("site-density", "site " + std::to_string(s + 1), est[static_cast<std::size_t>(s)],
                                 oracle.density(s), c.z_limit);
    worst = std::max(worst, std::abs(ch.z));
    if (!ch.pass) ++failures;
    t.row().cell(x(s)).cell(ch.value).cell(ch.std_error).cell(oracle.density(s)).cell(qbar(x(s))).cell(ch.z);
    r.checks.push_back(std::move(ch));
  }
  r.metrics = {{"N", N},
               {"sup_oracle_vs_hydro", sup},
               {"max_abs_z", worst},
               {"site_failures", failures},
               {"paths", paths.size()},
               {"burn_in_time", burn_in_time(paths, opts.samples)}};
  r.artifacts.push_back({"profile.csv", t.str()});
  r.pass = verdict(r.checks, {"site-density"}, c.min_pass);
  return r;
}

// ---------------------------------------------------------------------------
// hydrodynamic limit

ExperimentResult run_hydro_convergence(const RunConfig& c) {
  ExperimentResult r;
  const BoundaryData h = boundary_for(c);
  const double t = c.t_end;

  // a profile away from stationarity that keeps the boundary values
  const LatticeGeometry probe = interval_lattice(c, c.N.front());
  const FluxFunction phi = flux_for(c, classical_model(c, probe));
  const auto qbar = stationary_density(h, phi);
  double room = 0.3;
  for (int i = 0; i <= 100; ++i) {
    const double q = qbar(0.01 * i);
    room = std::min({room, q - phi.q_min, phi.q_max - q});
  }
  const double bump = 0.5 * room;
  auto q0 = [&](double x) { return qbar(x) + bump * std::sin(std::numbers::pi * x); };

  const MacroGrid grid(c.grid.front());
  PdeOptions pde;
  pde.dt = c.pde_dt;
  pde.scheme = c.scheme == "backward-euler" ? TimeScheme::BackwardEuler
               : c.scheme == "explicit"     ? TimeScheme::Explicit
                                            : TimeScheme::CrankNicolson;
  PdeDiagnostics diag;
  const DensityProfile solved = solve_pde(initial_profile(grid, q0, h, phi), h, phi, t, pde, &diag);

  std::vector<TestFunction> smear_fns;
  for (const auto& id : c.functions) smear_fns.push_back(catalogue_function(id));
  if (smear_fns.empty()) throw ConfigError("functions", "needs at least one smearing function");

  // smeared PDE profile: sum f q / sum f over the grid nodes
  std::vector<double> pde_values;
  for (const auto& f : smear_fns) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < solved.q.size(); ++i) {
      num += f(solved.x(i)) * solved.q(i);
      den += f(solved.x(i));
    }
    pde_values.push_back(num / den);
  }

  CsvTable t_csv({"N", "function", "empirical", "std_error", "pde", "error"});
  std::vector<double> errors;
  nlohmann::json per_n = nlohmann::json::array();
  const long n_min = *std::min_element(c.N.begin(), c.N.end());
  for (std::size_t k = 0; k < c.N.size(); ++k) {
    const long N = c.N[k];
    const LatticeGeometry g = interval_lattice(c, N);
    const ClassicalModel m = classical_model(c, g);
    const Eigen::VectorXd x = site_positions(g);
    Eigen::VectorXd density(x.size());
    for (Eigen::Index s = 0; s < x.size(); ++s) density(s) = q0(x(s));
    const Eigen::MatrixXd marginals = product_marginals(c, m, density);
    // more paths at larger N keep the sampling error shrinking like 1/N
    const std::size_t paths = c.paths * static_cast<std::size_t>(std::max(1L, N / n_min));
    std::vector<RunningMoments> moments(smear_fns.size());
    std::vector<Eigen::VectorXd> weights;
    for (const auto& f : smear_fns) {
      Eigen::VectorXd w = lattice_values(f, g);
      weights.push_back(w / w.sum());
    }
    const double micro_t = t * g.scale() * g.scale();
    for (std::size_t p = 0; p < paths; ++p) {
      Engine rng = make_stream(*c.seed, (k << 32) + p);
      Configuration c0 = sample_product_state(marginals, rng);
      Simulator sim(g, m, std::move(c0), std::move(rng));
      while (sim.step_until(micro_t)) {
      }
      Eigen::VectorXd n(x.size());
      for (Eigen::Index s = 0; s < x.size(); ++s) n(s) = sim.state().n[static_cast<std::size_t>(s)];
      for (std::size_t j = 0; j < smear_fns.size(); ++j) moments[j].push(weights[j].dot(n));
    }
    double err = 0.0, err_se = 0.0;
    for (std::size_t j = 0; j < smear_fns.size(); ++j) {
      const double se = std::sqrt(moments[j].variance() / static_cast<double>(paths));
      const double e = std::abs(moments[j].mean - pde_values[j]);
      if (e > err) {
        err = e;
        err_se = se;
      }
      t_csv.row().cell(N).cell(smear_fns[j].id).cell(moments[j].mean).cell(se).cell(pde_values[j]).cell(e);
    }
    errors.push_back(err);
    per_n.push_back({{"N", N}, {"paths", paths}, {"sup_error", err}, {"std_error_at_sup", err_se}});
  }

  bool monotone = true;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) monotone = monotone && errors[k + 1] < errors[k];
  r.checks.push_back(condition_check("monotone", "sup error decreases along N", monotone));
  r.checks.push_back(deterministic_check("final-error", "sup error at N = " + std::to_string(c.N.back()),
                                         errors.back(), c.tolerance));
  r.checks.push_back(diagnostic(deterministic_check("mass-balance", "PDE mass balance", diag.mass_balance_error, 1e-8)));
  r.metrics = {{"t", t},
               {"perturbation_amplitude", bump},
               {"pde", {{"nodes", grid.interior()}, {"dt", diag.dt}, {"steps", diag.steps},
                        {"max_newton_iterations", diag.max_newton_iterations},
                        {"mass_balance_error", diag.mass_balance_error}}},
               {"runs", per_n}};
  r.artifacts.push_back({"smeared_profiles.csv", t_csv.str()});
  std::ostringstream pde_csv;
  write_profile_csv(pde_csv, solved);
  r.artifacts.push_back({"pde_profile.csv", pde_csv.str()});
  r.pass = gating_checks_pass(r.checks);
  return r;
}

// ---------------------------------------------------------------------------
// fluctuations

struct StationaryEnsemble {
  LatticeGeometry geometry;
  ClassicalModel model;
  FluxFunction phi;
  std::function<double(double)> qbar;
  ExactMoments exact;
  std::vector<OccupationPath> paths;
  double burn_in = 0.0;
};

StationaryEnsemble stationary_ensemble(const RunConfig& c, const Eigen::MatrixXd& integrands_for_sites = {},
                                       bool simulate = true) {
  LatticeGeometry g = interval_lattice(c, c.N.front());
  ClassicalModel m = classical_model(c, g);
  FluxFunction phi = flux_for(c, m);
  auto qbar = stationary_density(boundary_for(c), phi);
  ExactMoments ex = exact_moments(c, m, g);
  StationaryEnsemble e{std::move(g), std::move(m), std::move(phi), std::move(qbar), std::move(ex), {}, 0.0};
  if (simulate) {
    const EnsembleOptions opts = ensemble_options(c);
    e.paths = run_ensemble(e.model, e.geometry, product_marginals(c, e.model, e.exact.mean), opts, integrands_for_sites);
    e.burn_in = burn_in_time(e.paths, opts.samples);
  }
  return e;
}

ExperimentResult run_static_covariance(const RunConfig& c) {
  ExperimentResult r;
  if (c.pairs.empty()) throw ConfigError("pairs", "needs at least one test-function pair");
  const StationaryEnsemble e = stationary_ensemble(c);
  const BoundaryData h = boundary_for(c);

  std::map<std::string, std::vector<Eigen::VectorXd>> series;
  auto xi = [&](const std::string& id) -> const std::vector<Eigen::VectorXd>& {
    auto it = series.find(id);
    if (it == series.end()) {
      it = series.emplace(id, project_series(e.paths, observe(e.geometry, catalogue_function(id), e.exact.mean))).first;
    }
    return it->second;
  };

  CsvTable t({"f", "g", "monte_carlo", "std_error", "exact_finite_N", "z", "predicted_calibrated",
              "predicted_linear"});
  for (const auto& [fid, gid] : c.pairs) {
    const TestFunction& f = catalogue_function(fid);
    const TestFunction& g = catalogue_function(gid);
    const double exact = exact_static_covariance(e.geometry, e.exact.covariance, lattice_values(f, e.geometry),
                                                 lattice_values(g, e.geometry));
    const CovarianceEstimate est = static_covariance(xi(fid), xi(gid));
    Check ch = statistical_check("static-covariance", fid + " x " + gid, est, exact, c.z_limit);
    StaticPrediction pred = predicted_static_covariance(f, g, h, e.qbar, e.phi.chi);
    if (!is_sep(c)) pred.long_range_calibrated = pred.long_range_linear = 0.0;
    t.row().cell(fid).cell(gid).cell(ch.value).cell(ch.std_error).cell(exact).cell(ch.z).cell(pred.calibrated()).cell(
        pred.linear());
    r.checks.push_back(std::move(ch));
  }
  // centring with exact means leaves no drift in the sample mean
  for (const auto& [id, s] : series) {
    r.checks.push_back(diagnostic(statistical_check("centring", "mean xi(" + id + ")", batch_means(s), 0.0, c.z_limit)));
  }
  int passed = 0;
  for (const auto& ch : r.checks) passed += ch.id == "static-covariance" && ch.pass;
  r.metrics = {{"N", e.geometry.particle_count()},
               {"paths", e.paths.size()},
               {"burn_in_time", e.burn_in},
               {"pairs", c.pairs.size()},
               {"pairs_within_limit", passed},
               {"required_fraction", c.min_pass},
               {"mean_policy", "exact"},
               {"boundary_densities", {e.qbar(0.0), e.qbar(1.0)}}};
  r.artifacts.push_back({"static_covariance.csv", t.str()});
  r.artifacts.push_back({"test_functions.csv", function_catalogue_csv()});
  r.pass = verdict(r.checks, {"static-covariance"}, c.min_pass);
  return r;
}

/// Off-diagonal part N L^{-2} sum_{x != y} f_x C_xy g_y of the exact
/// two-point function.
double connected_off_site(const LatticeGeometry& g, const Eigen::MatrixXd& C, const Eigen::VectorXd& f,
                          const Eigen::VectorXd& h) {
  Eigen::MatrixXd off = C;
  off.diagonal().setZero();
  return exact_static_covariance(g, off, f, h);
}

ExperimentResult run_long_range(const RunConfig& c) {
  ExperimentResult r;
  if (!is_sep(c)) throw ConfigError("model", "the long-range oracle is the exclusion moment hierarchy");
  if (c.N.size() != 2) throw ConfigError("N", "needs exactly two sizes for the 1/N extrapolation");
  if (c.pairs.empty()) throw ConfigError("pairs", "needs at least one test-function pair");
  const BoundaryData h = boundary_for(c);
  const auto qbar = stationary_density(h, identity_flux());
  const double n1 = static_cast<double>(c.N[0]), n2 = static_cast<double>(c.N[1]);

  std::vector<std::pair<LatticeGeometry, Eigen::MatrixXd>> systems;
  for (long N : c.N) {
    LatticeGeometry g = interval_lattice(c, N);
    const ClassicalModel m = sep_model(c, g);
    Eigen::MatrixXd C = sep_moment_oracle(m, g).covariance();
    systems.emplace_back(std::move(g), std::move(C));
  }

  struct Row {
    std::string f, g;
    double lr1, lr2, extrapolated;
    StaticPrediction pred;
  };
  std::vector<Row> rows;
  double scale = 0.0;
  for (const auto& [fid, gid] : c.pairs) {
    const TestFunction& f = catalogue_function(fid);
    const TestFunction& g = catalogue_function(gid);
    Row row{fid, gid, 0, 0, 0, predicted_static_covariance(f, g, h, qbar, identity_flux().chi)};
    row.lr1 = connected_off_site(systems[0].first, systems[0].second, lattice_values(f, systems[0].first),
                                 lattice_values(g, systems[0].first));
    row.lr2 = connected_off_site(systems[1].first, systems[1].second, lattice_values(f, systems[1].first),
                                 lattice_values(g, systems[1].first));
    row.extrapolated = (n2 * row.lr2 - n1 * row.lr1) / (n2 - n1);
    scale = std::max(scale, std::abs(row.pred.long_range_calibrated));
    rows.push_back(row);
  }

  CsvTable t({"f", "g", "off_site_N1", "off_site_N2", "extrapolated", "calibrated", "linear", "local"});
  for (const auto& row : rows) {
    r.checks.push_back(relative_check("calibrated-form", row.f + " x " + row.g, row.extrapolated,
                                      row.pred.long_range_calibrated, scale, c.tolerance));
    r.checks.push_back(diagnostic(relative_check("linear-form", row.f + " x " + row.g, row.extrapolated,
                                                 row.pred.long_range_linear, scale, c.tolerance)));
    t.row().cell(row.f).cell(row.g).cell(row.lr1).cell(row.lr2).cell(row.extrapolated).cell(
        row.pred.long_range_calibrated).cell(row.pred.long_range_linear).cell(row.pred.local);
  }
  // a centred bump sees a strictly negative long-range term
  const TestFunction centred = catalogue_function("bump-0.50-0.20");
  const StaticPrediction cp = predicted_static_covariance(centred, centred, h, qbar, identity_flux().chi);
  const double jump = h.right - h.left;
  r.checks.push_back(condition_check("sign", "long-range term of bump-0.50-0.20 < 0",
                                     jump == 0.0 || cp.long_range_calibrated < 0.0));
  r.metrics = {{"N", c.N},
               {"prefactor_calibrated", jump * jump},
               {"prefactor_linear", jump},
               {"scale", scale},
               {"verdict_form", "calibrated"}};
  r.artifacts.push_back({"long_range.csv", t.str()});
  r.pass = gating_checks_pass(r.checks);
  return r;
}

/// Exact finite-N two-time function of the exclusion process: the first
/// moments close, d/dt E[n] = A E[n] + b with A the lattice Laplacian (in
/// macroscopic time) minus the reservoir loss h_b + r_b at boundary sites.
Eigen::MatrixXd sep_mean_dynamics(const LatticeGeometry& g, const ClassicalModel& m) {
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto i = static_cast<Eigen::Index>(x);
    for (std::size_t y : g.neighbors(x)) {
      A(i, static_cast<Eigen::Index>(y)) += 1.0;
      A(i, i) -= 1.0;
    }
    A(i, i) -= m.entry[x] + m.exits[x];
  }
  return g.scale() * g.scale() * A;
}

ExperimentResult run_regression(const RunConfig& c) {
  ExperimentResult r;
  if (c.pairs.empty()) throw ConfigError("pairs", "needs at least one test-function pair");
  if (c.lags.empty()) throw ConfigError("lags", "needs at least one lag");
  std::vector<Eigen::Index> lag_steps;
  for (double lag : c.lags) lag_steps.push_back(steps_of(c, "lags", lag));

  const StationaryEnsemble e = stationary_ensemble(c);
  const MacroGrid grid = MacroGrid::lattice_aligned(e.geometry);
  const Eigen::VectorXd x = site_positions(e.geometry);
  Eigen::VectorXd dphi(x.size());
  for (Eigen::Index s = 0; s < x.size(); ++s) dphi(s) = e.phi.dphi(e.qbar(x(s)));
  const LinearizedOperator L(grid, dphi);
  const LinearizedOperator wrong(grid, 2.0 * dphi);
  const double norm = static_cast<double>(e.geometry.particle_count()) / std::pow(e.geometry.scale(), 2);
  Eigen::MatrixXd A;
  if (is_sep(c)) A = sep_mean_dynamics(e.geometry, e.model);

  CsvTable t({"f", "g", "lag", "dynamic_minus_propagated", "std_error", "z", "control_z", "exact_lattice_bias"});
  const double largest = *std::max_element(c.lags.begin(), c.lags.end());
  bool control_fails = false;
  nlohmann::json control = nlohmann::json::array();
  for (std::size_t p = 0; p < c.pairs.size(); ++p) {
    const auto& [fid, gid] = c.pairs[p];
    const Eigen::VectorXd f = lattice_values(catalogue_function(fid), e.geometry);
    const Eigen::VectorXd gv = lattice_values(catalogue_function(gid), e.geometry);
    const auto xi_f = project_series(e.paths, fluctuation_observable(e.geometry, f, e.exact.mean));
    const auto xi_g = project_series(e.paths, fluctuation_observable(e.geometry, gv, e.exact.mean));
    for (std::size_t k = 0; k < c.lags.size(); ++k) {
      const double lag = c.lags[k];
      const Eigen::VectorXd tf = semigroup_apply_adjoint(L, lag, f);
      const Eigen::VectorXd wf = semigroup_apply_adjoint(wrong, lag, f);
      const auto xi_tf = project_series(e.paths, fluctuation_observable(e.geometry, tf, e.exact.mean));
      const auto xi_wf = project_series(e.paths, fluctuation_observable(e.geometry, wf, e.exact.mean));
      const std::string label = fid + " x " + gid + " lag " + label_number(lag);
      const HypothesisCheck hc = regression_check(xi_f, xi_g, xi_tf, lag_steps[k], label);
      const HypothesisCheck cc = regression_check(xi_f, xi_g, xi_wf, lag_steps[k], label + " doubled Phi'");
      Check ch = from_hypothesis(hc, "regression");
      ch.pass = std::abs(hc.z) < c.z_limit;
      // the control is meant to be rejected
      Check ctrl = from_hypothesis(cc, "control");
      ctrl.pass = std::abs(cc.z) >= c.z_limit;
      ctrl.gating = false;
      if (p == 0 && lag == largest) {
        control_fails = ctrl.pass;
        ctrl.gating = true;
      }
      double bias = std::nan("");
      if (A.size() > 0) {
        const Eigen::MatrixXd propagator = (lag * A).exp();
        const double exact = norm * f.dot(propagator * (e.exact.covariance * gv));
        const double hydro = norm * tf.dot(e.exact.covariance * gv);
        bias = exact - hydro;
        r.checks.push_back(diagnostic(deterministic_check("lattice-bias", label + " (exact - hydro) / std_error",
                                                          bias / hc.std_error, 1.0)));
      }
      t.row().cell(fid).cell(gid).cell(lag).cell(ch.value).cell(ch.std_error).cell(ch.z).cell(ctrl.z).cell(bias);
      control.push_back({{"pair", p}, {"lag", lag}, {"z", cc.z}});
      r.checks.push_back(std::move(ch));
      r.checks.push_back(std::move(ctrl));
    }
  }
  r.metrics = {{"N", e.geometry.particle_count()},
               {"paths", e.paths.size()},
               {"burn_in_time", e.burn_in},
               {"control_fails_at_largest_lag", control_fails},
               {"control", control},
               {"required_fraction", c.min_pass}};
  r.artifacts.push_back({"regression.csv", t.str()});
  r.pass = verdict(r.checks, {"regression"}, c.min_pass);
  return r;
}

ExperimentResult run_chaoticity(const RunConfig& c) {
  ExperimentResult r;
  if (c.functions.size() != 3) {
    throw ConfigError("functions", "needs three ids: a, b overlapping a, and c with support disjoint from a");
  }
  const TestFunction& fa = catalogue_function(c.functions[0]);
  const TestFunction& fb = catalogue_function(c.functions[1]);
  const TestFunction& fc = catalogue_function(c.functions[2]);
  if (!disjoint_supports(fa, fc)) throw ConfigError("functions", "the third function must be disjoint from the first");
  const Eigen::Index m = steps_of(c, "window", c.window);
  if (m < 2 || m % 2 != 0) throw ConfigError("window", "must be an even number (>= 2) of sampling steps");

  // drift integrands xi(L^* f) with the discrete generator on the lattice
  const LatticeGeometry g0 = interval_lattice(c, c.N.front());
  const ClassicalModel m0 = classical_model(c, g0);
  const FluxFunction phi = flux_for(c, m0);
  const auto qbar = stationary_density(boundary_for(c), phi);
  const Eigen::VectorXd x = site_positions(g0);
  Eigen::VectorXd dphi(x.size());
  for (Eigen::Index s = 0; s < x.size(); ++s) dphi(s) = phi.dphi(qbar(x(s)));
  const LinearizedOperator L(MacroGrid::lattice_aligned(g0), dphi);
  const std::vector<const TestFunction*> fns{&fa, &fb, &fc};
  const ExactMoments ex = exact_moments(c, m0, g0);
  Eigen::MatrixXd integrands(x.size(), 3);
  std::vector<Observable> drift_obs;
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd gen = discrete_adjoint_generator(L, lattice_values(*fns[k], g0));
    drift_obs.push_back(fluctuation_observable(g0, gen, ex.mean));
    integrands.col(k) = drift_obs.back().weights;
  }
  const StationaryEnsemble e = stationary_ensemble(c, integrands);

  std::vector<std::vector<Eigen::VectorXd>> w(3), w_half(3), w_trap(3);
  for (int k = 0; k < 3; ++k) {
    const auto xi = project_series(e.paths, observe(e.geometry, *fns[k], e.exact.mean));
    const auto drift = integral_series(e.paths, k, drift_obs[k].mean);
    w[k] = martingale_increments(xi, drift, m);
    w_half[k] = martingale_increments(xi, drift, m, m / 2);
    const auto trap = trapezoid_integrals(project_series(e.paths, drift_obs[k]), c.sample_dt);
    w_trap[k] = martingale_increments(xi, trap, m);
  }
  auto weight = [&](double y) {
    const double q = qbar(y);
    return phi.chi(q) * phi.dphi(q);
  };
  const double len = static_cast<double>(m) * c.sample_dt;
  const double qv_aa = 2.0 * integrate_gradient_product(fa, fa, weight);
  const double qv_ab = 2.0 * integrate_gradient_product(fa, fb, weight);
  const std::string a = fa.id, b = fb.id, cid = fc.id;

  r.checks.push_back(statistical_check("disjoint-windows", "E w_{k+1}(" + a + ") w_k(" + a + ")",
                                       increment_covariance(w[0], w[0], 1), 0.0, c.z_limit));
  r.checks.push_back(statistical_check("disjoint-windows", "E w_{k+1}(" + a + ") w_k(" + b + ")",
                                       increment_covariance(w[0], w[1], 1), 0.0, c.z_limit));
  r.checks.push_back(statistical_check("disjoint-supports", "E w_k(" + a + ") w_k(" + cid + ")",
                                       increment_covariance(w[0], w[2], 0), 0.0, c.z_limit));
  r.checks.push_back(statistical_check("overlap", "E w_k(" + a + ")^2 over one window",
                                       increment_covariance(w[0], w[0], 0), qv_aa * len, c.z_limit));
  r.checks.push_back(statistical_check("overlap", "E w_k(" + a + ") w_k(" + b + ") over one window",
                                       increment_covariance(w[0], w[1], 0), qv_ab * len, c.z_limit));
  r.checks.push_back(statistical_check("overlap", "E w_{k+1}(" + a + ") w_k(" + a + ") half-overlapping windows",
                                       increment_covariance(w_half[0], w_half[0], 1), 0.5 * qv_aa * len, c.z_limit));

  // how far sampled-trapezoid drift integrals would move the statistic; large, hence the exact integrals
  const CovarianceEstimate exact_qv = increment_covariance(w[0], w[0], 0);
  const CovarianceEstimate trap_qv = increment_covariance(w_trap[0], w_trap[0], 0);
  const double shift = std::abs(trap_qv.value - exact_qv.value) / exact_qv.std_error;
  r.checks.push_back(diagnostic(deterministic_check("quadrature", "trapezoid shift / std_error", shift, 0.5)));

  CsvTable t({"id", "statistic", "value", "std_error", "expected", "z"});
  for (const auto& ch : r.checks) t.row().cell(ch.id).cell(ch.statistic).cell(ch.value).cell(ch.std_error).cell(
      ch.expected).cell(ch.z);
  r.metrics = {{"N", e.geometry.particle_count()},
               {"paths", e.paths.size()},
               {"burn_in_time", e.burn_in},
               {"window", len},
               {"window_samples", m},
               {"quadratic_variation_rate", qv_aa},
               {"drift_integrals", "exact along the path"}};
  r.artifacts.push_back({"chaoticity.csv", t.str()});
  r.pass = gating_checks_pass(r.checks);
  return r;
}

ExperimentResult run_local_equilibrium(const RunConfig& c) {
  ExperimentResult r;
  if (c.eps.empty()) throw ConfigError("eps", "needs at least one scale");
  const TestFunction base = bump("unit-bump", 0.0, 1.0);
  const LatticeGeometry g0 = interval_lattice(c, c.N.front());
  const double resolvable = minimum_resolvable_eps(base, g0);
  for (double eps : c.eps) {
    if (eps < resolvable) {
      throw ConfigError("eps", format_double(eps) + " is below the lattice resolution bound " + format_double(resolvable));
    }
    if (c.x0 - eps <= 0.0 || c.x0 + eps >= 1.0) throw ConfigError("eps", "rescaled support leaves the unit interval");
  }
  const StationaryEnsemble e = stationary_ensemble(c);
  const Eigen::VectorXd x = site_positions(e.geometry);
  const double q0 = e.qbar(c.x0);
  const double chi = e.phi.chi(q0), dphi = e.phi.dphi(q0);
  const double ff = bump_line_integral(1.0, [&](double u) { return base(u) * base(u); });
  const double dfdf = bump_line_integral(1.0, [&](double u) { return base.derivative(u) * base.derivative(u); });
  const double target_static = chi * ff;
  const double target_generator = -chi * dphi * dfdf;
  const double norm = static_cast<double>(e.geometry.particle_count()) / std::pow(e.geometry.scale(), 2);

  std::vector<double> values, errors;
  CsvTable t({"eps", "static", "static_se", "static_exact_N", "generator", "generator_se", "generator_exact_N",
              "long_range_predicted"});
  Check last_static, last_generator;
  for (double eps : c.eps) {
    const TestFunction f = rescale(base, c.x0, eps);
    const Eigen::VectorXd fv = lattice_values(f, e.geometry);
    const Eigen::VectorXd lf = eps * eps * adjoint_generator_values(f, x, e.qbar, e.phi);
    const auto xi_f = project_series(e.paths, fluctuation_observable(e.geometry, fv, e.exact.mean));
    const auto xi_l = project_series(e.paths, fluctuation_observable(e.geometry, lf, e.exact.mean));
    const CovarianceEstimate s = static_covariance(xi_f, xi_f);
    const CovarianceEstimate gen = static_covariance(xi_l, xi_f);
    const double exact_s = norm * fv.dot(e.exact.covariance * fv);
    const double exact_g = norm * lf.dot(e.exact.covariance * fv);
    const StaticPrediction pred = predicted_static_covariance(f, f, boundary_for(c), e.qbar, e.phi.chi);
    const double long_range = is_sep(c) ? pred.long_range_calibrated : 0.0;
    const std::string tag = "eps " + label_number(eps);
    last_static = statistical_check("static-limit", tag, s, target_static, c.z_limit);
    last_generator = statistical_check("generator-limit", tag, gen, target_generator, c.z_limit);
    r.checks.push_back(diagnostic(last_static));
    r.checks.push_back(diagnostic(last_generator));
    r.checks.push_back(diagnostic(statistical_check("static-finite-N", tag, s, exact_s, c.z_limit)));
    r.checks.push_back(diagnostic(statistical_check("generator-finite-N", tag, gen, exact_g, c.z_limit)));
    values.push_back(s.value);
    errors.push_back(s.std_error);
    t.row().cell(eps).cell(s.value).cell(s.std_error).cell(exact_s).cell(gen.value).cell(gen.std_error).cell(
        exact_g).cell(long_range);
  }
  r.checks.push_back(condition_check("monotone", "static statistic approaches chi int f g",
                                     approaches_monotonically(values, errors, target_static)));
  last_static.gating = last_generator.gating = true;
  last_static.id = "final-static";
  last_generator.id = "final-generator";
  r.checks.push_back(last_static);
  r.checks.push_back(last_generator);
  r.metrics = {{"N", e.geometry.particle_count()},
               {"paths", e.paths.size()},
               {"burn_in_time", e.burn_in},
               {"x0", c.x0},
               {"qbar_x0", q0},
               {"target_static", target_static},
               {"target_generator", target_generator},
               {"target_generator_opposite_sign", -target_generator},
               {"resolution_bound", resolvable}};
  r.artifacts.push_back({"local_equilibrium.csv", t.str()});
  r.pass = gating_checks_pass(r.checks);
  return r;
}

/// Exact stationary covariance of the Euler-Maruyama chain
/// xi' = (1 + dt L) xi + sqrt(dt) Q^{1/2} Z, in the eigenbasis of L.
Eigen::MatrixXd euler_maruyama_covariance(const LinearizedOperator& L, const Eigen::MatrixXd& Q, double dt) {
  const Eigen::VectorXd root = L.dphi().cwiseSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(root.asDiagonal() * dirichlet_laplacian(L.size(), L.dx()) *
                                                    root.asDiagonal());
  const Eigen::MatrixXd Vinv = es.eigenvectors().transpose() * root.asDiagonal();
  const Eigen::MatrixXd V = root.cwiseInverse().asDiagonal() * es.eigenvectors();
  const Eigen::VectorXd mu = (1.0 + dt * es.eigenvalues().array()).matrix();
  Eigen::MatrixXd C = Vinv * Q * Vinv.transpose();
  for (Eigen::Index i = 0; i < C.rows(); ++i) {
    for (Eigen::Index j = 0; j < C.cols(); ++j) C(i, j) *= dt / (1.0 - mu(i) * mu(j));
  }
  C = V * C * V.transpose();
  return 0.5 * (C + C.transpose());
}

ExperimentResult run_ou_crosscheck(const RunConfig& c) {
  ExperimentResult r;
  if (c.grid.size() != 2) throw ConfigError("grid", "needs two sizes: simulation grid and accuracy grid");
  if (c.pairs.empty()) throw ConfigError("pairs", "needs at least one test-function pair");
  const LatticeGeometry g0 = interval_lattice(c, 16);
  const ClassicalModel m0 = classical_model(c, g0);
  const FluxFunction phi = flux_for(c, m0);
  const BoundaryData h = boundary_for(c);
  const auto qbar = stationary_density(h, phi);

  // Lyapunov solution against the predicted two-point function
  {
    const MacroGrid grid(c.grid[1]);
    const OUSpec spec = make_ou_spec(grid, qbar, phi);
    const Eigen::MatrixXd C = solve_lyapunov(spec.drift, spec.noise);
    const Eigen::VectorXd xs = grid.interior_coordinates();
    std::vector<std::pair<double, double>> values;
    double scale = 0.0;
    for (const auto& [fid, gid] : c.pairs) {
      const TestFunction& f = catalogue_function(fid);
      const TestFunction& g = catalogue_function(gid);
      const double lyap = grid.dx() * grid.dx() * f.sample(xs).dot(C * g.sample(xs));
      const StaticPrediction pred = predicted_static_covariance(f, g, h, qbar, phi.chi);
      const double target = is_sep(c) ? pred.calibrated() : pred.local;
      values.emplace_back(lyap, target);
      scale = std::max(scale, std::abs(target));
    }
    for (std::size_t k = 0; k < c.pairs.size(); ++k) {
      r.checks.push_back(relative_check("lyapunov-vs-prediction",
                                        c.pairs[k].first + " x " + c.pairs[k].second + " at " +
                                            std::to_string(c.grid[1]) + " nodes",
                                        values[k].first, values[k].second, scale, c.tolerance));
    }
  }

  // simulated stationary covariance against the Lyapunov solution
  const MacroGrid grid(c.grid[0]);
  const OUSpec spec = make_ou_spec(grid, qbar, phi);
  const Eigen::MatrixXd C = solve_lyapunov(spec.drift, spec.noise);
  OUOptions o;
  o.paths = c.paths;
  o.samples = samples_for(c);
  o.sample_dt = c.sample_dt;
  o.seed = *c.seed;
  const auto paths = ou_simulate(spec, o);
  const double radius = spec.drift.eigenvalues().cwiseAbs().maxCoeff();
  const double dt = c.sample_dt / std::ceil(c.sample_dt * radius / o.step_factor);
  const Eigen::MatrixXd C_em = euler_maruyama_covariance(spec.drift, spec.noise, dt);
  const Eigen::VectorXd xs = grid.interior_coordinates();
  CsvTable t({"f", "g", "simulated", "std_error", "lyapunov", "z", "euler_maruyama_exact"});
  for (const auto& [fid, gid] : c.pairs) {
    const Eigen::VectorXd f = catalogue_function(fid).sample(xs);
    const Eigen::VectorXd g = catalogue_function(gid).sample(xs);
    const auto xi_f = project_series(paths, grid_observable(grid, f, fid));
    const auto xi_g = project_series(paths, grid_observable(grid, g, gid));
    const double lyap = grid.dx() * grid.dx() * f.dot(C * g);
    const double em = grid.dx() * grid.dx() * f.dot(C_em * g);
    Check ch = statistical_check("ou-vs-lyapunov", fid + " x " + gid, static_covariance(xi_f, xi_g), lyap, c.z_limit);
    r.checks.push_back(diagnostic(deterministic_check("time-step-bias", fid + " x " + gid + " |EM - Lyapunov| / std_error",
                                                      (em - lyap) / ch.std_error, 0.5)));
    t.row().cell(fid).cell(gid).cell(ch.value).cell(ch.std_error).cell(lyap).cell(ch.z).cell(em);
    r.checks.push_back(std::move(ch));
  }

  // noiseless paths follow the semigroup
  {
    OUOptions det = o;
    det.paths = 1;
    det.noise = false;
    det.start_stationary = false;
    det.burn_in_time = 0.0;
    det.samples = 11;
    det.initial = (0.1 * xs.array() * (1.0 - xs.array())).matrix() +
                  0.05 * catalogue_function("sine-3").sample(xs);
    const auto p = ou_simulate(spec, det);
    const double t_end = 10 * det.sample_dt;
    const Eigen::VectorXd exact = semigroup_apply(spec.drift, t_end, det.initial);
    const double rel = (p.front().values.row(10).transpose() - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff();
    r.checks.push_back(deterministic_check("deterministic-limit", "noiseless path vs semigroup (relative)", rel, 1e-3));
  }

  r.metrics = {{"nodes", grid.interior()},
               {"accuracy_nodes", c.grid[1]},
               {"paths", paths.size()},
               {"step", dt},
               {"spectral_radius", radius}};
  r.artifacts.push_back({"ou_covariance.csv", t.str()});
  r.pass = gating_checks_pass(r.checks);
  return r;
}

// ---------------------------------------------------------------------------
// numerical infrastructure

/// Least-squares slope of log(error) against log(dx).
double convergence_order(const std::vector<double>& dx, const std::vector<double>& err) {
  const auto n = static_cast<double>(dx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double a = std::log(dx[i]), b = std::log(err[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ExperimentResult run_numerics(const RunConfig& c) {
  ExperimentResult r;
  const double t = c.t_end;
  const BoundaryData h{0.8, 0.2};
  const FluxFunction id = identity_flux();
  PdeOptions pde;
  pde.scheme = TimeScheme::CrankNicolson;

  // linear equation with a closed-form solution: ramp plus decaying sine modes
  const double a1 = 0.1, a2 = 0.05;
  auto exact = [&](double x, double s) {
    const double pi = std::numbers::pi;
    return 0.8 - 0.6 * x + a1 * std::exp(-pi * pi * s) * std::sin(pi * x) +
           a2 * std::exp(-4 * pi * pi * s) * std::sin(2 * pi * x);
  };
  std::vector<double> dxs, errs;
  CsvTable t_csv({"problem", "intervals", "dx", "dt", "error"});
  for (long n : c.grid) {
    const MacroGrid grid(n - 1);
    pde.dt = c.pde_dt * grid.dx() * static_cast<double>(c.grid.front());
    const DensityProfile q = solve_pde(initial_profile(grid, [&](double x) { return exact(x, 0.0); }, h, id), h, id, t, pde);
    double err = 0.0;
    for (Eigen::Index i = 0; i < q.q.size(); ++i) err = std::max(err, std::abs(q.q(i) - exact(q.x(i), t)));
    dxs.push_back(grid.dx());
    errs.push_back(err);
    t_csv.row().cell("linear").cell(n).cell(grid.dx()).cell(pde.dt).cell(err);
  }
  const double order = convergence_order(dxs, errs);
  Check oc = deterministic_check("pde-order", "measured exponent, linear problem", order, 0.0);
  oc.expected = 2.0;
  oc.pass = order >= 1.8 && order <= 2.2;
  r.checks.push_back(oc);

  // nonlinear zero range flux: self-convergence on nested grids
  {
    RunConfig zc = c;
    zc.model = "zrp";
    const LatticeGeometry g = build_interval(8);
    const FluxFunction phi = zrp_flux_function(zrp_model(zc, g, c.n_max));
    const BoundaryData zh{0.6, 0.2};
    auto q0 = [&](double x) { return phi.inverse(0.6 - 0.4 * x) + 0.1 * std::sin(std::numbers::pi * x); };
    std::vector<DensityProfile> sols;
    std::vector<double> zdx;
    for (long n : c.grid) {
      const MacroGrid grid(n - 1);
      pde.dt = c.pde_dt * grid.dx() * static_cast<double>(c.grid.front());
      sols.push_back(solve_pde(initial_profile(grid, q0, zh, phi), zh, phi, t, pde));
      zdx.push_back(grid.dx());
    }
    std::vector<double> diffs, dx_pairs;
    for (std::size_t k = 0; k + 1 < sols.size(); ++k) {
      const long ratio = c.grid[k + 1] / c.grid[k];
      double d = 0.0;
      for (Eigen::Index i = 0; i < sols[k].q.size(); ++i) {
        d = std::max(d, std::abs(sols[k].q(i) - sols[k + 1].q(i * ratio)));
      }
      diffs.push_back(d);
      dx_pairs.push_back(zdx[k]);
      t_csv.row().cell("zero-range-self").cell(c.grid[k]).cell(zdx[k]).cell(c.pde_dt * zdx[k] * c.grid.front()).cell(d);
    }
    if (diffs.size() >= 2) {
      const double zorder = convergence_order(dx_pairs, diffs);
      Check zc_check = deterministic_check("pde-order-nonlinear", "self-convergence exponent, zero range flux", zorder, 0.0);
      zc_check.expected = 2.0;
      zc_check.pass = zorder >= 1.8 && zorder <= 2.2;
      r.checks.push_back(zc_check);
    }
  }

  // semigroup law
  {
    const MacroGrid grid(63);
    const LinearizedOperator L = LinearizedOperator::from_profile(stationary_profile(grid, h, id), id);
    RunConfig zc = c;
    zc.model = "zrp";
    const FluxFunction zphi = zrp_flux_function(zrp_model(zc, build_interval(8), c.n_max));
    const LinearizedOperator Lz = LinearizedOperator::from_profile(stationary_profile(grid, {0.6, 0.2}, zphi), zphi);
    const double t1 = 0.013, t2 = 0.029;
    for (const auto* op : {&L, &Lz}) {
      const double dev = (op->semigroup(t1 + t2) - op->semigroup(t1) * op->semigroup(t2)).cwiseAbs().maxCoeff();
      r.checks.push_back(deterministic_check("semigroup", op == &L ? "exclusion T(t1+t2) - T(t1)T(t2)"
                                                                  : "zero range T(t1+t2) - T(t1)T(t2)",
                                             dev, 1e-10));
    }
  }

  // master equation: trace and positivity along the flow
  {
    RunConfig zc = c;
    zc.model = "zrp";
    zc.h_left = 0.3;
    zc.h_right = 0.1;
    const SmallSystem s = small_zrp(zc, 2, 3);
    Engine rng = make_stream(*c.seed, 7);
    std::normal_distribution<double> normal;
    const Eigen::Index d = s.space.dimension();
    DenseOperator X(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = Complex(normal(rng), normal(rng));
    }
    DenseOperator mixed = X * X.adjoint();
    mixed /= mixed.trace().real();
    // a pure state has zero eigenvalues, the hardest case for positivity
    DenseOperator vacuum = DenseOperator::Zero(d, d);
    vacuum(0, 0) = 1.0;
    double trace = 0.0, min_eig = 1.0;
    for (const DenseOperator* rho : {&mixed, &vacuum}) {
      for (double te : {0.1, 1.0, 5.0}) {
        DensityDiagnostics dd;
        try {
          (void)evolve(s.lindblad, *rho, te, &dd);
        } catch (const std::runtime_error&) {
          // evolve refuses a broken state; the diagnostics still hold the numbers
        }
        trace = std::max(trace, dd.trace_error);
        min_eig = std::min(min_eig, dd.min_eigenvalue);
      }
    }
    r.checks.push_back(deterministic_check("trace", "max |tr rho_t - 1|", trace, 1e-9));
    Check pc = deterministic_check("positivity", "min eigenvalue of rho_t", min_eig, 0.0);
    pc.expected = -1e-8;
    pc.pass = min_eig >= -1e-8;
    r.checks.push_back(pc);
  }

  r.metrics = {{"t", t}, {"order_linear", order}, {"errors", errs}, {"dx", dxs}};
  r.artifacts.push_back({"convergence.csv", t_csv.str()});
  r.pass = gating_checks_pass(r.checks);
  return r;
}

// ---------------------------------------------------------------------------
// catalogue

RunConfig base(const std::string& id) {
  RunConfig c;
  c.experiment = id;
  return c;
}

const std::vector<std::pair<std::string, std::string>> kCovariancePairs = {
    {"bump-0.50-0.40", "bump-0.50-0.40"}, {"bump-0.20-0.20", "bump-0.20-0.20"}, {"bump-0.50-0.20", "bump-0.50-0.20"},
    {"bump-0.80-0.20", "bump-0.80-0.20"}, {"bump-0.30-0.20", "bump-0.70-0.20"}, {"bump-0.20-0.20", "bump-0.60-0.20"},
    {"bump-0.40-0.20", "bump-0.80-0.20"}, {"bump-0.15-0.10", "bump-0.85-0.10"}, {"bump-0.35-0.10", "bump-0.65-0.10"},
    {"bump-0.45-0.10", "bump-0.55-0.10"}, {"bump-0.25-0.10", "bump-0.25-0.10"}, {"bump-0.75-0.10", "bump-0.75-0.10"},
    {"bump-0.30-0.20", "bump-0.40-0.20"}, {"bump-0.60-0.20", "bump-0.70-0.20"}, {"sine-1", "sine-1"},
    {"sine-2", "sine-2"},                 {"sine-1", "sine-2"},                 {"sine-3", "sine-1"},
    {"sine-4", "sine-4"},                 {"sine-2", "bump-0.50-0.40"}};

std::vector<ExperimentDescriptor> build_catalogue() {
  std::vector<ExperimentDescriptor> c;
  c.push_back({"consistency-sep", "restriction of the Lindblad generator to diagonal observables (exclusion)",
               "Lindblad generator on indicator functions against the classical generator matrix, 3-site fermion chain",
               [] {
                 RunConfig r = base("consistency-sep");
                 r.sites = 3;
                 return r;
               },
               run_consistency_sep});
  c.push_back({"consistency-zrp", "restriction of the Lindblad generator to diagonal observables (zero range)",
               "the same identity for the truncated bosonic chain, with a second run at n_max + 2",
               [] {
                 RunConfig r = base("consistency-zrp");
                 r.model = "zrp";
                 r.h_left = 0.3;
                 r.h_right = 0.1;
                 r.sites = 2;
                 r.n_max = 3;
                 return r;
               },
               run_consistency_zrp});
  c.push_back({"gauge-covariance", "covariance of the generator under the particle-number gauge group",
               "max |gamma(theta) G(A) - G(gamma(theta) A)| over random theta and all matrix units, both models",
               [] {
                 RunConfig r = base("gauge-covariance");
                 r.sites = 3;
                 r.n_max = 3;
                 r.tolerance = 1e-10;
                 r.gauge_samples = 16;
                 return r;
               },
               run_gauge_covariance});
  c.push_back({"stationary-uniqueness", "uniqueness of the stationary state through the commutant criterion",
               "null space of the Schrodinger superoperator and commutant of the jump operators, both models",
               [] {
                 RunConfig r = base("stationary-uniqueness");
                 r.sites = 3;
                 r.n_max = 3;
                 r.tolerance = 1e-9;
                 return r;
               },
               run_stationary_uniqueness});
  c.push_back({"lift-state", "diagonal lift of the classical stationary measure",
               "G_*(lift pi) = 0 and agreement with the extracted quantum stationary state (10 x tolerance)",
               [] {
                 RunConfig r = base("lift-state");
                 r.sites = 3;
                 r.n_max = 3;
                 r.tolerance = 1e-9;
                 return r;
               },
               run_lift_state});
  c.push_back({"profile-sep", "stationary density profile of the boundary-driven exclusion process",
               "Monte Carlo site densities against the exact moment profile, and that profile against the ramp",
               [] {
                 RunConfig r = base("profile-sep");
                 r.N = {100};
                 r.paths = 32;
                 r.t_end = 20.0;
                 r.sample_dt = 0.01;
                 return r;
               },
               run_profile_sep});
  c.push_back({"profile-zrp", "product form of the zero range stationary measure with harmonic fugacity",
               "total variation of the exact stationary vector to its product of marginals; fugacity equations",
               [] {
                 RunConfig r = base("profile-zrp");
                 r.model = "zrp";
                 r.h_left = 0.3;
                 r.h_right = 0.1;
                 r.sites = 3;
                 r.n_max = 16;
                 r.N = {100};
                 r.tolerance = 1e-10;
                 return r;
               },
               run_profile_zrp});
  c.push_back({"hydro-convergence", "hydrodynamic limit: smeared empirical density against the nonlinear diffusion",
               "sup error of smeared profiles at time t from a perturbed product state, for increasing N",
               [] {
                 RunConfig r = base("hydro-convergence");
                 r.N = {50, 100, 200};
                 r.paths = 400;
                 r.t_end = 0.1;
                 r.grid = {399};
                 r.pde_dt = 1e-4;
                 r.tolerance = 0.03;
                 r.functions = {"bump-0.20-0.20", "bump-0.30-0.20", "bump-0.40-0.20", "bump-0.50-0.20",
                                "bump-0.60-0.20", "bump-0.70-0.20", "bump-0.80-0.20"};
                 return r;
               },
               run_hydro_convergence});
  c.push_back({"static-covariance", "static two-point function of the fluctuation field",
               "Monte Carlo E[xi(f) xi(g)] against the exact finite-N value for 20 test-function pairs",
               [] {
                 RunConfig r = base("static-covariance");
                 r.N = {100};
                 r.paths = 32;
                 r.t_end = 20.0;
                 r.sample_dt = 0.01;
                 r.min_pass = 0.9;
                 r.pairs = kCovariancePairs;
                 return r;
               },
               run_static_covariance});
  c.push_back({"long-range", "long-range part of the static two-point function (inverse Dirichlet Laplacian)",
               "exact off-site correlations at two sizes, extrapolated in 1/N, against the Green's-function form",
               [] {
                 RunConfig r = base("long-range");
                 r.N = {32, 64};
                 r.tolerance = 0.05;
                 r.pairs = {{"bump-0.50-0.40", "bump-0.50-0.40"}, {"bump-0.50-0.20", "bump-0.50-0.20"},
                            {"bump-0.30-0.20", "bump-0.70-0.20"}, {"bump-0.20-0.20", "bump-0.60-0.20"},
                            {"bump-0.35-0.10", "bump-0.65-0.10"}, {"bump-0.25-0.10", "bump-0.25-0.10"},
                            {"sine-1", "sine-1"},                 {"sine-2", "sine-2"},
                            {"sine-1", "sine-2"},                 {"sine-2", "bump-0.50-0.40"}};
                 return r;
               },
               run_long_range});
  c.push_back({"regression", "regression of fluctuations: E(xi_t | xi_0) = T_t xi_0",
               "dynamic covariance against the static covariance of the propagated test function, with a "
               "doubled-Phi' control",
               [] {
                 RunConfig r = base("regression");
                 r.N = {100};
                 r.paths = 32;
                 r.t_end = 25.0;
                 r.sample_dt = 0.01;
                 r.lags = {0.05, 0.1, 0.2};
                 r.min_pass = 8.0 / 9.0;
                 r.pairs = {{"bump-0.50-0.40", "bump-0.50-0.40"},
                            {"bump-0.40-0.20", "bump-0.60-0.20"},
                            {"bump-0.50-0.20", "bump-0.30-0.20"}};
                 return r;
               },
               run_regression});
  c.push_back({"chaoticity", "martingale increments of the fluctuation field and their white-noise covariance",
               "covariances of w over disjoint windows, disjoint supports and overlapping windows",
               [] {
                 RunConfig r = base("chaoticity");
                 r.N = {100};
                 r.paths = 32;
                 r.t_end = 10.0;
                 r.sample_dt = 0.005;
                 r.window = 0.05;
                 r.functions = {"bump-0.30-0.20", "bump-0.40-0.20", "bump-0.70-0.20"};
                 return r;
               },
               run_chaoticity});
  c.push_back({"local-equilibrium", "local equilibrium under rescaled test functions",
               "E[xi(f_eps) xi(f_eps)] and eps^2 E[xi(L^* f_eps) xi(f_eps)] for shrinking eps at x0",
               [] {
                 RunConfig r = base("local-equilibrium");
                 r.N = {400};
                 r.paths = 8;
                 r.t_end = 6.0;
                 r.sample_dt = 0.002;
                 r.eps = {0.4, 0.2, 0.1};
                 r.x0 = 0.5;
                 return r;
               },
               run_local_equilibrium});
  c.push_back({"numerics", "numerical infrastructure of the hydrodynamic and quantum solvers",
               "PDE convergence order, semigroup law, trace and positivity of the master-equation flow",
               [] {
                 RunConfig r = base("numerics");
                 r.grid = {16, 32, 64, 128};
                 r.t_end = 0.1;
                 r.pde_dt = 0.005;
                 r.n_max = 6;
                 return r;
               },
               run_numerics});
  c.push_back({"ou-crosscheck", "linear fluctuating hydrodynamics: Ornstein-Uhlenbeck process and Lyapunov equation",
               "simulated stationary covariance against the Lyapunov solution, and that against the predicted "
               "two-point function",
               [] {
                 RunConfig r = base("ou-crosscheck");
                 r.grid = {32, 128};
                 r.paths = 16;
                 r.t_end = 25.0;
                 r.sample_dt = 0.01;
                 r.tolerance = 0.02;
                 r.pairs = {{"bump-0.50-0.40", "bump-0.50-0.40"}, {"bump-0.30-0.20", "bump-0.70-0.20"},
                            {"bump-0.50-0.20", "bump-0.50-0.20"}, {"sine-1", "sine-1"},
                            {"sine-2", "sine-2"},                 {"sine-2", "bump-0.50-0.40"}};
                 return r;
               },
               run_ou_crosscheck});
  std::stable_sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return c;
}

}  // namespace

Check deterministic_check(std::string id, std::string statistic, double value, double tolerance, bool inclusive) {
  Check c;
  c.id = std::move(id);
  c.statistic = std::move(statistic);
  c.value = value;
  c.tolerance = tolerance;
  c.pass = inclusive ? std::abs(value) <= tolerance : std::abs(value) < tolerance;
  return c;
}

Check condition_check(std::string id, std::string statistic, bool holds) {
  Check c;
  c.id = std::move(id);
  c.statistic = std::move(statistic);
  c.value = holds ? 1.0 : 0.0;
  c.expected = 1.0;
  c.pass = holds;
  return c;
}

const std::vector<ExperimentDescriptor>& catalogue() {
  static const std::vector<ExperimentDescriptor> c = build_catalogue();
  return c;
}

const ExperimentDescriptor& find_experiment(const std::string& id) {
  for (const auto& e : catalogue()) {
    if (e.id == id) return e;
  }
  std::string valid;
  for (const auto& e : catalogue()) valid += (valid.empty() ? "" : ", ") + e.id;
  throw ConfigError("experiment", "unknown id '" + id + "'; valid ids: " + valid);
}

RunConfig default_config(const std::string& id) { return find_experiment(id).defaults(); }

RunReport run(const RunConfig& config) {
  const ExperimentDescriptor& e = find_experiment(config.experiment);
  if (!config.seed) throw ConfigError("seed", "a master seed is mandatory");
  RunReport report;
  report.config = config;
  report.hash = config_hash(config);
  const auto t0 = Clock::now();
  try {
    report.result = e.run(config);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw std::runtime_error(e.id + ": " + ex.what());
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

nlohmann::json report_json(const RunReport& report) {
  const ExperimentDescriptor& e = find_experiment(report.config.experiment);
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& key : config_keys()) cfg[key] = config_value(report.config, key);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.result.checks) {
    checks.push_back({{"hypothesis", c.id},
                      {"statistic", c.statistic},
                      {"value", c.value},
                      {"stderr", c.std_error},
                      {"expected", c.expected},
                      {"z", c.z},
                      {"tolerance", c.tolerance},
                      {"kind", c.statistical ? "statistical" : "deterministic"},
                      {"gating", c.gating},
                      {"verdict", c.pass ? "pass" : "fail"}});
  }
  return {{"experiment", e.id},
          {"anchor", e.anchor},
          {"summary", e.summary},
          {"verdict", report.result.pass ? "pass" : "fail"},
          {"config", cfg},
          {"config_hash", report.hash},
          {"seed", *report.config.seed},
          {"checks", checks},
          {"metrics", report.result.metrics},
          {"files", report.files},
          {"versions",
           {{"hydrolab", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}}},
          {"timing", {{"wall_seconds", report.wall_seconds}}}};
}

void write_report(RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  report.files.clear();
  for (const auto& a : report.result.artifacts) {
    const bool csv = a.name.size() > 4 && a.name.substr(a.name.size() - 4) == ".csv";
    write_text(dir / a.name, csv ? "# config " + report.hash + "\n" + a.content : a.content);
    report.files.push_back(a.name);
  }
  write_text(dir / "config.txt", canonical_text(report.config));
  report.files.push_back("config.txt");
  report.files.push_back("report.json");
  write_text(dir / "report.json", to_json_text(report_json(report)));
}

int exit_status(const RunReport& report) { return report.result.pass ? 0 : 1; }

}  // namespace hydrolab
