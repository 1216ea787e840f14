#include "doctest.h"

#include "hydrolab/classical.hpp"
#include "hydrolab/oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace hydrolab;

namespace {

Configuration config(std::initializer_list<int> n) {
  Configuration c;
  for (int v : n) c.n.push_back(static_cast<std::uint8_t>(v));
  return c;
}

const Event* find(const std::vector<Event>& events, EventKind kind, std::uint32_t site, std::uint32_t target = 0) {
  auto it = std::find_if(events.begin(), events.end(), [&](const Event& e) {
    return e.kind == kind && e.site == site && (kind != EventKind::BulkJump || e.target == target);
  });
  return it == events.end() ? nullptr : &*it;
}

// One site with entry rate h and r = 1 exit.
ClassicalModel single_site_exclusion(const LatticeGeometry& g, double h) {
  ClassicalModel m = make_exclusion_model(g, two_sided_reservoir(h, h));
  m.exits = {1};
  return m;
}

}  // namespace

TEST_CASE("exclusion event rates") {
  const LatticeGeometry g = build_interval(4);
  const ClassicalModel m = make_exclusion_model(g, two_sided_reservoir(0.5, 0.5));
  const auto events = event_rates(config({1, 0, 1}), m, g);
  CHECK(events.size() == 4);
  REQUIRE(find(events, EventKind::BulkJump, 0, 1));
  CHECK(find(events, EventKind::BulkJump, 0, 1)->rate == 1.0);
  REQUIRE(find(events, EventKind::BulkJump, 2, 1));
  CHECK(find(events, EventKind::BulkJump, 2, 1)->rate == 1.0);
  REQUIRE(find(events, EventKind::BoundaryExit, 0));
  CHECK(find(events, EventKind::BoundaryExit, 0)->rate == 1.0);
  REQUIRE(find(events, EventKind::BoundaryExit, 2));
  CHECK_FALSE(find(events, EventKind::BoundaryEntry, 0));
  CHECK_FALSE(find(events, EventKind::BoundaryEntry, 2));

  const auto empty = event_rates(Configuration::empty(3), m, g);
  CHECK(empty.size() == 2);
  for (const auto& e : empty) {
    CHECK(e.kind == EventKind::BoundaryEntry);
    CHECK(e.rate == 0.5);
  }
}

TEST_CASE("zero range event rates") {
  const LatticeGeometry g = build_interval(4);
  const ClassicalModel m = make_zero_range_model(g, two_sided_reservoir(0.3, 0.1), constant_rate());
  const auto events = event_rates(config({2, 0, 1}), m, g);
  CHECK(events.size() == 6);
  CHECK(find(events, EventKind::BulkJump, 0, 1)->rate == 1.0);
  CHECK(find(events, EventKind::BulkJump, 2, 1)->rate == 1.0);
  CHECK(find(events, EventKind::BoundaryExit, 0)->rate == 1.0);
  CHECK(find(events, EventKind::BoundaryExit, 2)->rate == 1.0);
  CHECK(find(events, EventKind::BoundaryEntry, 0)->rate == doctest::Approx(0.3));
  CHECK(find(events, EventKind::BoundaryEntry, 2)->rate == doctest::Approx(0.1));
}

TEST_CASE("apply_event") {
  const LatticeGeometry g = build_interval(3);
  const ClassicalModel sep = make_exclusion_model(g, two_sided_reservoir(0.5, 0.5));
  const Event jump{EventKind::BulkJump, 0, 1, 1.0};
  CHECK(apply_event(config({1, 0}), jump, sep) == config({0, 1}));
  CHECK(apply_event(config({1, 1}), jump, sep) == config({1, 1}));
  CHECK(apply_event(config({0, 1}), jump, sep) == config({0, 1}));

  const ClassicalModel zrp = make_zero_range_model(g, two_sided_reservoir(0.5, 0.5), constant_rate(), 3);
  const Event entry{EventKind::BoundaryEntry, 0, 0, 0.5};
  CHECK(apply_event(config({3, 0}), entry, zrp) == config({3, 0}));
  CHECK(apply_event(config({2, 0}), entry, zrp) == config({3, 0}));
  const Event exit{EventKind::BoundaryExit, 1, 0, 1.0};
  CHECK(apply_event(config({2, 0}), exit, zrp) == config({2, 0}));
}

TEST_CASE("reservoir data must be positive") {
  const LatticeGeometry g = build_interval(5);
  CHECK_THROWS_AS(make_exclusion_model(g, two_sided_reservoir(0.0, 0.5)), std::invalid_argument);
  CHECK(sep_entry_rate_for_density(0.8) == doctest::Approx(4.0));
  CHECK(sep_reservoir_density(sep_entry_rate_for_density(0.3)) == doctest::Approx(0.3));
}

TEST_CASE("simulation is deterministic per seed and replays") {
  const LatticeGeometry g = build_interval(10);
  const ClassicalModel m = make_exclusion_model(g, two_sided_reservoir(4.0, 0.25));
  const auto a = simulate(Configuration::empty(9), m, g, 50.0, 7);
  const auto b = simulate(Configuration::empty(9), m, g, 50.0, 7);
  const auto c = simulate(Configuration::empty(9), m, g, 50.0, 8);
  REQUIRE(a.events.size() == b.events.size());
  bool same = true;
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    same = same && a.events[i].time == b.events[i].time && a.events[i].event == b.events[i].event;
  }
  CHECK(same);
  CHECK(a.events.size() != c.events.size());
  CHECK(a.replay(m).total() >= 0);
  for (std::size_t i = 1; i < a.events.size(); ++i) CHECK(a.events[i].time >= a.events[i - 1].time);
}

TEST_CASE("tiny horizon produces no events") {
  const LatticeGeometry g = build_interval(6);
  const ClassicalModel m = make_exclusion_model(g, two_sided_reservoir(1.0, 1.0));
  const auto t = simulate(Configuration::empty(5), m, g, 1e-12, 3);
  CHECK(t.events.empty());
  CHECK(t.replay(m) == Configuration::empty(5));
}

TEST_CASE("simulator keeps rates consistent with the configuration") {
  const LatticeGeometry g = build_interval(12);
  const ClassicalModel m = make_zero_range_model(g, two_sided_reservoir(0.7, 0.2), constant_rate(), 4);
  Simulator sim(g, m, Configuration::empty(11), make_stream(5, 0));
  for (int k = 0; k < 20000; ++k) sim.step_until(1e9);
  double expected = 0.0;
  for (const auto& e : event_rates(sim.state(), m, g)) expected += e.rate;
  CHECK(sim.total_rate() == doctest::Approx(expected).epsilon(1e-10));
  for (auto n : sim.state().n) CHECK(n <= 4);
}

TEST_CASE("single site two-state chain") {
  const LatticeGeometry g = build_interval(2);
  REQUIRE(g.size() == 1);
  const ClassicalModel m = single_site_exclusion(g, 1.0);
  const auto t = simulate(Configuration::empty(1), m, g, 4000.0, 11);
  double occupied = 0.0, last = 0.0;
  int n = 0;
  for (const auto& te : t.events) {
    occupied += n * (te.time - last);
    last = te.time;
    n = 1 - n;
  }
  occupied += n * (t.t_end - last);
  // Alternating flips with unit-rate holding times.
  CHECK(std::abs(occupied / t.t_end - 0.5) < 0.03);
  CHECK(static_cast<double>(t.events.size()) / t.t_end == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("single site generator and stationary law") {
  const LatticeGeometry g = build_interval(2);
  const double h = 0.7;
  const ClassicalModel m = single_site_exclusion(g, h);
  const Eigen::MatrixXd G = Eigen::MatrixXd(build_generator_matrix(m, g));
  REQUIRE(G.rows() == 2);
  CHECK(G(0, 1) == doctest::Approx(h));
  CHECK(G(1, 0) == doctest::Approx(1.0));
  CHECK(G.rowwise().sum().cwiseAbs().maxCoeff() < 1e-15);
  const auto pi = stationary_distribution(build_generator_matrix(m, g));
  CHECK(pi.unique());
  CHECK(pi.probability(1) == doctest::Approx(h / (h + 1.0)).epsilon(1e-12));
}

TEST_CASE("generator acts as the discrete laplacian on interior occupations") {
  const LatticeGeometry g = build_interval(4);
  const ClassicalModel m = make_exclusion_model(g, two_sided_reservoir(0.9, 0.3));
  const auto G = build_generator_matrix(m, g);
  const ConfigurationSpace space(3, 1);
  Eigen::VectorXd f(space.size()), lap(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Configuration c = space.decode(i);
    f(i) = c.n[1];
    lap(i) = static_cast<double>(c.n[0]) + c.n[2] - 2.0 * c.n[1];
  }
  CHECK((G * f - lap).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((G * Eigen::VectorXd::Ones(8)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("equilibrium exclusion has a Bernoulli product law") {
  const LatticeGeometry g = build_interval(3);
  const double rho = 0.35, h = sep_entry_rate_for_density(rho);
  const ClassicalModel m = make_exclusion_model(g, two_sided_reservoir(h, h));
  const auto pi = stationary_distribution(build_generator_matrix(m, g));
  REQUIRE(pi.unique());
  const ConfigurationSpace space(2, 1);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Configuration c = space.decode(i);
    double p = 1.0;
    for (auto n : c.n) p *= n ? rho : 1.0 - rho;
    CHECK(pi.probability(static_cast<Eigen::Index>(i)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("a closed chain is flagged as non-unique") {
  const LatticeGeometry g = build_interval(4);
  ClassicalModel m = make_exclusion_model(g, two_sided_reservoir(0.5, 0.5));
  std::fill(m.entry.begin(), m.entry.end(), 0.0);
  std::fill(m.exits.begin(), m.exits.end(), 0);
  const auto pi = stationary_distribution(build_generator_matrix(m, g));
  CHECK(pi.null_dimension == 4);  // one class per particle number
  CHECK_FALSE(pi.unique());
}

TEST_CASE("configuration space guard") {
  CHECK(ConfigurationSpace(3, 2).size() == 27);
  CHECK_THROWS(ConfigurationSpace(20, 1));
  const ConfigurationSpace s(4, 3);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.encode(s.decode(i)) == i);
  CHECK(s.decode(1).n.back() == 1);
}

TEST_CASE("sampled stationary mean of a single site") {
  const LatticeGeometry g = build_interval(2);
  const double h = 0.5;
  const ClassicalModel m = single_site_exclusion(g, h);
  auto ensemble = [&](std::size_t count, std::uint64_t first) {
    std::vector<OccupationPath> paths;
    for (std::size_t p = 0; p < count; ++p) {
      Simulator sim(g, m, Configuration::empty(1), make_stream(21, first + p));
      sim.step_until(20.0);
      paths.push_back(sample_run(sim, 0.5, 400, 1.0));
    }
    return paths;
  };
  const Eigen::MatrixXd obs = Eigen::MatrixXd::Ones(1, 1);
  const auto one = estimate_statistics(ensemble(32, 0), obs).front();
  const auto two = estimate_statistics(ensemble(64, 100), obs, {64}).front();
  CHECK(std::abs(one.z_score(h / (h + 1.0))) < 3.0);
  CHECK(std::abs(two.z_score(h / (h + 1.0))) < 3.0);
  CHECK(one.std_error / two.std_error == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));

  std::vector<OccupationPath> constant(8);
  for (auto& p : constant) {
    p.dt = 1.0;
    p.values = RowMatrix<std::uint8_t>::Ones(50, 1);
  }
  const auto c = estimate_statistics(constant, obs).front();
  CHECK(c.value == 1.0);
  CHECK(c.std_error == 0.0);
}

TEST_CASE("exact time integrals along a sampled path") {
  const LatticeGeometry g = build_interval(8);
  const ClassicalModel m = make_exclusion_model(g, two_sided_reservoir(3.0, 0.5));
  Eigen::MatrixXd integrand = Eigen::MatrixXd::Ones(7, 1);
  Simulator sim(g, m, Configuration::empty(7), make_stream(2, 0));
  const OccupationPath p = sample_run(sim, 0.1, 2001, 1.0, integrand);
  // The integral of the particle number over an interval lies between its
  // extremes, and the running sum tracks the sampled trapezoid closely.
  const Eigen::VectorXd total = p.project(Eigen::VectorXd::Ones(7));
  double exact = p.integrals.col(0).sum();
  double trapezoid = 0.0;
  for (Eigen::Index k = 0; k + 1 < p.samples(); ++k) trapezoid += 0.05 * (total(k) + total(k + 1));
  CHECK(exact == doctest::Approx(trapezoid).epsilon(0.02));
  CHECK(p.integrals.rows() == 2000);
}
