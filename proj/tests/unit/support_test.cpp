#include "doctest.h"

#include "hydrolab/rng.hpp"
#include "hydrolab/statistics.hpp"
#include "hydrolab/test_functions.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace hydrolab;

TEST_CASE("streams depend only on seed and index") {
  Engine a = make_stream(42, 3), b = make_stream(42, 3), c = make_stream(42, 4), d = make_stream(43, 3);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  CHECK(mix_seed(0) != 0);
}

TEST_CASE("batch means of independent samples") {
  Engine rng = make_stream(1, 0);
  std::normal_distribution<double> normal(2.0, 3.0);
  std::vector<double> v(64000);
  for (double& x : v) x = normal(rng);
  const CovarianceEstimate e = batch_means(v, 32);
  CHECK(e.batches == 32);
  CHECK(e.batch_size == 2000);
  CHECK(std::abs(e.z_score(2.0)) < 3.0);
  CHECK(e.std_error == doctest::Approx(3.0 / std::sqrt(64000.0)).epsilon(0.3));
  CHECK_THROWS_AS(batch_means(v, 4), InsufficientBatches);

  const std::vector<Eigen::VectorXd> few(2, Eigen::VectorXd::Ones(3));
  CHECK_THROWS_AS(batch_means(few), InsufficientBatches);
}

TEST_CASE("ensemble batch means") {
  std::vector<Eigen::VectorXd> series(40, Eigen::VectorXd::Constant(10, 1.5));
  const CovarianceEstimate e = batch_means(series);
  CHECK(e.batches == 40);
  CHECK(e.value == 1.5);
  CHECK(e.std_error == 0.0);
  CHECK(e.z_score(1.5) == 0.0);
  CHECK(std::isinf(e.z_score(1.0)));

  std::vector<Eigen::VectorXd> a(8, Eigen::VectorXd::LinSpaced(64, 0.0, 1.0)), b = a;
  for (auto& s : b) s.array() += 0.25;
  CHECK(batch_mean_difference(b, a).value == doctest::Approx(0.25));
}

TEST_CASE("integrated autocorrelation time") {
  Engine rng = make_stream(2, 0);
  std::normal_distribution<double> normal;
  std::vector<double> white(20000), ar(20000);
  const double phi = 0.8;
  double y = 0.0;
  for (std::size_t i = 0; i < white.size(); ++i) {
    white[i] = normal(rng);
    y = phi * y + normal(rng);
    ar[i] = y;
  }
  CHECK(integrated_autocorrelation_time(white) == doctest::Approx(1.0).epsilon(0.2));
  CHECK(integrated_autocorrelation_time(ar) == doctest::Approx((1.0 + phi) / (1.0 - phi)).epsilon(0.2));
  CHECK(burn_in_samples(ar) >= 80);
}

TEST_CASE("running moments merge") {
  RunningMoments all, left, right;
  for (int i = 0; i < 100; ++i) {
    const double x = std::sin(0.37 * i) + 0.01 * i;
    all.push(x);
    (i < 37 ? left : right).push(x);
  }
  left.merge(right);
  CHECK(left.count == all.count);
  CHECK(left.mean == doctest::Approx(all.mean).epsilon(1e-14));
  CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

TEST_CASE("bump derivatives") {
  const TestFunction f = bump("f", 0.4, 0.25, 2.0);
  CHECK(f(0.4) == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(f(0.1) == 0.0);
  CHECK(f(0.66) == 0.0);
  for (double x : {0.2, 0.33, 0.41, 0.58}) {
    const double h = 1e-5;
    CHECK(f.derivative(x) == doctest::Approx((f(x + h) - f(x - h)) / (2 * h)).epsilon(1e-6));
    CHECK(f.second_derivative(x) ==
          doctest::Approx((f.derivative(x + h) - f.derivative(x - h)) / (2 * h)).epsilon(1e-5));
  }
  const TestFunction s = sine_mode("s", 3);
  CHECK(s.second_derivative(0.3) == doctest::Approx(-9.0 * std::numbers::pi * std::numbers::pi * s(0.3)));
  CHECK_THROWS(bump("x", 0.5, 0.0));
  CHECK_THROWS(sine_mode("x", 0));
}

TEST_CASE("rescaled bumps keep their L2 norm") {
  const TestFunction unit = bump("u", 0.0, 1.0);
  const TestFunction f = rescale(unit, 0.5, 0.2);
  CHECK(f.support_lo() == doctest::Approx(0.3));
  CHECK(f.support_hi() == doctest::Approx(0.7));
  CHECK(f.id == "u@0.50/0.20");
  const TestFunction g = rescale(unit, 0.5, 0.1);
  CHECK(integrate_product(f, f) == doctest::Approx(integrate_product(g, g)).epsilon(1e-6));
  CHECK_THROWS(rescale(sine_mode("s", 1), 0.5, 0.1));
}

TEST_CASE("test function catalogue") {
  const auto& cat = test_function_catalogue();
  std::set<std::string> ids;
  for (const auto& f : cat) ids.insert(f.id);
  CHECK(ids.size() == cat.size());
  CHECK(catalogue_function("bump-0.50-0.20").center == 0.5);
  CHECK(catalogue_function("sine-2").mode == 2);
  CHECK_THROWS(catalogue_function("bump-9"));
  CHECK(disjoint_supports(catalogue_function("bump-0.25-0.10"), catalogue_function("bump-0.55-0.10")));
  CHECK_FALSE(disjoint_supports(catalogue_function("bump-0.30-0.20"), catalogue_function("bump-0.50-0.20")));
}

TEST_CASE("quadrature") {
  CHECK(integrate_unit_interval([](double x) { return x * x; }) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  const TestFunction s = sine_mode("s", 1);
  CHECK(integrate_gradient_product(s, s) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2.0).epsilon(1e-8));
  // int sin(pi x) G sin(pi x) = (1/2) / pi^2.
  CHECK(green_form(s, s) == doctest::Approx(0.5 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-7));
}
