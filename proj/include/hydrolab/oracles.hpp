#pragma once

#include "hydrolab/classical.hpp"
#include "hydrolab/lattice.hpp"

#include <Eigen/Dense>

namespace hydrolab {

/// Exact stationary first and second moments of the boundary-driven
/// exclusion process. The moment hierarchy closes at each order, so both are
/// solutions of sparse linear systems.
struct SepMoments {
  Eigen::VectorXd density;  // <n_x>
  Eigen::MatrixXd pair;     // <n_x n_y>, with <n_x n_x> = <n_x>

  /// <n_x n_y> - <n_x><n_y>, including the on-site variances.
  Eigen::MatrixXd covariance() const;
};

/// Throws std::invalid_argument for a non-exclusion model and
/// std::runtime_error when a moment system is singular.
SepMoments sep_moment_oracle(const ClassicalModel& model, const LatticeGeometry& g);

/// Product measure with marginals P_x(n) ~ z_x^n / (g(1)...g(n)) on {0..cap}.
struct ZeroRangeProductMeasure {
  Eigen::VectorXd fugacity;   // z_x
  Eigen::MatrixXd marginals;  // sites x (cap + 1)

  Eigen::VectorXd density() const;
  Eigen::VectorXd variance() const;
  double probability(const Configuration& c) const;
  /// Largest marginal weight at the cap; a measure of truncation error.
  double cap_mass() const;
  /// The measure as a vector over an enumerated configuration space.
  Eigen::VectorXd as_vector(const ConfigurationSpace& space) const;
};

/// Solves the fugacity equations (discrete harmonic in the interior,
/// sum_{y~b}(z_y - z_b) - r_b z_b + h_b = 0 at the boundary) and builds the
/// marginals. Throws std::runtime_error if the solve fails or z is not
/// strictly positive.
ZeroRangeProductMeasure zrp_product_measure(const ClassicalModel& model, const LatticeGeometry& g);

/// Weights z^n / (g(1)...g(n)) for n = 0..cap, normalized.
Eigen::VectorXd zero_range_marginal(const ClassicalModel& model, double z);

}  // namespace hydrolab
