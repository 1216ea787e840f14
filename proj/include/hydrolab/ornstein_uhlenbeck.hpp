#pragma once

#include "hydrolab/field.hpp"
#include "hydrolab/hydro.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace hydrolab {

/// Linear fluctuation equation d xi = L xi dt + dW on the interior grid
/// nodes, with nodal noise covariance Q per unit time chosen so that
///   Cov(W_t(f), W_s(g)) = 2 min(t,s) int chi Phi' f' g' dx,
/// W(f) = dx sum_i W_i f_i. The edge weights chi Phi' are evaluated at cell
/// midpoints.
struct OUSpec {
  MacroGrid grid;
  LinearizedOperator drift;
  Eigen::MatrixXd noise;  // Q
};

OUSpec make_ou_spec(const MacroGrid& grid, const std::function<double(double)>& qbar, const FluxFunction& phi);

/// Q = (2 / dx^3) D^T diag(a) D with D the Dirichlet forward difference.
Eigen::MatrixXd noise_covariance(const MacroGrid& grid, const Eigen::VectorXd& edge_weights);

/// C with L C + C L^T + Q = 0, via the real eigendecomposition of L.
Eigen::MatrixXd solve_lyapunov(const LinearizedOperator& L, const Eigen::MatrixXd& Q);

struct OUOptions {
  std::size_t paths = 8;
  Eigen::Index samples = 1000;  // recorded samples per path
  double sample_dt = 0.01;
  double step_factor = 0.1;  // dt = step_factor / spectral radius of L
  double burn_in_time = 1.0;
  std::uint64_t seed = 1;
  bool start_stationary = true;  // else start at `initial`
  Eigen::VectorXd initial;
  bool noise = true;
};

/// Euler-Maruyama paths. Integrands (nodes x K) accumulate left-point sums of
/// field . integrand over each sampling interval, which is the exact drift
/// integral of the scheme.
std::vector<GridPath> ou_simulate(const OUSpec& spec, const OUOptions& options, const Eigen::MatrixXd& integrands = {});

/// Symmetric square root of a positive semidefinite matrix (negative
/// eigenvalues clipped).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& Q);

}  // namespace hydrolab
