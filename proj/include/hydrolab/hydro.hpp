#pragma once

#include "hydrolab/classical.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>

namespace hydrolab {

/// Uniform grid on [0,1] with n interior nodes, dx = 1/(n+1). Nodes 0 and
/// n+1 carry Dirichlet data.
class MacroGrid {
 public:
  explicit MacroGrid(Eigen::Index interior_nodes);

  /// Grid whose interior nodes sit at the sites y/L of a unit-interval lattice.
  static MacroGrid lattice_aligned(const LatticeGeometry& g);

  Eigen::Index interior() const { return n_; }
  Eigen::Index nodes() const { return n_ + 2; }
  double dx() const { return 1.0 / static_cast<double>(n_ + 1); }
  double x(Eigen::Index node) const { return static_cast<double>(node) * dx(); }
  Eigen::VectorXd coordinates() const;
  Eigen::VectorXd interior_coordinates() const;

 private:
  Eigen::Index n_;
};

/// Phi with its derivative and the compressibility chi on the physical
/// density range [q_min, q_max).
struct FluxFunction {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> chi;
  double q_min = 0.0;
  double q_max = 1.0;

  /// Phi^{-1}(value) by bisection to 1e-12. Throws std::domain_error out of range.
  double inverse(double value) const;
};

/// Phi(q) = q, chi(q) = q(1-q) on [0,1].
FluxFunction identity_flux();

/// Flux of the zero range marginal family P(n) ~ z^n / (g(1)...g(n)) on
/// {0..cap}: density q(z), Phi = z, chi = Var(n), Phi'(q) = z / Var(n).
FluxFunction zrp_flux_function(const ClassicalModel& model);

/// Fugacity z with mean density q under the zero range marginal family.
double zrp_fugacity_for_density(const ClassicalModel& model, double q);

struct DensityProfile {
  Eigen::VectorXd x;
  Eigen::VectorXd q;  // all nodes, boundary included
  double time = 0.0;

  Eigen::VectorXd interior() const { return q.segment(1, q.size() - 2); }
};

/// Dirichlet data for Phi(q) at x = 0 and x = 1.
struct BoundaryData {
  double left = 0.0;
  double right = 0.0;
};

enum class TimeScheme { BackwardEuler, CrankNicolson, Explicit };

struct PdeOptions {
  TimeScheme scheme = TimeScheme::BackwardEuler;
  double dt = 1e-3;
  double newton_tolerance = 1e-12;
  int max_newton_iterations = 50;
};

struct PdeDiagnostics {
  long steps = 0;
  double dt = 0.0;
  int max_newton_iterations = 0;
  /// max over steps of |change in mass - boundary flux| (exact for the
  /// implicit schemes at Newton convergence).
  double mass_balance_error = 0.0;
};

/// dq/dt = Delta Phi(q) with Phi(q) = h on the boundary, by the method of
/// lines. Explicit mode shrinks dt to dx^2 / (2 max Phi').
DensityProfile solve_pde(const DensityProfile& q0, const BoundaryData& h, const FluxFunction& phi, double t,
                         const PdeOptions& options = {}, PdeDiagnostics* diagnostics = nullptr);

/// Profile at t = 0 on a grid with the boundary nodes set to Phi^{-1}(h).
DensityProfile initial_profile(const MacroGrid& grid, const std::function<double(double)>& q0, const BoundaryData& h,
                               const FluxFunction& phi);

/// In one dimension Phi(qbar) is the linear interpolation of h.
DensityProfile stationary_profile(const MacroGrid& grid, const BoundaryData& h, const FluxFunction& phi);

/// L = Delta_h [Phi'(qbar) .] on the interior nodes with Dirichlet boundary,
/// with its spectral decomposition through the symmetric similarity
/// D^{1/2} Delta_h D^{1/2}, D = diag(Phi'(qbar)).
class LinearizedOperator {
 public:
  LinearizedOperator(const MacroGrid& grid, const Eigen::VectorXd& dphi_interior);

  static LinearizedOperator from_profile(const DensityProfile& qbar, const FluxFunction& phi);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::VectorXd& dphi() const { return dphi_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double dx() const { return dx_; }
  Eigen::Index size() const { return matrix_.rows(); }

  /// exp(tL) as a matrix, and its transpose.
  Eigen::MatrixXd semigroup(double t) const;
  Eigen::MatrixXd adjoint_semigroup(double t) const;

 private:
  double dx_;
  Eigen::VectorXd dphi_;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;  // of the symmetrized operator
};

/// T_t v = exp(tL) v on interior values; throws for t < 0.
Eigen::VectorXd semigroup_apply(const LinearizedOperator& L, double t, const Eigen::VectorXd& v);
/// T_t^* f = exp(tL^T) f, the action on test functions.
Eigen::VectorXd semigroup_apply_adjoint(const LinearizedOperator& L, double t, const Eigen::VectorXd& f);

/// Dirichlet second difference matrix (-2, 1) / dx^2 on n interior nodes.
Eigen::MatrixXd dirichlet_laplacian(Eigen::Index n, double dx);

/// CSV "x,q" and "q,phi,dphi,chi".
void write_profile_csv(std::ostream& os, const DensityProfile& p);
void write_flux_table_csv(std::ostream& os, const FluxFunction& phi, int rows);

}  // namespace hydrolab
