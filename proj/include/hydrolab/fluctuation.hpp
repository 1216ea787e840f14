#pragma once

#include "hydrolab/classical.hpp"
#include "hydrolab/field.hpp"
#include "hydrolab/hydro.hpp"
#include "hydrolab/lattice.hpp"
#include "hydrolab/statistics.hpp"
#include "hydrolab/test_functions.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace hydrolab {

struct EnsembleOptions {
  std::size_t paths = 16;
  Eigen::Index samples = 1000;  // per path, before burn-in
  double sample_dt = 0.01;      // macroscopic time between samples
  std::uint64_t seed = 1;
  std::uint64_t first_stream = 0;
  bool burn_in = true;
};

/// Independent paths started from product states with the given marginals,
/// sampled every sample_dt of macroscopic time (L_N^2 microscopic units) and
/// optionally trimmed by apply_burn_in. Path i uses stream first_stream + i.
std::vector<OccupationPath> run_ensemble(const ClassicalModel& model, const LatticeGeometry& g,
                                         const Eigen::MatrixXd& initial_marginals, const EnsembleOptions& options,
                                         const Eigen::MatrixXd& integrands = {});

/// q^{(N)}(f) = L_N^{-d} sum_y n_y f(y / L_N).
double smear(const Configuration& c, const TestFunction& f, const LatticeGeometry& g);

/// f(y / L_N) per site (first coordinate, d = 1 test functions).
Eigen::VectorXd lattice_values(const TestFunction& f, const LatticeGeometry& g);

/// A linear functional of a sampled field: value = field . weights - mean.
struct Observable {
  std::string id;
  Eigen::VectorXd weights;
  double mean = 0.0;
};

enum class MeanPolicy { Exact, Empirical };

/// xi^{(N)}(f) = N^{1/2} [q^{(N)}(f) - E q^{(N)}(f)] for site values f, given
/// the stationary site means. With MeanPolicy::Empirical the means must come
/// from an ensemble independent of the one being centred.
Observable fluctuation_observable(const LatticeGeometry& g, const Eigen::VectorXd& site_values,
                                  const Eigen::VectorXd& site_mean, std::string id = {});

/// Empirical site means from an independent ensemble.
Eigen::VectorXd empirical_site_mean(const std::vector<OccupationPath>& independent);

/// xi(f) = dx sum_i xi_i f_i for a field given at the interior grid nodes.
Observable grid_observable(const MacroGrid& grid, const Eigen::VectorXd& node_values, std::string id = {});

/// Per-path series of an observable.
template <typename Scalar>
std::vector<Eigen::VectorXd> project_series(const std::vector<FieldPath<Scalar>>& paths, const Observable& o) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(p.project(o.weights).array() - o.mean);
  return out;
}

/// Per-path interval integrals of an observable recorded as integrand
/// `column`, centred: int xi du = recorded - mean * dt.
template <typename Scalar>
std::vector<Eigen::VectorXd> integral_series(const std::vector<FieldPath<Scalar>>& paths, Eigen::Index column,
                                             double mean) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(p.integrals.col(column).array() - mean * p.dt);
  return out;
}

/// Trapezoid integrals of a sampled series over each sampling interval.
std::vector<Eigen::VectorXd> trapezoid_integrals(const std::vector<Eigen::VectorXd>& series, double dt);

/// Batch-means estimate of E[xi(f) xi(g)].
CovarianceEstimate static_covariance(const std::vector<Eigen::VectorXd>& xi_f, const std::vector<Eigen::VectorXd>& xi_g,
                                     BatchPolicy policy = {});

/// Batch-means estimate of E[xi_{t+lag}(f) xi_t(g)], lag in samples.
CovarianceEstimate dynamic_covariance(const std::vector<Eigen::VectorXd>& xi_f,
                                      const std::vector<Eigen::VectorXd>& xi_g, Eigen::Index lag,
                                      BatchPolicy policy = {});

/// Pieces of the predicted two-point function
///   int chi(qbar) f g + c int f Delta^{-1} g,
/// with the linear prefactor c = h(1) - h(0) and c = (h(1) - h(0))^2 as fixed by the
/// exact finite-N moments. Both evaluate Delta^{-1} g = -int G g.
struct StaticPrediction {
  double local = 0.0;
  double long_range_linear = 0.0;
  double long_range_calibrated = 0.0;

  double linear() const { return local + long_range_linear; }
  double calibrated() const { return local + long_range_calibrated; }
};

/// d = 1 only; h is the Dirichlet data of Phi(q), chi and qbar given as functions.
StaticPrediction predicted_static_covariance(const TestFunction& f, const TestFunction& g, const BoundaryData& h,
                                             const std::function<double(double)>& qbar,
                                             const std::function<double(double)>& chi);

/// E[xi(f) xi(g)] at finite N from an exact site covariance matrix.
double exact_static_covariance(const LatticeGeometry& g, const Eigen::MatrixXd& site_covariance,
                               const Eigen::VectorXd& f_sites, const Eigen::VectorXd& g_sites);

/// One line of a hypothesis report.
struct HypothesisCheck {
  std::string hypothesis;
  std::string statistic;
  double value = 0.0;
  double std_error = 0.0;
  double expected = 0.0;
  double z = 0.0;
  bool pass = false;
};

HypothesisCheck make_check(std::string hypothesis, std::string statistic, const CovarianceEstimate& e,
                           double expected, double z_limit = 3.0);

/// Regression: E[xi_{t+lag}(f) xi_t(g)] - E[xi_t(T_lag^* f) xi_t(g)] from
/// paired per-batch differences; expected 0.
HypothesisCheck regression_check(const std::vector<Eigen::VectorXd>& xi_f, const std::vector<Eigen::VectorXd>& xi_g,
                                 const std::vector<Eigen::VectorXd>& xi_propagated_f, Eigen::Index lag,
                                 std::string statistic, BatchPolicy policy = {});

/// w over windows of m = `window` samples starting every s = `stride`
/// samples (s = m by default, giving consecutive disjoint windows):
///   w_k = xi_{ks+m} - xi_{ks} - int_{ks}^{ks+m} xi(L^* f) du,
/// from per-interval drift integrals.
std::vector<Eigen::VectorXd> martingale_increments(const std::vector<Eigen::VectorXd>& xi,
                                                   const std::vector<Eigen::VectorXd>& drift_integrals,
                                                   Eigen::Index window, Eigen::Index stride = 0);

/// E[w_{k+offset}(f) w_k(g)] over all windows k.
CovarianceEstimate increment_covariance(const std::vector<Eigen::VectorXd>& w_f,
                                        const std::vector<Eigen::VectorXd>& w_g, Eigen::Index offset,
                                        BatchPolicy policy = {});

/// 2 int chi(qbar) Phi'(qbar) f' g' dx, the quadratic variation per unit time.
double predicted_noise_covariance(const TestFunction& f, const TestFunction& g,
                                  const std::function<double(double)>& qbar, const FluxFunction& phi);

/// Site values of L^* f = Phi'(qbar) f''.
Eigen::VectorXd adjoint_generator_values(const TestFunction& f, const Eigen::VectorXd& x,
                                         const std::function<double(double)>& qbar, const FluxFunction& phi);

/// Discrete version on a lattice-aligned grid: Phi'(qbar_i) (Delta_h f)_i with
/// Dirichlet zero data, for sampled f.
Eigen::VectorXd discrete_adjoint_generator(const LinearizedOperator& L, const Eigen::VectorXd& f_nodes);

/// Local equilibrium rows for one eps: the static statistic against
/// chi(qbar(x0)) int f g and the eps^2 generator statistic against
/// -chi Phi' int f' g'.
struct LocalEquilibriumRow {
  double eps = 0.0;
  CovarianceEstimate second_moment;       // E[xi(f_eps) xi(g_eps)]
  CovarianceEstimate generator_moment;    // eps^2 E[xi(L^* f_eps) xi(g_eps)]
  double exact_second_moment = 0.0;       // finite-N value when available
  double exact_generator_moment = 0.0;
};

/// True if |d_{k+1}| <= |d_k| + 3 sqrt(se_k^2 + se_{k+1}^2) along the list.
bool approaches_monotonically(const std::vector<double>& values, const std::vector<double>& std_errors,
                              double target);

/// Smallest eps resolvable on a lattice: the rescaled support must cover at
/// least `min_sites` lattice spacings.
double minimum_resolvable_eps(const TestFunction& f, const LatticeGeometry& g, double min_sites = 8.0);

}  // namespace hydrolab
