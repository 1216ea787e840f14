#include "hydrolab/fluctuation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hydrolab {

std::vector<OccupationPath> run_ensemble(const ClassicalModel& model, const LatticeGeometry& g,
                                         const Eigen::MatrixXd& initial_marginals, const EnsembleOptions& options,
                                         const Eigen::MatrixXd& integrands) {
  if (options.paths == 0) throw std::invalid_argument("run_ensemble: need at least one path");
  if (static_cast<std::size_t>(initial_marginals.rows()) != g.size()) {
    throw std::invalid_argument("run_ensemble: marginals do not match the lattice");
  }
  const double time_unit = g.scale() * g.scale();
  std::vector<OccupationPath> paths;
  paths.reserve(options.paths);
  for (std::size_t i = 0; i < options.paths; ++i) {
    const std::uint64_t stream = options.first_stream + i;
    Engine rng = make_stream(options.seed, stream);
    Configuration c0 = sample_product_state(initial_marginals, rng);
    Simulator sim(g, model, std::move(c0), std::move(rng));
    OccupationPath p = sample_run(sim, options.sample_dt * time_unit, options.samples, time_unit, integrands);
    p.stream = stream;
    if (options.burn_in) apply_burn_in(p);
    paths.push_back(std::move(p));
  }
  return paths;
}

Eigen::VectorXd lattice_values(const TestFunction& f, const LatticeGeometry& g) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t s = 0; s < g.size(); ++s) v(static_cast<Eigen::Index>(s)) = f(g.position(s)(0));
  return v;
}

double smear(const Configuration& c, const TestFunction& f, const LatticeGeometry& g) {
  if (c.size() != g.size()) throw std::invalid_argument("smear: configuration does not match the lattice");
  double s = 0.0;
  for (std::size_t y = 0; y < g.size(); ++y) {
    if (c.n[y] != 0) s += c.n[y] * f(g.position(y)(0));
  }
  return s / std::pow(g.scale(), g.dimension());
}

Observable fluctuation_observable(const LatticeGeometry& g, const Eigen::VectorXd& site_values,
                                  const Eigen::VectorXd& site_mean, std::string id) {
  if (static_cast<std::size_t>(site_values.size()) != g.size() || site_mean.size() != site_values.size()) {
    throw std::invalid_argument("fluctuation_observable: site field size mismatch");
  }
  Observable o;
  o.id = std::move(id);
  o.weights = std::sqrt(static_cast<double>(g.particle_count())) / std::pow(g.scale(), g.dimension()) * site_values;
  o.mean = o.weights.dot(site_mean);
  return o;
}

Eigen::VectorXd empirical_site_mean(const std::vector<OccupationPath>& independent) {
  if (independent.empty()) {
    throw std::invalid_argument("empirical_site_mean: the empirical mean policy needs an independent ensemble");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(independent.front().nodes());
  double count = 0.0;
  for (const auto& p : independent) {
    for (Eigen::Index k = 0; k < p.samples(); ++k) sum += p.values.row(k).cast<double>().transpose();
    count += static_cast<double>(p.samples());
  }
  return sum / count;
}

Observable grid_observable(const MacroGrid& grid, const Eigen::VectorXd& node_values, std::string id) {
  if (node_values.size() != grid.interior()) throw std::invalid_argument("grid_observable: size mismatch");
  return {std::move(id), grid.dx() * node_values, 0.0};
}

std::vector<Eigen::VectorXd> trapezoid_integrals(const std::vector<Eigen::VectorXd>& series, double dt) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& s : series) {
    const Eigen::Index n = s.size() - 1;
    out.push_back(n > 0 ? Eigen::VectorXd(0.5 * dt * (s.head(n) + s.tail(n))) : Eigen::VectorXd());
  }
  return out;
}

CovarianceEstimate static_covariance(const std::vector<Eigen::VectorXd>& xi_f, const std::vector<Eigen::VectorXd>& xi_g,
                                     BatchPolicy policy) {
  return dynamic_covariance(xi_f, xi_g, 0, policy);
}

CovarianceEstimate dynamic_covariance(const std::vector<Eigen::VectorXd>& xi_f,
                                      const std::vector<Eigen::VectorXd>& xi_g, Eigen::Index lag,
                                      BatchPolicy policy) {
  if (xi_f.size() != xi_g.size()) throw std::invalid_argument("covariance: ensemble sizes differ");
  if (lag < 0) throw std::invalid_argument("covariance: negative lag");
  std::vector<Eigen::VectorXd> products;
  for (std::size_t i = 0; i < xi_f.size(); ++i) {
    const Eigen::Index n = std::min(xi_f[i].size(), xi_g[i].size()) - lag;
    if (n <= 0) continue;
    products.push_back(xi_f[i].segment(lag, n).cwiseProduct(xi_g[i].head(n)));
  }
  return batch_means(products, policy);
}

StaticPrediction predicted_static_covariance(const TestFunction& f, const TestFunction& g, const BoundaryData& h,
                                             const std::function<double(double)>& qbar,
                                             const std::function<double(double)>& chi) {
  StaticPrediction p;
  p.local = integrate_product(f, g, [&](double x) { return chi(qbar(x)); });
  const double f_inv_laplacian_g = -green_form(f, g);
  const double jump = h.right - h.left;
  p.long_range_linear = jump * f_inv_laplacian_g;
  p.long_range_calibrated = jump * jump * f_inv_laplacian_g;
  return p;
}

double exact_static_covariance(const LatticeGeometry& g, const Eigen::MatrixXd& site_covariance,
                               const Eigen::VectorXd& f_sites, const Eigen::VectorXd& g_sites) {
  const double N = static_cast<double>(g.particle_count());
  const double Ld = std::pow(g.scale(), g.dimension());
  return N / (Ld * Ld) * f_sites.dot(site_covariance * g_sites);
}

HypothesisCheck make_check(std::string hypothesis, std::string statistic, const CovarianceEstimate& e,
                           double expected, double z_limit) {
  HypothesisCheck c;
  c.hypothesis = std::move(hypothesis);
  c.statistic = std::move(statistic);
  c.value = e.value;
  c.std_error = e.std_error;
  c.expected = expected;
  c.z = e.z_score(expected);
  c.pass = std::abs(c.z) < z_limit;
  return c;
}

HypothesisCheck regression_check(const std::vector<Eigen::VectorXd>& xi_f, const std::vector<Eigen::VectorXd>& xi_g,
                                 const std::vector<Eigen::VectorXd>& xi_propagated_f, Eigen::Index lag,
                                 std::string statistic, BatchPolicy policy) {
  if (xi_f.size() != xi_g.size() || xi_f.size() != xi_propagated_f.size()) {
    throw std::invalid_argument("regression_check: ensemble sizes differ");
  }
  std::vector<Eigen::VectorXd> diff;
  for (std::size_t i = 0; i < xi_f.size(); ++i) {
    const Eigen::Index n = xi_f[i].size() - lag;
    if (n <= 0) continue;
    diff.push_back(xi_f[i].segment(lag, n).cwiseProduct(xi_g[i].head(n)) -
                   xi_propagated_f[i].head(n).cwiseProduct(xi_g[i].head(n)));
  }
  return make_check("regression", std::move(statistic), batch_means(diff, policy), 0.0);
}

std::vector<Eigen::VectorXd> martingale_increments(const std::vector<Eigen::VectorXd>& xi,
                                                   const std::vector<Eigen::VectorXd>& drift_integrals,
                                                   Eigen::Index window, Eigen::Index stride) {
  if (window < 1) throw std::invalid_argument("martingale_increments: window must be >= 1 sample");
  if (stride == 0) stride = window;
  if (stride < 1) throw std::invalid_argument("martingale_increments: stride must be >= 1 sample");
  if (xi.size() != drift_integrals.size()) throw std::invalid_argument("martingale_increments: size mismatch");
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const Eigen::Index intervals = std::min(xi[i].size() - 1, drift_integrals[i].size());
    const Eigen::Index windows = intervals >= window ? (intervals - window) / stride + 1 : 0;
    Eigen::VectorXd w(windows);
    for (Eigen::Index k = 0; k < windows; ++k) {
      const Eigen::Index a = k * stride;
      w(k) = xi[i](a + window) - xi[i](a) - drift_integrals[i].segment(a, window).sum();
    }
    out.push_back(std::move(w));
  }
  return out;
}

CovarianceEstimate increment_covariance(const std::vector<Eigen::VectorXd>& w_f,
                                        const std::vector<Eigen::VectorXd>& w_g, Eigen::Index offset,
                                        BatchPolicy policy) {
  return dynamic_covariance(w_f, w_g, offset, policy);
}

double predicted_noise_covariance(const TestFunction& f, const TestFunction& g,
                                  const std::function<double(double)>& qbar, const FluxFunction& phi) {
  return 2.0 * integrate_gradient_product(f, g, [&](double x) {
           const double q = qbar(x);
           return phi.chi(q) * phi.dphi(q);
         });
}

Eigen::VectorXd adjoint_generator_values(const TestFunction& f, const Eigen::VectorXd& x,
                                         const std::function<double(double)>& qbar, const FluxFunction& phi) {
  Eigen::VectorXd v(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) v(i) = phi.dphi(qbar(x(i))) * f.second_derivative(x(i));
  return v;
}

Eigen::VectorXd discrete_adjoint_generator(const LinearizedOperator& L, const Eigen::VectorXd& f_nodes) {
  return L.matrix().transpose() * f_nodes;
}

bool approaches_monotonically(const std::vector<double>& values, const std::vector<double>& std_errors,
                              double target) {
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double allowance = 3.0 * std::hypot(std_errors[k], std_errors[k + 1]);
    if (std::abs(values[k + 1] - target) > std::abs(values[k] - target) + allowance) return false;
  }
  return true;
}

double minimum_resolvable_eps(const TestFunction& f, const LatticeGeometry& g, double min_sites) {
  const double width = f.support_hi() - f.support_lo();
  return min_sites / (g.scale() * width);
}

}  // namespace hydrolab
