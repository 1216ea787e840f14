#include "hydrolab/ornstein_uhlenbeck.hpp"

#include "hydrolab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <stdexcept>

namespace hydrolab {

Eigen::MatrixXd noise_covariance(const MacroGrid& grid, const Eigen::VectorXd& edge_weights) {
  const Eigen::Index n = grid.interior();
  if (edge_weights.size() != n + 1) throw std::invalid_argument("noise_covariance: need n + 1 edge weights");
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n + 1, n);
  for (Eigen::Index e = 0; e <= n; ++e) {
    if (e < n) D(e, e) = 1.0;
    if (e > 0) D(e, e - 1) = -1.0;
  }
  const double dx = grid.dx();
  return 2.0 / (dx * dx * dx) * D.transpose() * edge_weights.asDiagonal() * D;
}

OUSpec make_ou_spec(const MacroGrid& grid, const std::function<double(double)>& qbar, const FluxFunction& phi) {
  Eigen::VectorXd dphi(grid.interior());
  for (Eigen::Index i = 0; i < grid.interior(); ++i) dphi(i) = phi.dphi(qbar(grid.x(i + 1)));
  Eigen::VectorXd a(grid.interior() + 1);
  for (Eigen::Index e = 0; e <= grid.interior(); ++e) {
    const double q = qbar(grid.x(e) + 0.5 * grid.dx());
    a(e) = phi.chi(q) * phi.dphi(q);
  }
  return {grid, LinearizedOperator(grid, dphi), noise_covariance(grid, a)};
}

Eigen::MatrixXd solve_lyapunov(const LinearizedOperator& L, const Eigen::MatrixXd& Q) {
  // L = V diag(lambda) V^{-1} with V = D^{-1/2} U, V^{-1} = U^T D^{1/2}.
  const Eigen::VectorXd root = L.dphi().cwiseSqrt();
  const Eigen::Index n = L.size();
  Eigen::MatrixXd sym = root.asDiagonal() * dirichlet_laplacian(n, L.dx()) * root.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::MatrixXd U = es.eigenvectors();
  const Eigen::VectorXd lambda = es.eigenvalues();
  const Eigen::MatrixXd Vinv = U.transpose() * root.asDiagonal();
  const Eigen::MatrixXd V = root.cwiseInverse().asDiagonal() * U;
  Eigen::MatrixXd Qhat = Vinv * Q * Vinv.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) Qhat(i, j) = -Qhat(i, j) / (lambda(i) + lambda(j));
  }
  Eigen::MatrixXd C = V * Qhat * V.transpose();
  return 0.5 * (C + C.transpose());
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& Q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Q + Q.transpose()));
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<GridPath> ou_simulate(const OUSpec& spec, const OUOptions& options, const Eigen::MatrixXd& integrands) {
  const Eigen::Index n = spec.grid.interior();
  const bool tracked = integrands.size() > 0;
  if (tracked && integrands.rows() != n) throw std::invalid_argument("ou_simulate: integrand rows != nodes");
  if (!(options.sample_dt > 0.0) || options.samples < 1) throw std::invalid_argument("ou_simulate: bad sampling");

  const double radius = spec.drift.eigenvalues().cwiseAbs().maxCoeff();
  const double dt_max = options.step_factor / radius;
  const long per_sample = std::max(1L, static_cast<long>(std::ceil(options.sample_dt / dt_max)));
  const double dt = options.sample_dt / static_cast<double>(per_sample);
  const long burn_steps = static_cast<long>(std::ceil(options.burn_in_time / dt));

  const Eigen::MatrixXd& L = spec.drift.matrix();
  const Eigen::MatrixXd S = std::sqrt(dt) * psd_sqrt(spec.noise);
  Eigen::MatrixXd start_factor;
  if (options.start_stationary) start_factor = psd_sqrt(solve_lyapunov(spec.drift, spec.noise));
  if (!options.start_stationary && options.initial.size() != n) {
    throw std::invalid_argument("ou_simulate: initial state has the wrong size");
  }

  std::vector<GridPath> paths;
  for (std::size_t p = 0; p < options.paths; ++p) {
    Engine rng = make_stream(options.seed, p);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(n);
    auto draw = [&] {
      for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
      return z;
    };
    Eigen::VectorXd xi = options.start_stationary ? Eigen::VectorXd(start_factor * draw()) : options.initial;
    auto step = [&] {
      Eigen::VectorXd next = xi + dt * (L * xi);
      if (options.noise) next += S * draw();
      xi = std::move(next);
    };
    for (long s = 0; s < burn_steps; ++s) step();

    GridPath path;
    path.dt = options.sample_dt;
    path.stream = p;
    path.values.resize(options.samples, n);
    path.integrands = integrands;
    if (tracked) path.integrals = Eigen::MatrixXd::Zero(options.samples - 1, integrands.cols());
    path.values.row(0) = xi.transpose();
    for (Eigen::Index k = 1; k < options.samples; ++k) {
      for (long s = 0; s < per_sample; ++s) {
        if (tracked) path.integrals.row(k - 1) += dt * (xi.transpose() * integrands);
        step();
      }
      path.values.row(k) = xi.transpose();
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace hydrolab
