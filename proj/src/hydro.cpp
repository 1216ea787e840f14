#include "hydrolab/hydro.hpp"

#include "hydrolab/oracles.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hydrolab {

MacroGrid::MacroGrid(Eigen::Index interior_nodes) : n_(interior_nodes) {
  if (n_ < 1) throw std::invalid_argument("MacroGrid: need at least one interior node");
}

MacroGrid MacroGrid::lattice_aligned(const LatticeGeometry& g) {
  if (g.dimension() != 1) throw std::invalid_argument("MacroGrid::lattice_aligned: one-dimensional lattices only");
  const double L = g.scale();
  if (std::abs(L - std::round(L)) > 1e-12) throw std::invalid_argument("MacroGrid::lattice_aligned: L_N not integer");
  return MacroGrid(static_cast<Eigen::Index>(std::round(L)) - 1);
}

Eigen::VectorXd MacroGrid::coordinates() const { return Eigen::VectorXd::LinSpaced(nodes(), 0.0, 1.0); }

Eigen::VectorXd MacroGrid::interior_coordinates() const { return coordinates().segment(1, n_); }

double FluxFunction::inverse(double value) const {
  const double lo_value = phi(q_min);
  if (value < lo_value - 1e-15) {
    throw std::domain_error(name + ": Phi^{-1}(" + std::to_string(value) + ") below the physical range");
  }
  double lo = q_min;
  double hi = q_max;
  if (!(phi(hi) >= value)) {
    throw std::domain_error(name + ": Phi^{-1}(" + std::to_string(value) + ") above the physical range");
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < value ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FluxFunction identity_flux() {
  FluxFunction f;
  f.name = "identity";
  f.phi = [](double q) { return q; };
  f.dphi = [](double) { return 1.0; };
  f.chi = [](double q) { return q * (1.0 - q); };
  f.q_min = 0.0;
  f.q_max = 1.0;
  return f;
}

namespace {

struct MarginalMoments {
  double mean = 0.0;
  double variance = 0.0;
};

MarginalMoments zrp_moments(const ClassicalModel& model, double z) {
  const Eigen::VectorXd p = zero_range_marginal(model, z);
  MarginalMoments m;
  for (Eigen::Index k = 0; k < p.size(); ++k) m.mean += static_cast<double>(k) * p(k);
  for (Eigen::Index k = 0; k < p.size(); ++k) m.variance += (k - m.mean) * (k - m.mean) * p(k);
  return m;
}

}  // namespace

double zrp_fugacity_for_density(const ClassicalModel& model, double q) {
  if (!(q >= 0.0 && q < model.cap)) {
    throw std::domain_error("zrp density " + std::to_string(q) + " outside [0, " + std::to_string(model.cap) + ")");
  }
  double hi = 1.0;
  while (zrp_moments(model, hi).mean < q) {
    hi *= 2.0;
    if (hi > 1e300) throw std::domain_error("zrp_fugacity_for_density: q(z) not invertible");
  }
  double lo = 0.0;
  while (hi - lo > 1e-13 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (zrp_moments(model, mid).mean < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FluxFunction zrp_flux_function(const ClassicalModel& model) {
  if (model.variant != ModelVariant::ZeroRange) throw std::invalid_argument("zrp_flux_function: zero range only");
  FluxFunction f;
  f.name = "zero-range(cap=" + std::to_string(model.cap) + ")";
  f.phi = [model](double q) { return zrp_fugacity_for_density(model, q); };
  f.dphi = [model](double q) {
    const double z = zrp_fugacity_for_density(model, q);
    if (z == 0.0) return model.g(1);
    return z / zrp_moments(model, z).variance;
  };
  f.chi = [model](double q) { return zrp_moments(model, zrp_fugacity_for_density(model, q)).variance; };
  f.q_min = 0.0;
  f.q_max = model.cap * (1.0 - 1e-9);
  return f;
}

namespace {

// Solves a tridiagonal system (sub, diag, super) in place (Thomas).
void solve_tridiagonal(Eigen::VectorXd sub, Eigen::VectorXd diag, Eigen::VectorXd super, Eigen::VectorXd& rhs) {
  const Eigen::Index n = diag.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    const double w = sub(i) / diag(i - 1);
    diag(i) -= w * super(i - 1);
    rhs(i) -= w * rhs(i - 1);
  }
  rhs(n - 1) /= diag(n - 1);
  for (Eigen::Index i = n - 1; i-- > 0;) rhs(i) = (rhs(i) - super(i) * rhs(i + 1)) / diag(i);
}

Eigen::VectorXd apply_phi(const FluxFunction& f, const Eigen::VectorXd& q) {
  Eigen::VectorXd out(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) out(i) = f.phi(q(i));
  return out;
}

// Second difference of the full nodal vector, on interior nodes (unscaled).
Eigen::VectorXd second_difference(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size() - 2;
  return v.segment(0, n) - 2.0 * v.segment(1, n) + v.segment(2, n);
}

}  // namespace

DensityProfile initial_profile(const MacroGrid& grid, const std::function<double(double)>& q0, const BoundaryData& h,
                               const FluxFunction& phi) {
  DensityProfile p;
  p.x = grid.coordinates();
  p.q.resize(grid.nodes());
  for (Eigen::Index i = 0; i < grid.nodes(); ++i) p.q(i) = q0(p.x(i));
  p.q(0) = phi.inverse(h.left);
  p.q(grid.nodes() - 1) = phi.inverse(h.right);
  return p;
}

DensityProfile solve_pde(const DensityProfile& q0, const BoundaryData& h, const FluxFunction& phi, double t,
                         const PdeOptions& options, PdeDiagnostics* diagnostics) {
  if (t < 0.0) throw std::invalid_argument("solve_pde: negative time");
  const Eigen::Index nodes = q0.q.size();
  if (nodes < 3) throw std::invalid_argument("solve_pde: need at least one interior node");
  const Eigen::Index n = nodes - 2;
  const double dx = 1.0 / static_cast<double>(n + 1);
  DensityProfile p = q0;
  p.q(0) = phi.inverse(h.left);
  p.q(nodes - 1) = phi.inverse(h.right);

  double dt = options.dt;
  if (options.scheme == TimeScheme::Explicit) {
    double max_dphi = 0.0;
    for (Eigen::Index i = 0; i < nodes; ++i) max_dphi = std::max(max_dphi, phi.dphi(p.q(i)));
    dt = std::min(dt, 0.5 * dx * dx / max_dphi);
  }
  const long steps = t > 0.0 ? std::max(1L, static_cast<long>(std::ceil(t / dt - 1e-9))) : 0;
  dt = steps > 0 ? t / static_cast<double>(steps) : 0.0;
  const double lambda = dt / (dx * dx);
  const double theta = options.scheme == TimeScheme::CrankNicolson ? 0.5 : 1.0;

  PdeDiagnostics diag;
  diag.steps = steps;
  diag.dt = dt;
  for (long s = 0; s < steps; ++s) {
    const Eigen::VectorXd old = p.q;
    const Eigen::VectorXd phi_old = apply_phi(phi, old);
    if (options.scheme == TimeScheme::Explicit) {
      p.q.segment(1, n) += lambda * second_difference(phi_old);
    } else {
      const Eigen::VectorXd explicit_part =
          old.segment(1, n) + (1.0 - theta) * lambda * second_difference(phi_old);
      int it = 0;
      for (; it < options.max_newton_iterations; ++it) {
        const Eigen::VectorXd phi_new = apply_phi(phi, p.q);
        Eigen::VectorXd residual = p.q.segment(1, n) - theta * lambda * second_difference(phi_new) - explicit_part;
        // At least one update: small steps late in a transient start below the tolerance.
        if (it > 0 && residual.cwiseAbs().maxCoeff() < options.newton_tolerance) break;
        Eigen::VectorXd d(n), sub = Eigen::VectorXd::Zero(n), super = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          d(i) = 1.0 + 2.0 * theta * lambda * phi.dphi(p.q(i + 1));
          if (i > 0) sub(i) = -theta * lambda * phi.dphi(p.q(i));
          if (i + 1 < n) super(i) = -theta * lambda * phi.dphi(p.q(i + 2));
        }
        solve_tridiagonal(sub, d, super, residual);
        p.q.segment(1, n) -= residual;
        for (Eigen::Index i = 1; i <= n; ++i) p.q(i) = std::clamp(p.q(i), phi.q_min, phi.q_max);
        if (residual.cwiseAbs().maxCoeff() < 1e-15) break;
      }
      if (it == options.max_newton_iterations) {
        throw std::runtime_error("solve_pde: Newton iteration did not converge at step " + std::to_string(s));
      }
      diag.max_newton_iterations = std::max(diag.max_newton_iterations, it);
    }
    // Mass balance: the change of sum(q) dx equals the boundary fluxes.
    const Eigen::VectorXd phi_new = apply_phi(phi, p.q);
    const Eigen::VectorXd phi_mix = theta * phi_new + (1.0 - theta) * phi_old;
    const double flux_left = (phi_mix(0) - phi_mix(1)) / dx;
    const double flux_right = (phi_mix(nodes - 1) - phi_mix(nodes - 2)) / dx;
    const double dmass = (p.q.segment(1, n) - old.segment(1, n)).sum() * dx;
    const double balance = options.scheme == TimeScheme::Explicit
                               ? dmass - dt * ((phi_old(0) - phi_old(1)) + (phi_old(nodes - 1) - phi_old(nodes - 2))) / dx
                               : dmass - dt * (flux_left + flux_right);
    diag.mass_balance_error = std::max(diag.mass_balance_error, std::abs(balance));
  }
  p.time = q0.time + t;
  if (diagnostics) *diagnostics = diag;
  return p;
}

DensityProfile stationary_profile(const MacroGrid& grid, const BoundaryData& h, const FluxFunction& phi) {
  DensityProfile p;
  p.x = grid.coordinates();
  p.q.resize(grid.nodes());
  for (Eigen::Index i = 0; i < grid.nodes(); ++i) {
    p.q(i) = phi.inverse(h.left + (h.right - h.left) * p.x(i));
    if (!(phi.dphi(p.q(i)) > 0.0)) {
      throw std::domain_error("stationary_profile: Phi is not strictly increasing at q=" + std::to_string(p.q(i)));
    }
  }
  return p;
}

Eigen::MatrixXd dirichlet_laplacian(Eigen::Index n, double dx) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    D(i, i) = -2.0;
    if (i > 0) D(i, i - 1) = 1.0;
    if (i + 1 < n) D(i, i + 1) = 1.0;
  }
  return D / (dx * dx);
}

LinearizedOperator::LinearizedOperator(const MacroGrid& grid, const Eigen::VectorXd& dphi_interior)
    : dx_(grid.dx()), dphi_(dphi_interior) {
  if (dphi_.size() != grid.interior()) throw std::invalid_argument("LinearizedOperator: Phi' size mismatch");
  if (!(dphi_.minCoeff() > 0.0)) throw std::invalid_argument("LinearizedOperator: Phi' must be positive");
  const Eigen::MatrixXd lap = dirichlet_laplacian(grid.interior(), dx_);
  matrix_ = lap * dphi_.asDiagonal();
  const Eigen::VectorXd root = dphi_.cwiseSqrt();
  const Eigen::MatrixXd sym = root.asDiagonal() * lap * root.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
}

LinearizedOperator LinearizedOperator::from_profile(const DensityProfile& qbar, const FluxFunction& phi) {
  const MacroGrid grid(qbar.q.size() - 2);
  Eigen::VectorXd d(grid.interior());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = phi.dphi(qbar.q(i + 1));
  return LinearizedOperator(grid, d);
}

Eigen::MatrixXd LinearizedOperator::semigroup(double t) const {
  if (t < 0.0) throw std::invalid_argument("semigroup: negative time");
  const Eigen::VectorXd root = dphi_.cwiseSqrt();
  const Eigen::VectorXd decay = (t * eigenvalues_).array().exp();
  return root.cwiseInverse().asDiagonal() * eigenvectors_ * decay.asDiagonal() * eigenvectors_.transpose() *
         root.asDiagonal();
}

Eigen::MatrixXd LinearizedOperator::adjoint_semigroup(double t) const { return semigroup(t).transpose(); }

Eigen::VectorXd semigroup_apply(const LinearizedOperator& L, double t, const Eigen::VectorXd& v) {
  if (v.size() != L.size()) throw std::invalid_argument("semigroup_apply: size mismatch");
  return L.semigroup(t) * v;
}

Eigen::VectorXd semigroup_apply_adjoint(const LinearizedOperator& L, double t, const Eigen::VectorXd& f) {
  if (f.size() != L.size()) throw std::invalid_argument("semigroup_apply_adjoint: size mismatch");
  return L.adjoint_semigroup(t) * f;
}

void write_profile_csv(std::ostream& os, const DensityProfile& p) {
  const auto precision = os.precision(17);
  os << "x,q\n";
  for (Eigen::Index i = 0; i < p.q.size(); ++i) os << p.x(i) << ',' << p.q(i) << '\n';
  os.precision(precision);
}

void write_flux_table_csv(std::ostream& os, const FluxFunction& phi, int rows) {
  const auto precision = os.precision(17);
  os << "q,phi,dphi,chi\n";
  for (int k = 0; k < rows; ++k) {
    const double q = phi.q_min + (phi.q_max - phi.q_min) * k / std::max(1, rows);
    os << q << ',' << phi.phi(q) << ',' << phi.dphi(q) << ',' << phi.chi(q) << '\n';
  }
  os.precision(precision);
}

}  // namespace hydrolab
