#include "hydrolab/quantum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hydrolab {

namespace {

using Triplets = std::vector<Eigen::Triplet<Complex>>;

Operator from_triplets(Eigen::Index dim, const Triplets& t) {
  Operator A(dim, dim);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

// Adjacent-pair and single-site operators below only act on occupation
// tuples, so they are built by mapping each basis state to its image.
template <typename Image>
Operator basis_map(const FockSpace& space, Image image) {
  Triplets t;
  for (Eigen::Index i = 0; i < space.dimension(); ++i) {
    Configuration c = space.occupation(i);
    double coefficient = 0.0;
    if (image(c, coefficient) && coefficient != 0.0) t.emplace_back(space.index_of(c), i, coefficient);
  }
  return from_triplets(space.dimension(), t);
}

int string_sign(const Configuration& c, std::size_t site) {
  int parity = 0;
  for (std::size_t y = 0; y < site; ++y) parity += c.n[y];
  return parity % 2 == 0 ? 1 : -1;
}

Operator adjoint(const Operator& A) { return Operator(A.adjoint()); }

double operator_norm_bound(const Operator& A) {
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(A.rows());
  Eigen::VectorXd col_sums = Eigen::VectorXd::Zero(A.cols());
  for (Eigen::Index k = 0; k < A.outerSize(); ++k) {
    for (Operator::InnerIterator it(A, k); it; ++it) {
      row_sums(it.row()) += std::abs(it.value());
      col_sums(it.col()) += std::abs(it.value());
    }
  }
  if (A.nonZeros() == 0) return 0.0;
  return std::sqrt(row_sums.maxCoeff() * col_sums.maxCoeff());
}

Eigen::VectorXd gauge_phases(const FockSpace& space, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != space.sites()) {
    throw std::invalid_argument("gauge phase has " + std::to_string(theta.size()) + " entries for " +
                                std::to_string(space.sites()) + " sites");
  }
  Eigen::VectorXd phi(space.dimension());
  for (Eigen::Index i = 0; i < space.dimension(); ++i) {
    const Configuration c = space.occupation(i);
    double s = 0.0;
    for (std::size_t x = 0; x < c.size(); ++x) s += c.n[x] * theta(static_cast<Eigen::Index>(x));
    phi(i) = s;
  }
  return phi;
}

double max_abs(const DenseOperator& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

}  // namespace

FockSpace::FockSpace(std::size_t sites, Statistics statistics, int n_max, std::size_t guard)
    : statistics_(statistics), space_(sites, statistics == Statistics::Fermion ? 1 : n_max, guard) {
  if (statistics == Statistics::Boson && n_max < 1) throw std::invalid_argument("FockSpace: boson cap must be >= 1");
}

LadderOps ladder_ops(const FockSpace& space) {
  LadderOps ops;
  const int cap = space.cap();
  const bool fermion = space.statistics() == Statistics::Fermion;
  for (std::size_t x = 0; x < space.sites(); ++x) {
    ops.annihilate.push_back(basis_map(space, [&](Configuration& c, double& coef) {
      if (c.n[x] == 0) return false;
      coef = fermion ? string_sign(c, x) : std::sqrt(static_cast<double>(c.n[x]));
      --c.n[x];
      return true;
    }));
    ops.create.push_back(basis_map(space, [&](Configuration& c, double& coef) {
      if (c.n[x] >= cap) return false;
      coef = fermion ? string_sign(c, x) : std::sqrt(static_cast<double>(c.n[x] + 1));
      ++c.n[x];
      return true;
    }));
    ops.number.push_back(basis_map(space, [&](Configuration& c, double& coef) {
      coef = c.n[x];
      return true;
    }));
  }
  return ops;
}

BoundedBosonOps bounded_boson_ops(const FockSpace& space) {
  if (space.statistics() != Statistics::Boson) throw std::invalid_argument("bounded_boson_ops: needs a boson space");
  BoundedBosonOps ops;
  const int cap = space.cap();
  for (std::size_t x = 0; x < space.sites(); ++x) {
    ops.lower.push_back(basis_map(space, [&](Configuration& c, double& coef) {
      if (c.n[x] == 0) return false;
      coef = 1.0;
      --c.n[x];
      return true;
    }));
    ops.raise.push_back(basis_map(space, [&](Configuration& c, double& coef) {
      if (c.n[x] >= cap) return false;
      coef = 1.0;
      ++c.n[x];
      return true;
    }));
  }
  return ops;
}

Operator occupation_function(const FockSpace& space, std::size_t site, const std::vector<double>& values) {
  return basis_map(space, [&](Configuration& c, double& coef) {
    coef = values.at(c.n[site]);
    return true;
  });
}

Operator identity_operator(const FockSpace& space) {
  Operator I(space.dimension(), space.dimension());
  I.setIdentity();
  return I;
}

Operator gauge_unitary(const FockSpace& space, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd phi = gauge_phases(space, theta);
  Triplets t;
  for (Eigen::Index i = 0; i < phi.size(); ++i) t.emplace_back(i, i, std::polar(1.0, phi(i)));
  return from_triplets(space.dimension(), t);
}

DenseOperator gauge_automorphism(const FockSpace& space, const Eigen::VectorXd& theta, const DenseOperator& A) {
  const Operator U = gauge_unitary(space, theta);
  return U * A * adjoint(U);
}

Superoperator gauge_superoperator(const FockSpace& space, const Eigen::VectorXd& theta) {
  const Operator U = gauge_unitary(space, theta);
  return Eigen::kroneckerProduct(Operator(U.conjugate()), U).eval();
}

LindbladModel assemble_lindblad(const ClassicalModel& model, const FockSpace& space, const LatticeGeometry& g) {
  if (space.sites() != g.size() || model.sites() != g.size()) {
    throw std::invalid_argument("assemble_lindblad: model, Fock space and geometry sizes differ");
  }
  const bool sep = model.variant == ModelVariant::SimpleExclusion;
  if (sep != (space.statistics() == Statistics::Fermion)) {
    throw std::invalid_argument(std::string("assemble_lindblad: ") + to_string(model.variant) +
                                " requires a " + (sep ? "fermion" : "boson") + " Fock space");
  }
  if (!sep && space.cap() != model.cap) {
    throw std::invalid_argument("assemble_lindblad: Fock space cap differs from the model cap");
  }

  LindbladModel L;
  L.H = Operator(space.dimension(), space.dimension());
  std::vector<Operator> lower, raise, dressed;
  if (sep) {
    LadderOps ops = ladder_ops(space);
    lower = std::move(ops.annihilate);
    raise = std::move(ops.create);
    dressed = lower;
  } else {
    BoundedBosonOps ops = bounded_boson_ops(space);
    lower = std::move(ops.lower);
    raise = std::move(ops.raise);
    std::vector<double> root_g(static_cast<std::size_t>(model.cap) + 1);
    for (int k = 0; k <= model.cap; ++k) root_g[static_cast<std::size_t>(k)] = std::sqrt(model.g(k));
    for (std::size_t x = 0; x < g.size(); ++x) dressed.push_back(lower[x] * occupation_function(space, x, root_g));
  }

  for (std::size_t x = 0; x < g.size(); ++x) {
    for (std::size_t y : g.neighbors(x)) {
      L.jumps.push_back({"hop " + std::to_string(x) + "->" + std::to_string(y), Operator(raise[y] * dressed[x])});
    }
  }
  for (std::size_t b : g.boundary()) {
    L.jumps.push_back({"exit " + std::to_string(b), Operator(std::sqrt(model.exits[b]) * dressed[b])});
    L.jumps.push_back({"entry " + std::to_string(b), Operator(std::sqrt(model.entry[b]) * raise[b])});
  }
  return L;
}

DenseOperator heisenberg_generator(const LindbladModel& L, const DenseOperator& A) {
  const Complex i(0.0, 1.0);
  DenseOperator out = i * (L.H * A - A * L.H);
  for (const auto& j : L.jumps) {
    const Operator Vd = adjoint(j.V);
    const Operator K = Vd * j.V;
    out += Vd * (A * j.V) - 0.5 * (K * A + A * K);
  }
  return out;
}

Operator heisenberg_generator(const LindbladModel& L, const Operator& A) {
  const Complex i(0.0, 1.0);
  Operator out = i * (L.H * A - A * L.H);
  for (const auto& j : L.jumps) {
    const Operator Vd = adjoint(j.V);
    const Operator K = Vd * j.V;
    out += Vd * A * j.V - 0.5 * (K * A + A * K);
  }
  out.prune(Complex(0.0, 0.0));
  return out;
}

DenseOperator schrodinger_generator(const LindbladModel& L, const DenseOperator& rho) {
  const Complex i(0.0, 1.0);
  DenseOperator out = -i * (L.H * rho - rho * L.H);
  for (const auto& j : L.jumps) {
    const Operator Vd = adjoint(j.V);
    const Operator K = Vd * j.V;
    out += j.V * (rho * Vd) - 0.5 * (K * rho + rho * K);
  }
  return out;
}

Superoperator heisenberg_superoperator(const LindbladModel& L) {
  const Eigen::Index D = L.dimension();
  Operator I(D, D);
  I.setIdentity();
  const Complex i(0.0, 1.0);
  Superoperator S = i * (Eigen::kroneckerProduct(I, L.H).eval() -
                         Eigen::kroneckerProduct(Operator(L.H.transpose()), I).eval());
  for (const auto& j : L.jumps) {
    const Operator Vd = adjoint(j.V);
    const Operator K = Vd * j.V;
    S += Eigen::kroneckerProduct(Operator(j.V.transpose()), Vd).eval();
    S -= 0.5 * Eigen::kroneckerProduct(I, K).eval();
    S -= 0.5 * Eigen::kroneckerProduct(Operator(K.transpose()), I).eval();
  }
  S.prune(Complex(0.0, 0.0));
  return S;
}

Superoperator schrodinger_superoperator(const LindbladModel& L) {
  const Eigen::Index D = L.dimension();
  Operator I(D, D);
  I.setIdentity();
  const Complex i(0.0, 1.0);
  Superoperator S = -i * (Eigen::kroneckerProduct(I, L.H).eval() -
                          Eigen::kroneckerProduct(Operator(L.H.transpose()), I).eval());
  for (const auto& j : L.jumps) {
    const Operator Vd = adjoint(j.V);
    const Operator K = Vd * j.V;
    S += Eigen::kroneckerProduct(Operator(j.V.conjugate()), j.V).eval();
    S -= 0.5 * Eigen::kroneckerProduct(I, K).eval();
    S -= 0.5 * Eigen::kroneckerProduct(Operator(K.transpose()), I).eval();
  }
  S.prune(Complex(0.0, 0.0));
  return S;
}

Eigen::VectorXcd vectorize(const DenseOperator& A) {
  return Eigen::Map<const Eigen::VectorXcd>(A.data(), A.size());
}

DenseOperator unvectorize(const Eigen::VectorXcd& v, Eigen::Index dimension) {
  if (v.size() != dimension * dimension) throw std::invalid_argument("unvectorize: size is not dimension^2");
  return Eigen::Map<const DenseOperator>(v.data(), dimension, dimension);
}

DensityDiagnostics diagnose_density(const DenseOperator& rho) {
  DensityDiagnostics d;
  d.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  d.hermiticity_error = max_abs(rho - rho.adjoint());
  const DenseOperator h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseOperator> es(h, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

DenseOperator evolve(const LindbladModel& L, const DenseOperator& rho0, double t, DensityDiagnostics* diagnostics) {
  if (t < 0.0) throw std::invalid_argument("evolve: negative time");
  if (rho0.rows() != L.dimension() || rho0.cols() != L.dimension()) {
    throw std::invalid_argument("evolve: state dimension does not match the model");
  }
  DenseOperator rho = rho0;
  if (t > 0.0) {
    double bound = 2.0 * operator_norm_bound(L.H);
    for (const auto& j : L.jumps) {
      const double v = operator_norm_bound(j.V);
      bound += 2.0 * v * v;
    }
    const auto steps = static_cast<long>(std::ceil(t * bound / 0.5));
    const long n_steps = std::max(1L, steps);
    const double tau = t / static_cast<double>(n_steps);
    for (long s = 0; s < n_steps; ++s) {
      DenseOperator term = rho;
      DenseOperator sum = rho;
      for (int k = 1; k <= 80; ++k) {
        term = schrodinger_generator(L, term) * (tau / k);
        sum += term;
        if (max_abs(term) <= 1e-18 * std::max(1.0, max_abs(sum))) break;
      }
      rho = sum;
    }
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const DensityDiagnostics d = diagnose_density(rho);
  if (diagnostics) *diagnostics = d;
  const double trace0 = std::abs(rho0.trace());
  if (std::abs(std::abs(rho.trace()) - trace0) > 1e-9 || d.min_eigenvalue < -1e-8) {
    throw std::runtime_error("evolve: trace drift " + std::to_string(std::abs(rho.trace()) - trace0) +
                             ", minimum eigenvalue " + std::to_string(d.min_eigenvalue));
  }
  return rho;
}

namespace {

constexpr Eigen::Index kDenseNullLimit = 1024;

// dim ker of the stacked constraints, via the Gram matrix for small systems
// and a rank-revealing sparse QR otherwise.
int null_dimension_of_stack(const std::vector<Superoperator>& blocks, Eigen::Index cols) {
  if (cols <= kDenseNullLimit) {
    DenseOperator gram = DenseOperator::Zero(cols, cols);
    for (const auto& B : blocks) gram += DenseOperator(B.adjoint() * B);
    Eigen::SelfAdjointEigenSolver<DenseOperator> es(gram, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double tol = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    int count = 0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) count += ev(k) < tol ? 1 : 0;
    return count;
  }
  Eigen::Index rows = 0;
  for (const auto& B : blocks) rows += B.rows();
  Triplets t;
  Eigen::Index offset = 0;
  for (const auto& B : blocks) {
    for (Eigen::Index k = 0; k < B.outerSize(); ++k) {
      for (Superoperator::InnerIterator it(B, k); it; ++it) t.emplace_back(offset + it.row(), it.col(), it.value());
    }
    offset += B.rows();
  }
  Superoperator stack(rows, cols);
  stack.setFromTriplets(t.begin(), t.end());
  stack.makeCompressed();
  Eigen::SparseQR<Superoperator, Eigen::COLAMDOrdering<int>> qr;
  qr.setPivotThreshold(1e-10);
  qr.compute(stack);
  if (qr.info() != Eigen::Success) throw std::runtime_error("null-space computation: sparse QR failed");
  return static_cast<int>(cols - qr.rank());
}

}  // namespace

int null_space_dimension(const Superoperator& S) { return null_dimension_of_stack({S}, S.cols()); }

int commutant_dimension(const LindbladModel& L) {
  const Eigen::Index D = L.dimension();
  Operator I(D, D);
  I.setIdentity();
  std::vector<Superoperator> blocks;
  auto add = [&](const Operator& S) {
    if (S.nonZeros() == 0) return;
    Superoperator K = Eigen::kroneckerProduct(I, S).eval();
    K -= Eigen::kroneckerProduct(Operator(S.transpose()), I).eval();
    blocks.push_back(std::move(K));
  };
  add(L.H);
  for (const auto& j : L.jumps) {
    add(j.V);
    add(adjoint(j.V));
  }
  if (blocks.empty()) return static_cast<int>(D * D);
  return null_dimension_of_stack(blocks, D * D);
}

StationaryState stationary_state(const LindbladModel& L) {
  const Eigen::Index D = L.dimension();
  const Superoperator S = schrodinger_superoperator(L);

  // Replace the equation for rho_00 by the trace condition.
  Triplets t;
  for (Eigen::Index k = 0; k < S.outerSize(); ++k) {
    for (Superoperator::InnerIterator it(S, k); it; ++it) {
      if (it.row() != 0) t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index i = 0; i < D; ++i) t.emplace_back(0, i * D + i, 1.0);
  Superoperator A(D * D, D * D);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  Eigen::SparseLU<Superoperator> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary_state: bordered system is singular");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(D * D);
  rhs(0) = 1.0;
  const Eigen::VectorXcd v = lu.solve(rhs);

  StationaryState out;
  const DenseOperator raw = unvectorize(v, D);
  DenseOperator h = 0.5 * (raw + raw.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseOperator> es(h);
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  h = es.eigenvectors() * clipped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  h /= h.trace();
  out.hermitization_shift = max_abs(h - raw);
  out.rho = h;
  out.residual = max_abs(schrodinger_generator(L, out.rho));
  out.null_dimension = null_space_dimension(S);
  out.commutant_dimension = commutant_dimension(L);
  return out;
}

DenseOperator gauge_average(const DenseOperator& A) {
  DenseOperator out = DenseOperator::Zero(A.rows(), A.cols());
  out.diagonal() = A.diagonal();
  return out;
}

double check_classical_restriction(const LindbladModel& L,
                                   const Eigen::SparseMatrix<double, Eigen::RowMajor>& classical_generator) {
  const Eigen::Index D = L.dimension();
  if (classical_generator.rows() != D) {
    throw std::invalid_argument("check_classical_restriction: classical and quantum dimensions differ");
  }
  const Eigen::MatrixXd Gcl(classical_generator);
  double worst = 0.0;
  for (Eigen::Index m = 0; m < D; ++m) {
    Operator F(D, D);
    F.insert(m, m) = 1.0;
    DenseOperator diff = DenseOperator(heisenberg_generator(L, F));
    diff.diagonal() -= Gcl.col(m).cast<Complex>();
    worst = std::max(worst, max_abs(diff));
  }
  return worst;
}

double check_gauge_covariance(const LindbladModel& L, const FockSpace& space, int samples, Engine& rng) {
  const Eigen::Index D = L.dimension();
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.sites()));
    if (s > 0) {
      for (Eigen::Index x = 0; x < theta.size(); ++x) theta(x) = angle(rng);
    }
    const Operator U = gauge_unitary(space, theta);
    const Operator Ud = adjoint(U);
    for (Eigen::Index i = 0; i < D; ++i) {
      for (Eigen::Index j = 0; j < D; ++j) {
        Operator A(D, D);
        A.insert(i, j) = 1.0;
        const Operator lhs = U * heisenberg_generator(L, A) * Ud;
        const Operator rhs = heisenberg_generator(L, Operator(U * A * Ud));
        worst = std::max(worst, max_abs(DenseOperator(lhs - rhs)));
      }
    }
  }
  return worst;
}

DenseOperator lift_state(const Eigen::VectorXd& pi) {
  DenseOperator rho = DenseOperator::Zero(pi.size(), pi.size());
  rho.diagonal() = pi.cast<Complex>();
  return rho;
}

void write_triplets(std::ostream& os, const Operator& A) {
  const auto precision = os.precision(17);
  for (Eigen::Index k = 0; k < A.outerSize(); ++k) {
    for (Operator::InnerIterator it(A, k); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
  os.precision(precision);
}

void write_triplets(std::ostream& os, const DenseOperator& A, double threshold) {
  const auto precision = os.precision(17);
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      if (std::abs(A(r, c)) > threshold) os << r << ' ' << c << ' ' << A(r, c).real() << ' ' << A(r, c).imag() << '\n';
    }
  }
  os.precision(precision);
}

}  // namespace hydrolab
