#pragma once

#include "hydrolab/classical.hpp"
#include "hydrolab/lattice.hpp"
#include "hydrolab/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace hydrolab {

using Complex = std::complex<double>;
using Operator = Eigen::SparseMatrix<Complex>;
using DenseOperator = Eigen::MatrixXcd;
using Superoperator = Eigen::SparseMatrix<Complex>;

enum class Statistics { Fermion, Boson };

/// Occupation-number basis psi(n), n in {0..cap}^sites, enumerated
/// lexicographically with the first site most significant (the same order as
/// ConfigurationSpace).
class FockSpace {
 public:
  FockSpace(std::size_t sites, Statistics statistics, int n_max = 1, std::size_t guard = 20000);

  Statistics statistics() const { return statistics_; }
  std::size_t sites() const { return space_.sites(); }
  int cap() const { return space_.cap(); }
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(space_.size()); }
  Configuration occupation(Eigen::Index index) const { return space_.decode(static_cast<std::size_t>(index)); }
  Eigen::Index index_of(const Configuration& c) const { return static_cast<Eigen::Index>(space_.encode(c)); }
  const ConfigurationSpace& configurations() const { return space_; }

 private:
  Statistics statistics_;
  ConfigurationSpace space_;
};

/// a_x, a_x^* and n_x per site. Fermions carry the Jordan-Wigner string
/// (-1)^{sum_{y<x} n_y} in the site order; bosons are truncated at the cap,
/// where a^* vanishes.
struct LadderOps {
  std::vector<Operator> annihilate;
  std::vector<Operator> create;
  std::vector<Operator> number;
};

LadderOps ladder_ops(const FockSpace& space);

/// alpha_x psi(n) = psi(n^{x,-}) for n_x > 0; alpha_x^* psi(n) = psi(n^{x,+})
/// for n_x < cap, and 0 at the cap.
struct BoundedBosonOps {
  std::vector<Operator> lower;
  std::vector<Operator> raise;
};

BoundedBosonOps bounded_boson_ops(const FockSpace& space);

/// f(n_x) as a diagonal operator.
Operator occupation_function(const FockSpace& space, std::size_t site, const std::vector<double>& values);

Operator identity_operator(const FockSpace& space);

/// U(theta) = exp(i sum_x theta_x n_x).
Operator gauge_unitary(const FockSpace& space, const Eigen::VectorXd& theta);
/// gamma(theta) A = U A U^*.
DenseOperator gauge_automorphism(const FockSpace& space, const Eigen::VectorXd& theta, const DenseOperator& A);
/// vec(U A U^*) = (conj(U) kron U) vec(A).
Superoperator gauge_superoperator(const FockSpace& space, const Eigen::VectorXd& theta);

struct JumpOperator {
  std::string label;
  Operator V;
};

struct LindbladModel {
  Operator H;
  std::vector<JumpOperator> jumps;

  Eigen::Index dimension() const { return H.rows(); }
};

/// H = 0 and the jump set of the exclusion (fermion) or zero range (bounded
/// boson) model: one operator per ordered neighbour pair, one exit and one
/// entry per boundary site. Throws on a statistics/model mismatch.
LindbladModel assemble_lindblad(const ClassicalModel& model, const FockSpace& space, const LatticeGeometry& g);

/// G(A) = i[H,A] + sum_j (V_j^* A V_j - {V_j^* V_j, A}/2).
DenseOperator heisenberg_generator(const LindbladModel& L, const DenseOperator& A);
Operator heisenberg_generator(const LindbladModel& L, const Operator& A);
/// G_*(rho) = -i[H,rho] + sum_j (V_j rho V_j^* - {V_j^* V_j, rho}/2).
DenseOperator schrodinger_generator(const LindbladModel& L, const DenseOperator& rho);

/// Column-major vectorizations of G and G_*.
Superoperator heisenberg_superoperator(const LindbladModel& L);
Superoperator schrodinger_superoperator(const LindbladModel& L);

Eigen::VectorXcd vectorize(const DenseOperator& A);
DenseOperator unvectorize(const Eigen::VectorXcd& v, Eigen::Index dimension);

struct DensityDiagnostics {
  double trace_error = 0.0;        // |tr rho - 1|
  double hermiticity_error = 0.0;  // max |rho - rho^*|
  double min_eigenvalue = 0.0;
};

DensityDiagnostics diagnose_density(const DenseOperator& rho);

/// exp(t G_*) rho0 by scaled Taylor series of the matrix-level action.
/// Throws std::runtime_error when the result breaks trace (1e-9) or
/// positivity (-1e-8).
DenseOperator evolve(const LindbladModel& L, const DenseOperator& rho0, double t,
                     DensityDiagnostics* diagnostics = nullptr);

struct StationaryState {
  DenseOperator rho;
  int null_dimension = 0;        // dim ker G_*
  int commutant_dimension = 0;   // dim of {X : [X, V_j] = [X, V_j^*] = 0 for all j}
  double residual = 0.0;         // max |G_*(rho)|
  double hermitization_shift = 0.0;

  bool certified_unique() const { return null_dimension == 1 && commutant_dimension == 1; }
};

/// Stationary state from the trace-bordered superoperator system, with the
/// null-space and commutant dimensions as uniqueness certificate.
StationaryState stationary_state(const LindbladModel& L);

/// Dimension of the joint commutant of H and every V_j, V_j^*.
int commutant_dimension(const LindbladModel& L);

/// Dimension of ker S.
int null_space_dimension(const Superoperator& S);

/// P(A): the diagonal part of A in the occupation basis.
DenseOperator gauge_average(const DenseOperator& A);

/// max over indicator functions F = 1_{m} of |G(F(n)) - diag(G_cl F)|.
double check_classical_restriction(const LindbladModel& L,
                                   const Eigen::SparseMatrix<double, Eigen::RowMajor>& classical_generator);

/// max over `samples` random theta and all matrix units A of
/// |gamma(theta) G(A) - G(gamma(theta) A)|. The first theta is 0.
double check_gauge_covariance(const LindbladModel& L, const FockSpace& space, int samples, Engine& rng);

/// Diagonal density matrix with entries pi(n).
DenseOperator lift_state(const Eigen::VectorXd& pi);

/// Plain-text triplets "row col re im", one non-zero per line.
void write_triplets(std::ostream& os, const Operator& A);
void write_triplets(std::ostream& os, const DenseOperator& A, double threshold = 0.0);

}  // namespace hydrolab
