#include "hydrolab/oracles.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace hydrolab {

Eigen::MatrixXd SepMoments::covariance() const { return pair - density * density.transpose(); }

namespace {

Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, const char* what) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error(std::string(what) + ": linear system is singular");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw std::runtime_error(std::string(what) + ": solve failed");
  return x;
}

}  // namespace

SepMoments sep_moment_oracle(const ClassicalModel& model, const LatticeGeometry& g) {
  if (model.variant != ModelVariant::SimpleExclusion) {
    throw std::invalid_argument("sep_moment_oracle: model is not an exclusion process");
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  auto h = [&](Eigen::Index x) { return model.entry[static_cast<std::size_t>(x)]; };
  auto r = [&](Eigen::Index x) { return static_cast<double>(model.exits[static_cast<std::size_t>(x)]); };

  // (-Delta + h + r) rho = h
  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd rhs(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const auto nbs = g.neighbors(static_cast<std::size_t>(x));
    for (std::size_t y : nbs) t.emplace_back(x, static_cast<Eigen::Index>(y), -1.0);
    t.emplace_back(x, x, static_cast<double>(nbs.size()) + h(x) + r(x));
    rhs(x) = h(x);
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  SepMoments out;
  out.density = solve_sparse(A, rhs, "sep_moment_oracle (first moments)");

  // Pair unknowns C_xy, x < y, packed row by row.
  std::vector<Eigen::Index> row_start(static_cast<std::size_t>(n) + 1, 0);
  for (Eigen::Index x = 0; x < n; ++x) row_start[x + 1] = row_start[x] + (n - 1 - x);
  auto idx = [&](Eigen::Index x, Eigen::Index y) {
    if (x > y) std::swap(x, y);
    return row_start[x] + (y - x - 1);
  };
  const Eigen::Index m = row_start[n];
  out.pair = out.density.asDiagonal();
  if (m == 0) return out;

  t.clear();
  t.reserve(static_cast<std::size_t>(m) * 6);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const Eigen::Index row = idx(x, y);
      double diag = h(x) + r(x) + h(y) + r(y);
      for (std::size_t z : g.neighbors(static_cast<std::size_t>(x))) {
        const auto zi = static_cast<Eigen::Index>(z);
        if (zi == y) continue;
        t.emplace_back(row, idx(zi, y), -1.0);
        diag += 1.0;
      }
      for (std::size_t z : g.neighbors(static_cast<std::size_t>(y))) {
        const auto zi = static_cast<Eigen::Index>(z);
        if (zi == x) continue;
        t.emplace_back(row, idx(x, zi), -1.0);
        diag += 1.0;
      }
      t.emplace_back(row, row, diag);
      b(row) = h(x) * out.density(y) + h(y) * out.density(x);
    }
  }
  Eigen::SparseMatrix<double> P(m, m);
  P.setFromTriplets(t.begin(), t.end());
  const Eigen::VectorXd c = solve_sparse(P, b, "sep_moment_oracle (pair correlations)");
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) out.pair(x, y) = out.pair(y, x) = c(idx(x, y));
  }
  return out;
}

Eigen::VectorXd zero_range_marginal(const ClassicalModel& model, double z) {
  Eigen::VectorXd w(model.cap + 1);
  w(0) = 1.0;
  for (int k = 1; k <= model.cap; ++k) w(k) = w(k - 1) * z / model.g(k);
  return w / w.sum();
}

Eigen::VectorXd ZeroRangeProductMeasure::density() const {
  const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(marginals.cols(), 0.0, static_cast<double>(marginals.cols() - 1));
  return marginals * k;
}

Eigen::VectorXd ZeroRangeProductMeasure::variance() const {
  const Eigen::VectorXd k = Eigen::VectorXd::LinSpaced(marginals.cols(), 0.0, static_cast<double>(marginals.cols() - 1));
  const Eigen::VectorXd mean = marginals * k;
  const Eigen::VectorXd second = marginals * k.cwiseProduct(k);
  return second - mean.cwiseProduct(mean);
}

double ZeroRangeProductMeasure::probability(const Configuration& c) const {
  double p = 1.0;
  for (std::size_t x = 0; x < c.size(); ++x) p *= marginals(static_cast<Eigen::Index>(x), c.n[x]);
  return p;
}

double ZeroRangeProductMeasure::cap_mass() const { return marginals.col(marginals.cols() - 1).maxCoeff(); }

Eigen::VectorXd ZeroRangeProductMeasure::as_vector(const ConfigurationSpace& space) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(space.size()));
  for (std::size_t i = 0; i < space.size(); ++i) v(static_cast<Eigen::Index>(i)) = probability(space.decode(i));
  return v;
}

ZeroRangeProductMeasure zrp_product_measure(const ClassicalModel& model, const LatticeGeometry& g) {
  if (model.variant != ModelVariant::ZeroRange) {
    throw std::invalid_argument("zrp_product_measure: model is not a zero range process");
  }
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd rhs(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const auto nbs = g.neighbors(static_cast<std::size_t>(x));
    for (std::size_t y : nbs) t.emplace_back(x, static_cast<Eigen::Index>(y), -1.0);
    t.emplace_back(x, x, static_cast<double>(nbs.size()) + model.exits[static_cast<std::size_t>(x)]);
    rhs(x) = model.entry[static_cast<std::size_t>(x)];
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  ZeroRangeProductMeasure out;
  out.fugacity = solve_sparse(A, rhs, "zrp_product_measure (fugacity)");
  if (!(out.fugacity.minCoeff() > 0.0)) throw std::runtime_error("zrp_product_measure: non-positive fugacity");
  out.marginals.resize(n, model.cap + 1);
  for (Eigen::Index x = 0; x < n; ++x) out.marginals.row(x) = zero_range_marginal(model, out.fugacity(x)).transpose();
  return out;
}

}  // namespace hydrolab
