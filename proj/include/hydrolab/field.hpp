#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hydrolab {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A field sampled at a regular macroscopic time step, with exact time
/// integrals of a few linear observables over every sampling interval.
///
/// `values` holds one row per sample and one column per node (lattice site
/// or grid node). `integrals` holds one row per interval [t_k, t_{k+1}] and
/// one column per integrand, where integrand k is the linear functional
/// `integrands.col(k)` applied to the field.
template <typename Scalar>
struct FieldPath {
  double dt = 0.0;
  RowMatrix<Scalar> values;
  Eigen::MatrixXd integrands;
  Eigen::MatrixXd integrals;
  std::uint64_t stream = 0;

  Eigen::Index samples() const { return values.rows(); }
  Eigen::Index nodes() const { return values.cols(); }

  /// values * weights, blockwise so that narrow scalar types are widened
  /// without materializing the whole matrix.
  Eigen::VectorXd project(const Eigen::VectorXd& weights) const {
    if (weights.size() != nodes()) throw std::invalid_argument("FieldPath::project: weight size mismatch");
    Eigen::VectorXd out(samples());
    constexpr Eigen::Index kBlock = 2048;
    for (Eigen::Index r = 0; r < samples(); r += kBlock) {
      const Eigen::Index n = std::min(kBlock, samples() - r);
      out.segment(r, n) = values.middleRows(r, n).template cast<double>() * weights;
    }
    return out;
  }

  /// Drops the first `count` samples (and the matching intervals).
  void drop_leading(Eigen::Index count) {
    count = std::min(count, samples());
    values = values.bottomRows(samples() - count).eval();
    if (integrals.rows() > 0) {
      const Eigen::Index keep = std::max<Eigen::Index>(0, integrals.rows() - count);
      integrals = integrals.bottomRows(keep).eval();
    }
  }
};

using OccupationPath = FieldPath<std::uint8_t>;
using GridPath = FieldPath<double>;

}  // namespace hydrolab
