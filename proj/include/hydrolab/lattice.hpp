#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hydrolab {

/// Bounded open region of R^d given by a bounding box and a membership
/// predicate on macroscopic points.
struct Region {
  std::string name;
  std::vector<double> lower;
  std::vector<double> upper;
  std::function<bool(std::span<const double>)> contains;

  int dimension() const { return static_cast<int>(lower.size()); }

  /// The open unit cube (0,1)^d.
  static Region unit_cube(int d);
};

/// Real-valued field on the sites of a lattice, indexed like the geometry.
using SiteField = Eigen::VectorXd;

/// Omega_N = Z^d intersected with L_N * Omega, together with its boundary and
/// interior split. Immutable after construction.
class LatticeGeometry {
 public:
  int dimension() const { return dimension_; }
  long particle_count() const { return particle_count_; }
  double density() const { return density_; }
  double scale() const { return scale_; }
  const Region& region() const { return region_; }

  std::size_t size() const { return exit_count_.size(); }
  std::span<const int> coords(std::size_t site) const;
  std::optional<std::size_t> index_of(std::span<const int> coords) const;

  /// Nearest neighbours of a site that lie inside Omega_N.
  std::span<const std::size_t> neighbors(std::size_t site) const;
  /// r_b: number of nearest neighbours on Z^d outside Omega_N.
  int exit_multiplicity(std::size_t site) const { return exit_count_[site]; }
  bool is_boundary(std::size_t site) const { return exit_count_[site] > 0; }

  const std::vector<std::size_t>& boundary() const { return boundary_; }
  const std::vector<std::size_t>& interior() const { return interior_; }

  /// Macroscopic position y / L_N of a site.
  Eigen::VectorXd position(std::size_t site) const;

  /// Plain-text description (dimension, scale, sites, boundary, r_b table).
  std::string describe() const;

 private:
  friend LatticeGeometry build_lattice(int, long, double, const Region&);

  int dimension_ = 1;
  long particle_count_ = 0;
  double density_ = 1.0;
  double scale_ = 0.0;
  Region region_;
  std::vector<int> coords_;  // size() * dimension_, lexicographic
  std::vector<long> box_lower_;
  std::vector<long> box_extent_;
  std::vector<std::ptrdiff_t> box_index_;  // dense box -> site or -1
  std::vector<std::size_t> neighbor_offsets_;
  std::vector<std::size_t> neighbor_sites_;
  std::vector<int> exit_count_;
  std::vector<std::size_t> boundary_;
  std::vector<std::size_t> interior_;
};

/// Builds Omega_N with L_N = (N / nu)^(1/d). Site enumeration is
/// lexicographic in the coordinates. Throws std::invalid_argument on bad
/// parameters or an empty site set.
LatticeGeometry build_lattice(int d, long N, double nu, const Region& region);

/// Convenience for the one-dimensional unit interval.
LatticeGeometry build_interval(long N, double nu = 1.0);

/// (Delta f)_x = sum over nearest neighbours y of x inside Omega_N of (f_y - f_x).
template <typename Derived>
SiteField discrete_laplacian(const LatticeGeometry& g, const Eigen::MatrixBase<Derived>& f) {
  if (static_cast<std::size_t>(f.size()) != g.size()) {
    throw std::invalid_argument("discrete_laplacian: field size does not match lattice");
  }
  SiteField out = SiteField::Zero(static_cast<Eigen::Index>(g.size()));
  for (std::size_t x = 0; x < g.size(); ++x) {
    double acc = 0.0;
    for (std::size_t y : g.neighbors(x)) acc += f(y) - f(x);
    out(x) = acc;
  }
  return out;
}

/// Matrix of the discrete Laplacian in the site enumeration.
Eigen::SparseMatrix<double> laplacian_matrix(const LatticeGeometry& g);

}  // namespace hydrolab
