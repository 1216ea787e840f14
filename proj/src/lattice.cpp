#include "hydrolab/lattice.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hydrolab {

namespace {

constexpr double kMembershipTolerance = 1e-12;

// Snap L_N to the nearest integer when it is one up to rounding, so that
// e.g. (27)^(1/3) yields exactly 3.
double lattice_scale(int d, long N, double nu) {
  const double raw = std::pow(static_cast<double>(N) / nu, 1.0 / d);
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) <= kMembershipTolerance * std::max(1.0, raw)) return rounded;
  return raw;
}

}  // namespace

Region Region::unit_cube(int d) {
  Region r;
  r.name = d == 1 ? "interval(0,1)" : "cube(0,1)^" + std::to_string(d);
  r.lower.assign(static_cast<std::size_t>(d), 0.0);
  r.upper.assign(static_cast<std::size_t>(d), 1.0);
  r.contains = [](std::span<const double> x) {
    for (double xi : x) {
      if (!(xi > kMembershipTolerance && xi < 1.0 - kMembershipTolerance)) return false;
    }
    return true;
  };
  return r;
}

std::span<const int> LatticeGeometry::coords(std::size_t site) const {
  return {coords_.data() + site * static_cast<std::size_t>(dimension_),
          static_cast<std::size_t>(dimension_)};
}

std::optional<std::size_t> LatticeGeometry::index_of(std::span<const int> c) const {
  if (c.size() != static_cast<std::size_t>(dimension_)) return std::nullopt;
  std::size_t flat = 0;
  for (int k = 0; k < dimension_; ++k) {
    const long offset = c[static_cast<std::size_t>(k)] - box_lower_[static_cast<std::size_t>(k)];
    if (offset < 0 || offset >= box_extent_[static_cast<std::size_t>(k)]) return std::nullopt;
    flat = flat * static_cast<std::size_t>(box_extent_[static_cast<std::size_t>(k)]) +
           static_cast<std::size_t>(offset);
  }
  const std::ptrdiff_t site = box_index_[flat];
  if (site < 0) return std::nullopt;
  return static_cast<std::size_t>(site);
}

std::span<const std::size_t> LatticeGeometry::neighbors(std::size_t site) const {
  const std::size_t begin = neighbor_offsets_[site];
  const std::size_t end = neighbor_offsets_[site + 1];
  return {neighbor_sites_.data() + begin, end - begin};
}

Eigen::VectorXd LatticeGeometry::position(std::size_t site) const {
  Eigen::VectorXd p(dimension_);
  const auto c = coords(site);
  for (int k = 0; k < dimension_; ++k) p(k) = c[static_cast<std::size_t>(k)] / scale_;
  return p;
}

std::string LatticeGeometry::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "dimension " << dimension_ << "\n";
  os << "particles " << particle_count_ << "\n";
  os << "density " << density_ << "\n";
  os << "scale " << scale_ << "\n";
  os << "region " << region_.name << "\n";
  os << "sites " << size() << "\n";
  for (std::size_t i = 0; i < size(); ++i) {
    os << i << " (";
    const auto c = coords(i);
    for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
    os << ") " << (is_boundary(i) ? "boundary" : "interior") << " r=" << exit_count_[i] << "\n";
  }
  os << "boundary";
  for (std::size_t b : boundary_) os << " " << b;
  os << "\ninterior";
  for (std::size_t b : interior_) os << " " << b;
  os << "\n";
  return os.str();
}

LatticeGeometry build_lattice(int d, long N, double nu, const Region& region) {
  if (d < 1) throw std::invalid_argument("build_lattice: dimension d must be >= 1, got " + std::to_string(d));
  if (N < 2) throw std::invalid_argument("build_lattice: particle count N must be >= 2, got " + std::to_string(N));
  if (!(nu > 0.0)) throw std::invalid_argument("build_lattice: density nu must be > 0");
  if (region.dimension() != d || !region.contains) {
    throw std::invalid_argument("build_lattice: region '" + region.name + "' does not match dimension " +
                                std::to_string(d));
  }

  LatticeGeometry g;
  g.dimension_ = d;
  g.particle_count_ = N;
  g.density_ = nu;
  g.scale_ = lattice_scale(d, N, nu);
  g.region_ = region;

  const auto ud = static_cast<std::size_t>(d);
  g.box_lower_.resize(ud);
  g.box_extent_.resize(ud);
  std::size_t box_size = 1;
  for (std::size_t k = 0; k < ud; ++k) {
    const long lo = static_cast<long>(std::floor(region.lower[k] * g.scale_)) - 1;
    const long hi = static_cast<long>(std::ceil(region.upper[k] * g.scale_)) + 1;
    g.box_lower_[k] = lo;
    g.box_extent_[k] = hi - lo + 1;
    box_size *= static_cast<std::size_t>(g.box_extent_[k]);
  }
  g.box_index_.assign(box_size, -1);

  // Lexicographic sweep of the box; the last coordinate varies fastest.
  std::vector<long> offset(ud, 0);
  std::vector<double> point(ud);
  std::size_t count = 0;
  for (std::size_t flat = 0; flat < box_size; ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = ud; k-- > 0;) {
      offset[k] = static_cast<long>(rem % static_cast<std::size_t>(g.box_extent_[k]));
      rem /= static_cast<std::size_t>(g.box_extent_[k]);
    }
    for (std::size_t k = 0; k < ud; ++k) point[k] = (g.box_lower_[k] + offset[k]) / g.scale_;
    if (!region.contains(point)) continue;
    g.box_index_[flat] = static_cast<std::ptrdiff_t>(count++);
    for (std::size_t k = 0; k < ud; ++k) g.coords_.push_back(static_cast<int>(g.box_lower_[k] + offset[k]));
  }
  if (count == 0) {
    throw std::invalid_argument("build_lattice: Omega_N is empty for d=" + std::to_string(d) +
                                ", N=" + std::to_string(N) + ", nu=" + std::to_string(nu) +
                                " (L_N=" + std::to_string(g.scale_) + ")");
  }

  g.exit_count_.assign(count, 0);
  g.neighbor_offsets_.assign(count + 1, 0);
  std::vector<int> probe(ud);
  for (std::size_t s = 0; s < count; ++s) {
    const auto c = g.coords(s);
    for (std::size_t k = 0; k < ud; ++k) {
      for (int step : {-1, +1}) {
        std::copy(c.begin(), c.end(), probe.begin());
        probe[k] += step;
        if (auto nb = g.index_of(probe)) {
          g.neighbor_sites_.push_back(*nb);
        } else {
          ++g.exit_count_[s];
        }
      }
    }
    g.neighbor_offsets_[s + 1] = g.neighbor_sites_.size();
    (g.exit_count_[s] > 0 ? g.boundary_ : g.interior_).push_back(s);
  }
  return g;
}

LatticeGeometry build_interval(long N, double nu) { return build_lattice(1, N, nu, Region::unit_cube(1)); }

Eigen::SparseMatrix<double> laplacian_matrix(const LatticeGeometry& g) {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto nbs = g.neighbors(x);
    for (std::size_t y : nbs) t.emplace_back(static_cast<int>(x), static_cast<int>(y), 1.0);
    t.emplace_back(static_cast<int>(x), static_cast<int>(x), -static_cast<double>(nbs.size()));
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace hydrolab
