#pragma once

#include "hydrolab/field.hpp"
#include "hydrolab/lattice.hpp"
#include "hydrolab/rng.hpp"
#include "hydrolab/statistics.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace hydrolab {

enum class ModelVariant { SimpleExclusion, ZeroRange };

const char* to_string(ModelVariant v);

/// Reservoir function h on the boundary of Omega, evaluated at b / L_N.
using ReservoirFunction = std::function<double(const Eigen::VectorXd&)>;

/// h(x) = left for x_1 < 1/2 and right otherwise.
ReservoirFunction two_sided_reservoir(double left, double right);

/// Entry rate that makes a boundary site with r exits sit at the given mean
/// density in isolation: h = r rho / (1 - rho).
double sep_entry_rate_for_density(double density, int exits = 1);
/// Inverse of sep_entry_rate_for_density: rho = h / (h + r).
double sep_reservoir_density(double entry_rate, int exits = 1);

/// Jump-rate function g of the zero range model.
using RateFunction = std::function<double(int)>;

/// g(k) = 1 for k >= 1.
RateFunction constant_rate();

inline constexpr int kDefaultZeroRangeCap = 6;

/// Classical model data sampled on a geometry. The exclusion process is the
/// cap = 1, g(1) = 1 member of the same family: bulk jumps x -> y occur at
/// rate g(n_x) when n_y < cap, exits at r_b g(n_b), entries at h_b when
/// n_b < cap.
struct ClassicalModel {
  ModelVariant variant = ModelVariant::SimpleExclusion;
  int cap = 1;
  std::vector<double> jump_rate;  // g(k), k = 0..cap
  std::vector<double> entry;      // h(b / L_N) per site, 0 off the boundary
  std::vector<int> exits;         // r_b per site

  double g(int k) const { return jump_rate[static_cast<std::size_t>(k)]; }
  std::size_t sites() const { return entry.size(); }
};

ClassicalModel make_exclusion_model(const LatticeGeometry& g, const ReservoirFunction& h);
ClassicalModel make_zero_range_model(const LatticeGeometry& g, const ReservoirFunction& h, const RateFunction& rate,
                                     int n_max = kDefaultZeroRangeCap);

/// Occupancy map n: Omega_N -> {0..cap}.
struct Configuration {
  std::vector<std::uint8_t> n;

  std::size_t size() const { return n.size(); }
  long total() const;
  bool operator==(const Configuration&) const = default;

  static Configuration empty(std::size_t sites) { return {std::vector<std::uint8_t>(sites, 0)}; }
};

enum class EventKind : std::uint8_t { BulkJump, BoundaryExit, BoundaryEntry };

struct Event {
  EventKind kind = EventKind::BulkJump;
  std::uint32_t site = 0;    // source site (or the boundary site)
  std::uint32_t target = 0;  // destination of a bulk jump
  double rate = 0.0;

  bool operator==(const Event&) const = default;
};

/// All events with non-zero rate in configuration c.
std::vector<Event> event_rates(const Configuration& c, const ClassicalModel& model, const LatticeGeometry& g);

/// n^{x,y}, n^{b,-} or n^{b,+}; inadmissible transfers leave c unchanged.
Configuration apply_event(const Configuration& c, const Event& e, const ClassicalModel& model);

/// Exact continuous-time simulation with a fixed table of potential events.
/// Event selection is a linear scan over the rate table.
class Simulator {
 public:
  Simulator(const LatticeGeometry& g, const ClassicalModel& model, Configuration initial, Engine rng);

  double time() const { return time_; }
  const Configuration& state() const { return state_; }
  double total_rate() const;

  /// Performs the next event if it happens no later than t_stop; otherwise
  /// moves the clock to t_stop and returns nothing.
  std::optional<Event> step_until(double t_stop);

 private:
  void refresh(std::uint32_t site);
  double potential_rate(std::size_t k) const;

  const ClassicalModel* model_;
  Configuration state_;
  Engine rng_;
  double time_ = 0.0;
  std::vector<Event> table_;
  std::vector<double> rates_;  // current rate of each table entry
  double total_ = 0.0;
  unsigned since_resum_ = 0;
  std::vector<std::size_t> dep_offsets_;
  std::vector<std::size_t> deps_;  // potential events whose rate depends on a site
};

struct TimedEvent {
  double time = 0.0;
  Event event;
};

struct Trajectory {
  Configuration initial;
  std::vector<TimedEvent> events;
  double t_end = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  Configuration replay(const ClassicalModel& model) const;
};

/// Runs the chain on [0, t_end] with stream (seed, stream).
Trajectory simulate(const Configuration& c0, const ClassicalModel& model, const LatticeGeometry& g, double t_end,
                    std::uint64_t seed, std::uint64_t stream = 0);

/// Samples the occupation field every `micro_dt` of simulator time, `samples`
/// times (the first sample is the current state). Time integrals of the
/// columns of `integrands` are accumulated exactly over each interval.
/// `time_unit` is the microscopic time per macroscopic unit (L_N^2); the
/// returned path stores macroscopic times and integrals.
OccupationPath sample_run(Simulator& sim, double micro_dt, Eigen::Index samples, double time_unit,
                          const Eigen::MatrixXd& integrands = {});

/// Discards 10 integrated autocorrelation times of the total particle number
/// from the front of a path. Returns the number of samples dropped; throws if
/// that would leave less than half of the path.
Eigen::Index apply_burn_in(OccupationPath& path);

/// Time-averaged means of the linear observables `observables.col(k)` over an
/// ensemble of stationary paths, with batch-means standard errors.
std::vector<CovarianceEstimate> estimate_statistics(const std::vector<OccupationPath>& paths,
                                                    const Eigen::MatrixXd& observables, BatchPolicy policy = {});

/// Draws a configuration from the product measure with the given per-site
/// marginals (one row per site, one column per occupancy 0..cap).
Configuration sample_product_state(const Eigen::MatrixXd& marginals, Engine& rng);

/// Bernoulli marginals with the given per-site densities.
Eigen::MatrixXd bernoulli_marginals(const Eigen::VectorXd& density);

/// Enumerates K^{Omega_N}, lexicographically with the first site most
/// significant.
class ConfigurationSpace {
 public:
  ConfigurationSpace(std::size_t sites, int cap, std::size_t guard = 20000);

  std::size_t size() const { return size_; }
  std::size_t sites() const { return sites_; }
  int cap() const { return cap_; }
  Configuration decode(std::size_t index) const;
  std::size_t encode(const Configuration& c) const;

 private:
  std::size_t sites_;
  int cap_;
  std::size_t size_;
};

/// G_cl with (G f)(n) = sum_m G(n, m) f(m); row sums vanish.
Eigen::SparseMatrix<double, Eigen::RowMajor> build_generator_matrix(const ClassicalModel& model,
                                                                    const LatticeGeometry& g,
                                                                    std::size_t guard = 20000);

struct StationaryDistribution {
  Eigen::VectorXd probability;
  int null_dimension = 0;
  bool unique() const { return null_dimension == 1; }
};

/// pi with pi G = 0, normalized. null_dimension is the dimension of the left
/// null space of G, counted exactly as the number of closed communicating
/// classes of the chain.
StationaryDistribution stationary_distribution(const Eigen::SparseMatrix<double, Eigen::RowMajor>& generator);

}  // namespace hydrolab
