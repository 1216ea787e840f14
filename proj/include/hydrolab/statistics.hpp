#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hydrolab {

/// A statistically tagged value. Standard errors come from batch means and are
/// only reported with at least kMinBatches batches.
struct CovarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t batches = 0;
  std::size_t batch_size = 0;
  double burn_in = 0.0;

  /// (value - expected) / std_error; 0 when both agree exactly.
  double z_score(double expected) const;
};

inline constexpr std::size_t kMinBatches = 8;

class InsufficientBatches : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Batch-means estimate of the mean of a correlated series.
CovarianceEstimate batch_means(std::span<const double> series, std::size_t n_batches);

struct BatchPolicy {
  std::size_t target_batches = 32;
};

/// Batch means over an ensemble of series. Each series is cut into the same
/// number of contiguous batches so that the total reaches the target; with
/// at least target_batches series, every series is one batch.
CovarianceEstimate batch_means(const std::vector<Eigen::VectorXd>& series, BatchPolicy policy = {});

/// Paired version: per-batch differences a - b on aligned batches.
CovarianceEstimate batch_mean_difference(const std::vector<Eigen::VectorXd>& a,
                                         const std::vector<Eigen::VectorXd>& b, BatchPolicy policy = {});

/// Integrated autocorrelation time in units of the sampling step, with
/// Sokal's automatic window (c = 5).
double integrated_autocorrelation_time(std::span<const double> series);

/// Number of leading samples to discard: 10 integrated autocorrelation times
/// of the given series (typically the total particle number), estimated on
/// the second half of the series.
std::size_t burn_in_samples(std::span<const double> series);

/// Mergeable mean/variance accumulator (Chan et al. pairwise update).
struct RunningMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x);
  void merge(const RunningMoments& other);
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

}  // namespace hydrolab
