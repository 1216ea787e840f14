#include "hydrolab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hydrolab {

double CovarianceEstimate::z_score(double expected) const {
  const double diff = value - expected;
  if (std_error > 0.0) return diff / std_error;
  return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
}

namespace {

CovarianceEstimate summarize(const std::vector<double>& means, std::size_t samples, std::size_t batch_size) {
  if (means.size() < kMinBatches) {
    throw InsufficientBatches("batch means: " + std::to_string(means.size()) + " batches, need at least " +
                              std::to_string(kMinBatches));
  }
  RunningMoments m;
  for (double x : means) m.push(x);
  CovarianceEstimate e;
  e.value = m.mean;
  e.std_error = std::sqrt(m.variance() / static_cast<double>(means.size()));
  e.samples = samples;
  e.batches = means.size();
  e.batch_size = batch_size;
  return e;
}

std::size_t batches_per_series(std::size_t n_series, std::size_t target) {
  if (n_series == 0) return 0;
  return std::max<std::size_t>(1, (target + n_series - 1) / n_series);
}

template <typename F>
void for_each_batch(std::size_t length, std::size_t per, F&& f) {
  const std::size_t size = length / per;
  if (size == 0) return;
  for (std::size_t b = 0; b < per; ++b) f(b * size, size);
}

}  // namespace

CovarianceEstimate batch_means(std::span<const double> series, std::size_t n_batches) {
  if (n_batches < kMinBatches) {
    throw InsufficientBatches("batch means: requested " + std::to_string(n_batches) + " batches");
  }
  std::vector<double> means;
  std::size_t used = 0;
  const std::size_t size = series.size() / n_batches;
  for_each_batch(series.size(), n_batches, [&](std::size_t begin, std::size_t len) {
    double s = 0.0;
    for (std::size_t i = begin; i < begin + len; ++i) s += series[i];
    means.push_back(s / static_cast<double>(len));
    used += len;
  });
  return summarize(means, used, size);
}

CovarianceEstimate batch_means(const std::vector<Eigen::VectorXd>& series, BatchPolicy policy) {
  const std::size_t per = batches_per_series(series.size(), policy.target_batches);
  std::vector<double> means;
  std::size_t used = 0;
  std::size_t size = 0;
  for (const auto& s : series) {
    for_each_batch(static_cast<std::size_t>(s.size()), per, [&](std::size_t begin, std::size_t len) {
      means.push_back(s.segment(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(len)).mean());
      used += len;
      size = len;
    });
  }
  return summarize(means, used, size);
}

CovarianceEstimate batch_mean_difference(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b,
                                         BatchPolicy policy) {
  if (a.size() != b.size()) throw std::invalid_argument("batch_mean_difference: ensemble sizes differ");
  std::vector<Eigen::VectorXd> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw std::invalid_argument("batch_mean_difference: series lengths differ");
    diff[i] = a[i] - b[i];
  }
  return batch_means(diff, policy);
}

double integrated_autocorrelation_time(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) return 1.0;
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double x : series) c0 += (x - mean) * (x - mean);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 1.0;
  double tau = 1.0;
  for (std::size_t lag = 1; lag < n / 2; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (series[i] - mean) * (series[i + lag] - mean);
    c /= static_cast<double>(n) * c0;
    tau += 2.0 * c;
    if (static_cast<double>(lag) >= 5.0 * tau) break;
  }
  return std::max(tau, 1.0);
}

std::size_t burn_in_samples(std::span<const double> series) {
  const auto tail = series.subspan(series.size() / 2);
  return static_cast<std::size_t>(std::ceil(10.0 * integrated_autocorrelation_time(tail)));
}

void RunningMoments::push(double x) {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void RunningMoments::merge(const RunningMoments& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double n = static_cast<double>(count + other.count);
  const double delta = other.mean - mean;
  mean += delta * static_cast<double>(other.count) / n;
  m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / n;
  count += other.count;
}

}  // namespace hydrolab
