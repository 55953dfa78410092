#pragma once

#include <cstddef>
#include <vector>

namespace osl {

// Welford accumulator. merge() is exact up to rounding and order-independent
// in distribution, so chunked parallel folds agree with the serial fold when
// chunks are merged in a fixed order.
class RunningStats {
 public:
  void add(double x) noexcept;
  void merge(const RunningStats& other) noexcept;

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  // Unbiased sample variance; 0 for fewer than two samples.
  double variance() const noexcept;
  double std_error() const noexcept;
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

inline Estimate to_estimate(const RunningStats& s) { return {s.mean(), s.std_error()}; }

// |observed - expected| <= k * se, treating se = 0 as exact agreement only.
bool within_sigma(double observed, double expected, double se, double k = 3.0) noexcept;

// Mean with a batch-means standard error over `batches` contiguous blocks,
// for serially correlated sequences.
Estimate batch_mean(const std::vector<double>& values, std::size_t batches = 1000);

// Binomial standard error of a frequency estimate of p from n draws.
double binomial_se(double p, std::size_t n) noexcept;

// Upper tail probability of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

// Chi-square independence test on a contingency table (rows x cols counts).
// Rows or columns with zero total are dropped. Returns the p-value.
double chi_square_independence(const std::vector<std::vector<double>>& table);

// Kolmogorov-Smirnov distance between the empirical law of `samples`
// (sorted in place) and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double>& samples, Cdf cdf);

}  // namespace osl

#include <algorithm>

template <class Cdf>
double osl::ks_distance(std::vector<double>& samples, Cdf cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}
