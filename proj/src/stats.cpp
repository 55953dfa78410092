#include "osl/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

namespace osl {

void RunningStats::add(double x) noexcept {
  if (n_ == 0) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) noexcept {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
  min_ = std::min(min_, other.min_);
  max_ = std::max(max_, other.max_);
}

double RunningStats::variance() const noexcept {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningStats::std_error() const noexcept {
  return n_ == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

bool within_sigma(double observed, double expected, double se, double k) noexcept {
  return std::abs(observed - expected) <= k * se;
}

double binomial_se(double p, std::size_t n) noexcept {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  const boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double chi_square_independence(const std::vector<std::vector<double>>& table) {
  std::vector<double> rows;
  std::vector<double> cols;
  for (const auto& r : table) {
    double s = 0.0;
    for (double v : r) s += v;
    rows.push_back(s);
  }
  const std::size_t nc = table.empty() ? 0 : table.front().size();
  for (std::size_t j = 0; j < nc; ++j) {
    double s = 0.0;
    for (const auto& r : table) s += r[j];
    cols.push_back(s);
  }
  double total = 0.0;
  for (double r : rows) total += r;
  if (total == 0.0) return 1.0;
  double stat = 0.0;
  std::size_t live_rows = 0;
  std::size_t live_cols = 0;
  for (double r : rows) live_rows += r > 0.0;
  for (double c : cols) live_cols += c > 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (rows[i] == 0.0) continue;
    for (std::size_t j = 0; j < nc; ++j) {
      if (cols[j] == 0.0) continue;
      const double expected = rows[i] * cols[j] / total;
      const double d = table[i][j] - expected;
      stat += d * d / expected;
    }
  }
  const double dof = static_cast<double>((live_rows - 1) * (live_cols - 1));
  return chi_square_sf(stat, dof);
}

Estimate batch_mean(const std::vector<double>& values, std::size_t batches) {
  if (values.empty()) return {};
  RunningStats all;
  for (double v : values) all.add(v);
  batches = std::min(batches, values.size());
  const std::size_t size = values.size() / batches;
  if (batches < 2 || size < 1) return to_estimate(all);
  RunningStats means;
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * size; i < (b + 1) * size; ++i) s += values[i];
    means.add(s / static_cast<double>(size));
  }
  return {all.mean(), means.std_error()};
}

}  // namespace osl
