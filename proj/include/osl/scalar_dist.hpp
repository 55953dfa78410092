#pragma once

// Scalar laws used for the entries of random matrices and for the
// increments of auxiliary random walks. Sampling is inverse-CDF from a
// single uniform draw.

#include <vector>

#include "osl/rng.hpp"

namespace osl {

class ScalarDist {
 public:
  enum class Kind { Atoms, Uniform, Exponential, Dyadic, Pareto };

  // Throws BadDistribution unless weights are nonnegative, sum to 1 within
  // 1e-12 and values are finite.
  static ScalarDist atoms(std::vector<double> values, std::vector<double> weights);
  static ScalarDist constant(double value);
  static ScalarDist uniform(double lo, double hi);
  static ScalarDist exponential(double rate);
  // P(X = 2^k) = (3/4) 4^-k for k >= 0.
  static ScalarDist dyadic();
  // P(X >= t) = (xm / t)^alpha for t >= xm.
  static ScalarDist pareto(double xm, double alpha);

  // Law of shift + scale * X. scale must be nonzero.
  ScalarDist affine(double shift, double scale) const;

  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double param1() const noexcept { return p1_; }
  double param2() const noexcept { return p2_; }
  double shift() const noexcept { return shift_; }
  double scale() const noexcept { return scale_; }

  double quantile(double u) const noexcept;
  double sample(Rng& rng) const noexcept { return quantile(u01(rng)); }

  // +infinity when the moment diverges.
  double mean() const noexcept;
  double second_moment() const noexcept;
  bool second_moment_finite() const noexcept;

  // Atoms or the dyadic law: countably supported.
  bool is_atomic() const noexcept;
  // Integer-valued (all atoms are integers after the affine map).
  bool is_integer_valued() const noexcept;
  double support_min() const noexcept;
  // +infinity for unbounded support.
  double support_max() const noexcept;

  // P(X >= t).
  double tail(double t) const noexcept;

 private:
  double base_quantile(double u) const noexcept;
  double base_tail(double s, bool inclusive) const noexcept;

  Kind kind_ = Kind::Atoms;
  std::vector<double> values_;   // sorted ascending for Atoms
  std::vector<double> weights_;
  std::vector<double> cdf_;
  double p1_ = 0.0;
  double p2_ = 0.0;
  double shift_ = 0.0;
  double scale_ = 1.0;
};

}  // namespace osl
