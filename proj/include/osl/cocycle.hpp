#pragma once

// Cocycle generators, orbit windows and renormalized products.

#include <cstdint>
#include <optional>
#include <vector>

#include "osl/geometry.hpp"
#include "osl/rng.hpp"
#include "osl/scalar_dist.hpp"
#include "osl/stats.hpp"
#include "osl/wide.hpp"

namespace osl {

// A generator value with per-entry binary exponents; log|det| and the
// determinant sign are kept separately so factors such as exp(2^20) stay
// exact in the log domain.
struct Factor {
  WideMat2 m;
  double log_abs_det = 0.0;
  int det_sign = 1;

  // Throws NotInvertible.
  static Factor from_matrix(const Mat2& g);
  // [[a, b], [0, 1]] given sign and log-magnitude of a and b.
  static Factor triangular(int sign_a, double log_abs_a, int sign_b, double log_abs_b);
  // May overflow to infinity for extreme factors.
  Mat2 matrix() const noexcept { return m.to_mat(); }
};

// log max(|F|, |F^-1|) computed in the log domain.
double log_norm_max(const Factor& f) noexcept;

// log |F v| for a unit vector v.
double log_image_norm(const Factor& f, Vec2 v) noexcept;
// Line image under F, exact for entries beyond the double range.
ProjLine projective_action(const Factor& f, ProjLine x) noexcept;
// angle_drift_gap in the log domain: the sine ratio is |det F| / (|F v1| |F v2|)
// and log|F| + log|F^-1| = 2 log s1 - log|det F|. Throws DegenerateSplitting.
AngleDrift angle_drift_gap(const Factor& f, ProjLine x1, ProjLine x2);

// Product of factors with exact log|det| bookkeeping. Entries carry their
// own exponents, so nothing overflows or collapses at any length.
struct ScaledProduct {
  WideMat2 m;
  double log_abs_det = 0.0;
  int det_sign = 1;

  // this <- f * this (left multiplication: the newest factor acts last).
  void push_left(const Factor& f) noexcept;
  ScaledProduct inverse() const;
  Mat2 value() const noexcept { return m.to_mat(); }
  // value() / exp(log_scale()), with max |entry| in [0.5, 1).
  Mat2 shape() const noexcept { return m.shape(); }
  double log_scale() const noexcept { return m.log_scale(); }
  // log s1 and log s2 of the represented matrix.
  double log_s1() const noexcept;
  double log_s2() const noexcept;
};

struct OrbitWindow {
  std::int64_t offset = 0;
  std::vector<Factor> factors;
  std::vector<SplittingPair> prescribed_f;  // empty or same length as factors
  std::vector<int> labels;                  // empty or same length as factors
  std::uint64_t seed = 0;

  std::int64_t begin() const noexcept { return offset; }
  std::int64_t end() const noexcept { return offset + static_cast<std::int64_t>(factors.size()); }
  bool contains(std::int64_t index) const noexcept { return index >= begin() && index < end(); }
  // Throws WindowExhausted.
  const Factor& at(std::int64_t index) const;
  Mat2 matrix(std::int64_t index) const { return at(index).matrix(); }
  // Throws BadSpec when optional tracks have the wrong length.
  void validate() const;
};

// F^(n) at from_index: F(T^{from+n-1}) ... F(T^from) for n > 0, identity for
// n = 0, and the inverse of the forward product from from+n for n < 0.
// Throws WindowExhausted.
ScaledProduct cocycle_product_scaled(const OrbitWindow& w, std::int64_t from_index, std::int64_t n);
Mat2 cocycle_product(const OrbitWindow& w, std::int64_t from_index, std::int64_t n);

class MatrixDistribution {
 public:
  enum class Kind { Atoms, Triangular, RotGain };

  // Throws BadDistribution on bad weights or singular atoms.
  static MatrixDistribution atoms(std::vector<Mat2> matrices, std::vector<double> weights);
  // [[a, b], [0, 1]]; with a_exp / b_exp the laws describe log a / log b.
  static MatrixDistribution triangular(ScalarDist a, bool a_exp, ScalarDist b, bool b_exp);
  // R(angle) * diag(exp(gain), exp(-gain)).
  static MatrixDistribution rotgain(ScalarDist angle, ScalarDist gain);

  Kind kind() const noexcept { return kind_; }
  const std::vector<Mat2>& matrices() const noexcept { return matrices_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const ScalarDist& first() const noexcept { return *first_; }
  const ScalarDist& second() const noexcept { return *second_; }
  bool a_exp() const noexcept { return a_exp_; }
  bool b_exp() const noexcept { return b_exp_; }

  // Consumes one uniform for atoms and two otherwise.
  Factor sample(Rng& rng) const;

 private:
  Kind kind_ = Kind::Atoms;
  std::vector<Mat2> matrices_;
  std::vector<double> weights_;
  std::vector<double> cdf_;
  std::optional<ScalarDist> first_;   // a or angle
  std::optional<ScalarDist> second_;  // b or gain
  bool a_exp_ = false;
  bool b_exp_ = false;
};

// i.i.d. window over [-half_width, half_width), drawn in index order.
OrbitWindow sample_onestep(const MatrixDistribution& nu, std::int64_t half_width, std::uint64_t seed);
// i.i.d. window over [begin, begin + length).
OrbitWindow sample_window(const MatrixDistribution& nu, std::int64_t begin, std::int64_t length,
                          std::uint64_t seed);

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
  std::size_t trials = 0;
};

// E[log_norm_max(g)^order]; exact for atoms, Monte Carlo otherwise.
MomentEstimate moment(const MatrixDistribution& nu, int order, std::size_t trials, std::uint64_t seed,
                      unsigned jobs = 1);

}  // namespace osl
