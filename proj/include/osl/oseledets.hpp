#pragma once

// Lyapunov exponents, Oseledets directions, angle tail statistics, the
// triangular closed form and the counterexample machinery.

#include <cstdint>
#include <string>
#include <vector>

#include "osl/cocycle.hpp"
#include "osl/scalar_dist.hpp"
#include "osl/stats.hpp"

namespace osl {

struct LyapunovEstimate {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t steps = 0;
};

// Over the forward part [max(0, begin), end) of the window. Throws NoData
// when that part is empty.
LyapunovEstimate lyapunov_estimates(const OrbitWindow& w);

// Right singular direction of F^(depth)(T^at w) for s2. Throws WindowExhausted.
Vec2 E2_forward_direction(const OrbitWindow& w, std::int64_t depth, std::int64_t at = 0);
// Left singular direction for s1 of F^(depth)(T^{at-depth} w), i.e. the image
// of that product's top right singular line. Throws WindowExhausted.
Vec2 E1_backward_direction(const OrbitWindow& w, std::int64_t depth, std::int64_t at = 0);

ProjLine estimate_E2_forward(const OrbitWindow& w, std::int64_t depth, std::int64_t at = 0);
ProjLine estimate_E1_backward(const OrbitWindow& w, std::int64_t depth, std::int64_t at = 0);

// Depth with exp(-gap * depth) < target.
std::int64_t oseledets_depth(double exponent_gap, double target = 1e-8);

// -log |sin angle(a, b)| from direction vectors; +infinity when parallel.
// Works below the resolution of canonical line angles.
double neg_log_sine(Vec2 a, Vec2 b) noexcept;

// Partial sum of sum_n a_0 ... a_{n-1} b_n, stopping once
// |a_0 ... a_{n-1}| * b_bound < tol. b_bound defaults to max |b|.
// Throws SeriesDiverging when a prefix product exceeds 1e6.
double triangular_X(const std::vector<double>& a_vals, const std::vector<double>& b_vals, double tol,
                    double b_bound = -1.0);

struct AngleTailReport {
  std::vector<double> thresholds;
  std::vector<Estimate> truncated_means;
  // Paired differences between consecutive thresholds, and first to last.
  std::vector<Estimate> increments;
  Estimate span;
  std::size_t sample_count = 0;
  std::size_t infinite_count = 0;
  std::string verdict;  // "converging", "growing", or "undetermined" (one threshold)
};

// Samples are gap angles in [0, pi/2]; 0 (an underflowed angle) counts as
// -log sin = +infinity. Throws NoData on empty input, BadSpec on bad input.
AngleTailReport angle_tail_report(const std::vector<double>& gap_angles, const std::vector<double>& thresholds);
// Same from precomputed -log sin values (>= 0, +infinity allowed).
AngleTailReport angle_tail_report_neglog(const std::vector<double>& neg_log_sines,
                                         const std::vector<double>& thresholds);

struct WeierstrassBounds {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
};

// S / (1 + S) <= 1 - prod(1 - a_n) <= S with S = sum a_n. Throws BadTerm.
WeierstrassBounds weierstrass_bounds(const std::vector<double>& a);

// max_n psi_vals[n] - n, certified by psi_upper_bound. Throws
// NeedMoreSamplesError with the prefix length needed.
double Y_supremum(const std::vector<double>& psi_vals, double psi_upper_bound);
// One draw of Y for a law with bounded support, generating psi lazily.
double sample_Y(const ScalarDist& psi, Rng& rng);

struct YTail {
  std::vector<double> b;  // b[k-1] = P(Y >= k), k = 1 .. size
  bool infinite = false;
  double expectation = 0.0;  // +infinity when infinite
};

// Exact law of Y = sup_n (psi_{-n-1} - n) for atomic psi >= 0 (finite atoms
// or the dyadic law). Throws Unsupported for non-atomic laws.
YTail exact_Y_tail(const ScalarDist& psi, std::size_t k_max = 64);
double exact_Y_survival(const ScalarDist& psi, double t);
// E[min(Y, M)].
double exact_Y_truncated_mean(const ScalarDist& psi, double M);

ScalarDist counterexample_psi();
// a = e^-1, b = e^psi.
MatrixDistribution build_counterexample_cocycle(const ScalarDist& psi);

struct DriftReport {
  std::int64_t horizon = 0;
  std::size_t trials = 0;
  double drift_c = 0.0;
  Estimate sup_h;
  Estimate sup_2h;
  Estimate difference;  // paired sup_2h - sup_h
  bool stabilized = false;
};

// E[sup_{n <= horizon} (2 c n - sum_{i<n} phi_i)] at horizon and 2 horizon on
// the same paths; stabilized iff the paired increase is within 3 standard
// errors. Throws NonNegativeDrift unless 0 < 2c < E[phi].
DriftReport negative_drift_supremum(const ScalarDist& phi, double drift_c, std::int64_t horizon,
                                    std::size_t trials, std::uint64_t seed, unsigned jobs = 1);

}  // namespace osl
