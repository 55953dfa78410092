#include "osl/oseledets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "osl/errors.hpp"
#include "osl/parallel.hpp"

namespace osl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonnegative_atomic(const ScalarDist& psi) {
  if (!psi.is_atomic()) throw Error(ErrorCode::Unsupported, "exact Y law needs an atomic psi");
  if (psi.kind() == ScalarDist::Kind::Dyadic && (psi.shift() != 0.0 || psi.scale() != 1.0)) {
    throw Error(ErrorCode::Unsupported, "exact Y law supports the dyadic law only unshifted");
  }
  if (psi.support_min() < 0.0) throw Error(ErrorCode::BadDistribution, "psi must be nonnegative");
}

// log prod_{n >= 0} (1 - P(psi >= t + n)) for the dyadic law, t > 1. Terms
// are grouped by octave: P(psi >= s) = 4^-m on (2^(m-1), 2^m]. Octaves past
// m = 62 carry total mass below 2^-62 by the Weierstrass upper bound.
double dyadic_log_product(double t) {
  double log_prod = 0.0;
  for (int m = 1; m <= 62; ++m) {
    const double hi = std::ldexp(1.0, m);
    const double lo = std::ldexp(1.0, m - 1);
    if (hi < t) continue;
    const double n_hi = std::floor(hi - t);
    const double n_lo = std::max(0.0, std::floor(lo - t) + 1.0);
    const double count = n_hi - n_lo + 1.0;
    if (count > 0.0) log_prod += count * std::log1p(-std::pow(4.0, -m));
  }
  return log_prod;
}

}  // namespace

LyapunovEstimate lyapunov_estimates(const OrbitWindow& w) {
  const std::int64_t start = std::max<std::int64_t>(0, w.begin());
  const std::int64_t n = w.end() - start;
  if (n <= 0) throw Error(ErrorCode::NoData, "window has no forward part");
  const ScaledProduct p = cocycle_product_scaled(w, start, n);
  LyapunovEstimate out;
  out.steps = static_cast<std::size_t>(n);
  const double dn = static_cast<double>(n);
  out.lambda1 = p.log_s1() / dn;
  out.lambda2 = p.log_abs_det / dn - out.lambda1;
  return out;
}

Vec2 E2_forward_direction(const OrbitWindow& w, std::int64_t depth, std::int64_t at) {
  return singular_frame(cocycle_product_scaled(w, at, depth).shape()).v2();
}

Vec2 E1_backward_direction(const OrbitWindow& w, std::int64_t depth, std::int64_t at) {
  return singular_frame(cocycle_product_scaled(w, at - depth, depth).shape()).u1;
}

ProjLine estimate_E2_forward(const OrbitWindow& w, std::int64_t depth, std::int64_t at) {
  return ProjLine::spanned_by(E2_forward_direction(w, depth, at));
}

ProjLine estimate_E1_backward(const OrbitWindow& w, std::int64_t depth, std::int64_t at) {
  return ProjLine::spanned_by(E1_backward_direction(w, depth, at));
}

std::int64_t oseledets_depth(double exponent_gap, double target) {
  if (!(exponent_gap > 0.0) || !(target > 0.0 && target < 1.0)) {
    throw Error(ErrorCode::BadSpec, "depth needs a positive exponent gap and target in (0, 1)");
  }
  return static_cast<std::int64_t>(std::floor(-std::log(target) / exponent_gap)) + 1;
}

double neg_log_sine(Vec2 a, Vec2 b) noexcept {
  const double s = std::abs(cross(a, b)) / (a.norm() * b.norm());
  if (s == 0.0) return kInf;
  return std::max(0.0, -std::log(std::min(s, 1.0)));
}

double triangular_X(const std::vector<double>& a_vals, const std::vector<double>& b_vals, double tol,
                    double b_bound) {
  if (b_bound < 0.0) {
    b_bound = 0.0;
    for (double b : b_vals) b_bound = std::max(b_bound, std::abs(b));
  }
  double prefix = 1.0;
  double sum = 0.0;
  for (std::size_t n = 0; n < b_vals.size(); ++n) {
    if (std::abs(prefix) * b_bound < tol) break;
    sum += prefix * b_vals[n];
    if (n >= a_vals.size()) break;
    prefix *= a_vals[n];
    if (std::abs(prefix) > 1e6) {
      throw Error(ErrorCode::SeriesDiverging, "prefix product exceeded 1e6 at term " + std::to_string(n + 1));
    }
  }
  return sum;
}

AngleTailReport angle_tail_report_neglog(const std::vector<double>& values, const std::vector<double>& thresholds) {
  if (values.empty()) throw Error(ErrorCode::NoData, "angle_tail_report needs samples");
  if (thresholds.empty()) throw Error(ErrorCode::BadSpec, "angle_tail_report needs thresholds");
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    if (!(thresholds[j] > 0.0) || (j > 0 && !(thresholds[j] > thresholds[j - 1]))) {
      throw Error(ErrorCode::BadSpec, "thresholds must be positive and strictly increasing");
    }
  }
  const std::size_t k = thresholds.size();
  std::vector<RunningStats> level(k);
  std::vector<RunningStats> step(k > 1 ? k - 1 : 0);
  RunningStats span;
  AngleTailReport out;
  for (double v : values) {
    if (!(v >= 0.0)) throw Error(ErrorCode::BadSpec, "-log sin values must be >= 0");
    if (v == kInf) ++out.infinite_count;
    double prev = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double t = std::min(v, thresholds[j]);
      level[j].add(t);
      if (j > 0) step[j - 1].add(t - prev);
      prev = t;
    }
    span.add(std::min(v, thresholds.back()) - std::min(v, thresholds.front()));
  }
  out.thresholds = thresholds;
  out.sample_count = values.size();
  for (const auto& s : level) out.truncated_means.push_back(to_estimate(s));
  for (const auto& s : step) out.increments.push_back(to_estimate(s));
  out.span = to_estimate(span);
  if (k == 1) {
    out.verdict = "undetermined";
  } else {
    const Estimate last = out.increments.back();
    out.verdict = (last.mean == 0.0 || last.mean < 2.0 * last.std_error) ? "converging" : "growing";
  }
  return out;
}

AngleTailReport angle_tail_report(const std::vector<double>& gap_angles, const std::vector<double>& thresholds) {
  std::vector<double> values;
  values.reserve(gap_angles.size());
  for (double theta : gap_angles) {
    if (!(theta >= 0.0 && theta <= kPi / 2 + 1e-12)) {
      throw Error(ErrorCode::BadSpec, "gap angles must lie in [0, pi/2]");
    }
    values.push_back(theta == 0.0 ? kInf : std::max(0.0, -std::log(std::sin(theta))));
  }
  return angle_tail_report_neglog(values, thresholds);
}

WeierstrassBounds weierstrass_bounds(const std::vector<double>& a) {
  double sum = 0.0;
  double log_prod = 0.0;
  for (double x : a) {
    if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::BadTerm, "terms must lie in [0, 1]");
    sum += x;
    log_prod += std::log1p(-x);
  }
  return {sum / (1.0 + sum), -std::expm1(log_prod), sum};
}

double Y_supremum(const std::vector<double>& psi_vals, double psi_upper_bound) {
  double cur = -kInf;
  for (std::size_t n = 0;; ++n) {
    if (psi_upper_bound - static_cast<double>(n) < cur) return cur;
    if (n == psi_vals.size()) {
      const std::size_t required =
          cur == -kInf ? n + 1 : static_cast<std::size_t>(std::floor(psi_upper_bound - cur)) + 1;
      throw NeedMoreSamplesError(required, "prefix of length " + std::to_string(n) +
                                               " does not certify the supremum; need " +
                                               std::to_string(required));
    }
    cur = std::max(cur, psi_vals[n] - static_cast<double>(n));
  }
}

double sample_Y(const ScalarDist& psi, Rng& rng) {
  const double bound = psi.support_max();
  if (!std::isfinite(bound)) throw Error(ErrorCode::Unsupported, "sample_Y needs bounded psi");
  double cur = -kInf;
  for (std::size_t n = 0;; ++n) {
    if (bound - static_cast<double>(n) < cur) return cur;
    cur = std::max(cur, psi.sample(rng) - static_cast<double>(n));
  }
}

double exact_Y_survival(const ScalarDist& psi, double t) {
  require_nonnegative_atomic(psi);
  if (t <= 0.0) return 1.0;
  if (psi.kind() == ScalarDist::Kind::Dyadic) {
    if (t <= 1.0) return 1.0;
    return -std::expm1(dyadic_log_product(t));
  }
  double log_prod = 0.0;
  const double top = psi.support_max();
  for (double n = 0.0; t + n <= top; n += 1.0) {
    const double a = psi.tail(t + n);
    if (a >= 1.0) return 1.0;
    log_prod += std::log1p(-a);
  }
  return -std::expm1(log_prod);
}

double exact_Y_truncated_mean(const ScalarDist& psi, double M) {
  require_nonnegative_atomic(psi);
  if (M <= 0.0) return 0.0;
  if (psi.is_integer_valued()) {
    const double whole = std::floor(M);
    double sum = 0.0;
    for (double k = 1.0; k <= whole; k += 1.0) sum += exact_Y_survival(psi, k);
    if (M > whole) sum += (M - whole) * exact_Y_survival(psi, whole + 1.0);
    return sum;
  }
  // Survival is constant between the points v - n.
  std::vector<double> cuts{0.0, M};
  for (double v : psi.values()) {
    const double x = psi.shift() + psi.scale() * v;
    for (double n = 0.0; x - n > 0.0; n += 1.0) {
      if (x - n < M) cuts.push_back(x - n);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    sum += (cuts[i + 1] - cuts[i]) * exact_Y_survival(psi, 0.5 * (cuts[i] + cuts[i + 1]));
  }
  return sum;
}

YTail exact_Y_tail(const ScalarDist& psi, std::size_t k_max) {
  require_nonnegative_atomic(psi);
  YTail out;
  for (std::size_t k = 1; k <= k_max; ++k) out.b.push_back(exact_Y_survival(psi, static_cast<double>(k)));
  out.infinite = !psi.second_moment_finite();
  out.expectation = out.infinite ? kInf : exact_Y_truncated_mean(psi, psi.support_max());
  return out;
}

ScalarDist counterexample_psi() { return ScalarDist::dyadic(); }

MatrixDistribution build_counterexample_cocycle(const ScalarDist& psi) {
  return MatrixDistribution::triangular(ScalarDist::constant(-1.0), true, psi, true);
}

DriftReport negative_drift_supremum(const ScalarDist& phi, double drift_c, std::int64_t horizon,
                                    std::size_t trials, std::uint64_t seed, unsigned jobs) {
  const double mean_phi = phi.mean();
  if (!(drift_c > 0.0) || !(2.0 * drift_c < mean_phi)) {
    throw Error(ErrorCode::NonNegativeDrift, "need 0 < 2c < E[phi]");
  }
  if (horizon < 1 || trials < 2) throw Error(ErrorCode::BadSpec, "need horizon >= 1 and trials >= 2");
  std::vector<double> at_h(trials);
  std::vector<double> at_2h(trials);
  parallel_for(trials, jobs, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    double z = 0.0;
    double sup = 0.0;
    for (std::int64_t n = 1; n <= 2 * horizon; ++n) {
      z += 2.0 * drift_c - phi.sample(rng);
      sup = std::max(sup, z);
      if (n == horizon) at_h[i] = sup;
    }
    at_2h[i] = sup;
  });
  RunningStats h;
  RunningStats h2;
  RunningStats d;
  for (std::size_t i = 0; i < trials; ++i) {
    h.add(at_h[i]);
    h2.add(at_2h[i]);
    d.add(at_2h[i] - at_h[i]);
  }
  DriftReport out;
  out.horizon = horizon;
  out.trials = trials;
  out.drift_c = drift_c;
  out.sup_h = to_estimate(h);
  out.sup_2h = to_estimate(h2);
  out.difference = to_estimate(d);
  out.stabilized = out.difference.mean <= 3.0 * out.difference.std_error;
  return out;
}

}  // namespace osl
