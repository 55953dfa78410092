#include "osl/scalar_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "osl/errors.hpp"

namespace osl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest k >= 0 with 2^k >= s (inclusive) or 2^k > s, for s >= 1.
int dyadic_exponent(double s, bool inclusive) {
  int e = 0;
  const double f = std::frexp(s, &e);  // s = f 2^e, f in [0.5, 1)
  const bool power = f == 0.5;
  if (power) return inclusive ? e - 1 : e;
  return e;
}

}  // namespace

ScalarDist ScalarDist::atoms(std::vector<double> values, std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw Error(ErrorCode::BadDistribution, "atoms need matching nonempty values and weights");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !(weights[i] >= 0.0)) {
      throw Error(ErrorCode::BadDistribution, "atom values must be finite, weights nonnegative");
    }
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::BadDistribution, "atom weights must sum to 1");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  ScalarDist d;
  d.kind_ = Kind::Atoms;
  for (std::size_t i : order) {
    if (!d.values_.empty() && d.values_.back() == values[i]) {
      d.weights_.back() += weights[i];
    } else {
      d.values_.push_back(values[i]);
      d.weights_.push_back(weights[i]);
    }
  }
  d.cdf_ = cumulative(d.weights_);
  return d;
}

ScalarDist ScalarDist::constant(double value) { return atoms({value}, {1.0}); }

ScalarDist ScalarDist::uniform(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi)) {
    throw Error(ErrorCode::BadDistribution, "uniform needs finite lo <= hi");
  }
  ScalarDist d;
  d.kind_ = Kind::Uniform;
  d.p1_ = lo;
  d.p2_ = hi;
  return d;
}

ScalarDist ScalarDist::exponential(double rate) {
  if (!(rate > 0.0 && std::isfinite(rate))) {
    throw Error(ErrorCode::BadDistribution, "exponential rate must be positive");
  }
  ScalarDist d;
  d.kind_ = Kind::Exponential;
  d.p1_ = rate;
  return d;
}

ScalarDist ScalarDist::dyadic() {
  ScalarDist d;
  d.kind_ = Kind::Dyadic;
  return d;
}

ScalarDist ScalarDist::pareto(double xm, double alpha) {
  if (!(xm > 0.0 && alpha > 0.0 && std::isfinite(xm) && std::isfinite(alpha))) {
    throw Error(ErrorCode::BadDistribution, "pareto needs xm > 0 and alpha > 0");
  }
  ScalarDist d;
  d.kind_ = Kind::Pareto;
  d.p1_ = xm;
  d.p2_ = alpha;
  return d;
}

ScalarDist ScalarDist::affine(double shift, double scale) const {
  if (!(std::isfinite(shift) && std::isfinite(scale) && scale != 0.0)) {
    throw Error(ErrorCode::BadDistribution, "affine map needs finite shift and nonzero scale");
  }
  ScalarDist d = *this;
  d.shift_ = shift + scale * shift_;
  d.scale_ = scale * scale_;
  return d;
}

double ScalarDist::base_quantile(double u) const noexcept {
  switch (kind_) {
    case Kind::Atoms:
      return values_[index_from_cdf(cdf_, u)];
    case Kind::Uniform:
      return p1_ + (p2_ - p1_) * u;
    case Kind::Exponential:
      return -std::log1p(-u) / p1_;
    case Kind::Dyadic: {
      // P(X <= 2^K) = 1 - 4^-(K+1).
      const double x = -std::log1p(-u) / std::log(4.0);
      const double k = std::max(0.0, std::ceil(x) - 1.0);
      return std::ldexp(1.0, static_cast<int>(k));
    }
    case Kind::Pareto:
      return p1_ * std::exp(-std::log1p(-u) / p2_);
  }
  return 0.0;
}

double ScalarDist::quantile(double u) const noexcept { return shift_ + scale_ * base_quantile(u); }

double ScalarDist::mean() const noexcept {
  double m = 0.0;
  switch (kind_) {
    case Kind::Atoms:
      for (std::size_t i = 0; i < values_.size(); ++i) m += weights_[i] * values_[i];
      break;
    case Kind::Uniform:
      m = 0.5 * (p1_ + p2_);
      break;
    case Kind::Exponential:
      m = 1.0 / p1_;
      break;
    case Kind::Dyadic:
      m = 1.5;
      break;
    case Kind::Pareto:
      if (p2_ <= 1.0) return scale_ > 0.0 ? kInf : -kInf;
      m = p2_ * p1_ / (p2_ - 1.0);
      break;
  }
  return shift_ + scale_ * m;
}

double ScalarDist::second_moment() const noexcept {
  double m2 = 0.0;
  switch (kind_) {
    case Kind::Atoms:
      for (std::size_t i = 0; i < values_.size(); ++i) m2 += weights_[i] * values_[i] * values_[i];
      break;
    case Kind::Uniform:
      m2 = (p1_ * p1_ + p1_ * p2_ + p2_ * p2_) / 3.0;
      break;
    case Kind::Exponential:
      m2 = 2.0 / (p1_ * p1_);
      break;
    case Kind::Dyadic:
      return kInf;
    case Kind::Pareto:
      if (p2_ <= 2.0) return kInf;
      m2 = p2_ * p1_ * p1_ / (p2_ - 2.0);
      break;
  }
  const double base_mean = (mean() - shift_) / scale_;
  return shift_ * shift_ + 2.0 * shift_ * scale_ * base_mean + scale_ * scale_ * m2;
}

bool ScalarDist::second_moment_finite() const noexcept { return std::isfinite(second_moment()); }

bool ScalarDist::is_atomic() const noexcept {
  return kind_ == Kind::Atoms || kind_ == Kind::Dyadic;
}

bool ScalarDist::is_integer_valued() const noexcept {
  auto integral = [](double v) { return std::isfinite(v) && v == std::floor(v); };
  if (kind_ == Kind::Atoms) {
    return std::all_of(values_.begin(), values_.end(),
                       [&](double v) { return integral(shift_ + scale_ * v); });
  }
  if (kind_ == Kind::Dyadic) return integral(shift_) && integral(scale_);
  return false;
}

double ScalarDist::support_min() const noexcept {
  double lo = 0.0;
  double hi = 0.0;
  switch (kind_) {
    case Kind::Atoms: lo = values_.front(); hi = values_.back(); break;
    case Kind::Uniform: lo = p1_; hi = p2_; break;
    case Kind::Exponential: lo = 0.0; hi = kInf; break;
    case Kind::Dyadic: lo = 1.0; hi = kInf; break;
    case Kind::Pareto: lo = p1_; hi = kInf; break;
  }
  return scale_ > 0.0 ? shift_ + scale_ * lo : shift_ + scale_ * hi;
}

double ScalarDist::support_max() const noexcept {
  double lo = 0.0;
  double hi = 0.0;
  switch (kind_) {
    case Kind::Atoms: lo = values_.front(); hi = values_.back(); break;
    case Kind::Uniform: lo = p1_; hi = p2_; break;
    case Kind::Exponential: lo = 0.0; hi = kInf; break;
    case Kind::Dyadic: lo = 1.0; hi = kInf; break;
    case Kind::Pareto: lo = p1_; hi = kInf; break;
  }
  return scale_ > 0.0 ? shift_ + scale_ * hi : shift_ + scale_ * lo;
}

double ScalarDist::base_tail(double s, bool inclusive) const noexcept {
  switch (kind_) {
    case Kind::Atoms: {
      double p = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        if (inclusive ? values_[i] >= s : values_[i] > s) p += weights_[i];
      }
      return p;
    }
    case Kind::Uniform:
      if (p1_ == p2_) return (inclusive ? p1_ >= s : p1_ > s) ? 1.0 : 0.0;
      return std::clamp((p2_ - s) / (p2_ - p1_), 0.0, 1.0);
    case Kind::Exponential:
      return s <= 0.0 ? 1.0 : std::exp(-p1_ * s);
    case Kind::Dyadic:
      if (s < 1.0 || (inclusive && s == 1.0)) return 1.0;
      if (!std::isfinite(s)) return 0.0;
      return std::pow(4.0, -dyadic_exponent(s, inclusive));
    case Kind::Pareto:
      return s <= p1_ ? 1.0 : std::pow(p1_ / s, p2_);
  }
  return 0.0;
}

double ScalarDist::tail(double t) const noexcept {
  const double s = (t - shift_) / scale_;
  if (scale_ > 0.0) return base_tail(s, true);
  return 1.0 - base_tail(s, false);
}

}  // namespace osl
