#pragma once

// Doubles with an unbounded binary exponent, for matrix products whose
// entries span more than the double range (heavy-tailed factors such as
// exp(2^k) with k in the teens).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include "osl/geometry.hpp"

namespace osl {

// Value m * 2^e with 0.5 <= |m| < 1, or zero (m = 0).
struct Wide {
  double m = 0.0;
  std::int64_t e = 0;

  static Wide from_double(double x) noexcept {
    Wide w;
    if (x == 0.0 || !std::isfinite(x)) {
      w.m = x == 0.0 ? 0.0 : x;
      return w;
    }
    int ex = 0;
    w.m = std::frexp(x, &ex);
    w.e = ex;
    return w;
  }

  // sign * exp(log_abs); log_abs = -inf gives zero.
  static Wide from_log(int sign, double log_abs) noexcept {
    if (sign == 0 || log_abs == -INFINITY) return {};
    const double l2 = log_abs / std::numbers::ln2;
    const double whole = std::floor(l2);
    Wide w = from_double(sign * std::exp((l2 - whole) * std::numbers::ln2));
    w.e += static_cast<std::int64_t>(whole);
    return w;
  }

  bool is_zero() const noexcept { return m == 0.0; }
  // ln |value|; -inf for zero.
  double log_abs() const noexcept {
    return is_zero() ? -INFINITY : std::log(std::abs(m)) + static_cast<double>(e) * std::numbers::ln2;
  }
  // value * 2^-shift as a double (underflows to 0, may overflow).
  double to_double_scaled(std::int64_t shift) const noexcept {
    if (is_zero()) return 0.0;
    const std::int64_t ex = e - shift;
    if (ex < -1100) return 0.0;
    if (ex > 1100) return std::copysign(INFINITY, m);
    return std::ldexp(m, static_cast<int>(ex));
  }
  double to_double() const noexcept { return to_double_scaled(0); }

  friend Wide operator*(Wide a, Wide b) noexcept {
    if (a.is_zero() || b.is_zero()) return {};
    Wide r{a.m * b.m, a.e + b.e};
    if (std::abs(r.m) < 0.5) {
      r.m *= 2.0;
      r.e -= 1;
    }
    return r;
  }

  friend Wide operator+(Wide a, Wide b) noexcept {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.e < b.e) std::swap(a, b);
    const std::int64_t d = a.e - b.e;
    if (d > 60) return a;
    const double sum = a.m + std::ldexp(b.m, -static_cast<int>(d));
    if (sum == 0.0) return {};
    int ex = 0;
    const double mant = std::frexp(sum, &ex);
    return {mant, a.e + ex};
  }

  Wide operator-() const noexcept { return {-m, e}; }
};

// 2x2 matrix of Wide entries.
struct WideMat2 {
  Wide a11 = Wide::from_double(1.0);
  Wide a12;
  Wide a21;
  Wide a22 = Wide::from_double(1.0);

  static WideMat2 from_mat(const Mat2& g) noexcept {
    return {Wide::from_double(g.a11), Wide::from_double(g.a12), Wide::from_double(g.a21),
            Wide::from_double(g.a22)};
  }

  // Largest entry exponent; the normalized shape is entries * 2^-top.
  std::int64_t top_exponent() const noexcept {
    std::int64_t t = INT64_MIN;
    for (const Wide* w : {&a11, &a12, &a21, &a22}) {
      if (!w->is_zero()) t = std::max(t, w->e);
    }
    return t == INT64_MIN ? 0 : t;
  }
  // Entries scaled by 2^-top_exponent(); max |entry| in [0.5, 1).
  Mat2 shape() const noexcept {
    const std::int64_t t = top_exponent();
    return {a11.to_double_scaled(t), a12.to_double_scaled(t), a21.to_double_scaled(t),
            a22.to_double_scaled(t)};
  }
  double log_scale() const noexcept { return static_cast<double>(top_exponent()) * std::numbers::ln2; }
  Mat2 to_mat() const noexcept { return {a11.to_double(), a12.to_double(), a21.to_double(), a22.to_double()}; }

  friend WideMat2 operator*(const WideMat2& a, const WideMat2& b) noexcept {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
};

}  // namespace osl
