#include "osl/geometry.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "osl/errors.hpp"

namespace osl {

double Vec2::norm() const noexcept { return std::hypot(x, y); }

Vec2 unit_vector(double angle) noexcept { return {std::cos(angle), std::sin(angle)}; }

Mat2 Mat2::rotation(double angle) noexcept {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c, -s, s, c};
}

double Mat2::max_abs() const noexcept {
  return std::max({std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22)});
}

bool Mat2::is_invertible() const noexcept {
  const double d = det();
  return std::isfinite(d) && std::abs(d) > kSingularDet;
}

Mat2 Mat2::inverse() const {
  if (!is_invertible()) {
    throw Error(ErrorCode::NotInvertible, "matrix has |det| <= 1e-300");
  }
  const double d = det();
  return {a22 / d, -a12 / d, -a21 / d, a11 / d};
}

Mat2 operator*(const Mat2& a, const Mat2& b) noexcept {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

double max_entry_diff(const Mat2& a, const Mat2& b) noexcept {
  return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12), std::abs(a.a21 - b.a21),
                   std::abs(a.a22 - b.a22)});
}

double canonical_line_angle(double angle) noexcept {
  double a = std::fmod(angle, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a = 0.0;
  return a;
}

double canonical_vector_angle(double angle) noexcept {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

ProjLine::ProjLine(double angle) noexcept : alpha_(canonical_line_angle(angle)) {}

ProjLine ProjLine::spanned_by(Vec2 v) noexcept { return ProjLine(std::atan2(v.y, v.x)); }

UnitVectorPair::UnitVectorPair(double u1_angle, double u2_angle)
    : u1_(canonical_vector_angle(u1_angle)), u2_(canonical_vector_angle(u2_angle)) {
  if (std::abs(std::sin(u2_ - u1_)) < kIllConditioned) {
    throw Error(ErrorCode::IllConditionedPair, "unit vectors are collinear");
  }
}

double UnitVectorPair::vector_angle() const noexcept {
  const double d = u2_ - u1_;
  return std::abs(std::atan2(std::sin(d), std::cos(d)));
}

SplittingPair::SplittingPair(ProjLine x1, ProjLine x2) : x1_(x1), x2_(x2) {
  if (line_sine(x1, x2) == 0.0) {
    throw Error(ErrorCode::DegenerateSplitting, "x1 and x2 are the same line");
  }
}

double SplittingPair::gap() const noexcept { return line_angle(x1_, x2_); }

namespace {

// Top eigenvector of the symmetric matrix [[p, q], [q, r]], normalized.
// The branch choice keeps both components free of cancellation.
Vec2 top_eigenvector(double p, double q, double r) noexcept {
  const double d = 0.5 * (p - r);
  const double h = std::hypot(d, q);
  Vec2 v = d >= 0.0 ? Vec2{d + h, q} : Vec2{q, h - d};
  const double n = v.norm();
  if (n == 0.0 || !std::isfinite(n)) return {1.0, 0.0};
  return (1.0 / n) * v;
}

}  // namespace

Mat2 Svd2::reconstruct() const noexcept {
  const Vec2 w1 = u1;
  const Vec2 w2 = u2();
  const Vec2 r1 = v1;
  const Vec2 r2 = v2();
  return {s1 * w1.x * r1.x + s2 * w2.x * r2.x, s1 * w1.x * r1.y + s2 * w2.x * r2.y,
          s1 * w1.y * r1.x + s2 * w2.y * r2.x, s1 * w1.y * r1.y + s2 * w2.y * r2.y};
}

Svd2 singular_frame(const Mat2& g) noexcept {
  Svd2 out;
  const double m = g.max_abs();
  if (m == 0.0 || !std::isfinite(m)) {
    out.s1 = m;
    out.s2 = 0.0;
    return out;
  }
  const Mat2 b = g.scaled(1.0 / m);

  // Rotation-diagonal-rotation magnitudes.
  const double e = 0.5 * (b.a11 + b.a22);
  const double f = 0.5 * (b.a11 - b.a22);
  const double gg = 0.5 * (b.a21 + b.a12);
  const double h = 0.5 * (b.a21 - b.a12);
  const double q_norm = std::hypot(e, h);
  const double r_norm = std::hypot(f, gg);
  const double s1 = q_norm + r_norm;
  const double det = b.det();

  out.s1 = m * s1;
  out.s2 = m * (std::abs(det) / s1);
  out.orientation = det < 0.0 ? -1 : 1;

  out.v1 = top_eigenvector(b.a11 * b.a11 + b.a21 * b.a21, b.a11 * b.a12 + b.a21 * b.a22,
                           b.a12 * b.a12 + b.a22 * b.a22);
  Vec2 u = top_eigenvector(b.a11 * b.a11 + b.a12 * b.a12, b.a11 * b.a21 + b.a12 * b.a22,
                           b.a21 * b.a21 + b.a22 * b.a22);
  if (dot(u, b(out.v1)) < 0.0) u = -u;
  out.u1 = u;
  out.left = ProjLine::spanned_by(out.u1);
  out.right = ProjLine::spanned_by(out.v1);
  return out;
}

namespace {
std::atomic<bool> svd2_fault{false};
}  // namespace

void testing::set_svd2_fault(bool on) noexcept { svd2_fault = on; }

Svd2 svd2(const Mat2& g) {
  if (!g.is_invertible()) {
    throw Error(ErrorCode::NotInvertible, "svd2 of a singular matrix");
  }
  Svd2 s = singular_frame(g);
  if (svd2_fault.load(std::memory_order_relaxed)) s.s1 *= 1.0 + 1e-6;
  return s;
}

double log_norm_max(const Mat2& g) {
  const Svd2 s = svd2(g);
  return std::max({std::log(s.s1), -std::log(s.s2), 0.0});
}

double line_angle(ProjLine x1, ProjLine x2) noexcept {
  const double d = std::abs(x1.alpha() - x2.alpha());
  return std::min(d, kPi - d);
}

double line_sine(ProjLine x1, ProjLine x2) noexcept {
  return std::abs(std::sin(x1.alpha() - x2.alpha()));
}

ProjLine projective_action(const Mat2& g, ProjLine x) noexcept {
  return ProjLine::spanned_by(g(x.direction()));
}

AngleDrift angle_drift_gap(const Mat2& g, ProjLine x1, ProjLine x2) {
  const double before = line_sine(x1, x2);
  if (before == 0.0) {
    throw Error(ErrorCode::DegenerateSplitting, "angle_drift_gap with x1 = x2");
  }
  const Svd2 s = svd2(g);
  const Vec2 w1 = g(x1.direction());
  const Vec2 w2 = g(x2.direction());
  const double after = std::abs(cross(w1, w2)) / (w1.norm() * w2.norm());
  return {std::abs(std::log(after) - std::log(before)), std::log(s.s1) - std::log(s.s2)};
}

Mat2 interp_matrix(const UnitVectorPair& xt, const UnitVectorPair& yt) {
  const Mat2 u = Mat2::from_columns(xt.v1(), xt.v2());
  const Mat2 v = Mat2::from_columns(yt.v1(), yt.v2());
  if (std::abs(u.det()) < kIllConditioned || std::abs(v.det()) < kIllConditioned) {
    throw Error(ErrorCode::IllConditionedPair, "gap sine below 1e-12");
  }
  return v * u.inverse();
}

SinCosRatio interp_singular_values(double theta, double theta_prime) {
  if (!(theta > 0.0 && theta < kPi && theta_prime > 0.0 && theta_prime < kPi)) {
    throw Error(ErrorCode::DegeneratePair, "vector angles must lie in (0, pi)");
  }
  return {std::sin(0.5 * theta_prime) / std::sin(0.5 * theta),
          std::cos(0.5 * theta_prime) / std::cos(0.5 * theta)};
}

UnitVectorPair section_rho(const SplittingPair& x) {
  const double a1 = x.x1().alpha();
  double a2 = x.x2().alpha();
  if (std::cos(a2 - a1) < 0.0) a2 += kPi;
  return UnitVectorPair(a1, a2);
}

Mat2 eigen_matrix(const SplittingPair& x, double log_e1, double log_e2) {
  const UnitVectorPair lift = section_rho(x);
  const Mat2 basis = Mat2::from_columns(lift.v1(), lift.v2());
  if (std::abs(basis.det()) < kIllConditioned) {
    throw Error(ErrorCode::IllConditionedPair, "eigenlines too close");
  }
  if (log_e1 == log_e2) return Mat2::diag(std::exp(log_e1), std::exp(log_e1));
  return basis * Mat2::diag(std::exp(log_e1), std::exp(log_e2)) * basis.inverse();
}

double transfer_cost_from_gaps(double theta, double theta_prime) noexcept {
  return std::abs(std::log(std::sin(0.5 * theta_prime)) - std::log(std::sin(0.5 * theta)));
}

double transfer_cost_bounded(const SplittingPair& x, const SplittingPair& y) noexcept {
  return transfer_cost_from_gaps(x.gap(), y.gap());
}

double transfer_cost_general(const SplittingPair& x, const SplittingPair& y, double psi1,
                             double psi2, const CostGauge& gauge) {
  const Mat2 psi = eigen_matrix(x, psi1, psi2);
  const UnitVectorPair rx = section_rho(x);
  const UnitVectorPair ry = section_rho(y);
  constexpr std::array<double, 2> kFlip{0.0, kPi};
  double best = 0.0;
  for (double fx1 : kFlip) {
    for (double fx2 : kFlip) {
      const UnitVectorPair xt(rx.u1() + fx1, rx.u2() + fx2);
      for (double fy1 : kFlip) {
        for (double fy2 : kFlip) {
          const UnitVectorPair yt(ry.u1() + fy1, ry.u2() + fy2);
          const Mat2 g = interp_matrix(xt, yt) * psi;
          const double value = gauge(g);
          const double floor = log_norm_max(g);
          if (!(value >= floor - 1e-12 * (1.0 + floor))) {
            throw Error(ErrorCode::InvalidGauge,
                        "gauge value " + std::to_string(value) + " below log_norm_max " +
                            std::to_string(floor));
          }
          best = std::max(best, value);
        }
      }
    }
  }
  return best;
}

}  // namespace osl
