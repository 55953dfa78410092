#pragma once

// Closed-form 2x2 linear algebra and projective geometry of RP^1.

#include <functional>
#include <numbers>

namespace osl {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// |det| at or below this is treated as singular.
inline constexpr double kSingularDet = 1e-300;
// Pairs whose gap sine falls below this cannot be inverted reliably.
inline constexpr double kIllConditioned = 1e-12;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const noexcept;
  friend Vec2 operator*(double s, Vec2 v) noexcept { return {s * v.x, s * v.y}; }
  friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.y}; }
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
Vec2 unit_vector(double angle) noexcept;

struct Mat2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 1.0;

  static Mat2 identity() noexcept { return {}; }
  static Mat2 diag(double d1, double d2) noexcept { return {d1, 0.0, 0.0, d2}; }
  static Mat2 rotation(double angle) noexcept;
  // Matrix whose columns are c1, c2.
  static Mat2 from_columns(Vec2 c1, Vec2 c2) noexcept { return {c1.x, c2.x, c1.y, c2.y}; }

  double det() const noexcept { return a11 * a22 - a12 * a21; }
  double max_abs() const noexcept;
  bool is_invertible() const noexcept;
  // Throws NotInvertible.
  Mat2 inverse() const;
  Mat2 scaled(double s) const noexcept { return {s * a11, s * a12, s * a21, s * a22}; }

  Vec2 operator()(Vec2 v) const noexcept { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) noexcept;
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

double max_entry_diff(const Mat2& a, const Mat2& b) noexcept;

// A line through the origin, stored as its angle in [0, pi).
class ProjLine {
 public:
  constexpr ProjLine() = default;
  explicit ProjLine(double angle) noexcept;

  double alpha() const noexcept { return alpha_; }
  Vec2 direction() const noexcept { return unit_vector(alpha_); }
  static ProjLine spanned_by(Vec2 v) noexcept;

  friend bool operator==(ProjLine, ProjLine) = default;

 private:
  double alpha_ = 0.0;
};

// Canonical representative of an angle modulo pi, in [0, pi).
double canonical_line_angle(double angle) noexcept;
// Canonical representative of an angle modulo 2 pi, in [0, 2 pi).
double canonical_vector_angle(double angle) noexcept;

// A pair of unit vectors, each stored as an angle in [0, 2 pi).
class UnitVectorPair {
 public:
  // Throws IllConditionedPair when u1 = +-u2 to within kIllConditioned.
  UnitVectorPair(double u1_angle, double u2_angle);

  double u1() const noexcept { return u1_; }
  double u2() const noexcept { return u2_; }
  Vec2 v1() const noexcept { return unit_vector(u1_); }
  Vec2 v2() const noexcept { return unit_vector(u2_); }
  // Angle between the two vectors, in (0, pi).
  double vector_angle() const noexcept;

 private:
  double u1_;
  double u2_;
};

// A point of X = RP^1 x RP^1 minus the diagonal.
class SplittingPair {
 public:
  // Throws DegenerateSplitting when x1 = x2.
  SplittingPair(ProjLine x1, ProjLine x2);

  ProjLine x1() const noexcept { return x1_; }
  ProjLine x2() const noexcept { return x2_; }
  // Line angle between x1 and x2, in (0, pi/2].
  double gap() const noexcept;

 private:
  ProjLine x1_;
  ProjLine x2_;
};

// g = s1 u1 v1^T + s2 u2 v2^T with v2 = J v1 and u2 = orientation * J u1,
// where J is rotation by pi/2.
struct Svd2 {
  double s1 = 1.0;
  double s2 = 1.0;
  ProjLine left;   // span u1
  ProjLine right;  // span v1
  Vec2 u1{1.0, 0.0};
  Vec2 v1{1.0, 0.0};
  int orientation = 1;

  Vec2 u2() const noexcept { return orientation * Vec2{-u1.y, u1.x}; }
  Vec2 v2() const noexcept { return {-v1.y, v1.x}; }
  ProjLine left_minor() const noexcept { return ProjLine::spanned_by(u2()); }
  ProjLine right_minor() const noexcept { return ProjLine::spanned_by(v2()); }
  Mat2 reconstruct() const noexcept;
};

// Closed-form singular value decomposition. Throws NotInvertible.
Svd2 svd2(const Mat2& g);

namespace testing {
// Negative control for the verification battery: while set, svd2 inflates
// s1 by one part in 10^6.
void set_svd2_fault(bool on) noexcept;
}  // namespace testing
// Same decomposition without the invertibility check; s2 may be 0. The
// singular directions stay accurate for numerically rank-one input.
Svd2 singular_frame(const Mat2& g) noexcept;

// log max(|g|, |g^-1|) = max(log s1, -log s2) >= 0.
double log_norm_max(const Mat2& g);

double line_angle(ProjLine x1, ProjLine x2) noexcept;
// sin of the line angle, computed without cancellation near 0.
double line_sine(ProjLine x1, ProjLine x2) noexcept;

ProjLine projective_action(const Mat2& g, ProjLine x) noexcept;

struct AngleDrift {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack() const noexcept { return rhs - lhs; }
};

// |log sin angle(g x1, g x2) - log sin angle(x1, x2)| against
// log|g| + log|g^-1|.
AngleDrift angle_drift_gap(const Mat2& g, ProjLine x1, ProjLine x2);

// The unique matrix taking xt.u1 -> yt.u1 and xt.u2 -> yt.u2.
Mat2 interp_matrix(const UnitVectorPair& xt, const UnitVectorPair& yt);

struct SinCosRatio {
  double sin_ratio = 1.0;
  double cos_ratio = 1.0;
};

// Singular values of interp_matrix for pairs with vector angles theta, theta_prime.
SinCosRatio interp_singular_values(double theta, double theta_prime);

// Canonical lift of x: representatives in [0, pi), u2 flipped when the
// vector angle would exceed pi/2.
UnitVectorPair section_rho(const SplittingPair& x);

// Matrix with eigenline x1 (eigenvalue exp(log_e1)) and x2 (exp(log_e2)).
Mat2 eigen_matrix(const SplittingPair& x, double log_e1, double log_e2);

// |log sin(theta'/2) - log sin(theta/2)| for the gap angles of x and y.
double transfer_cost_bounded(const SplittingPair& x, const SplittingPair& y) noexcept;
// Same cost from gap angles directly.
double transfer_cost_from_gaps(double theta, double theta_prime) noexcept;

using CostGauge = std::function<double(const Mat2&)>;

// Maximum of gauge(interp(xt, yt) * Psi(x)) over the 16 lifts of (x, y).
// Throws InvalidGauge when the gauge undercuts log_norm_max.
double transfer_cost_general(const SplittingPair& x, const SplittingPair& y, double psi1,
                             double psi2, const CostGauge& gauge);

}  // namespace osl
