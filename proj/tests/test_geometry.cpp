#include <cmath>
#include <random>

#include "doctest.h"
#include "osl/errors.hpp"
#include "osl/geometry.hpp"

using namespace osl;

namespace {

Mat2 random_invertible(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> entry(-5.0, 5.0);
  for (;;) {
    Mat2 g{entry(rng), entry(rng), entry(rng), entry(rng)};
    if (std::abs(g.det()) >= 1e-6) return g;
  }
}

// Independent singular-value oracle: eigenvalues of g^T g by the quadratic formula.
std::pair<double, double> singular_values_oracle(const Mat2& g) {
  const double p = g.a11 * g.a11 + g.a21 * g.a21;
  const double r = g.a12 * g.a12 + g.a22 * g.a22;
  const double q = g.a11 * g.a12 + g.a21 * g.a22;
  const double tr = p + r;
  const double disc = std::sqrt((p - r) * (p - r) + 4.0 * q * q);
  const double l1 = 0.5 * (tr + disc);
  const double det = std::abs(g.det());
  return {std::sqrt(l1), det / std::sqrt(l1)};
}

SplittingPair random_pair(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, kPi);
  for (;;) {
    const ProjLine a(angle(rng));
    const ProjLine b(angle(rng));
    if (line_sine(a, b) > 1e-3) return SplittingPair(a, b);
  }
}

}  // namespace

TEST_CASE("svd2 examples") {
  const Svd2 id = svd2(Mat2::identity());
  CHECK(id.s1 == doctest::Approx(1.0));
  CHECK(id.s2 == doctest::Approx(1.0));

  const Svd2 d = svd2(Mat2::diag(2.0, 0.5));
  CHECK(d.s1 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d.s2 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d.right.alpha() == doctest::Approx(0.0));
  CHECK(d.left.alpha() == doctest::Approx(0.0));

  CHECK_THROWS_AS(svd2(Mat2{1.0, 2.0, 2.0, 4.0}), Error);
  try {
    svd2(Mat2{0.0, 0.0, 0.0, 0.0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotInvertible);
  }
}

TEST_CASE("svd2 reconstruction and determinant over random matrices") {
  std::mt19937_64 rng(17);
  double worst_recon = 0.0;
  double worst_det = 0.0;
  double worst_oracle = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Mat2 g = random_invertible(rng);
    const Svd2 s = svd2(g);
    REQUIRE(s.s1 >= s.s2);
    REQUIRE(s.s2 > 0.0);
    worst_recon = std::max(worst_recon, max_entry_diff(s.reconstruct(), g));
    worst_det = std::max(worst_det, std::abs(s.s1 * s.s2 - std::abs(g.det())) / std::abs(g.det()));
    const auto [o1, o2] = singular_values_oracle(g);
    worst_oracle = std::max(worst_oracle, std::abs(s.s1 - o1) / o1);
    // g maps the right pair onto the left pair with gains s1, s2.
    const Vec2 gv1 = g(s.v1);
    REQUIRE(std::abs(gv1.x - s.s1 * s.u1.x) < 1e-10 * s.s1);
    REQUIRE(std::abs(gv1.y - s.s1 * s.u1.y) < 1e-10 * s.s1);
  }
  CHECK(worst_recon < 1e-11);
  CHECK(worst_det < 1e-11);
  CHECK(worst_oracle < 1e-12);
}

TEST_CASE("singular_frame keeps tiny directions relatively accurate") {
  // Nearly rank one: top left direction has slope 1e-40.
  const Mat2 g{1.0, 1.0, 1e-40, 1e-40};
  const Svd2 s = singular_frame(g);
  CHECK(s.left.alpha() == doctest::Approx(1e-40).epsilon(1e-12));
  CHECK(s.s2 == doctest::Approx(0.0));
}

TEST_CASE("log_norm_max examples") {
  CHECK(log_norm_max(Mat2::identity()) == 0.0);
  CHECK(log_norm_max(Mat2::diag(2.0, 0.5)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  for (double beta : {0.3, 1.0, 2.5, -4.0}) {
    CHECK(log_norm_max(Mat2::rotation(beta)) == doctest::Approx(0.0).epsilon(1e-14));
  }
  CHECK(log_norm_max(Mat2::diag(0.25, 3.0)) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("line_angle examples") {
  CHECK(line_angle(ProjLine(0.0), ProjLine(kPi / 2)) == doctest::Approx(kPi / 2));
  CHECK(line_angle(ProjLine(0.0), ProjLine(3 * kPi / 4)) == doctest::Approx(kPi / 4));
  CHECK(line_angle(ProjLine(1.1), ProjLine(1.1)) == 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const ProjLine a(u(rng));
    const ProjLine b(u(rng));
    REQUIRE(line_angle(a, b) == line_angle(b, a));
    REQUIRE(line_angle(a, b) <= kPi / 2);
  }
}

TEST_CASE("projective_action examples and inverse round trip") {
  CHECK(projective_action(Mat2::identity(), ProjLine(0.7)).alpha() == doctest::Approx(0.7));
  // tan alpha -> tan alpha / 4 under diag(2, 1/2).
  CHECK(projective_action(Mat2::diag(2.0, 0.5), ProjLine(kPi / 4)).alpha() ==
        doctest::Approx(std::atan(0.25)).epsilon(1e-14));
  CHECK(projective_action(Mat2::rotation(0.4), ProjLine(2.9)).alpha() ==
        doctest::Approx(std::fmod(2.9 + 0.4, kPi)));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  for (int i = 0; i < 10000; ++i) {
    const Mat2 g = random_invertible(rng);
    const ProjLine x(angle(rng));
    const ProjLine back = projective_action(g.inverse(), projective_action(g, x));
    REQUIRE(line_sine(back, x) < 1e-12 * std::max(1.0, log_norm_max(g)) * 1e3);
  }
}

TEST_CASE("angle_drift_gap examples and invariant") {
  const AngleDrift id = angle_drift_gap(Mat2::identity(), ProjLine(0.0), ProjLine(kPi / 2));
  CHECK(id.lhs == doctest::Approx(0.0));
  CHECK(id.rhs == doctest::Approx(0.0));

  const AngleDrift axes = angle_drift_gap(Mat2::diag(2.0, 0.5), ProjLine(0.0), ProjLine(kPi / 2));
  CHECK(axes.lhs == doctest::Approx(0.0));
  CHECK(axes.rhs == doctest::Approx(2 * std::log(2.0)));

  // Image lines via projective_action: both move to +-atan(1/4).
  const Mat2 g = Mat2::diag(2.0, 0.5);
  const double image_gap =
      line_angle(projective_action(g, ProjLine(kPi / 4)), projective_action(g, ProjLine(3 * kPi / 4)));
  CHECK(image_gap == doctest::Approx(0.4899573262537283).epsilon(1e-13));
  const AngleDrift diag = angle_drift_gap(g, ProjLine(kPi / 4), ProjLine(3 * kPi / 4));
  CHECK(diag.lhs == doctest::Approx(-std::log(std::sin(image_gap))).epsilon(1e-13));
  CHECK(diag.lhs == doctest::Approx(0.7537718023763802).epsilon(1e-12));
  CHECK(diag.rhs == doctest::Approx(1.3862943611198906).epsilon(1e-14));
  CHECK(diag.lhs <= diag.rhs);

  CHECK_THROWS_AS(angle_drift_gap(g, ProjLine(0.3), ProjLine(0.3)), Error);

  std::mt19937_64 rng(9);
  for (int i = 0; i < 10000; ++i) {
    const Mat2 m = random_invertible(rng);
    const SplittingPair x = random_pair(rng);
    const AngleDrift d = angle_drift_gap(m, x.x1(), x.x2());
    REQUIRE(d.lhs <= d.rhs + 1e-9);
  }
}

TEST_CASE("interp_matrix examples") {
  const UnitVectorPair std_basis(0.0, kPi / 2);
  CHECK(max_entry_diff(interp_matrix(std_basis, std_basis), Mat2::identity()) < 1e-15);
  const UnitVectorPair swapped(kPi / 2, 0.0);
  CHECK(max_entry_diff(interp_matrix(std_basis, swapped), Mat2{0.0, 1.0, 1.0, 0.0}) < 1e-15);
  // Solve [1 1/sqrt2; 0 1/sqrt2] X = I by hand: X = [1 -1; 0 sqrt2].
  const UnitVectorPair skew(0.0, kPi / 4);
  CHECK(max_entry_diff(interp_matrix(skew, std_basis), Mat2{1.0, -1.0, 0.0, std::sqrt(2.0)}) <
        1e-14);
  CHECK_THROWS_AS(UnitVectorPair(0.2, 0.2 + kPi), Error);
}

TEST_CASE("interp_singular_values examples and agreement with svd2") {
  const SinCosRatio ortho = interp_singular_values(kPi / 2, kPi / 2);
  CHECK(ortho.sin_ratio == doctest::Approx(1.0));
  CHECK(ortho.cos_ratio == doctest::Approx(1.0));
  const SinCosRatio third = interp_singular_values(kPi / 2, kPi / 3);
  CHECK(third.sin_ratio == doctest::Approx(0.7071067811865475).epsilon(1e-14));
  CHECK(third.cos_ratio == doctest::Approx(1.224744871391589).epsilon(1e-14));
  const SinCosRatio same = interp_singular_values(1.1, 1.1);
  CHECK(same.sin_ratio == 1.0);
  CHECK(same.cos_ratio == 1.0);
  CHECK_THROWS_AS(interp_singular_values(0.0, 1.0), Error);
  CHECK_THROWS_AS(interp_singular_values(1.0, kPi), Error);

  // Cross-check against svd2 of an explicit interp matrix with those angles.
  const Svd2 s = svd2(interp_matrix(UnitVectorPair(0.3, 0.3 + kPi / 2), UnitVectorPair(2.0, 2.0 + kPi / 3)));
  CHECK(s.s1 == doctest::Approx(third.cos_ratio).epsilon(1e-12));
  CHECK(s.s2 == doctest::Approx(third.sin_ratio).epsilon(1e-12));
}

TEST_CASE("section_rho examples") {
  const UnitVectorPair a = section_rho(SplittingPair(ProjLine(0.0), ProjLine(kPi / 2)));
  CHECK(a.u1() == 0.0);
  CHECK(a.u2() == doctest::Approx(kPi / 2));
  const UnitVectorPair b = section_rho(SplittingPair(ProjLine(0.0), ProjLine(3 * kPi / 4)));
  CHECK(b.u2() == doctest::Approx(3 * kPi / 4 + kPi));
  CHECK(b.vector_angle() == doctest::Approx(kPi / 4));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const SplittingPair x = random_pair(rng);
    const UnitVectorPair r = section_rho(x);
    REQUIRE(r.vector_angle() == doctest::Approx(x.gap()).epsilon(1e-12));
    REQUIRE(ProjLine(r.u1()) == x.x1());
    REQUIRE(line_sine(ProjLine(r.u2()), x.x2()) < 1e-15);
  }
}

TEST_CASE("eigen_matrix examples") {
  const Mat2 axis = eigen_matrix(SplittingPair(ProjLine(0.0), ProjLine(kPi / 2)), std::log(2.0), 0.0);
  CHECK(max_entry_diff(axis, Mat2::diag(2.0, 1.0)) < 1e-15);
  CHECK(eigen_matrix(SplittingPair(ProjLine(0.4), ProjLine(1.9)), 0.0, 0.0) == Mat2::identity());

  const Mat2 skew = eigen_matrix(SplittingPair(ProjLine(0.0), ProjLine(kPi / 4)), std::log(2.0), 0.0);
  const Vec2 e1 = skew({1.0, 0.0});
  CHECK(std::abs(e1.x - 2.0) < 1e-12);
  CHECK(std::abs(e1.y) < 1e-12);
  const Vec2 diag = skew({1.0, 1.0});
  CHECK(std::abs(diag.x - 1.0) < 1e-12);
  CHECK(std::abs(diag.y - 1.0) < 1e-12);
}

TEST_CASE("transfer_cost_bounded examples and norms bound") {
  const SplittingPair ortho(ProjLine(0.0), ProjLine(kPi / 2));
  const SplittingPair narrow(ProjLine(1.0), ProjLine(1.0 + kPi / 6));
  CHECK(transfer_cost_bounded(ortho, ortho) == 0.0);
  const double direct = std::abs(std::log(std::sin(kPi / 12)) - std::log(std::sin(kPi / 4)));
  CHECK(direct == doctest::Approx(1.005052538742381).epsilon(1e-14));
  CHECK(transfer_cost_bounded(ortho, narrow) == doctest::Approx(direct).epsilon(1e-13));
  CHECK(log_norm_max(interp_matrix(section_rho(ortho), section_rho(narrow))) ==
        doctest::Approx(direct).epsilon(1e-12));

  std::mt19937_64 rng(13);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const SplittingPair x = random_pair(rng);
    const SplittingPair y = random_pair(rng);
    REQUIRE(transfer_cost_bounded(x, y) == transfer_cost_bounded(y, x));
    const double via_matrix = log_norm_max(interp_matrix(section_rho(x), section_rho(y)));
    worst = std::max(worst, std::abs(via_matrix - transfer_cost_bounded(x, y)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("mean value sandwich on (0, pi/2]") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> angle(1e-6, kPi / 2);
  for (int i = 0; i < 10000; ++i) {
    const double t = angle(rng);
    const double tp = angle(rng);
    const double cos_side = std::abs(std::log(std::cos(tp / 2)) - std::log(std::cos(t / 2)));
    const double mid = std::abs(tp / 2 - t / 2);
    const double sin_side = std::abs(std::log(std::sin(tp / 2)) - std::log(std::sin(t / 2)));
    REQUIRE(cos_side <= mid + 1e-15);
    REQUIRE(mid <= sin_side + 1e-15);
  }
}

TEST_CASE("transfer_cost_general") {
  const CostGauge plain = [](const Mat2& g) { return log_norm_max(g); };
  const SplittingPair ortho(ProjLine(0.2), ProjLine(0.2 + kPi / 2));
  CHECK(transfer_cost_general(ortho, ortho, 0.0, 0.0, plain) == doctest::Approx(0.0).epsilon(1e-12));

  std::mt19937_64 rng(19);
  for (int i = 0; i < 200; ++i) {
    const SplittingPair x = random_pair(rng);
    const SplittingPair y = random_pair(rng);
    const double general = transfer_cost_general(x, y, 0.0, 0.0, plain);
    REQUIRE(general >= transfer_cost_bounded(x, y) - 1e-10);
    REQUIRE(general >= 0.0);
  }

  // Shifted gauge: brute-force the 16 lifts independently and compare.
  const CostGauge shifted = [](const Mat2& g) {
    return max_entry_diff(g, Mat2::identity()) == 0.0 ? 0.0 : log_norm_max(g) + 1.0;
  };
  const SplittingPair x(ProjLine(0.1), ProjLine(1.2));
  const SplittingPair y(ProjLine(2.0), ProjLine(2.5));
  const Mat2 psi = eigen_matrix(x, 0.3, -0.2);
  const UnitVectorPair rx = section_rho(x);
  const UnitVectorPair ry = section_rho(y);
  double brute = 0.0;
  for (int mask = 0; mask < 16; ++mask) {
    const UnitVectorPair xt(rx.u1() + ((mask & 1) ? kPi : 0.0), rx.u2() + ((mask & 2) ? kPi : 0.0));
    const UnitVectorPair yt(ry.u1() + ((mask & 4) ? kPi : 0.0), ry.u2() + ((mask & 8) ? kPi : 0.0));
    brute = std::max(brute, log_norm_max(interp_matrix(xt, yt) * psi) + 1.0);
  }
  CHECK(transfer_cost_general(x, y, 0.3, -0.2, shifted) == doctest::Approx(brute).epsilon(1e-13));

  const CostGauge cheat = [](const Mat2& g) { return 0.5 * log_norm_max(g); };
  try {
    transfer_cost_general(x, y, 0.3, -0.2, cheat);
    FAIL("expected InvalidGauge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidGauge);
  }
}
