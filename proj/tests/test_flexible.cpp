#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "osl/errors.hpp"
#include "osl/flexible.hpp"
#include "osl/oseledets.hpp"

using namespace osl;

namespace {

EtaCell uniform_cell(double a0, double a1, double t0, double t1, int orientation = 1) {
  EtaCell c;
  c.alpha_lo = a0;
  c.alpha_hi = a1;
  c.theta_lo = t0;
  c.theta_hi = t1;
  c.orientation = orientation;
  return c;
}

EtaCell atom_cell(double a, double t) {
  EtaCell c = uniform_cell(a, a, t, t);
  c.atom = true;
  return c;
}

double log_half_sine(double theta) { return std::log(std::sin(theta / 2)); }

// Smallest |log sin(t/2) - log sin(t'/2)| over two theta ranges, from endpoints.
double min_cross_cost(const EtaCell& a, const EtaCell& b) {
  const double alo = log_half_sine(a.theta_lo), ahi = log_half_sine(a.theta_hi);
  const double blo = log_half_sine(b.theta_lo), bhi = log_half_sine(b.theta_hi);
  if (ahi < blo) return blo - ahi;
  if (bhi < alo) return alo - bhi;
  return 0.0;
}

// Budget fit by enumerating every bipartition of the cells.
bool brute_force_fits(const std::vector<EtaCell>& cells, double b) {
  const std::size_t n = cells.size();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if ((mask >> i & 1) && !(mask >> j & 1)) best = std::min(best, min_cross_cost(cells[i], cells[j]));
      }
    }
    if (!(best < b)) return false;
  }
  return true;
}

EtaSpec four_cells() {
  EtaSpec eta;
  eta.pieces = {{0.4, uniform_cell(0.0, 0.5, 1.2, 1.5)},
                {0.3, uniform_cell(1.0, 1.6, 0.6, 0.9)},
                {0.2, uniform_cell(2.0, 2.4, 0.25, 0.4, -1)},
                {0.1, atom_cell(2.8, 0.12)}};
  return eta;
}

}  // namespace

TEST_CASE("decompose_eta") {
  EtaSpec one;
  one.pieces = {{1.0, uniform_cell(0.1, 0.2, 0.3, 0.4)}};
  const Decomposition d1 = decompose_eta(one);
  REQUIRE(d1.pieces.size() == 1);
  CHECK(d1.k_s_lo[0] == log_half_sine(0.3));
  CHECK(d1.k_s_hi[0] == log_half_sine(0.4));

  EtaSpec two;
  two.pieces = {{0.7, uniform_cell(0.1, 0.2, 0.3, 0.4)}, {0.3, atom_cell(1.0, 1.0)}};
  const Decomposition d2 = decompose_eta(two);
  REQUIRE(d2.pieces.size() == 2);
  CHECK(d2.pieces[0].weight == 0.7);
  CHECK(d2.pieces[1].cell.atom);
  CHECK(d2.k_s_hi[1] == log_half_sine(1.0));
  CHECK(d2.k_s_lo[1] == log_half_sine(0.3));

  EtaSpec zero = two;
  zero.pieces.insert(zero.pieces.begin() + 1, EtaPiece{0.0, atom_cell(0.5, 0.5)});
  const Decomposition dz = decompose_eta(zero);
  CHECK(dz.pieces.size() == 2);
  CHECK(dz.warnings.size() == 1);

  EtaSpec bad = two;
  bad.pieces[0].weight = 0.69;
  CHECK_THROWS_AS(decompose_eta(bad), Error);
  bad = two;
  bad.pieces[0].cell.theta_lo = 0.0;
  CHECK_THROWS_AS(decompose_eta(bad), Error);
}

TEST_CASE("tail rule truncates at a certified residual") {
  EtaSpec eta;
  TailRule t;
  t.first_weight = 0.5;
  t.ratio = 0.5;
  t.cell = atom_cell(0.3, 0.5);
  t.theta_factor = 0.5;
  eta.tail_rule = t;
  const Decomposition d = decompose_eta(eta);
  // Residual after piece n is 2^-(n+1); the first one below 1e-12 has n = 39.
  const std::size_t expected = static_cast<std::size_t>(std::ceil(std::log2(1e12))) ;
  CHECK(d.pieces.size() == expected);
  double sum = 0.0;
  for (const auto& p : d.pieces) sum += p.weight;
  CHECK(std::abs(sum - 1.0) < 1e-12);
  CHECK(d.pieces[3].cell.theta_lo == 0.5 / 8);
  for (std::size_t n = 0; n + 1 < d.pieces.size(); ++n) CHECK(d.pieces[n].weight == std::ldexp(1.0, -int(n) - 1));
}

TEST_CASE("budget_fit_check examples") {
  EtaSpec one;
  one.pieces = {{1.0, atom_cell(0.2, 0.3)}};
  CHECK(budget_fit_check(one, 1e-9).fits);

  EtaSpec two;
  two.pieces = {{0.5, atom_cell(0.0, kPi / 2)}, {0.5, atom_cell(1.0, kPi / 6)}};
  const double gap = std::log(std::sin(kPi / 4)) - std::log(std::sin(kPi / 12));
  CHECK(gap == doctest::Approx(1.005053).epsilon(1e-6));
  CHECK(budget_fit_check(two, gap + 1e-9).fits);
  const BudgetFit no = budget_fit_check(two, gap - 1e-9);
  CHECK_FALSE(no.fits);
  CHECK(no.side_a == std::vector<std::size_t>{0});
  CHECK(no.side_b == std::vector<std::size_t>{1});
}

TEST_CASE("budget_fit_check agrees with exhaustive bipartitions") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    EtaSpec eta;
    std::vector<EtaCell> cells;
    for (std::size_t i = 0; i < n; ++i) {
      EtaCell c;
      if (u01(rng) < 0.3) {
        c = atom_cell(u01(rng) * 3.0, 0.01 + 1.5 * u01(rng));
      } else {
        const double lo = 0.01 + 1.4 * u01(rng);
        c = uniform_cell(0.0, 1.0, lo, std::min(kPi / 2, lo + 0.2 * u01(rng)));
      }
      cells.push_back(c);
      eta.pieces.push_back({1.0 / static_cast<double>(n), c});
    }
    eta.pieces.back().weight = 1.0 - (n - 1) * (1.0 / static_cast<double>(n));
    const double b = 0.05 + 1.5 * u01(rng);
    const BudgetFit fit = budget_fit_check(eta, b);
    CHECK(fit.fits == brute_force_fits(cells, b));
    if (!fit.fits) {
      double cross = std::numeric_limits<double>::infinity();
      for (auto i : fit.side_a) {
        for (auto j : fit.side_b) cross = std::min(cross, min_cross_cost(cells[i], cells[j]));
      }
      CHECK(cross >= b);
      CHECK(fit.side_a.size() + fit.side_b.size() == n);
    }
  }
}

TEST_CASE("march_chain") {
  EtaSpec one;
  one.pieces = {{1.0, uniform_cell(0.0, 1.0, 1.0, 1.1)}};
  const auto c1 = march_chain(decompose_eta(one), 1.0);
  REQUIRE(c1.size() == 1);
  CHECK(c1[0].weight == 1.0);

  EtaSpec path;
  path.pieces = {{0.5, uniform_cell(0.0, 1.0, 1.0, 1.5)},
                 {0.3, uniform_cell(0.0, 1.0, 0.4, 0.7)},
                 {0.2, uniform_cell(1.0, 2.0, 0.1, 0.2)}};
  for (double b : {0.8, 1.0, 2.0}) {
    const Decomposition d = decompose_eta(path);
    const auto chain = march_chain(d, b);
    double mass = 0.0;
    std::vector<double> per_source(3, 0.0);
    for (const auto& c : chain) {
      mass += c.weight;
      per_source[c.source] += c.weight;
      CHECK(c.weight > 0.0);
    }
    CHECK(std::abs(mass - 1.0) < 1e-12);
    for (std::size_t i = 0; i < 3; ++i) CHECK(per_source[i] == doctest::Approx(path.pieces[i].weight).epsilon(1e-12));
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      const auto& a = chain[i].cell;
      const auto& c = chain[i + 1].cell;
      const double ends[] = {log_half_sine(a.theta_lo), log_half_sine(a.theta_hi), log_half_sine(c.theta_lo),
                             log_half_sine(c.theta_hi)};
      CHECK(*std::max_element(ends, ends + 4) - *std::min_element(ends, ends + 4) < b);
    }
  }
  try {
    march_chain(decompose_eta(path), 0.3);
    FAIL("expected UnboundedGapError");
  } catch (const UnboundedGapError& e) {
    CHECK(e.code() == ErrorCode::UnboundedGap);
    CHECK(e.side_a().size() + e.side_b().size() == 3);
  }
}

TEST_CASE("march_chain over a geometric tail picks the decreasing direction") {
  EtaSpec eta;
  eta.pieces = {{0.5, uniform_cell(0.0, 1.0, 1.2, 1.5)}};
  TailRule t;
  t.first_weight = 0.25;
  t.ratio = 0.5;
  t.cell = uniform_cell(1.0, 2.0, 1.0, 1.4);
  t.theta_factor = 0.8;
  eta.tail_rule = t;
  const auto chain = march_chain(decompose_eta(eta), 1.0);
  // Ascending s would need about 2^40 refined parts.
  CHECK(chain.front().weight > chain.back().weight);
  const FlexibleRun run = simulate_flexible(eta, 1.0, 0.0, FlexibleMode::bounded(1.0), 2000, 4);
  CHECK(run.piece_weights.size() < 200);
}

TEST_CASE("PsiPair") {
  const Decomposition d = decompose_eta(four_cells());
  const PsiPair psi(d, 0.5, -0.5);
  Rng rng(3);
  RunningStats m1;
  for (int i = 0; i < 20000; ++i) {
    const double u = u01(rng);
    std::size_t k = u < 0.4 ? 0 : u < 0.7 ? 1 : u < 0.9 ? 2 : 3;
    const SplittingPair x = d.pieces[k].cell.sample(rng);
    CHECK(psi.beta(x) == 1.0);
    m1.add(psi.psi1(x));
  }
  CHECK(within_sigma(m1.mean(), 0.5, std::max(m1.std_error(), 1e-15)));

  // Collar: beta falls to 0 at half the smallest theta_lo from the cells.
  const double collar = 0.06;
  const EtaCell atom = d.pieces[3].cell;
  CHECK(psi.beta(atom.point(2.8, 0.12 - 0.5 * collar)) == doctest::Approx(0.5));
  CHECK(psi.beta(atom.point(2.8 + collar, 0.12)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(psi.beta(uniform_cell(0, 0, 1, 1).point(0.8, 0.05)) == 0.0);

  const PsiPair zero(d, 0.0, 0.0);
  const SplittingPair x = d.pieces[0].cell.point(0.2, 1.3);
  CHECK(zero.psi1(x) == 0.0);
  CHECK(max_entry_diff(assemble_F(x, x, zero), Mat2::identity()) < 1e-14);
  CHECK_THROWS_AS(PsiPair(d, -1.0, 1.0), Error);
}

TEST_CASE("assemble_F maps the splitting and carries the log-gains") {
  const Decomposition d = decompose_eta(four_cells());
  const PsiPair psi(d, 0.5, -0.5);
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const SplittingPair x = d.pieces[rng() % 4].cell.sample(rng);
    const SplittingPair y = d.pieces[rng() % 4].cell.sample(rng);
    const Mat2 g = assemble_F(x, y, psi);
    CHECK(line_angle(projective_action(g, x.x1()), y.x1()) < 1e-10);
    CHECK(line_angle(projective_action(g, x.x2()), y.x2()) < 1e-10);
    // Phi sends unit vectors to unit vectors, so the gain along x_j is exp(psi_j).
    CHECK(std::log(g(x.x1().direction()).norm()) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::log(g(x.x2().direction()).norm()) == doctest::Approx(-0.5).epsilon(1e-10));
  }
}

TEST_CASE("single atom gives a constant cocycle") {
  EtaSpec eta;
  eta.pieces = {{1.0, atom_cell(0.4, 0.9)}};
  for (FlexibleMode mode : {FlexibleMode::bounded(0.5), FlexibleMode::lowcost(0.1)}) {
    const FlexibleRun run = simulate_flexible(eta, 1.0, -1.0, mode, 4000, 5);
    const Mat2 g0 = run.window.matrix(0);
    for (std::int64_t i = 1; i < 4000; ++i) CHECK(run.window.matrix(i) == g0);
    const ConstructionReport rep = verify_flexible(run.window, eta, 1.0, -1.0);
    CHECK(rep.cell_tv == 0.0);
    CHECK(rep.theta_ks == 0.0);
    CHECK(rep.agreement_fraction == 1.0);
    CHECK(rep.max_step_cost == 0.0);
    // Non-orthogonal eigenlines only add O(1/n) to the estimates.
    CHECK(std::abs(rep.lambda1 - 1.0) < 2e-3);
    CHECK(std::abs(rep.lambda2 + 1.0) < 2e-3);
  }
}

TEST_CASE("bounded mode construction") {
  const EtaSpec eta = four_cells();
  const double b = 1.0;
  const FlexibleRun run = simulate_flexible(eta, 0.5, -0.5, FlexibleMode::bounded(b), 200000, 9);
  const auto& f = run.window.prescribed_f;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) REQUIRE(transfer_cost_bounded(f[i], f[i + 1]) < b);
  for (std::size_t i = 0; i < f.size(); ++i) {
    REQUIRE(eta.pieces[run.cell_track[i]].cell.contains(f[i]));
  }
  const ConstructionReport rep = verify_flexible(run.window, eta, 0.5, -0.5);
  CHECK(rep.max_label_jump == 1);
  CHECK(rep.max_step_cost < b);
  CHECK(rep.cell_tv < 0.02);
  CHECK(rep.theta_ks < 0.02);
  CHECK(std::abs(rep.lambda1 - 0.5) < 0.05);
  CHECK(std::abs(rep.lambda2 + 0.5) < 0.05);
  CHECK(rep.agreement_fraction >= 0.99);
  CHECK(rep.max_invariance_error < 1e-9);
  CHECK(rep.min_drift_slack >= -1e-9);
  CHECK(within_sigma(rep.birkhoff_psi1.mean, 0.5, std::max(rep.birkhoff_psi1.std_error, 1e-15)));

  CHECK_THROWS_AS(simulate_flexible(eta, 0.5, -0.5, FlexibleMode::bounded(0.5), 100, 9), UnboundedGapError);
}

TEST_CASE("lowcost mode construction") {
  const EtaSpec eta = four_cells();
  const FlexibleRun run = simulate_flexible(eta, 0.5, -0.5, FlexibleMode::lowcost(0.1), 200000, 21);
  CHECK(run.cost_bound < 0.1);
  for (std::size_t i = 0; i < run.heights.size(); ++i) {
    CHECK(2.0 * run.caps[i] / static_cast<double>(run.heights[i]) < 0.1);
  }
  const ConstructionReport rep = verify_flexible(run.window, eta, 0.5, -0.5);
  CHECK(rep.mean_step_cost.mean - 3.0 * rep.mean_step_cost.std_error < 0.1);
  CHECK(rep.cell_tv < 0.02);
  CHECK(std::abs(rep.lambda1 - 0.5) < 0.05);
  CHECK(rep.agreement_fraction >= 0.99);
  CHECK(rep.max_invariance_error < 1e-9);

  // One uniform cell needs a tower taller than 1: it is split in two halves.
  EtaSpec single;
  single.pieces = {{1.0, uniform_cell(0.0, 1.0, 0.5, 1.0)}};
  const FlexibleRun s = simulate_flexible(single, 0.5, -0.5, FlexibleMode::lowcost(0.1), 5000, 2);
  CHECK(s.heights.size() == 2);
  CHECK(s.warnings.size() == 1);
}

TEST_CASE("identical seeds give identical windows") {
  const EtaSpec eta = four_cells();
  const FlexibleRun a = simulate_flexible(eta, 0.5, -0.5, FlexibleMode::bounded(1.0), 3000, 77);
  const FlexibleRun b = simulate_flexible(eta, 0.5, -0.5, FlexibleMode::bounded(1.0), 3000, 77);
  for (std::int64_t i = 0; i < 3000; ++i) CHECK(a.window.matrix(i) == b.window.matrix(i));
  CHECK(a.window.labels == b.window.labels);
}
