#include "osl/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "osl/errors.hpp"
#include "osl/oseledets.hpp"
#include "osl/parallel.hpp"
#include "osl/skyscraper.hpp"

namespace osl {
namespace {

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

template <class T>
T pick(Scale scale, T fast, T full) {
  return scale == Scale::Full ? full : fast;
}

Outcome verdict(bool pass, std::string detail) { return {pass, std::move(detail)}; }

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

SplittingPair random_pair(Rng& rng) {
  for (;;) {
    const ProjLine a(kPi * u01(rng));
    const ProjLine b(kPi * u01(rng));
    if (line_sine(a, b) > 1e-3) return SplittingPair(a, b);
  }
}

Mat2 random_invertible(Rng& rng) {
  for (;;) {
    Mat2 g{10 * u01(rng) - 5, 10 * u01(rng) - 5, 10 * u01(rng) - 5, 10 * u01(rng) - 5};
    if (std::abs(g.det()) >= 1e-6) return g;
  }
}

// Category frequencies of a serially correlated sequence, with standard
// errors from equal contiguous blocks.
std::vector<Estimate> block_frequencies(const std::vector<std::uint32_t>& seq, std::size_t categories,
                                        std::size_t blocks = 1000) {
  const std::size_t len = seq.size() / blocks;
  std::vector<RunningStats> per(categories);
  std::vector<double> counts(categories);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) counts[seq[i]] += 1.0;
    for (std::size_t c = 0; c < categories; ++c) per[c].add(counts[c] / static_cast<double>(len));
  }
  std::vector<Estimate> out;
  for (const auto& s : per) out.push_back(to_estimate(s));
  return out;
}

// Smallest per-step slack of the angle drift inequality. With prescribed f
// the drift is measured on f; otherwise a pushed-forward pair is tracked and
// reset to an orthogonal pair once it nearly collapses.
double min_drift_slack(const OrbitWindow& w) {
  double worst = std::numeric_limits<double>::infinity();
  const bool prescribed = !w.prescribed_f.empty();
  ProjLine x1(0.0);
  ProjLine x2(kPi / 2);
  for (std::size_t i = 0; i < w.factors.size(); ++i) {
    const Factor& f = w.factors[i];
    if (prescribed) {
      x1 = w.prescribed_f[i].x1();
      x2 = w.prescribed_f[i].x2();
    }
    worst = std::min(worst, angle_drift_gap(f, x1, x2).slack());
    if (!prescribed) {
      x1 = projective_action(f, x1);
      x2 = projective_action(f, x2);
      if (line_sine(x1, x2) < 1e-6) x2 = ProjLine(x1.alpha() + kPi / 2);
    }
  }
  return worst;
}

MatrixDistribution control_cocycle() {
  return MatrixDistribution::rotgain(ScalarDist::uniform(0.0, kTwoPi), ScalarDist::constant(1.0));
}

MatrixDistribution unit_triangular() {
  return MatrixDistribution::triangular(ScalarDist::constant(-1.0), true, ScalarDist::constant(1.0), false);
}

// Criteria.

Outcome c1_singular_values(Scale, unsigned) {
  Rng rng(derive_seed(101, 0));
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u1 = kTwoPi * u01(rng);
    const double v1 = kTwoPi * u01(rng);
    double u2;
    double v2;
    do u2 = kTwoPi * u01(rng); while (std::abs(std::sin(u2 - u1)) < 1e-3);
    do v2 = kTwoPi * u01(rng); while (std::abs(std::sin(v2 - v1)) < 1e-3);
    const UnitVectorPair xt(u1, u2);
    const UnitVectorPair yt(v1, v2);
    const SinCosRatio r = interp_singular_values(xt.vector_angle(), yt.vector_angle());
    const Svd2 s = svd2(interp_matrix(xt, yt));
    const double hi = std::max(r.sin_ratio, r.cos_ratio);
    const double lo = std::min(r.sin_ratio, r.cos_ratio);
    worst = std::max({worst, std::abs(s.s1 - hi) / std::max(1.0, hi), std::abs(s.s2 - lo) / std::max(1.0, lo)});
  }
  return verdict(worst <= 1e-10, format("10000 pairs, worst scaled error %.3g (tol 1e-10)", worst));
}

Outcome c2_norms_bound(Scale, unsigned) {
  Rng rng(derive_seed(102, 0));
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const SplittingPair x = random_pair(rng);
    const SplittingPair y = random_pair(rng);
    const double cost = transfer_cost_bounded(x, y);
    const double norm = log_norm_max(interp_matrix(section_rho(x), section_rho(y)));
    worst = std::max(worst, std::abs(cost - norm) / std::max(1.0, norm));
  }
  return verdict(worst <= 1e-10, format("10000 pairs, worst scaled error %.3g (tol 1e-10)", worst));
}

Outcome c3_drift(Scale scale, unsigned) {
  const std::int64_t n = pick<std::int64_t>(scale, 20000, 200000);
  struct Case {
    const char* name;
    double slack;
  };
  std::vector<Case> cases;
  cases.push_back({"counterexample", min_drift_slack(sample_window(build_counterexample_cocycle(counterexample_psi()), 0, n, 31))});
  cases.push_back({"control", min_drift_slack(sample_window(control_cocycle(), 0, n, 32))});
  cases.push_back({"triangular", min_drift_slack(sample_window(unit_triangular(), 0, n, 33))});
  const auto random_atoms = MatrixDistribution::atoms(
      {Mat2{2.0, 1.0, 0.0, 0.5}, Mat2{0.3, -1.0, 1.2, 0.8}, Mat2::rotation(1.0).scaled(3.0)}, {0.3, 0.3, 0.4});
  cases.push_back({"atoms", min_drift_slack(sample_window(random_atoms, 0, n, 34))});
  const EtaSpec eta = reference_eta();
  cases.push_back({"bounded", min_drift_slack(simulate_flexible(eta, 0.5, -0.5, FlexibleMode::bounded(1.0), n, 35).window)});
  cases.push_back({"lowcost", min_drift_slack(simulate_flexible(eta, 0.5, -0.5, FlexibleMode::lowcost(0.1), n, 36).window)});
  bool pass = true;
  std::string detail = format("%lld steps per orbit; min slack", static_cast<long long>(n));
  for (const auto& c : cases) {
    pass = pass && c.slack >= -1e-9;
    detail += format(" %s %.3g", c.name, c.slack);
  }
  return verdict(pass, detail);
}

Outcome c4_triangular(Scale scale, unsigned) {
  const std::int64_t n = pick<std::int64_t>(scale, 100000, 1000000);
  const auto nu = unit_triangular();
  const LyapunovEstimate lam = lyapunov_estimates(sample_window(nu, 0, n, 41));
  const double x_closed = 1.0 / (1.0 - std::exp(-1.0));
  const OrbitWindow w = sample_onestep(nu, 80, 42);
  std::vector<double> a;
  std::vector<double> b;
  for (int j = 0; j < 80; ++j) {
    const Mat2 g = w.matrix(-j - 1);
    a.push_back(g.a11);
    b.push_back(g.a12);
  }
  const double x_series = triangular_X(a, b, 1e-14, 1.0);
  const Vec2 e1 = E1_backward_direction(w, 60);
  const double cot = e1.x / e1.y;
  const bool pass = std::abs(lam.lambda1) < 0.02 && std::abs(lam.lambda2 + 1.0) < 0.02 &&
                    std::abs(cot - x_closed) < 1e-5 && std::abs(cot - x_series) < 1e-5 &&
                    std::abs(x_closed - 1.581977) < 1e-6;
  return verdict(pass, format("lambda (%.5f, %.5f) at %lld steps; cot E1 %.9f vs X %.9f (series %.9f)", lam.lambda1,
                              lam.lambda2, static_cast<long long>(n), cot, x_closed, x_series));
}

Outcome c5_double_edged(Scale scale, unsigned) {
  const ScalarDist psi = ScalarDist::atoms({0.0, 2.0}, {0.5, 0.5});
  // Y = max(psi_1, psi_2 - 1) since later terms are at most 0 <= psi_1.
  double oracle = 0.0;
  for (double p1 : {0.0, 2.0}) {
    for (double p2 : {0.0, 2.0}) oracle += 0.25 * std::max(p1, p2 - 1.0);
  }
  const double exact = exact_Y_tail(psi).expectation;
  const std::size_t trials = pick<std::size_t>(scale, 20000, 100000);
  Rng rng(51);
  RunningStats s;
  for (std::size_t i = 0; i < trials; ++i) s.add(sample_Y(psi, rng));
  const bool pass = std::abs(exact - 1.25) < 1e-12 && std::abs(oracle - 1.25) < 1e-12 &&
                    within_sigma(s.mean(), exact, s.std_error());
  return verdict(pass, format("exact %.15g, enumerated %.15g, MC %.5f +- %.5f over %zu", exact, oracle, s.mean(),
                              s.std_error(), trials));
}

AngleTailReport onestep_angle_report(const MatrixDistribution& nu, std::size_t samples, unsigned jobs) {
  constexpr std::int64_t depth = 256;
  std::vector<double> v(samples);
  parallel_for(samples, jobs, [&](std::size_t i) {
    const OrbitWindow w = sample_onestep(nu, depth, derive_seed(42, i));
    v[i] = neg_log_sine(E1_backward_direction(w, depth), E2_forward_direction(w, depth));
  });
  return angle_tail_report_neglog(v, {4, 8, 16, 32, 64});
}

Outcome c6_angle_tails(Scale scale, unsigned jobs) {
  const std::size_t samples = pick<std::size_t>(scale, 20000, 100000);
  const AngleTailReport ce = onestep_angle_report(build_counterexample_cocycle(counterexample_psi()), samples, jobs);
  const AngleTailReport ctrl = onestep_angle_report(control_cocycle(), samples, jobs);
  const bool pass = ce.verdict == "growing" && ce.span.mean > 5.0 * ce.span.std_error && ctrl.verdict == "converging";
  return verdict(pass, format("%zu samples; counterexample span %.4f +- %.4f (%s); control span %.4f +- %.4f (%s)",
                              samples, ce.span.mean, ce.span.std_error, ce.verdict.c_str(), ctrl.span.mean,
                              ctrl.span.std_error, ctrl.verdict.c_str()));
}

std::vector<double> halving_sequence(int terms) {
  std::vector<double> p;
  for (int k = 0; k < terms; ++k) p.push_back(std::ldexp(1.0, -k - 1));
  // Residual 2^-terms split so the sequence stays strictly decreasing.
  p.push_back(0.75 * std::ldexp(1.0, -terms));
  p.push_back(0.25 * std::ldexp(1.0, -terms));
  return p;
}

Outcome c7_kac(Scale scale, unsigned) {
  std::vector<TowerVector> towers;
  towers.push_back(bounded_tower_vector({0.35, 0.25, 0.2, 0.12, 0.08}));
  towers.push_back(bounded_tower_vector(halving_sequence(40)));
  const EtaSpec eta = reference_eta();
  towers.push_back(simulate_flexible(eta, 0.5, -0.5, FlexibleMode::bounded(1.0), 1, 1).tower);
  towers.push_back(simulate_flexible(eta, 0.5, -0.5, FlexibleMode::lowcost(0.1), 1, 1).tower);
  Rng rng(71);
  while (towers.size() < 200) {
    TowerVector t;
    const int count = 1 + static_cast<int>(rng() % 6);
    double total = 0.0;
    for (int i = 0; i < count; ++i) {
      const double w = u01(rng) + 1e-3;
      t.entries[1 + static_cast<std::int64_t>(rng() % 40)] += w;
      total += w;
    }
    std::int64_t g = 0;
    for (auto& [k, p] : t.entries) {
      p /= total;
      g = std::gcd(g, k);
    }
    if (g == 1) towers.push_back(t);
  }
  double worst = 0.0;
  for (const auto& t : towers) worst = std::max(worst, std::abs(kac_identity_sum(kac_base_measures(t)) - 1.0));

  // Occupancy of heights and of (height, level) cells on one long path.
  const TowerVector& pi = towers[0];
  const RenewalChain chain(pi);
  std::vector<std::int64_t> heights;
  std::vector<std::size_t> level_base;
  std::size_t cells = 0;
  for (const auto& [k, p] : pi.entries) {
    heights.push_back(k);
    level_base.push_back(cells);
    cells += static_cast<std::size_t>(k);
  }
  const std::size_t n = pick<std::size_t>(scale, 200000, 1000000);
  std::vector<std::uint32_t> by_height(n);
  std::vector<std::uint32_t> by_level(n);
  Rng path(72);
  SkyscraperState s = chain.start_stationary(path);
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = static_cast<std::size_t>(std::find(heights.begin(), heights.end(), s.height) - heights.begin());
    by_height[i] = static_cast<std::uint32_t>(h);
    by_level[i] = static_cast<std::uint32_t>(level_base[h] + static_cast<std::size_t>(s.level));
    s = chain.step(s, path);
  }
  const auto fh = block_frequencies(by_height, heights.size());
  const auto fl = block_frequencies(by_level, cells);
  double worst_z = 0.0;
  bool occupancy = true;
  for (std::size_t h = 0; h < heights.size(); ++h) {
    const double target = pi.entries.at(heights[h]);
    occupancy = occupancy && within_sigma(fh[h].mean, target, fh[h].std_error);
    worst_z = std::max(worst_z, std::abs(fh[h].mean - target) / fh[h].std_error);
    for (std::int64_t l = 0; l < heights[h]; ++l) {
      const Estimate& e = fl[level_base[h] + static_cast<std::size_t>(l)];
      const double cell_target = target / static_cast<double>(heights[h]);
      occupancy = occupancy && within_sigma(e.mean, cell_target, e.std_error);
      worst_z = std::max(worst_z, std::abs(e.mean - cell_target) / e.std_error);
    }
  }
  return verdict(worst <= 1e-12 && occupancy,
                 format("%zu towers, worst |sum k mu(B_k) - 1| %.3g; %zu steps, worst occupancy z %.2f", towers.size(),
                        worst, n, worst_z));
}

Outcome c8_labels(Scale scale, unsigned) {
  const std::vector<std::vector<int>> towers{{0}, {0, 1, 1, 0}, {0, 1, 2, 2, 1, 0}};
  bool towers_ok = true;
  for (const auto& column : towers) {
    const auto k = static_cast<std::int64_t>(column.size());
    for (std::int64_t i = 0; i < k; ++i) towers_ok = towers_ok && label_of({k, i}) == column[static_cast<std::size_t>(i)];
  }

  const std::vector<double> p = halving_sequence(10);
  const std::vector<double> mu = label_measures(p);
  double worst_exact = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) worst_exact = std::max(worst_exact, std::abs(mu[i] - p[i]));

  const RenewalChain chain(bounded_tower_vector(p));
  const std::size_t n = pick<std::size_t>(scale, 200000, 1000000);
  std::vector<std::uint32_t> labels(n);
  Rng rng(81);
  SkyscraperState s = chain.start_stationary(rng);
  int max_jump = 0;
  bool definition_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    const int l = label_of(s);
    // Distance to the nearer end of the tower.
    const std::int64_t to_end = std::min(s.level, s.height - 1 - s.level);
    definition_ok = definition_ok && l == to_end;
    if (i > 0) max_jump = std::max(max_jump, std::abs(l - static_cast<int>(labels[i - 1])));
    labels[i] = static_cast<std::uint32_t>(l);
    s = chain.step(s, rng);
  }
  const auto freq = block_frequencies(labels, p.size());
  bool match = true;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    match = match && within_sigma(freq[i].mean, p[i], freq[i].std_error);
    if (freq[i].std_error > 0.0) worst_z = std::max(worst_z, std::abs(freq[i].mean - p[i]) / freq[i].std_error);
  }
  return verdict(towers_ok && definition_ok && max_jump <= 1 && match && worst_exact < 1e-12,
                 format("labelled towers %s; max |dl| %d over %zu steps; worst mu(L_n) z %.2f; closed form error %.3g",
                        towers_ok ? "ok" : "MISMATCH", max_jump, n, worst_z, worst_exact));
}

Outcome construction_outcome(const FlexibleRun& run, double b, bool bounded, double epsilon) {
  const ConstructionReport rep = verify_flexible(run.window, reference_eta(), 0.5, -0.5);
  bool pass = std::abs(rep.lambda1 - 0.5) < 0.05 && std::abs(rep.lambda2 + 0.5) < 0.05 && rep.cell_tv < 0.02 &&
              rep.agreement_fraction >= 0.99 && rep.min_drift_slack >= -1e-9;
  std::string detail =
      format("%zu steps, lambda (%.4f, %.4f), TV %.4f, agreement %.3f", rep.steps, rep.lambda1, rep.lambda2,
             rep.cell_tv, rep.agreement_fraction);
  if (bounded) {
    pass = pass && rep.max_step_cost < b;
    detail += format(", max cost %.4f < %.2f", rep.max_step_cost, b);
  } else {
    const double upper = rep.mean_step_cost.mean + 3.0 * rep.mean_step_cost.std_error;
    pass = pass && upper < epsilon;
    detail += format(", mean cost %.5f + 3 x %.5f < %.2f", rep.mean_step_cost.mean, rep.mean_step_cost.std_error,
                     epsilon);
  }
  return verdict(pass, detail);
}

Outcome c9_bounded(Scale scale, unsigned) {
  const std::int64_t n = pick<std::int64_t>(scale, 100000, 1000000);
  const FlexibleRun run = simulate_flexible(reference_eta(), 0.5, -0.5, FlexibleMode::bounded(kReferenceBudget), n, 91);
  return construction_outcome(run, kReferenceBudget, true, 0.0);
}

Outcome c10_lowcost(Scale scale, unsigned) {
  const std::int64_t n = pick<std::int64_t>(scale, 100000, 1000000);
  const FlexibleRun run = simulate_flexible(reference_eta(), 0.5, -0.5, FlexibleMode::lowcost(0.1), n, 101);
  return construction_outcome(run, 0.0, false, 0.1);
}

double log_half_sine(double theta) { return std::log(std::sin(theta / 2)); }

double interval_distance(double a0, double a1, double b0, double b1) {
  if (a1 < b0) return b0 - a1;
  if (b1 < a0) return a0 - b1;
  return 0.0;
}

double cross_cost(const EtaCell& a, const EtaCell& b) {
  return interval_distance(log_half_sine(a.theta_lo), log_half_sine(a.theta_hi), log_half_sine(b.theta_lo),
                           log_half_sine(b.theta_hi));
}

// Every bipartition must have a crossing pair cheaper than b.
bool exhaustive_fits(const std::vector<EtaCell>& cells, double b) {
  const std::size_t n = cells.size();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!(mask >> j & 1)) best = std::min(best, cross_cost(cells[i], cells[j]));
      }
    }
    if (!(best < b)) return false;
  }
  return true;
}

EtaSpec random_spec(Rng& rng, std::size_t cells) {
  EtaSpec eta;
  for (std::size_t i = 0; i < cells; ++i) {
    const double a = kPi * u01(rng);
    const double t0 = 0.01 + 1.5 * u01(rng);
    EtaCell c = rng() % 4 == 0 ? atom_cell(a, t0)
                               : uniform_cell(a, a + 0.3 * u01(rng), t0, std::min(kPi / 2, t0 + 0.3 * u01(rng)),
                                              rng() % 2 ? 1 : -1);
    eta.pieces.push_back({0.05 + u01(rng), c});
  }
  double total = 0.0;
  for (const auto& p : eta.pieces) total += p.weight;
  for (auto& p : eta.pieces) p.weight /= total;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < eta.pieces.size(); ++i) sum += eta.pieces[i].weight;
  eta.pieces.back().weight = 1.0 - sum;
  return eta;
}

Outcome c11_budget_fit(Scale scale, unsigned) {
  const std::size_t specs = pick<std::size_t>(scale, 400, 2000);
  Rng rng(111);
  std::size_t fits = 0;
  std::size_t compared = 0;
  for (std::size_t s = 0; s < specs; ++s) {
    const EtaSpec eta = random_spec(rng, 1 + s % 12);
    std::vector<EtaCell> cells;
    for (const auto& p : eta.pieces) cells.push_back(p.cell);
    // Budgets at, just above and between the pairwise gaps.
    std::vector<double> budgets{0.05 + 2.0 * u01(rng)};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      for (std::size_t j = i + 1; j < cells.size(); ++j) {
        const double g = cross_cost(cells[i], cells[j]);
        if (g > 0.0 && budgets.size() < 8) {
          budgets.push_back(g);
          budgets.push_back(std::nextafter(g, 10.0));
        }
      }
    }
    for (double b : budgets) {
      const BudgetFit got = budget_fit_check(eta, b);
      const bool want = exhaustive_fits(cells, b);
      ++compared;
      if (got.fits != want) {
        return verdict(false, format("spec %zu with %zu cells at b = %.17g: checker %d, exhaustive %d", s, cells.size(),
                                     b, got.fits, want));
      }
      if (got.fits) {
        ++fits;
        continue;
      }
      double crossing = std::numeric_limits<double>::infinity();
      for (std::size_t i : got.side_a) {
        for (std::size_t j : got.side_b) crossing = std::min(crossing, cross_cost(cells[i], cells[j]));
      }
      if (got.side_a.empty() || got.side_b.empty() || got.side_a.size() + got.side_b.size() != cells.size() ||
          crossing < b) {
        return verdict(false, format("spec %zu: invalid witness at b = %.17g", s, b));
      }
    }
  }
  return verdict(true, format("%zu specs, %zu budgets compared (%zu fit), witnesses valid", specs, compared, fits));
}

Outcome c12_weierstrass(Scale scale, unsigned) {
  const std::size_t lists = pick<std::size_t>(scale, 20000, 100000);
  Rng rng(121);
  double worst_product = 0.0;
  for (std::size_t i = 0; i < lists; ++i) {
    std::vector<double> a(1 + rng() % 30);
    for (double& x : a) {
      const auto kind = rng() % 4;
      x = kind == 0 ? 0.0 : kind == 1 ? 1e-3 * u01(rng) : u01(rng);
    }
    if (rng() % 50 == 0) a[rng() % a.size()] = 1.0;
    const WeierstrassBounds w = weierstrass_bounds(a);
    long double survive = 1.0L;
    long double sum = 0.0L;
    for (double x : a) {
      survive *= 1.0L - static_cast<long double>(x);
      sum += x;
    }
    const double value = static_cast<double>(1.0L - survive);
    worst_product = std::max(worst_product, std::abs(value - w.value));
    const double tol = 1e-14;
    if (w.lower > w.value + tol || w.value > std::min(1.0, w.upper) + tol ||
        std::abs(w.upper - static_cast<double>(sum)) > 1e-12 * std::max(1.0, w.upper) ||
        std::abs(w.lower - w.upper / (1.0 + w.upper)) > 1e-14) {
      return verdict(false, format("list %zu: lower %.17g value %.17g upper %.17g", i, w.lower, w.value, w.upper));
    }
  }
  return verdict(worst_product < 1e-12,
                 format("%zu lists, ordering holds, worst product mismatch %.3g", lists, worst_product));
}

Outcome c13_drift(Scale scale, unsigned jobs) {
  const DriftReport constant = negative_drift_supremum(ScalarDist::constant(3.0), 1.0, 1000, 200, 131, jobs);
  const DriftReport square = negative_drift_supremum(ScalarDist::atoms({0.0, 6.0}, {0.5, 0.5}), 1.0,
                                                     pick<std::int64_t>(scale, 2000, 10000), 2000, 132, jobs);
  const ScalarDist heavy = ScalarDist::pareto(1.0, 1.5).affine(6.0, -1.0);
  const DriftReport infinite =
      negative_drift_supremum(heavy, 1.0, 500, pick<std::size_t>(scale, 50000, 100000), 133, jobs);
  const bool pass = constant.sup_h.mean == 0.0 && constant.sup_2h.mean == 0.0 && square.stabilized &&
                    !infinite.stabilized;
  return verdict(pass, format("constant sup %g; square-integrable increase %.4f +- %.4f (%s); heavy increase "
                              "%.4f +- %.4f (%s)",
                              constant.sup_2h.mean, square.difference.mean, square.difference.std_error,
                              square.stabilized ? "stabilized" : "not stabilized", infinite.difference.mean,
                              infinite.difference.std_error, infinite.stabilized ? "stabilized" : "not stabilized"));
}

// Invariants.

Outcome inv_svd(Scale, unsigned) {
  Rng rng(201);
  double worst_recon = 0.0;
  double worst_oracle = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Mat2 g = random_invertible(rng);
    const Svd2 s = svd2(g);
    worst_recon = std::max(worst_recon, max_entry_diff(s.reconstruct(), g) / std::max(1.0, g.max_abs()));
    // Largest singular value from the eigenvalues of g^T g.
    const double p = g.a11 * g.a11 + g.a21 * g.a21;
    const double r = g.a12 * g.a12 + g.a22 * g.a22;
    const double q = g.a11 * g.a12 + g.a21 * g.a22;
    const double top = std::sqrt(0.5 * (p + r + std::sqrt((p - r) * (p - r) + 4.0 * q * q)));
    worst_oracle = std::max({worst_oracle, std::abs(s.s1 - top) / top,
                             std::abs(s.s1 * s.s2 - std::abs(g.det())) / std::abs(g.det())});
  }
  return verdict(worst_recon < 1e-11 && worst_oracle < 1e-11,
                 format("reconstruction %.3g, singular values %.3g", worst_recon, worst_oracle));
}

Outcome inv_drift_random(Scale, unsigned) {
  Rng rng(202);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    const Mat2 g = random_invertible(rng);
    const SplittingPair x = random_pair(rng);
    worst = std::min(worst, angle_drift_gap(g, x.x1(), x.x2()).slack());
  }
  return verdict(worst >= -1e-9, format("min slack %.3g over 10000 matrices", worst));
}

Outcome inv_sandwich(Scale, unsigned) {
  Rng rng(203);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double t = 1e-6 + (kPi / 2 - 1e-6) * u01(rng);
    const double tp = 1e-6 + (kPi / 2 - 1e-6) * u01(rng);
    const double cos_side = std::abs(std::log(std::cos(tp / 2)) - std::log(std::cos(t / 2)));
    const double mid = std::abs(tp - t) / 2;
    const double sin_side = std::abs(std::log(std::sin(tp / 2)) - std::log(std::sin(t / 2)));
    worst = std::max({worst, cos_side - mid, mid - sin_side});
  }
  return verdict(worst <= 1e-15, format("worst violation %.3g", worst));
}

Outcome inv_round_trip(Scale, unsigned) {
  Rng rng(204);
  double worst_rotgain = 0.0;
  double worst_scaled = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const ProjLine x(kPi * u01(rng));
    const Mat2 h = Mat2::rotation(kTwoPi * u01(rng)) * Mat2::diag(std::exp(u01(rng)), std::exp(-u01(rng)));
    worst_rotgain = std::max(worst_rotgain, line_sine(projective_action(h.inverse(), projective_action(h, x)), x));
    const Mat2 g = random_invertible(rng);
    const Svd2 s = svd2(g);
    const double condition = s.s1 / s.s2;
    worst_scaled = std::max(worst_scaled, line_sine(projective_action(g.inverse(), projective_action(g, x)), x) /
                                              (condition * condition));
  }
  return verdict(worst_rotgain < 1e-12 && worst_scaled < 1e-13,
                 format("well conditioned %.3g; random, per squared condition %.3g", worst_rotgain, worst_scaled));
}

Outcome inv_cocycle(Scale, unsigned) {
  const auto nu = MatrixDistribution::rotgain(ScalarDist::uniform(0.0, kTwoPi), ScalarDist::uniform(-2.0, 2.0));
  const OrbitWindow w = sample_window(nu, -100, 300, 205);
  double worst_identity = 0.0;
  double worst_det = 0.0;
  double worst_sub = -std::numeric_limits<double>::infinity();
  for (std::int64_t from = -100; from < 100; from += 7) {
    for (std::int64_t n = 0; n < 40; n += 3) {
      for (std::int64_t m = 0; m < 40; m += 5) {
        const ScaledProduct whole = cocycle_product_scaled(w, from, n + m);
        const ScaledProduct first = cocycle_product_scaled(w, from, n);
        const ScaledProduct second = cocycle_product_scaled(w, from + n, m);
        const Mat2 composed = (second.shape() * first.shape()).scaled(
            std::exp(second.log_scale() + first.log_scale() - whole.log_scale()));
        worst_identity = std::max(worst_identity, max_entry_diff(composed, whole.shape()));
        worst_det = std::max(worst_det, std::abs(whole.log_abs_det - first.log_abs_det - second.log_abs_det));
        worst_sub = std::max(worst_sub, whole.log_s1() - first.log_s1() - second.log_s1());
      }
    }
  }
  return verdict(worst_identity < 1e-9 && worst_det < 1e-9 && worst_sub <= 1e-9,
                 format("identity %.3g, log det %.3g, subadditivity excess %.3g", worst_identity, worst_det, worst_sub));
}

Outcome inv_independence(Scale scale, unsigned) {
  const auto nu = MatrixDistribution::atoms({Mat2::diag(2.0, 0.5), Mat2::rotation(1.0), Mat2{1.0, 1.0, 0.0, 1.0}},
                                            {0.5, 0.3, 0.2});
  const std::size_t windows = pick<std::size_t>(scale, 5000, 20000);
  std::vector<std::vector<double>> table(3, std::vector<double>(3, 0.0));
  auto index_of = [&](const Mat2& g) {
    for (std::size_t i = 0; i < nu.matrices().size(); ++i) {
      if (max_entry_diff(g, nu.matrices()[i]) < 1e-12) return i;
    }
    return std::size_t{0};
  };
  for (std::size_t i = 0; i < windows; ++i) {
    const OrbitWindow w = sample_onestep(nu, 2, derive_seed(206, i));
    table[index_of(w.matrix(-1))][index_of(w.matrix(0))] += 1.0;
  }
  const double p = chi_square_independence(table);
  return verdict(p > 1e-3, format("chi-square p = %.4f over %zu windows", p, windows));
}

Outcome inv_exact_y(Scale scale, unsigned) {
  const std::vector<ScalarDist> laws{ScalarDist::atoms({0.0, 1.0, 3.0, 6.0}, {0.4, 0.3, 0.2, 0.1}),
                                     ScalarDist::atoms({0.5, 2.25, 4.75, 9.0}, {0.4, 0.3, 0.2, 0.1})};
  const std::size_t draws = pick<std::size_t>(scale, 20000, 100000);
  double worst_z = 0.0;
  bool pass = true;
  for (std::size_t l = 0; l < laws.size(); ++l) {
    Rng rng(derive_seed(207, l));
    std::vector<double> ys(draws);
    for (double& y : ys) y = sample_Y(laws[l], rng);
    for (double M : {1.0, 2.0, 4.0, 8.0}) {
      RunningStats s;
      for (double y : ys) s.add(std::min(y, M));
      const double exact = exact_Y_truncated_mean(laws[l], M);
      pass = pass && within_sigma(s.mean(), exact, s.std_error());
      worst_z = std::max(worst_z, std::abs(s.mean() - exact) / s.std_error());
    }
  }
  return verdict(pass, format("worst z %.2f over %zu draws per law", worst_z, draws));
}

Outcome inv_tower_gcd(Scale, unsigned) {
  auto rejects = [](const TowerVector& t) {
    try {
      t.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::BadTowerVector;
    }
    return false;
  };
  TowerVector even;
  even.entries = {{2, 0.5}, {4, 0.5}};
  TowerVector coprime;
  coprime.entries = {{4, 0.5}, {6, 0.25}, {9, 0.25}};
  TowerVector short_sum;
  short_sum.entries = {{1, 0.5}, {2, 0.4}};
  bool accepted = !rejects(coprime);
  return verdict(rejects(even) && rejects(short_sum) && accepted,
                 "gcd 2 and mass 0.9 rejected, gcd 1 accepted");
}

Outcome inv_flexible_cells(Scale scale, unsigned) {
  const EtaSpec eta = reference_eta();
  const Decomposition d = decompose_eta(eta);
  const std::int64_t n = pick<std::int64_t>(scale, 20000, 100000);
  const FlexibleRun bounded = simulate_flexible(eta, 0.5, -0.5, FlexibleMode::bounded(kReferenceBudget), n, 208);
  const auto& f = bounded.window.prescribed_f;
  const auto& labels = bounded.window.labels;
  std::size_t misplaced = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto l = static_cast<std::size_t>(labels[i]);
    if (!bounded.piece_cells[l].contains(f[i]) || !d.pieces[bounded.cell_track[i]].cell.contains(f[i])) ++misplaced;
    if (i > 0 && std::abs(labels[i] - labels[i - 1]) > 1) ++misplaced;
  }
  const FlexibleRun low = simulate_flexible(eta, 0.5, -0.5, FlexibleMode::lowcost(0.1), n, 209);
  for (std::size_t i = 0; i < low.window.prescribed_f.size(); ++i) {
    if (!d.pieces[low.cell_track[i]].cell.contains(low.window.prescribed_f[i])) ++misplaced;
  }
  const FlexibleRun again = simulate_flexible(eta, 0.5, -0.5, FlexibleMode::bounded(kReferenceBudget), n, 208);
  bool same = true;
  for (std::int64_t i = 0; i < n && same; ++i) same = bounded.window.matrix(i) == again.window.matrix(i);
  return verdict(misplaced == 0 && same,
                 format("%zu misplaced steps over two runs of %lld; rerun %s", misplaced, static_cast<long long>(n),
                        same ? "identical" : "DIFFERS"));
}

Outcome inv_decomposition(Scale, unsigned) {
  EtaSpec eta;
  TailRule rule;
  rule.first_weight = 0.25;
  rule.ratio = 0.5;
  rule.cell = uniform_cell(0.0, 1.0, 1.0, 1.5);
  rule.theta_factor = 0.9;
  eta.pieces = {{0.5, uniform_cell(1.0, 2.0, 1.2, 1.5)}};
  eta.tail_rule = rule;
  const Decomposition d = decompose_eta(eta);
  double total = 0.0;
  for (const auto& p : d.pieces) total += p.weight;
  bool nested = true;
  for (std::size_t i = 1; i < d.k_s_lo.size(); ++i) {
    nested = nested && d.k_s_lo[i] <= d.k_s_lo[i - 1] && d.k_s_hi[i] >= d.k_s_hi[i - 1];
  }
  return verdict(std::abs(total - 1.0) < 1e-12 && nested,
                 format("%zu pieces, mass %.17g, nested K_n %s", d.pieces.size(), total, nested ? "yes" : "no"));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

EtaSpec reference_eta() {
  EtaSpec eta;
  eta.pieces = {{0.4, uniform_cell(0.0, 0.5, 1.2, 1.5)},
                {0.3, uniform_cell(1.0, 1.6, 0.6, 0.9)},
                {0.2, uniform_cell(2.0, 2.4, 0.25, 0.4, -1)},
                {0.1, atom_cell(2.8, 0.12)}};
  return eta;
}

const std::vector<Check>& acceptance_checks() {
  static const std::vector<Check> checks{
      {"1", "closed-form singular values of interp", c1_singular_values, 1},
      {"2", "bounded cost equals log_norm_max of interp", c2_norms_bound, 1},
      {"3", "angle drift inequality along every orbit", c3_drift, 0},
      {"4", "triangular cocycle exponents and E1", c4_triangular, 30},
      {"5", "double-edged Y oracle", c5_double_edged, 30},
      {"6", "angle tails: counterexample grows, control converges", c6_angle_tails, 300},
      {"7", "Kac identity and renewal occupancy", c7_kac, 60},
      {"8", "label process", c8_labels, 60},
      {"9", "bounded-cost construction", c9_bounded, 300},
      {"10", "low-cost construction", c10_lowcost, 300},
      {"11", "budget fit against exhaustive bipartitions", c11_budget_fit, 60},
      {"12", "Weierstrass product bounds", c12_weierstrass, 5},
      {"13", "negative-drift supremum stabilization", c13_drift, 120},
  };
  return checks;
}

const std::vector<Check>& invariant_checks() {
  static const std::vector<Check> checks{
      {"geometry.svd2", "svd2 reconstruction and singular values", inv_svd},
      {"geometry.drift", "angle drift on random matrices", inv_drift_random},
      {"geometry.sandwich", "mean value sandwich", inv_sandwich},
      {"geometry.round_trip", "projective action round trip", inv_round_trip},
      {"cocycle.products", "cocycle identity, log det and subadditivity", inv_cocycle},
      {"cocycle.independence", "one-step past and future independent", inv_independence},
      {"oseledets.exact_y", "exact Y law against Monte Carlo", inv_exact_y},
      {"skyscraper.gcd", "tower vectors need gcd 1 and unit mass", inv_tower_gcd},
      {"flexible.cells", "prescribed splitting stays in its cells", inv_flexible_cells},
      {"flexible.decomposition", "tail decomposition mass and nesting", inv_decomposition},
  };
  return checks;
}

std::vector<CheckResult> run_checks(const std::vector<Check>& checks, Scale scale, unsigned jobs,
                                    const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> out;
  for (const auto& c : checks) {
    CheckResult r{c.id, c.name, false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = c.run(scale, jobs);
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = seconds_since(t0);
    if (scale == Scale::Full && c.budget_seconds > 0.0 && r.seconds > c.budget_seconds) {
      r.pass = false;
      r.detail += format(" [%.1f s exceeds the %.0f s budget]", r.seconds, c.budget_seconds);
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace osl
