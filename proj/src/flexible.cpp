#include "osl/flexible.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "osl/errors.hpp"
#include "osl/oseledets.hpp"

namespace osl {

namespace {

double s_of(double theta) noexcept { return std::log(std::sin(0.5 * theta)); }

double theta_of(double s) noexcept { return 2.0 * std::asin(std::exp(s)); }

// Line angle from x1 to x2 in [0, pi).
double delta_of(const SplittingPair& x) noexcept {
  return canonical_line_angle(x.x2().alpha() - x.x1().alpha());
}

double interval_distance(double lo, double hi, double x) noexcept {
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

// Distance on the circle of length pi from alpha to [lo, hi].
double alpha_distance(const EtaCell& c, double alpha) noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (double shift : {-kPi, 0.0, kPi}) {
    best = std::min(best, interval_distance(c.alpha_lo, c.alpha_hi, alpha + shift));
  }
  return best;
}

void delta_range(const EtaCell& c, double& lo, double& hi) noexcept {
  if (c.orientation > 0) {
    lo = c.theta_lo;
    hi = c.theta_hi;
  } else {
    lo = kPi - c.theta_hi;
    hi = kPi - c.theta_lo;
  }
}

double total_weight(const std::vector<EtaPiece>& pieces) {
  double t = 0.0;
  for (const auto& p : pieces) t += p.weight;
  return t;
}

}  // namespace

void EtaCell::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::BadSpec, m); };
  if (!std::isfinite(alpha_lo) || !std::isfinite(alpha_hi) || !std::isfinite(theta_lo) ||
      !std::isfinite(theta_hi)) {
    bad("cell bounds must be finite");
  }
  if (orientation != 1 && orientation != -1) bad("orientation must be +1 or -1");
  if (!(theta_lo > 0.0)) bad("cell theta_lo must be > 0");
  if (!(alpha_lo >= 0.0 && alpha_lo < kPi)) bad("alpha_lo must lie in [0, pi)");
  if (!atom) {
    if (!(theta_hi >= theta_lo && theta_hi <= kPi / 2 + 1e-15)) bad("need theta_lo <= theta_hi <= pi/2");
    if (!(alpha_hi >= alpha_lo && alpha_hi - alpha_lo <= kPi)) bad("need alpha_lo <= alpha_hi, width <= pi");
  } else if (!(theta_lo <= kPi / 2 + 1e-15)) {
    bad("atom theta must be <= pi/2");
  }
}

SplittingPair EtaCell::point(double alpha, double theta) const {
  return SplittingPair(ProjLine(alpha), ProjLine(alpha + orientation * theta));
}

SplittingPair EtaCell::sample(Rng& rng) const {
  if (atom) return point(alpha_lo, theta_lo);
  const double ua = u01(rng);
  const double ut = u01(rng);
  return point(alpha_lo + ua * (alpha_hi - alpha_lo), theta_lo + ut * (theta_hi - theta_lo));
}

bool EtaCell::contains(const SplittingPair& x, double tol) const {
  const double hi_a = atom ? alpha_lo : alpha_hi;
  EtaCell probe = *this;
  probe.alpha_hi = hi_a;
  if (atom) probe.theta_hi = theta_lo;
  if (alpha_distance(probe, x.x1().alpha()) > tol) return false;
  double lo = 0.0;
  double hi = 0.0;
  delta_range(probe, lo, hi);
  return interval_distance(lo, hi, delta_of(x)) <= tol;
}

double EtaCell::s_lo() const noexcept { return s_of(theta_lo); }

double EtaCell::s_hi() const noexcept { return s_of(atom ? theta_lo : theta_hi); }

double EtaCell::theta_cdf(double theta) const noexcept {
  if (atom || theta_hi == theta_lo) return theta >= theta_lo ? 1.0 : 0.0;
  return std::clamp((theta - theta_lo) / (theta_hi - theta_lo), 0.0, 1.0);
}

double EtaCell::theta_cdf_left(double theta) const noexcept {
  if (atom || theta_hi == theta_lo) return theta > theta_lo ? 1.0 : 0.0;
  return theta_cdf(theta);
}

Decomposition decompose_eta(const EtaSpec& eta) {
  Decomposition d;
  double declared = 0.0;
  auto add = [&](double w, const EtaCell& c, const std::string& name) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::BadSpec, name + ": weight must be >= 0");
    c.validate();
    if (w == 0.0) {
      d.warnings.push_back(name + " has zero mass and was dropped");
      return;
    }
    EtaCell cell = c;
    if (cell.atom) {
      cell.alpha_hi = cell.alpha_lo;
      cell.theta_hi = cell.theta_lo;
    }
    d.pieces.push_back({w, cell});
  };
  for (std::size_t i = 0; i < eta.pieces.size(); ++i) {
    declared += eta.pieces[i].weight;
    add(eta.pieces[i].weight, eta.pieces[i].cell, "piece " + std::to_string(i));
  }
  if (eta.tail_rule) {
    const TailRule& t = *eta.tail_rule;
    if (!(t.ratio > 0.0 && t.ratio < 1.0)) throw Error(ErrorCode::BadSpec, "tail ratio must lie in (0, 1)");
    if (!(t.theta_factor > 0.0 && t.theta_factor <= 1.0)) {
      throw Error(ErrorCode::BadSpec, "tail theta_factor must lie in (0, 1]");
    }
    if (!(t.first_weight >= 0.0)) throw Error(ErrorCode::BadSpec, "tail first_weight must be >= 0");
    declared += t.first_weight / (1.0 - t.ratio);
    if (t.first_weight > 0.0) {
      double w = t.first_weight;
      double scale = 1.0;
      for (std::size_t n = 0;; ++n) {
        EtaCell c = t.cell;
        c.theta_lo *= scale;
        c.theta_hi *= scale;
        const double residual = w * t.ratio / (1.0 - t.ratio);
        if (residual < kTailResidual || n >= 100000) {
          add(w + residual, c, "tail piece " + std::to_string(n));
          break;
        }
        add(w, c, "tail piece " + std::to_string(n));
        w *= t.ratio;
        scale *= t.theta_factor;
      }
    }
  }
  if (std::abs(declared - 1.0) > 1e-12) {
    throw Error(ErrorCode::BadSpec, "weights sum to " + std::to_string(declared) + ", not 1");
  }
  if (d.pieces.empty()) throw Error(ErrorCode::BadSpec, "eta has no mass");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : d.pieces) {
    lo = std::min(lo, p.cell.s_lo());
    hi = std::max(hi, p.cell.s_hi());
    d.k_s_lo.push_back(lo);
    d.k_s_hi.push_back(hi);
  }
  return d;
}

BudgetFit budget_fit_check(const Decomposition& d, double b) {
  const std::size_t n = d.pieces.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return d.pieces[i].cell.s_lo() < d.pieces[j].cell.s_lo();
  });
  // Interval graph: sweeping by left end, a new interval joins the current
  // component iff it starts closer than b to the running right end.
  std::vector<std::size_t> comp(n, 0);
  std::size_t c = 0;
  double reach = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& cell = d.pieces[order[k]].cell;
    if (k > 0 && !(cell.s_lo() - reach < b)) ++c;
    comp[order[k]] = c;
    reach = k == 0 || comp[order[k]] != comp[order[k - 1]] ? cell.s_hi() : std::max(reach, cell.s_hi());
  }
  BudgetFit out;
  out.fits = c == 0;
  if (!out.fits) {
    for (std::size_t i = 0; i < n; ++i) (comp[i] == comp[0] ? out.side_a : out.side_b).push_back(i);
  }
  return out;
}

BudgetFit budget_fit_check(const EtaSpec& eta, double b) { return budget_fit_check(decompose_eta(eta), b); }

namespace {

std::vector<ChainCell> slice_cells(const Decomposition& d, double width) {
  std::vector<ChainCell> out;
  for (std::size_t i = 0; i < d.pieces.size(); ++i) {
    const EtaPiece& p = d.pieces[i];
    const double lo = p.cell.s_lo();
    const double hi = p.cell.s_hi();
    const double span = hi - lo;
    if (p.cell.atom || span <= width) {
      out.push_back({p.weight, p.cell, i});
      continue;
    }
    const auto m = static_cast<std::size_t>(std::ceil(span / width));
    const double full = p.cell.theta_hi - p.cell.theta_lo;
    double prev = p.cell.theta_lo;
    for (std::size_t j = 1; j <= m; ++j) {
      const double next = j == m ? p.cell.theta_hi : theta_of(lo + span * static_cast<double>(j) / m);
      EtaCell c = p.cell;
      c.theta_lo = prev;
      c.theta_hi = next;
      out.push_back({p.weight * (next - prev) / full, c, i});
      prev = next;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const ChainCell& a, const ChainCell& b) {
    return a.cell.s_lo() + a.cell.s_hi() < b.cell.s_lo() + b.cell.s_hi();
  });
  return out;
}

bool chain_fits(const std::vector<ChainCell>& chain, double b) {
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const double lo = std::min(chain[i].cell.s_lo(), chain[i + 1].cell.s_lo());
    const double hi = std::max(chain[i].cell.s_hi(), chain[i + 1].cell.s_hi());
    if (!(hi - lo < b)) return false;
  }
  return true;
}

// Parts after refinement, or SIZE_MAX past the refinement limit.
std::size_t refined_size(const std::vector<ChainCell>& chain) {
  std::vector<double> w;
  for (const auto& c : chain) w.push_back(c.weight);
  try {
    return refine_weights(w).weights.size();
  } catch (const Error&) {
    return std::numeric_limits<std::size_t>::max();
  }
}

}  // namespace

std::vector<ChainCell> march_chain(const Decomposition& d, double b) {
  if (!(b > 0.0)) throw Error(ErrorCode::BadSpec, "budget must be positive");
  const BudgetFit fit = budget_fit_check(d, b);
  if (!fit.fits) {
    throw UnboundedGapError(fit.side_a, fit.side_b, "eta does not fit budget " + std::to_string(b));
  }
  // Largest hole in the union of the s-intervals.
  std::vector<std::pair<double, double>> iv;
  for (const auto& p : d.pieces) iv.emplace_back(p.cell.s_lo(), p.cell.s_hi());
  std::sort(iv.begin(), iv.end());
  double hole = 0.0;
  double reach = iv.front().second;
  for (const auto& [lo, hi] : iv) {
    hole = std::max(hole, lo - reach);
    reach = std::max(reach, hi);
  }
  double width = (b - hole) / 3.0;
  for (int attempt = 0; attempt < 60; ++attempt, width *= 0.5) {
    std::vector<ChainCell> chain = slice_cells(d, width);
    if (!chain_fits(chain, b)) continue;
    // Either direction is a valid march; keep the one that refines to fewer pieces.
    std::vector<ChainCell> rev(chain.rbegin(), chain.rend());
    const std::size_t forward = refined_size(chain);
    const std::size_t backward = refined_size(rev);
    if (std::min(forward, backward) == std::numeric_limits<std::size_t>::max()) {
      throw Error(ErrorCode::BadSpec, "chain weights need more than " + std::to_string(kMaxRefinedParts) +
                                          " refined pieces in either direction");
    }
    return backward < forward ? rev : chain;
  }
  throw Error(ErrorCode::BadSpec, "could not slice cells into a chain under the budget");
}

PsiPair::PsiPair(const Decomposition& d, double r1, double r2) {
  if (!(r1 >= r2)) throw Error(ErrorCode::BadSpec, "need r1 >= r2");
  double min_theta = std::numeric_limits<double>::infinity();
  for (const auto& p : d.pieces) {
    cells_.push_back(p.cell);
    min_theta = std::min(min_theta, p.cell.theta_lo);
  }
  collar_ = 0.5 * min_theta;
  // beta = 1 on every cell, so its eta-integral is the total weight.
  const double integral = total_weight(d.pieces);
  c1_ = r1 / integral;
  c2_ = r2 / integral;
}

double PsiPair::beta(const SplittingPair& x) const noexcept {
  const double alpha = x.x1().alpha();
  const double delta = delta_of(x);
  double best = 0.0;
  for (const auto& c : cells_) {
    double lo = 0.0;
    double hi = 0.0;
    delta_range(c, lo, hi);
    const double dist = std::max(alpha_distance(c, alpha), interval_distance(lo, hi, delta));
    // Points sampled in a cell can sit outside it by rounding.
    if (dist <= 1e-12) return 1.0;
    best = std::max(best, 1.0 - dist / collar_);
  }
  return best;
}

Mat2 assemble_F(const SplittingPair& f_now, const SplittingPair& f_next, const PsiPair& psi) {
  const Mat2 phi = interp_matrix(section_rho(f_now), section_rho(f_next));
  return phi * eigen_matrix(f_now, psi.psi1(f_now), psi.psi2(f_now));
}

FlexibleRun simulate_flexible(const EtaSpec& eta, double r1, double r2, FlexibleMode mode,
                              std::int64_t steps, std::uint64_t seed) {
  if (steps < 1) throw Error(ErrorCode::BadSpec, "steps must be >= 1");
  if (!(mode.parameter > 0.0)) throw Error(ErrorCode::BadSpec, "epsilon / budget must be positive");
  const Decomposition d = decompose_eta(eta);
  const PsiPair psi(d, r1, r2);
  Rng chain_rng(derive_seed(seed, 0));
  Rng f_rng(derive_seed(seed, 1));

  FlexibleRun run;
  run.warnings = d.warnings;
  const auto n = static_cast<std::size_t>(steps);
  std::vector<SplittingPair> f;
  f.reserve(n + 1);
  std::vector<int> labels;

  if (mode.kind == FlexibleMode::Kind::Bounded) {
    const std::vector<ChainCell> chain = march_chain(d, mode.parameter);
    std::vector<double> w;
    for (const auto& c : chain) w.push_back(c.weight);
    const RefinedWeights refined = refine_weights(w);
    run.piece_weights = refined.weights;
    for (std::size_t s : refined.source) {
      run.piece_source.push_back(chain[s].source);
      run.piece_cells.push_back(chain[s].cell);
    }
    run.tower = bounded_tower_vector(refined.weights);
    const RenewalChain rc(run.tower);
    SkyscraperState state = rc.start_stationary(chain_rng);
    labels.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      const int label = label_of(state);
      const ChainCell& cell = chain[refined.source[static_cast<std::size_t>(label)]];
      f.push_back(cell.cell.sample(f_rng));
      labels.push_back(label);
      run.cell_track.push_back(cell.source);
      state = rc.step(state, chain_rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double cost = transfer_cost_bounded(f[i], f[i + 1]);
      if (!(cost < mode.parameter)) {
        throw Error(ErrorCode::BadSpec, "step " + std::to_string(i) + " has cost " + std::to_string(cost) +
                                            " >= budget " + std::to_string(mode.parameter));
      }
    }
    labels.pop_back();
  } else {
    std::vector<EtaPiece> pieces = d.pieces;
    std::vector<double> caps;
    std::vector<std::size_t> source;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      caps.push_back(d.k_s_hi[i] - d.k_s_lo[i]);
      source.push_back(i);
    }
    if (pieces.size() == 1 && caps[0] > 0.0) {
      // One tower height cannot have gcd 1 unless it is 1; use two equal halves.
      pieces[0].weight *= 0.5;
      pieces.push_back(pieces[0]);
      caps.push_back(caps[0]);
      source.push_back(0);
      run.warnings.push_back("single piece split into two equal halves");
    }
    run.caps = caps;
    run.heights = lowcost_heights(caps, mode.parameter);
    const double total = total_weight(pieces);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      run.tower.entries[run.heights[i]] = pieces[i].weight / total;
      run.piece_weights.push_back(pieces[i].weight / total);
      run.cost_bound += 2.0 * caps[i] * (pieces[i].weight / total) / static_cast<double>(run.heights[i]);
    }
    run.piece_source = source;
    for (const auto& p : pieces) run.piece_cells.push_back(p.cell);
    const RenewalChain rc(run.tower);
    SkyscraperState state = rc.start_stationary(chain_rng);
    auto piece_of = [&](std::int64_t h) {
      return static_cast<std::size_t>(std::find(run.heights.begin(), run.heights.end(), h) - run.heights.begin());
    };
    std::size_t piece = piece_of(state.height);
    SplittingPair current = pieces[piece].cell.sample(f_rng);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i > 0 && state.level == 0) {
        piece = piece_of(state.height);
        current = pieces[piece].cell.sample(f_rng);
      }
      f.push_back(current);
      run.cell_track.push_back(source[piece]);
      state = rc.step(state, chain_rng);
    }
  }

  OrbitWindow& w = run.window;
  w.offset = 0;
  w.seed = seed;
  w.factors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) w.factors.push_back(Factor::from_matrix(assemble_F(f[i], f[i + 1], psi)));
  f.pop_back();
  run.cell_track.pop_back();
  w.prescribed_f = std::move(f);
  w.labels = std::move(labels);
  return run;
}

ConstructionReport verify_flexible(const OrbitWindow& window, const EtaSpec& eta, double r1, double r2) {
  if (!(r1 > r2)) throw Error(ErrorCode::BadSpec, "verification needs r1 > r2");
  if (window.prescribed_f.size() != window.factors.size()) {
    throw Error(ErrorCode::BadSpec, "window carries no prescribed splitting");
  }
  const Decomposition d = decompose_eta(eta);
  const PsiPair psi(d, r1, r2);
  ConstructionReport rep;
  const std::size_t n = window.factors.size();
  rep.depth = static_cast<std::int64_t>(std::ceil(20.0 / (r1 - r2))) * 10;
  if (n < static_cast<std::size_t>(2 * rep.depth + 1)) {
    throw Error(ErrorCode::NoData, "window shorter than 2 * depth + 1");
  }
  const LyapunovEstimate lam = lyapunov_estimates(window);
  rep.lambda1 = lam.lambda1;
  rep.lambda2 = lam.lambda2;
  rep.steps = n;

  const auto& f = window.prescribed_f;
  const double total = total_weight(d.pieces);
  rep.cell_frequencies.assign(d.pieces.size(), 0.0);
  for (const auto& p : d.pieces) rep.cell_weights.push_back(p.weight / total);
  std::vector<double> thetas;
  thetas.reserve(n);
  std::vector<double> psi1_vals;
  std::vector<double> psi2_vals;
  psi1_vals.reserve(n);
  psi2_vals.reserve(n);
  for (const auto& x : f) {
    std::size_t k = 0;
    while (k < d.pieces.size() && !d.pieces[k].cell.contains(x)) ++k;
    if (k < d.pieces.size()) {
      rep.cell_frequencies[k] += 1.0;
    } else {
      ++rep.unclassified;
    }
    thetas.push_back(x.gap());
    psi1_vals.push_back(psi.psi1(x));
    psi2_vals.push_back(psi.psi2(x));
  }
  double tv = static_cast<double>(rep.unclassified) / static_cast<double>(n);
  for (std::size_t k = 0; k < d.pieces.size(); ++k) {
    rep.cell_frequencies[k] /= static_cast<double>(n);
    tv += std::abs(rep.cell_frequencies[k] - rep.cell_weights[k]);
  }
  rep.cell_tv = 0.5 * tv;

  // KS against the theta marginal; ties are grouped so atoms are handled.
  auto cdf = [&](double t, bool left) {
    double s = 0.0;
    for (std::size_t k = 0; k < d.pieces.size(); ++k) {
      const auto& c = d.pieces[k].cell;
      s += rep.cell_weights[k] * (left ? c.theta_cdf_left(t) : c.theta_cdf(t));
    }
    return s;
  };
  // Gap angles recomputed from lines differ from an atom's angle in the last bits.
  for (double& t : thetas) {
    for (const auto& p : d.pieces) {
      if (p.cell.atom && std::abs(t - p.cell.theta_lo) <= 1e-9) t = p.cell.theta_lo;
    }
  }
  std::sort(thetas.begin(), thetas.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && thetas[j] == thetas[i]) ++j;
    rep.theta_ks = std::max({rep.theta_ks, std::abs(cdf(thetas[i], true) - static_cast<double>(i) / n),
                             std::abs(cdf(thetas[i], false) - static_cast<double>(j) / n)});
    i = j;
  }

  std::vector<double> costs;
  std::vector<double> norms;
  costs.reserve(n);
  norms.reserve(n);
  rep.min_drift_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Mat2 g = window.factors[i].matrix();
    norms.push_back(log_norm_max(window.factors[i]));
    rep.min_drift_slack = std::min(rep.min_drift_slack, angle_drift_gap(g, f[i].x1(), f[i].x2()).slack());
    if (i + 1 < n) {
      const double c = transfer_cost_bounded(f[i], f[i + 1]);
      costs.push_back(c);
      rep.max_step_cost = std::max(rep.max_step_cost, c);
      rep.max_invariance_error =
          std::max({rep.max_invariance_error, line_angle(projective_action(g, f[i].x1()), f[i + 1].x1()),
                    line_angle(projective_action(g, f[i].x2()), f[i + 1].x2())});
    }
  }
  rep.mean_step_cost = batch_mean(costs);
  rep.mean_log_norm = batch_mean(norms);
  rep.birkhoff_psi1 = batch_mean(psi1_vals);
  rep.birkhoff_psi2 = batch_mean(psi2_vals);

  for (std::size_t i = 1; i < window.labels.size(); ++i) {
    rep.max_label_jump = std::max(rep.max_label_jump, std::abs(window.labels[i] - window.labels[i - 1]));
  }

  constexpr std::size_t kTimes = 100;
  const auto interior = static_cast<std::int64_t>(n) - 2 * rep.depth;
  std::size_t agree = 0;
  for (std::size_t k = 0; k < kTimes; ++k) {
    const std::int64_t t = window.begin() + rep.depth + static_cast<std::int64_t>(k) * interior / kTimes;
    const auto& x = f[static_cast<std::size_t>(t - window.begin())];
    const double e1 = line_angle(estimate_E1_backward(window, rep.depth, t), x.x1());
    const double e2 = line_angle(estimate_E2_forward(window, rep.depth, t), x.x2());
    rep.max_agreement_error = std::max({rep.max_agreement_error, e1, e2});
    if (e1 < 1e-3 && e2 < 1e-3) ++agree;
  }
  rep.agreement_samples = kTimes;
  rep.agreement_fraction = static_cast<double>(agree) / kTimes;
  return rep;
}

}  // namespace osl
