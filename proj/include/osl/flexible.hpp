#pragma once

// Cocycles with prescribed Oseledets data: decomposition of eta into cells,
// budget fitting, travel schedules over skyscrapers and verification.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osl/cocycle.hpp"
#include "osl/geometry.hpp"
#include "osl/rng.hpp"
#include "osl/skyscraper.hpp"
#include "osl/stats.hpp"

namespace osl {

// A rectangle in (alpha, theta) coordinates: alpha is the line angle of x1,
// theta the gap angle, and x2 = alpha + orientation * theta.
struct EtaCell {
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  double theta_lo = kPi / 2;
  double theta_hi = kPi / 2;
  int orientation = 1;
  bool atom = false;  // atom at (alpha_lo, theta_lo); uniform otherwise

  // Throws BadSpec.
  void validate() const;
  SplittingPair point(double alpha, double theta) const;
  // Two uniforms for uniform cells, none for atoms.
  SplittingPair sample(Rng& rng) const;
  bool contains(const SplittingPair& x, double tol = 1e-9) const;
  // s = log sin(theta / 2) over the cell; the bounded cost is |s - s'|.
  double s_lo() const noexcept;
  double s_hi() const noexcept;
  // Mass fraction with gap angle <= theta.
  double theta_cdf(double theta) const noexcept;
  double theta_cdf_left(double theta) const noexcept;
};

// Pieces n = 0, 1, ... with weight first_weight * ratio^n and the template
// cell's theta range scaled by theta_factor^n.
struct TailRule {
  double first_weight = 0.0;
  double ratio = 0.5;
  EtaCell cell;
  double theta_factor = 1.0;
};

struct EtaPiece {
  double weight = 0.0;
  EtaCell cell;
};

struct EtaSpec {
  std::vector<EtaPiece> pieces;
  std::optional<TailRule> tail_rule;
};

inline constexpr double kTailResidual = 1e-12;

struct Decomposition {
  std::vector<EtaPiece> pieces;
  // s-range of K_n, the union of the first n + 1 cells.
  std::vector<double> k_s_lo;
  std::vector<double> k_s_hi;
  std::vector<std::string> warnings;
};

// Explicit pieces in order, then the tail truncated once its residual mass
// is below kTailResidual (the residual joins the last tail piece). Zero-mass
// pieces are dropped with a warning. Throws BadSpec.
Decomposition decompose_eta(const EtaSpec& eta);

struct BudgetFit {
  bool fits = true;
  std::vector<std::size_t> side_a;  // piece indices, empty when fits
  std::vector<std::size_t> side_b;
};

// Cell graph with an edge when the s-intervals are closer than b; fits iff
// connected. The witness is the component of piece 0 against the rest.
BudgetFit budget_fit_check(const Decomposition& d, double b);
BudgetFit budget_fit_check(const EtaSpec& eta, double b);

struct ChainCell {
  double weight = 0.0;
  EtaCell cell;
  std::size_t source = 0;  // piece index in the decomposition
};

// Sub-cells cut along s, ordered so that every consecutive union has
// s-span below b. Throws UnboundedGapError when b does not fit.
std::vector<ChainCell> march_chain(const Decomposition& d, double b);

// psi_j = c_j * beta, where beta = 1 on the cells and tapers linearly to 0 in
// a collar of half the smallest theta_lo, measured in (alpha, delta) with
// delta the line angle from x1 to x2.
class PsiPair {
 public:
  PsiPair() = default;
  // Throws BadSpec unless r1 >= r2.
  PsiPair(const Decomposition& d, double r1, double r2);

  double beta(const SplittingPair& x) const noexcept;
  double psi1(const SplittingPair& x) const noexcept { return c1_ * beta(x); }
  double psi2(const SplittingPair& x) const noexcept { return c2_ * beta(x); }
  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }

 private:
  std::vector<EtaCell> cells_;
  double collar_ = 0.0;
  double c1_ = 0.0;
  double c2_ = 0.0;
};

// interp(rho(f_now), rho(f_next)) * eigen_matrix(f_now, psi1, psi2).
Mat2 assemble_F(const SplittingPair& f_now, const SplittingPair& f_next, const PsiPair& psi);

struct FlexibleMode {
  enum class Kind { LowCost, Bounded };
  Kind kind = Kind::Bounded;
  double parameter = 1.0;  // epsilon or budget b

  static FlexibleMode lowcost(double epsilon) { return {Kind::LowCost, epsilon}; }
  static FlexibleMode bounded(double b) { return {Kind::Bounded, b}; }
};

struct FlexibleRun {
  OrbitWindow window;
  TowerVector tower;
  std::vector<double> piece_weights;        // weights of the travel pieces
  std::vector<std::size_t> piece_source;    // travel piece -> decomposition piece
  std::vector<EtaCell> piece_cells;         // support of each travel piece
  std::vector<std::size_t> cell_track;      // decomposition piece of f at each step
  std::vector<double> caps;                 // lowcost: C_n
  std::vector<std::int64_t> heights;        // lowcost: k_n
  double cost_bound = 0.0;                  // lowcost: sum 2 C_n p_n / k_n
  std::vector<std::string> warnings;
};

// Throws UnboundedGapError in bounded mode when b does not fit, and Error
// (BadSpec) if a bounded-mode step ever reaches cost b.
FlexibleRun simulate_flexible(const EtaSpec& eta, double r1, double r2, FlexibleMode mode,
                              std::int64_t steps, std::uint64_t seed);

struct ConstructionReport {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t steps = 0;
  std::vector<double> cell_weights;
  std::vector<double> cell_frequencies;
  std::size_t unclassified = 0;
  double cell_tv = 0.0;
  double theta_ks = 0.0;
  double max_step_cost = 0.0;
  Estimate mean_step_cost;  // batch-means standard error
  Estimate mean_log_norm;   // log_norm_max(F)
  Estimate birkhoff_psi1;
  Estimate birkhoff_psi2;
  std::int64_t depth = 0;
  std::size_t agreement_samples = 0;
  double agreement_fraction = 0.0;
  double max_agreement_error = 0.0;
  double max_invariance_error = 0.0;
  double min_drift_slack = 0.0;
  int max_label_jump = 0;
};

// depth = ceil(20 / (r1 - r2)) * 10. Throws NoData when the window cannot
// hold 2 * depth + 1 steps.
ConstructionReport verify_flexible(const OrbitWindow& window, const EtaSpec& eta, double r1, double r2);

}  // namespace osl
