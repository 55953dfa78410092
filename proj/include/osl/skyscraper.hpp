#pragma once

// Skyscrapers over a stationary renewal chain: tower vectors, Kac's
// identity, the label process and height selection.

#include <cstdint>
#include <map>
#include <vector>

#include "osl/rng.hpp"

namespace osl {

struct TowerVector {
  std::map<std::int64_t, double> entries;  // height k -> pi_k

  // Throws BadTowerVector unless entries are nonnegative, heights >= 1, the
  // sum is 1 within 1e-12 and the positive support has gcd 1.
  void validate() const;
};

// k -> mu(B_k) = pi_k / k. Throws BadTowerVector.
std::map<std::int64_t, double> kac_base_measures(const TowerVector& pi);
// sum_k k mu(B_k); equals 1 for a valid vector.
double kac_identity_sum(const std::map<std::int64_t, double>& base_measures);

struct SkyscraperState {
  std::int64_t height = 1;
  std::int64_t level = 0;
  friend bool operator==(const SkyscraperState&, const SkyscraperState&) = default;
};

// The renewal chain realizing the skyscraper: climb the current tower, and
// at its top draw the next height with probability proportional to pi_k / k.
class RenewalChain {
 public:
  explicit RenewalChain(const TowerVector& pi);

  // Height with probability pi_k, level uniform; two uniforms.
  SkyscraperState start_stationary(Rng& rng) const;
  // One uniform at tower tops, none otherwise.
  SkyscraperState step(SkyscraperState s, Rng& rng) const;

  const std::vector<std::int64_t>& heights() const noexcept { return heights_; }

 private:
  std::vector<std::int64_t> heights_;
  std::vector<double> stationary_cdf_;
  std::vector<double> return_cdf_;
};

SkyscraperState renewal_start_stationary(const TowerVector& pi, std::uint64_t seed);
SkyscraperState renewal_step(SkyscraperState s, const TowerVector& pi, Rng& rng);

// min(i, k - 1 - i) for heights in {1, 4, 6, 8, ...}. Throws BadHeightForLabels.
int label_of(SkyscraperState s);

// pi_1 = p_0 - p_1, pi_{2n+2} = (n+1)(p_n - p_{n+1}) with p_N = 0 past the
// end. Throws NeedStrictDecrease or BadTowerVector.
TowerVector bounded_tower_vector(const std::vector<double>& p);
// mu(L_n) by summing label occupancy tower by tower.
std::vector<double> label_measures(const std::vector<double>& p);

struct RefinedWeights {
  std::vector<double> weights;
  std::vector<std::size_t> source;  // refined index -> input index
};

// Splits each weight into the fewest parts that keep the flattened sequence
// strictly decreasing. Parts form a short arithmetic progression strictly
// below the previous output and summing to the original weight. Throws
// BadSpec once more than max_parts parts would be needed.
inline constexpr std::size_t kMaxRefinedParts = 1000000;
RefinedWeights refine_weights(const std::vector<double>& p, std::size_t max_parts = kMaxRefinedParts);

// k_n = max(k_{n-1} + 1, floor(2 C_n / epsilon) + 1), last height bumped
// until the gcd is 1. Throws BadSpec for a single piece needing k > 1.
std::vector<std::int64_t> lowcost_heights(const std::vector<double>& caps, double epsilon);

}  // namespace osl
