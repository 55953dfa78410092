#include "osl/skyscraper.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "osl/errors.hpp"

namespace osl {

void TowerVector::validate() const {
  if (entries.empty()) throw Error(ErrorCode::BadTowerVector, "empty tower vector");
  double total = 0.0;
  std::int64_t g = 0;
  for (const auto& [k, p] : entries) {
    if (k < 1) throw Error(ErrorCode::BadTowerVector, "tower heights must be >= 1");
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::BadTowerVector, "negative tower mass");
    total += p;
    if (p > 0.0) g = std::gcd(g, k);
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::BadTowerVector, "tower masses sum to " + std::to_string(total));
  }
  if (g != 1) throw Error(ErrorCode::BadTowerVector, "gcd of tower heights is " + std::to_string(g));
}

std::map<std::int64_t, double> kac_base_measures(const TowerVector& pi) {
  pi.validate();
  std::map<std::int64_t, double> out;
  for (const auto& [k, p] : pi.entries) out[k] = p / static_cast<double>(k);
  return out;
}

double kac_identity_sum(const std::map<std::int64_t, double>& base_measures) {
  double s = 0.0;
  for (const auto& [k, m] : base_measures) s += static_cast<double>(k) * m;
  return s;
}

RenewalChain::RenewalChain(const TowerVector& pi) {
  pi.validate();
  std::vector<double> stationary;
  std::vector<double> ret;
  for (const auto& [k, p] : pi.entries) {
    if (p == 0.0) continue;
    heights_.push_back(k);
    stationary.push_back(p);
    ret.push_back(p / static_cast<double>(k));
  }
  const double base = std::accumulate(ret.begin(), ret.end(), 0.0);
  for (double& r : ret) r /= base;
  stationary_cdf_ = cumulative(stationary);
  return_cdf_ = cumulative(ret);
}

SkyscraperState RenewalChain::start_stationary(Rng& rng) const {
  const std::int64_t k = heights_[index_from_cdf(stationary_cdf_, u01(rng))];
  const auto level = static_cast<std::int64_t>(u01(rng) * static_cast<double>(k));
  return {k, std::min(level, k - 1)};
}

SkyscraperState RenewalChain::step(SkyscraperState s, Rng& rng) const {
  if (s.level + 1 < s.height) return {s.height, s.level + 1};
  return {heights_[index_from_cdf(return_cdf_, u01(rng))], 0};
}

SkyscraperState renewal_start_stationary(const TowerVector& pi, std::uint64_t seed) {
  Rng rng(seed);
  return RenewalChain(pi).start_stationary(rng);
}

SkyscraperState renewal_step(SkyscraperState s, const TowerVector& pi, Rng& rng) {
  return RenewalChain(pi).step(s, rng);
}

int label_of(SkyscraperState s) {
  const bool allowed = s.height == 1 || (s.height >= 4 && s.height % 2 == 0);
  if (!allowed) {
    throw Error(ErrorCode::BadHeightForLabels, "height " + std::to_string(s.height) + " not in {1, 4, 6, ...}");
  }
  if (s.level < 0 || s.level >= s.height) throw Error(ErrorCode::BadSpec, "level outside the tower");
  return static_cast<int>(std::min(s.level, s.height - 1 - s.level));
}

TowerVector bounded_tower_vector(const std::vector<double>& p) {
  if (p.empty()) throw Error(ErrorCode::BadTowerVector, "empty p sequence");
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (!(p[n] > 0.0)) throw Error(ErrorCode::NeedStrictDecrease, "p must be positive");
    if (n > 0 && !(p[n] < p[n - 1])) {
      throw Error(ErrorCode::NeedStrictDecrease, "p is not strictly decreasing at index " + std::to_string(n));
    }
  }
  auto at = [&](std::size_t n) { return n < p.size() ? p[n] : 0.0; };
  TowerVector pi;
  pi.entries[1] = at(0) - at(1);
  for (std::size_t n = 1; n < p.size(); ++n) {
    pi.entries[static_cast<std::int64_t>(2 * n + 2)] = static_cast<double>(n + 1) * (at(n) - at(n + 1));
  }
  pi.validate();
  return pi;
}

std::vector<double> label_measures(const std::vector<double>& p) {
  const TowerVector pi = bounded_tower_vector(p);
  std::vector<double> mu(p.size(), 0.0);
  for (const auto& [k, mass] : pi.entries) {
    const double per_level = mass / static_cast<double>(k);
    for (std::int64_t i = 0; i < k; ++i) mu[static_cast<std::size_t>(label_of({k, i}))] += per_level;
  }
  return mu;
}

RefinedWeights refine_weights(const std::vector<double>& p, std::size_t max_parts) {
  RefinedWeights out;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double w = p[n];
    if (!(w > 0.0)) throw Error(ErrorCode::BadSpec, "weights must be positive");
    if (w < prev) {
      if (out.weights.size() >= max_parts) {
        throw Error(ErrorCode::BadSpec, "refinement needs more than " + std::to_string(max_parts) + " parts");
      }
      out.weights.push_back(w);
      out.source.push_back(n);
      prev = w;
      continue;
    }
    const double k = std::floor(w / prev) + 1.0;
    if (static_cast<double>(out.weights.size()) + k > static_cast<double>(max_parts)) {
      throw Error(ErrorCode::BadSpec, "refinement needs more than " + std::to_string(max_parts) + " parts");
    }
    const double mid = w / k;
    // Spread d keeps the first part below prev and the last above mid / 2.
    const double d = 0.5 * std::min(prev - mid, mid) / (k - 1.0);
    const auto parts = static_cast<std::size_t>(k);
    double used = 0.0;
    for (std::size_t i = 1; i <= parts; ++i) {
      const double x = i == parts ? w - used : mid + d * (0.5 * (k + 1.0) - static_cast<double>(i));
      used += x;
      out.weights.push_back(x);
      out.source.push_back(n);
    }
    prev = out.weights.back();
  }
  return out;
}

std::vector<std::int64_t> lowcost_heights(const std::vector<double>& caps, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::BadSpec, "epsilon must be positive");
  std::vector<std::int64_t> k;
  std::int64_t prev = 0;
  for (double c : caps) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::BadSpec, "cost caps must be finite and >= 0");
    const auto need = static_cast<std::int64_t>(std::floor(2.0 * c / epsilon)) + 1;
    prev = std::max(prev + 1, need);
    k.push_back(prev);
  }
  if (k.empty()) throw Error(ErrorCode::BadSpec, "no pieces");
  if (k.size() == 1 && k[0] > 1) {
    throw Error(ErrorCode::BadSpec, "a single piece needing height > 1 must be split first");
  }
  auto gcd_all = [&] {
    std::int64_t g = 0;
    for (auto h : k) g = std::gcd(g, h);
    return g;
  };
  while (gcd_all() != 1) ++k.back();
  return k;
}

}  // namespace osl
