#pragma once

// Seeded randomness. Every stream is a std::mt19937_64 whose seed is
// derived from a master seed and a stream index by a counter hash, so
// replicas are reproducible independently of scheduling.

#include <cstdint>
#include <random>
#include <vector>

namespace osl {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of stream `stream` under `master`: splitmix64(master ^ splitmix64(stream + 1)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

// Uniform on [0, 1) with 53 random bits; one engine call per draw.
inline double u01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index i with cdf[i-1] <= u < cdf[i]; cdf is cumulative and ends at ~1.
std::size_t index_from_cdf(const std::vector<double>& cdf, double u) noexcept;

std::vector<double> cumulative(const std::vector<double>& weights);

}  // namespace osl
