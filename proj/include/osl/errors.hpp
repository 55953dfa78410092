#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace osl {

enum class ErrorCode {
  NotInvertible,
  DegenerateSplitting,
  IllConditionedPair,
  DegeneratePair,
  InvalidGauge,
  WindowExhausted,
  SeriesDiverging,
  NoData,
  BadTerm,
  NeedMoreSamples,
  Unsupported,
  NonNegativeDrift,
  BadTowerVector,
  BadHeightForLabels,
  NeedStrictDecrease,
  UnboundedGap,
  BadDistribution,
  BadSpec,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by Y_supremum when the prefix cannot certify the supremum.
class NeedMoreSamplesError : public Error {
 public:
  NeedMoreSamplesError(std::size_t required, const std::string& detail)
      : Error(ErrorCode::NeedMoreSamples, detail), required_(required) {}

  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t required_;
};

// Raised when an eta spec does not fit the budget. The witness is a
// bipartition of cell indices separated by cost >= budget.
class UnboundedGapError : public Error {
 public:
  UnboundedGapError(std::vector<std::size_t> side_a, std::vector<std::size_t> side_b,
                    const std::string& detail)
      : Error(ErrorCode::UnboundedGap, detail), a_(std::move(side_a)), b_(std::move(side_b)) {}

  const std::vector<std::size_t>& side_a() const noexcept { return a_; }
  const std::vector<std::size_t>& side_b() const noexcept { return b_; }

 private:
  std::vector<std::size_t> a_;
  std::vector<std::size_t> b_;
};

}  // namespace osl
