#include "osl/errors.hpp"

namespace osl {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::DegenerateSplitting: return "DegenerateSplitting";
    case ErrorCode::IllConditionedPair: return "IllConditionedPair";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::InvalidGauge: return "InvalidGauge";
    case ErrorCode::WindowExhausted: return "WindowExhausted";
    case ErrorCode::SeriesDiverging: return "SeriesDiverging";
    case ErrorCode::NoData: return "NoData";
    case ErrorCode::BadTerm: return "BadTerm";
    case ErrorCode::NeedMoreSamples: return "NeedMoreSamples";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::NonNegativeDrift: return "NonNegativeDrift";
    case ErrorCode::BadTowerVector: return "BadTowerVector";
    case ErrorCode::BadHeightForLabels: return "BadHeightForLabels";
    case ErrorCode::NeedStrictDecrease: return "NeedStrictDecrease";
    case ErrorCode::UnboundedGap: return "UnboundedGap";
    case ErrorCode::BadDistribution: return "BadDistribution";
    case ErrorCode::BadSpec: return "BadSpec";
  }
  return "Unknown";
}

}  // namespace osl
