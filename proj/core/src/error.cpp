#include "parajulia/error.hpp"

namespace parajulia {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::PoleHit: return "PoleHit";
    case ErrorCode::RootFindFailure: return "RootFindFailure";
    case ErrorCode::DegenerateConjugation: return "DegenerateConjugation";
    case ErrorCode::InvalidMap: return "InvalidMap";
    case ErrorCode::NotParabolic: return "NotParabolic";
    case ErrorCode::DegenerateExpansion: return "DegenerateExpansion";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::NonHyperbolicStall: return "NonHyperbolicStall";
    case ErrorCode::ExplosionGuard: return "ExplosionGuard";
    case ErrorCode::EmptySum: return "EmptySum";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::OrbitEscaped: return "OrbitEscaped";
    case ErrorCode::NoReturns: return "NoReturns";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ScaleTooFine: return "ScaleTooFine";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::InvalidH: return "InvalidH";
    case ErrorCode::RationalAlpha: return "RationalAlpha";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnboundedJulia: return "UnboundedJulia";
    }
    return "Unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& message, long index) {
    std::string out(to_string(code));
    out += ": ";
    out += message;
    if (index >= 0) {
        out += " (at index " + std::to_string(index) + ")";
    }
    return out;
}
} // namespace

Error::Error(ErrorCode code, const std::string& message, long index)
    : std::runtime_error(decorate(code, message, index)), code_(code), index_(index) {}

} // namespace parajulia
