#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parajulia {

// Machine-readable failure categories. The CLI prints to_string(code) so
// scripts can branch on it.
enum class ErrorCode {
    PoleHit,
    RootFindFailure,
    DegenerateConjugation,
    InvalidMap,
    NotParabolic,
    DegenerateExpansion,
    InsufficientPoints,
    NonHyperbolicStall,
    ExplosionGuard,
    EmptySum,
    NoSignChange,
    OrbitEscaped,
    NoReturns,
    OutOfRange,
    ScaleTooFine,
    DegenerateFit,
    InvalidH,
    RationalAlpha,
    InvalidArgument,
    ParseError,
    IoError,
    UnboundedJulia,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, long index = -1);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    /// Step or item index at which the failure occurred, -1 when not applicable.
    [[nodiscard]] long index() const noexcept { return index_; }

private:
    ErrorCode code_;
    long index_;
};

} // namespace parajulia
