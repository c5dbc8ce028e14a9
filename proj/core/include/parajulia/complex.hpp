#pragma once

#include <complex>
#include <string>
#include <string_view>

namespace parajulia {

using Complex = std::complex<double>;

/// Parses a complex literal such as `1`, `-0.25`, `2i`, `-i`, `0.5-1.5e-3i`.
/// Whitespace is ignored and the imaginary unit may be `i` or `I`.
/// Throws Error(ParseError) on malformed input.
Complex parse_complex(std::string_view text);

/// Round-trippable `a+bi` rendering.
std::string format_complex(Complex z);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

inline bool is_finite(Complex z) noexcept {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

} // namespace parajulia
