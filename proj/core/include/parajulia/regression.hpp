#pragma once

#include <cstddef>
#include <span>

namespace parajulia {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< root mean square of y - (slope x + intercept)
    std::size_t n = 0;
};

/// Unweighted least squares y = slope x + intercept.
/// Throws Error(DegenerateFit) with fewer than 2 points or constant x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace parajulia
