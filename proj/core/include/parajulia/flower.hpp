#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/fixed_points.hpp"

namespace parajulia {

/// Distance from the offset w (relative to omega) to the nearest ray t*u, t >= 0.
double distance_to_rays(Complex w, std::span<const Complex> directions);

struct FlowerSample {
    double r = 0.0;
    double max_deviation = 0.0;
    std::size_t count = 0;  ///< cloud points in the closed ball B(omega, r)
};

struct FlowerReport {
    std::vector<FlowerSample> samples;
    /// log-log slope of max_deviation against r; empty when fewer than two
    /// radii have a positive deviation.
    std::optional<double> slope;
    double residual = 0.0;
};

/// Max distance to the repelling rays over cloud points in B(omega, r) for each r.
/// Radii must be decreasing and below r_omega. Throws InsufficientPoints when
/// the smallest ball holds fewer than min_points cloud points.
FlowerReport flower_deviation(std::span<const Complex> cloud, const ParabolicPoint& pp, std::span<const double> radii,
                              std::size_t min_points = 50);

} // namespace parajulia
