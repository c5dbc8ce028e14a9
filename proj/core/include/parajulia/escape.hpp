#pragma once

#include <cstddef>

#include "parajulia/complex.hpp"
#include "parajulia/rational_map.hpp"
#include "parajulia/sampler.hpp"

namespace parajulia {

/// Radius beyond which the orbit of a polynomial at least doubles in modulus
/// each step, and never below 2.5 max(1, coefficient scale).
double default_bailout(const RationalMap& polynomial_map);

/// True iff the orbit of z stays below `bailout` for max_iter steps, a proxy
/// for the filled Julia set. Requires a polynomial map and
/// bailout > 2 max(1, coefficient scale).
bool escape_membership(const RationalMap& map, Complex z, std::size_t max_iter, double bailout);

/// Bisects the segment between a non-escaping and an escaping point down to
/// length tol and returns the midpoint of the final bracket.
Complex bisect_boundary(const RationalMap& map, Complex inside, Complex outside, double tol, std::size_t max_iter,
                        double bailout);

/// True when both escaping and non-escaping points occur among z and
/// `samples` points on each of the circles |w - z| = radius and radius / 2.
bool near_escape_boundary(const RationalMap& map, Complex z, double radius, std::size_t max_iter, double bailout,
                          int samples = 16);

struct BoundaryScanOptions {
    Complex center = 0.0;
    double half_width = 2.0;
    std::size_t grid = 256;
    double tol = 1e-9;
    std::size_t max_iter = 1000;
    double bailout = 0.0;  ///< 0 selects default_bailout
};

/// Julia boundary points found by bisecting every grid edge whose endpoints
/// differ in escape membership.
PointCloud escape_boundary_scan(const RationalMap& map, const BoundaryScanOptions& options = {});

} // namespace parajulia
