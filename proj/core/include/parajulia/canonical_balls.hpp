#pragma once

#include <cstddef>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/fixed_points.hpp"
#include "parajulia/rational_map.hpp"

namespace parajulia {

struct CanonicalBall {
    Complex center;  ///< a point of T^-n(I(omega))
    double radius = 1.0;  ///< |(T^n)'(center)|^-1
    int generation = 0;
    Complex omega;
};

struct CanonicalOptions {
    double min_radius = 1e-6;
    std::size_t node_budget = std::size_t{1} << 22;
};

/// Breadth-first backward orbits of I(omega) = T^-1(omega) \ {omega} up to
/// max_generation, pruning balls smaller than min_radius. Critical preimages
/// (zero derivative) are skipped. Throws ExplosionGuard past the node budget.
std::vector<CanonicalBall> canonical_balls(const RationalMap& map, const ParabolicPoint& pp, int max_generation,
                                           const CanonicalOptions& options = {});

} // namespace parajulia
