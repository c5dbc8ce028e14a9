#include "parajulia/canonical_balls.hpp"

#include <cmath>

#include "parajulia/error.hpp"

namespace parajulia {

std::vector<CanonicalBall> canonical_balls(const RationalMap& map, const ParabolicPoint& pp, int max_generation,
                                           const CanonicalOptions& options) {
    if (!(options.min_radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "min_radius must be positive");
    }
    std::vector<CanonicalBall> out;
    for (const Root& r : map.preimages(pp.omega)) {
        if (std::abs(r.z - pp.omega) > 1e-6 * (1.0 + std::abs(pp.omega))) {
            out.push_back({r.z, 1.0, 0, pp.omega});
        }
    }
    std::size_t begin = 0;
    for (int g = 1; g <= max_generation; ++g) {
        const std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i) {
            const CanonicalBall parent = out[i];
            for (const Complex& y : map.preimage_roots(parent.center)) {
                const double d = std::abs(map.derivative(y));
                if (d == 0.0) continue;
                const double radius = parent.radius / d;
                if (radius < options.min_radius) continue;
                if (out.size() >= options.node_budget) {
                    throw Error(ErrorCode::ExplosionGuard,
                                "canonical-ball enumeration exceeded " + std::to_string(options.node_budget) + " nodes",
                                g);
                }
                out.push_back({y, radius, g, pp.omega});
            }
        }
        begin = end;
        if (begin == out.size()) break;
    }
    return out;
}

} // namespace parajulia
