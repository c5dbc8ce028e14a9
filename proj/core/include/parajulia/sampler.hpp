#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/mobius.hpp"
#include "parajulia/rational_map.hpp"

namespace parajulia {

enum class Provenance { InverseIteration, EscapeBoundary, Synthetic };

std::string_view to_string(Provenance p);

struct PointCloud {
    std::vector<Complex> points;
    /// Per-point weights; empty for an unweighted cloud.
    std::vector<double> weights;
    Provenance provenance = Provenance::Synthetic;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

enum class BranchWeighting { Uniform, DerivativeWeighted };

struct SamplerOptions {
    BranchWeighting weighting = BranchWeighting::Uniform;
    /// Exponent for DerivativeWeighted: branch y is chosen with probability
    /// proportional to |T'(y)|^-h.
    double h = 1.0;
    /// Independent backward orbits; each gets its own seed-split stream.
    std::size_t chains = 64;
    double modulus_bound = 1e6;
    /// A chain whose last stall_window steps all moved less than stall_tol
    /// is reported as stuck.
    std::size_t stall_window = 100;
    double stall_tol = 1e-12;
};

/// A point of J(T) to start backward orbits from: a repelling fixed point,
/// else a preimage of a parabolic point other than itself, else a repelling
/// point of period two.
Complex julia_start_point(const RationalMap& map);

/// Random backward orbits. Each chain starts at julia_start_point, discards
/// `depth` iterates (depth >= 20) and then emits consecutive iterates; the
/// chains' outputs are concatenated in chain order. Bit-identical for equal
/// inputs regardless of thread count.
/// Throws NonHyperbolicStall for a collapsed chain and UnboundedJulia when a
/// point exceeds options.modulus_bound.
PointCloud inverse_orbit_sample(const RationalMap& map, std::uint64_t seed, std::size_t depth, std::size_t count,
                                const SamplerOptions& options = {});

struct BoundedMap {
    RationalMap map;
    Mobius chart;  ///< sends the original plane to the working plane
    bool conjugated = false;
};

/// Samples a probe cloud; if a point exceeds `bound` the map is conjugated by
/// an inversion centred at a Fatou point (an attracting fixed point when one
/// exists, else the probe-box grid point farthest from the cloud).
BoundedMap bounded_normalization(const RationalMap& map, std::uint64_t seed, double bound = 1e6);

} // namespace parajulia
