#include "parajulia/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parajulia/error.hpp"
#include "parajulia/fixed_points.hpp"
#include "parajulia/parallel.hpp"
#include "parajulia/random.hpp"

namespace parajulia {

std::string_view to_string(Provenance p) {
    switch (p) {
    case Provenance::InverseIteration: return "InverseIteration";
    case Provenance::EscapeBoundary: return "EscapeBoundary";
    case Provenance::Synthetic: return "Synthetic";
    }
    return "Synthetic";
}

Complex julia_start_point(const RationalMap& map) {
    const auto fixed = find_fixed_points(map);
    for (const auto& fp : fixed) {
        if (fp.classification.kind == FixedPointClass::Repelling) return fp.location;
    }
    for (const auto& fp : fixed) {
        if (fp.classification.kind == FixedPointClass::RationallyIndifferent) {
            for (const Complex& y : map.preimage_roots(fp.location)) {
                if (std::abs(y - fp.location) > 1e-6 * (1.0 + std::abs(fp.location))) return y;
            }
        }
    }
    const RationalMap second = iterate(map, 2);
    for (const auto& fp : find_fixed_points(second)) {
        if (fp.classification.kind == FixedPointClass::Repelling) return fp.location;
    }
    throw Error(ErrorCode::InvalidMap, "no repelling or parabolic point found to start from");
}

namespace {

std::size_t pick_branch(const RationalMap& map, const std::vector<Complex>& branches, const SamplerOptions& options,
                        Rng& rng, std::vector<double>& scratch) {
    if (options.weighting == BranchWeighting::Uniform) {
        return rng.index(branches.size());
    }
    scratch.resize(branches.size());
    double total = 0.0;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const double d = std::abs(map.derivative(branches[i]));
        const double w = d > 0.0 ? std::min(std::pow(d, -options.h), 1e300) : 1e300;
        scratch[i] = w;
        total += w;
    }
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        u -= scratch[i];
        if (u < 0.0) return i;
    }
    return branches.size() - 1;
}

} // namespace

PointCloud inverse_orbit_sample(const RationalMap& map, std::uint64_t seed, std::size_t depth, std::size_t count,
                                const SamplerOptions& options) {
    if (depth < 20) {
        throw Error(ErrorCode::InvalidArgument, "depth must be at least 20");
    }
    if (count < 1) {
        throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
    }
    const Complex start = julia_start_point(map);
    const std::size_t chains = std::max<std::size_t>(1, std::min(options.chains, count));
    PointCloud cloud;
    cloud.points.resize(count);
    cloud.provenance = Provenance::InverseIteration;
    cloud.seed = seed;

    parallel_for(chains, [&](std::size_t c) {
        const std::size_t lo = count * c / chains;
        const std::size_t hi = count * (c + 1) / chains;
        Rng rng(stream_seed(seed, c));
        std::vector<double> scratch;
        Complex z = start;
        std::size_t still = 0;
        for (std::size_t step = 0; step < depth + (hi - lo); ++step) {
            const std::vector<Complex> branches = map.preimage_roots(z);
            const Complex next = branches[pick_branch(map, branches, options, rng, scratch)];
            still = std::abs(next - z) < options.stall_tol * (1.0 + std::abs(z)) ? still + 1 : 0;
            z = next;
            if (still >= options.stall_window) {
                throw Error(ErrorCode::NonHyperbolicStall,
                            "chain " + std::to_string(c) + " stuck at " + format_complex(z),
                            static_cast<long>(step));
            }
            if (!(std::abs(z) <= options.modulus_bound)) {
                throw Error(ErrorCode::UnboundedJulia, "sample " + format_complex(z) + " exceeds the modulus bound",
                            static_cast<long>(step));
            }
            if (step >= depth) cloud.points[lo + step - depth] = z;
        }
    });
    return cloud;
}

BoundedMap bounded_normalization(const RationalMap& map, std::uint64_t seed, double bound) {
    SamplerOptions probe_options;
    probe_options.modulus_bound = std::numeric_limits<double>::infinity();
    const PointCloud probe = inverse_orbit_sample(map, seed, 40, 4096, probe_options);
    double largest = 0.0;
    for (const auto& z : probe.points) largest = std::max(largest, std::abs(z));
    if (largest <= bound) {
        return {map, Mobius::identity(), false};
    }
    // an attracting fixed point is always in the Fatou set
    for (const auto& fp : find_fixed_points(map)) {
        if (fp.classification.kind == FixedPointClass::Attracting) {
            const Mobius m = Mobius::inversion(fp.location);
            return {conjugate(map, m), m, true};
        }
    }
    // otherwise the grid point farthest from the probe cloud, over a box
    // around the cloud's bulk
    std::vector<double> moduli;
    for (const auto& z : probe.points) moduli.push_back(std::abs(z));
    std::nth_element(moduli.begin(), moduli.begin() + moduli.size() / 2, moduli.end());
    const double half = 2.0 * std::max(1.0, moduli[moduli.size() / 2]);
    Complex best = 0.0;
    double best_gap = -1.0;
    constexpr int grid = 33;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const Complex g(-half + 2.0 * half * i / (grid - 1), -half + 2.0 * half * j / (grid - 1));
            double gap = std::numeric_limits<double>::infinity();
            for (const auto& z : probe.points) gap = std::min(gap, std::abs(z - g));
            if (gap > best_gap) {
                best_gap = gap;
                best = g;
            }
        }
    }
    const Mobius m = Mobius::inversion(best);
    return {conjugate(map, m), m, true};
}

} // namespace parajulia
