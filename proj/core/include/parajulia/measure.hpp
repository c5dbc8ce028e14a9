#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/fixed_points.hpp"
#include "parajulia/rational_map.hpp"
#include "parajulia/sampler.hpp"

namespace parajulia {

struct ZoomEntry {
    long n = 0;  ///< return time n_j
    double r = 1.0;  ///< |(T^n_j)'(xi)|^-1
    /// Index into ZoomSequence::parabolic of the point visited between this
    /// return and the next one (for the last entry of a terminating zoom: the
    /// point the orbit lands on). -1 when consecutive returns are adjacent.
    int omega = -1;
    /// The passage visited more than one neighbourhood; omega has the longest dwell.
    bool mixed = false;
};

struct ZoomSequence {
    Complex xi;
    std::vector<ZoomEntry> entries;  ///< r strictly decreasing
    std::vector<ParabolicPoint> parabolic;
    bool terminating = false;
    std::size_t mixed_blocks = 0;

    [[nodiscard]] int p_max() const;
};

/// Returns of the forward orbit of xi: iterates outside every B(omega,
/// return_radius) whose radius |(T^k)'(xi)|^-1 is below that of the previous
/// recorded return. return_radius = 0 picks twice the largest working radius;
/// otherwise it must exceed every r_omega. The zoom is terminating when the
/// orbit after the last return lands within 1e-9 of a parabolic point and
/// stays in its neighbourhood. The orbit is cut at the first return with r_j
/// below 1e-13, past which a computed orbit no longer follows a true one.
///
/// Throws OrbitEscaped when a polynomial orbit passes the escape radius (or a
/// rational orbit hits a pole), NoReturns when no iterate is a return and the
/// orbit does not settle on a parabolic point.
ZoomSequence hyperbolic_zoom(const RationalMap& map, Complex xi, int depth, double return_radius = 0.0);
/// Same with the parabolic points supplied (from parabolic_points_iterated).
ZoomSequence hyperbolic_zoom(const RationalMap& map, std::span<const ParabolicPoint> parabolic, Complex xi, int depth,
                             double return_radius = 0.0);

/// Zoom from explicit radii. petals[j] is the petal number of the passage
/// between radii[j] and radii[j + 1] (0 for none); a terminating zoom has one
/// more petal, for the tail below the last radius.
ZoomSequence synthetic_zoom(std::span<const double> radii, std::span<const int> petals, bool terminating);

/// CSV `j,n_j,r_j,omega_re,omega_im`; the omega fields are empty for entries
/// without a parabolic passage.
void write_zoom_csv(std::ostream& out, const ZoomSequence& zoom);

enum class PhiCase { RadialOuter, RadialInner, PreParabolicTail };
std::string_view to_string(PhiCase c);

struct PhiEvaluation {
    double value = 1.0;
    double log_value = 0.0;
    PhiCase case_tag = PhiCase::RadialOuter;
    int j_used = 0;
    double r_m = 0.0;
    std::optional<Complex> omega_used;
    int petal = 0;
};

/// Case threshold r_m = r_j (r_next/r_j)^(1/(1+p)).
double phi_threshold(double r_j, double r_next, int p);
/// (r/r_j)^((h-1)p), the branch above the threshold.
double phi_outer(double r, double r_j, int p, double h);
/// (r_next/r)^(h-1), the branch at or below the threshold.
double phi_inner(double r, double r_next, double h);

/// phi(xi, r) on the block r_{j+1} <= r < r_j (r = r_0 belongs to block 0):
/// (r/r_j)^((h-1)p) above r_m = r_j (r_{j+1}/r_j)^(1/(1+p)), (r_{j+1}/r)^(h-1)
/// at or below it; blocks without a passage use p = 0. Below the last radius
/// of a terminating zoom the tail (r/r_l)^((h-1)p) applies.
///
/// Throws OutOfRange outside the zoom's coverage and InvalidH unless
/// p_max/(1+p_max) < h <= 2.
PhiEvaluation phi(const ZoomSequence& zoom, double r, double h);

/// log(r^h phi(xi, r)). Only differences of these values are meaningful: the
/// ball measure is known up to a bounded factor.
double log_measure_ball(const ZoomSequence& zoom, double r, double h);
/// exp(log_measure_ball); underflows to 0 for very small balls.
double measure_ball(const ZoomSequence& zoom, double r, double h);

/// Weighted sample of the h-conformal measure: the preimages y of
/// julia_start_point under T^depth with weights |(T^depth)'(y)|^-h,
/// normalized to sum 1. The backward tree is enumerated in full down to the
/// deepest level with at most `count` nodes; below that each node continues
/// along one random path (seeded per node) choosing branch y with probability
/// |T'(y)|^-h / S, S the sum over branches, and its weight is multiplied by
/// S at every step, which keeps the estimate unbiased.
///
/// Throws UnboundedJulia when a preimage passes modulus 1e6.
PointCloud empirical_measure(const RationalMap& map, double h, std::uint64_t seed, std::size_t depth, std::size_t count);

} // namespace parajulia
