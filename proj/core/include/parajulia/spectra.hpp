#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/measure.hpp"
#include "parajulia/spatial_index.hpp"

namespace parajulia {

/// Occupied dyadic cells at the coarsest level with side <= r.
///
/// Cell sides lie in (r/2, r], so an r-ball meets at most 25 cells and a cell
/// holds at most 4 points that are pairwise farther than r apart. Against the
/// greedy covering number below this gives N_r/4 <= count <= 25 N_r.
/// Throws ScaleTooFine below 2 finest_cell.
std::size_t box_count(const SpatialIndex& index, double r);

/// Greedy net: visits points in input order and keeps a point when every
/// kept point is farther than `spacing`. The result indexes the input.
std::vector<std::size_t> greedy_net(std::span<const Complex> points, double spacing);

/// Covering number N_r of the cloud: size of the greedy net of spacing r.
/// The net is r-dense, so its closed r-balls cover the cloud.
std::size_t covering_number(const SpatialIndex& index, double r);
/// Packing number M_r: size of the greedy net of spacing 2r, whose r-balls
/// are disjoint. Both relations M_2r <= N_r <= M_r/2 then hold exactly.
std::size_t packing_number(const SpatialIndex& index, double r);
/// Same, restricted to the cloud points in the closed ball B(x, R).
std::size_t covering_number(const SpatialIndex& index, Complex x, double R, double r);
std::size_t packing_number(const SpatialIndex& index, Complex x, double R, double r);

struct BoxEstimate {
    double exponent = 0.0;
    double fit_residual = 0.0;
    std::vector<double> radii;
    std::vector<std::size_t> counts;
};

/// Slope of log box_count against log(1/r) over r_list (at least 4 scales).
BoxEstimate box_dimension(const SpatialIndex& index, std::span<const double> r_list);

enum class Extremum { Max, Min };
/// What to do when every S(r) is equal: throw DegenerateFit or report slope 0.
enum class ConstantCounts { Throw, Zero };

struct SpectrumOptions {
    /// Upper bound on the sampled centres; the net spacing doubles until it fits.
    std::size_t max_centers = 4096;
    /// Always used as centres (parabolic and pre-parabolic points).
    std::vector<Complex> extra_centers;
    ConstantCounts on_constant = ConstantCounts::Throw;
    /// Min-over-centres queries need r >= guard_factor * median nearest-neighbour distance.
    double guard_factor = 10.0;
    /// Length unit L of the scale coupling R = L (r/L)^theta. The default keeps
    /// R = r^theta; scaling L with the cloud makes estimates exactly
    /// similarity invariant.
    double unit_length = 1.0;
};

struct ScalePair {
    double r = 0.0;
    double R = 0.0;
};

struct SpectrumEstimate {
    double theta = 0.0;
    double exponent = 0.0;
    std::vector<ScalePair> scales_used;
    double fit_residual = 0.0;
    Complex extremal_center;
    /// Extremal count (log mass ratio for measures) per scale.
    std::vector<double> values;
};

/// Centres for the extremal counts: a greedy net in input order with spacing
/// r_min/2, doubled until at most max_centers remain, then the extra centres.
std::vector<Complex> spectrum_centers(std::span<const Complex> points, double r_min, const SpectrumOptions& options);

/// S(r) = max (or min) over centres x of the occupied cells at scale r whose
/// centre lies in B(x, R) with R = r^theta (in units of unit_length); the exponent is the least-squares slope of
/// log S(r) against log(r^(theta - 1)).
///
/// Throws InvalidArgument for theta outside (0,1) or fewer than 4 scales,
/// ScaleTooFine below the index resolution (and, for Min, below the
/// nearest-neighbour guard), DegenerateFit when all S(r) are equal.
SpectrumEstimate count_spectrum(const SpatialIndex& index, double theta, std::span<const double> r_list, Extremum kind,
                                const SpectrumOptions& options = {});
SpectrumEstimate assouad_spectrum(const SpatialIndex& index, double theta, std::span<const double> r_list,
                                  const SpectrumOptions& options = {});
SpectrumEstimate lower_spectrum(const SpatialIndex& index, double theta, std::span<const double> r_list,
                                const SpectrumOptions& options = {});

struct DimensionEstimate {
    double exponent = 0.0;
    double base_R = 0.0;  ///< base scale of the extremal ladder
    double fit_residual = 0.0;
    std::vector<double> ladder_slopes;  ///< one per base scale
};

/// Ratio ladder R/r in {2^4, ..., 2^10}: for each base R the slope of
/// log max_x (or min_x) N_{R/rho}(B(x, R)) against log rho; the Assouad
/// estimate is the largest slope over the bases, the lower estimate the
/// smallest.
DimensionEstimate assouad_dimension(const SpatialIndex& index, std::span<const double> base_list,
                                    const SpectrumOptions& options = {});
DimensionEstimate lower_dimension(const SpatialIndex& index, std::span<const double> base_list,
                                  const SpectrumOptions& options = {});

/// log mu(B(centers[i], r)).
using LogMassOracle = std::function<double(std::size_t center, double r)>;

/// Extremum over centres of log(mu(B(x, r^theta)) / mu(B(x, r))), fitted
/// against log(r^(theta - 1)). Oracle errors propagate.
SpectrumEstimate measure_spectrum(const LogMassOracle& log_mass, std::span<const Complex> centers, double theta,
                                  std::span<const double> r_list, Extremum kind, const SpectrumOptions& options = {});
/// Oracle from log_measure_ball on one zoom per centre.
SpectrumEstimate measure_spectrum(std::span<const ZoomSequence> zooms, double h, double theta,
                                  std::span<const double> r_list, Extremum kind, const SpectrumOptions& options = {});

/// Closed-form curves for a parabolic map with dimension h and largest petal
/// number p_max; p_max = 0 (no parabolic point) gives h everywhere.
struct PredictedSpectra {
    double h = 0.0;
    int p_max = 0;
    std::vector<double> theta;
    std::vector<double> set_assouad, set_lower, measure_assouad, measure_lower;
    struct Endpoints {
        double box = 0.0, assouad = 0.0, lower = 0.0;
    } set, measure;
};

/// Throws InvalidH unless p_max/(1+p_max) < h <= 2, InvalidArgument for
/// p_max < 0 or theta outside (0,1).
PredictedSpectra predicted_spectra(double h, int p_max, std::span<const double> theta_grid);
double predicted_set_assouad(double h, int p_max, double theta);
double predicted_set_lower(double h, int p_max, double theta);
double predicted_measure_assouad(double h, int p_max, double theta);
double predicted_measure_lower(double h, int p_max, double theta);
/// Assouad spectrum of {n^(-1/p)} u {0}: min{1, p/((1+p)(1-theta))}.
double sequence_assouad_spectrum(int p, double theta);

struct SpectrumRow {
    double theta = 0.0;
    double exponent = 0.0;
    double residual = 0.0;
    std::string kind;
    std::string source;
};

/// CSV `theta,exponent,residual,kind,source`.
void write_spectrum_csv(std::ostream& out, std::span<const SpectrumRow> rows);

} // namespace parajulia
