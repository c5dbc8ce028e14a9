#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/error.hpp"
#include "parajulia/rational_map.hpp"
#include "parajulia/sampler.hpp"

namespace parajulia {

enum class CalibrationKind { Sequence, Grid, Circle, Cantor };

struct CalibrationSpec {
    CalibrationKind kind = CalibrationKind::Sequence;
    /// Sequence: exponent p; Grid: dimension d (1 or 2); Cantor: contraction ratio; Circle: unused.
    double parameter = 1.0;
};

/// Parses `sequence:1`, `grid:2`, `circle`, `cantor:0.3333333333333333`.
CalibrationSpec parse_calibration(std::string_view text);
std::string to_string(const CalibrationSpec& spec);

/// Sequence(p): {n^(-1/p) : 1 <= n <= size} u {0} on the real axis.
/// Grid(1): size cell midpoints of [0,1]; Grid(2): the floor(sqrt(size))^2
/// cell midpoints of the unit square. Circle: size equally spaced points of
/// the unit circle. Cantor(a): left endpoints of the two-map construction
/// x -> a x, x -> a x + 1 - a at the deepest level with at most size points.
/// Throws InvalidArgument for size < 100 or a bad parameter.
PointCloud calibration_set(const CalibrationSpec& spec, std::size_t size);

/// Known dimension of the calibration set (all notions agree except for the
/// sequence, where this is the box dimension p/(1+p)).
double calibration_dimension(const CalibrationSpec& spec);
/// Known Assouad spectrum at theta.
double calibration_assouad_spectrum(const CalibrationSpec& spec, double theta);

enum class DensityMetric { Line, Circle };

/// Smallest m such that {k alpha mod 1 : 0 <= k <= m} is delta-dense in
/// [0,1). With the Line metric the interval after the largest point counts
/// in full (distances measured by |a - b| on [0,1)); with the Circle metric
/// it is a gap like any other.
///
/// Throws RationalAlpha when a convergent p/q of alpha with q <= 10^6 lies
/// within min(1e-12, 1e-6/q^2), InvalidArgument unless 0 < delta < 1, ExplosionGuard when
/// m would exceed 10^8.
long rotation_density(double alpha, double delta, DensityMetric metric = DensityMetric::Line);
/// Covering radius of the points {k alpha mod 1 : 0 <= k <= m} under the metric.
double orbit_covering_radius(double alpha, long m, DensityMetric metric = DensityMetric::Line);

/// |T^n(z) - e^(2 pi i n alpha) z| / (5^n |z|^2) for T(z) = e^(2 pi i alpha) z + z^2.
/// Throws OrbitEscaped when |T^k(z)| >= 1 for some k < n.
double cremer_expansion_check(double alpha, Complex z, int n);

enum class HMode { Pressure, Fixed };
enum class CloudSource { Auto, Inverse, PreParabolic };

/// Flat `key = value` experiment description; see docs/config-format.md.
struct ExperimentConfig {
    std::optional<RationalMap> map;
    std::optional<CalibrationSpec> calibration;
    std::uint64_t seed = 1;
    std::size_t depth = 40;
    std::size_t count = 200000;
    CloudSource cloud = CloudSource::Auto;
    /// Pruning radius for the pre-parabolic cloud.
    double preparabolic_radius = 1e-5;
    std::vector<double> theta_grid{0.2, 0.35, 0.5, 0.65, 0.8};
    std::vector<double> r_ladder;  ///< strictly decreasing
    HMode h_mode = HMode::Pressure;
    int pressure_order = 0;  ///< 0 picks default_order(map)
    double h_fixed = 1.0;
    std::optional<int> p_max;  ///< overrides the detected value
    std::optional<double> h_reference;
    /// Quantities that decide the pass flag: h, box, assouad, assouad_flat,
    /// lower, measure.
    std::vector<std::string> compare{"box", "assouad"};
    double tol_calibration = 0.07;
    double tol_julia = 0.1;
    double tol_h = 0.02;
    std::size_t max_centers = 4096;
    std::size_t measure_centers = 64;
    std::string outputs = "out";
};

/// Reads the flat format. Unknown keys, duplicate keys and malformed values
/// throw ParseError; an invalid combination throws InvalidArgument.
/// Relative map_file paths are resolved against base_dir.
ExperimentConfig parse_experiment_config(std::string_view text, const std::string& base_dir = ".");
ExperimentConfig load_experiment_config(const std::string& path);

struct Comparison {
    std::string quantity;  ///< e.g. "assouad", "box", "h"
    std::optional<double> theta;
    double estimated = 0.0;
    double predicted = 0.0;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool compared = false;  ///< part of the pass decision
    bool pass = false;
};

struct ComparisonReport {
    std::string subject;  ///< map text or calibration kind
    std::optional<double> h;
    std::optional<double> box_h;
    int p_max = 0;
    std::size_t cloud_size = 0;
    std::vector<Comparison> rows;
    /// Every estimated exponent lies in [0, 2].
    bool bounds_ok = true;
    bool pass = false;
};

/// Thrown by run_experiment: the failing stage plus the module's code.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause);
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Runs the pipeline map -> parabolic points -> h -> cloud -> measure ->
/// spectra -> report and writes into config.outputs: fixedpoints.json,
/// pressure.csv, cloud.bin, zoom.csv, spectrum.csv, report.json. A lock
/// file guards the directory for the duration of the run. Outputs are
/// byte-identical for equal configs.
ComparisonReport run_experiment(const ExperimentConfig& config);

std::string report_json(const ComparisonReport& report);

} // namespace parajulia
