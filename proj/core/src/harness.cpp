#include "parajulia/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "parajulia/canonical_balls.hpp"
#include "parajulia/cloud_io.hpp"
#include "parajulia/fixed_points.hpp"
#include "parajulia/map_spec.hpp"
#include "parajulia/measure.hpp"
#include "parajulia/pressure.hpp"
#include "parajulia/spatial_index.hpp"
#include "parajulia/spectra.hpp"

namespace parajulia {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t at = s.find(sep, start);
        out.push_back(trim(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start)));
        if (at == std::string_view::npos) break;
        start = at + 1;
    }
    return out;
}

double parse_real(std::string_view s, std::string_view key) {
    s = trim(s);
    // 2^-k shorthand for dyadic radii
    if (s.size() > 2 && s[0] == '2' && s[1] == '^') {
        int e = 0;
        const auto res = std::from_chars(s.data() + 2, s.data() + s.size(), e);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return std::ldexp(1.0, e);
    }
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "bad number '" + std::string(s) + "' for " + std::string(key));
    }
    return v;
}

long parse_integer(std::string_view s, std::string_view key) {
    s = trim(s);
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, "bad integer '" + std::string(s) + "' for " + std::string(key));
    }
    return v;
}

std::size_t parse_count(std::string_view s, std::string_view key) {
    const long v = parse_integer(s, key);
    if (v < 0) throw Error(ErrorCode::ParseError, std::string(key) + " must be non-negative");
    return static_cast<std::size_t>(v);
}

std::vector<double> parse_real_list(std::string_view s, std::string_view key) {
    std::vector<double> out;
    // a..b between two dyadic radii expands to every power of two in between
    if (const auto dots = s.find(".."); dots != std::string_view::npos && s.find(',') == std::string_view::npos) {
        const double a = parse_real(s.substr(0, dots), key);
        const double b = parse_real(s.substr(dots + 2), key);
        int ea = 0, eb = 0;
        if (std::frexp(a, &ea) != 0.5 || std::frexp(b, &eb) != 0.5 || a <= b) {
            throw Error(ErrorCode::ParseError, "range in " + std::string(key) + " needs decreasing powers of two");
        }
        for (int e = ea; e >= eb; --e) out.push_back(std::ldexp(1.0, e - 1));
        return out;
    }
    for (auto item : split(s, ',')) out.push_back(parse_real(item, key));
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

// One process per output directory. The lock is an exclusively created file
// that disappears with the guard.
class DirectoryLock {
public:
    explicit DirectoryLock(const fs::path& dir) : path_(dir / ".lock") {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (f == nullptr) throw Error(ErrorCode::IoError, "output directory is locked: " + path_.string());
        std::fclose(f);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;
    ~DirectoryLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }

private:
    fs::path path_;
};

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e);
    }
}

bool wants(const ExperimentConfig& c, std::string_view q) {
    return std::find(c.compare.begin(), c.compare.end(), q) != c.compare.end();
}

double frac(long double x) { return static_cast<double>(x - std::floor(x)); }

double orbit_point(double alpha, long k) { return frac(static_cast<long double>(k) * static_cast<long double>(alpha)); }

void check_irrational(double alpha) {
    const double x = frac(alpha);
    // convergents of the continued fraction of x
    long double y = x;
    long double h1 = 1, h2 = 0, k1 = 0, k2 = 1;
    for (int step = 0; step < 64; ++step) {
        const long double a = std::floor(y);
        const long double h = a * h1 + h2;
        const long double k = a * k1 + k2;
        if (k > 1e6) break;
        // every irrational has convergents near 1e-12 once q approaches 1e6, so a
        // match also has to beat the generic 1/q^2 rate by the same factor 1e6
        const long double err = std::abs(static_cast<long double>(x) - h / k);
        if (k >= 1 && err < 1e-12L && err < 1e-6L / (k * k)) {
            throw Error(ErrorCode::RationalAlpha, "alpha is within 1e-12 of " + std::to_string(static_cast<long>(h)) + "/" +
                                                      std::to_string(static_cast<long>(k)));
        }
        h2 = h1;
        h1 = h;
        k2 = k1;
        k1 = k;
        const long double f = y - a;
        if (f < 1e-18L) break;
        y = 1.0L / f;
    }
}

double cover_value(double max_gap, double last, DensityMetric metric) {
    if (metric == DensityMetric::Line) return std::max(0.5 * max_gap, 1.0 - last);
    return 0.5 * std::max(max_gap, 1.0 - last);
}

std::vector<Complex> preparabolic_extras(const RationalMap& map, const std::vector<ParabolicPoint>& pps) {
    std::vector<Complex> out;
    for (const auto& pp : pps) {
        out.push_back(pp.omega);
        CanonicalOptions opts;
        opts.min_radius = 1e-300;
        for (const auto& b : canonical_balls(map, pp, 2, opts)) out.push_back(b.center);
    }
    return out;
}

PointCloud preparabolic_cloud(const RationalMap& map, const std::vector<ParabolicPoint>& pps, double radius) {
    PointCloud cloud;
    cloud.provenance = Provenance::InverseIteration;
    CanonicalOptions opts;
    opts.min_radius = radius;
    opts.node_budget = std::size_t{1} << 26;
    for (const auto& pp : pps) {
        cloud.points.push_back(pp.omega);
        for (const auto& b : canonical_balls(map, pp, 100000, opts)) {
            cloud.points.push_back(b.center);
        }
    }
    return cloud;
}

Comparison compare_row(std::string quantity, std::optional<double> theta, double est, double pred, double tol,
                       bool compared) {
    Comparison c;
    c.quantity = std::move(quantity);
    c.theta = theta;
    c.estimated = est;
    c.predicted = pred;
    c.deviation = std::abs(est - pred);
    c.tolerance = tol;
    c.compared = compared;
    c.pass = c.deviation <= tol;
    return c;
}

} // namespace

namespace {
std::string without_code(const Error& e) {
    std::string_view w = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (w.starts_with(prefix)) w.remove_prefix(prefix.size());
    return std::string(w);
}
} // namespace

// the cause's index is already part of its message
StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), stage + ": " + without_code(cause)), stage_(std::move(stage)) {}

CalibrationSpec parse_calibration(std::string_view text) {
    const auto parts = split(text, ':');
    const std::string kind(parts[0]);
    CalibrationSpec spec;
    if (kind == "sequence") {
        spec.kind = CalibrationKind::Sequence;
    } else if (kind == "grid") {
        spec.kind = CalibrationKind::Grid;
        spec.parameter = 2.0;
    } else if (kind == "circle") {
        spec.kind = CalibrationKind::Circle;
    } else if (kind == "cantor") {
        spec.kind = CalibrationKind::Cantor;
        spec.parameter = 1.0 / 3.0;
    } else {
        throw Error(ErrorCode::ParseError, "unknown calibration set '" + kind + "'");
    }
    if (parts.size() > 2) throw Error(ErrorCode::ParseError, "calibration takes one parameter");
    if (parts.size() == 2) spec.parameter = parse_real(parts[1], "calibration");
    return spec;
}

std::string to_string(const CalibrationSpec& spec) {
    switch (spec.kind) {
    case CalibrationKind::Sequence: return "sequence:" + format_double(spec.parameter);
    case CalibrationKind::Grid: return "grid:" + format_double(spec.parameter);
    case CalibrationKind::Circle: return "circle";
    case CalibrationKind::Cantor: return "cantor:" + format_double(spec.parameter);
    }
    return "?";
}

PointCloud calibration_set(const CalibrationSpec& spec, std::size_t size) {
    if (size < 100) throw Error(ErrorCode::InvalidArgument, "calibration sets need at least 100 points");
    PointCloud cloud;
    cloud.provenance = Provenance::Synthetic;
    auto& pts = cloud.points;
    switch (spec.kind) {
    case CalibrationKind::Sequence: {
        if (!(spec.parameter > 0.0)) throw Error(ErrorCode::InvalidArgument, "sequence exponent must be positive");
        pts.emplace_back(0.0);
        for (std::size_t n = 1; n <= size; ++n) pts.emplace_back(std::pow(static_cast<double>(n), -1.0 / spec.parameter));
        break;
    }
    case CalibrationKind::Grid: {
        if (spec.parameter == 1.0) {
            for (std::size_t i = 0; i < size; ++i) pts.emplace_back((i + 0.5) / static_cast<double>(size));
        } else if (spec.parameter == 2.0) {
            const auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(size))));
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < k; ++j) pts.emplace_back((i + 0.5) / k, (j + 0.5) / k);
            }
        } else {
            throw Error(ErrorCode::InvalidArgument, "grid dimension must be 1 or 2");
        }
        break;
    }
    case CalibrationKind::Circle:
        for (std::size_t i = 0; i < size; ++i) {
            pts.push_back(std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(size)));
        }
        break;
    case CalibrationKind::Cantor: {
        const double a = spec.parameter;
        if (!(a > 0.0 && a < 0.5)) throw Error(ErrorCode::InvalidArgument, "Cantor ratio must lie in (0, 1/2)");
        std::vector<double> xs{0.0};
        while (2 * xs.size() <= size) {
            std::vector<double> next;
            next.reserve(2 * xs.size());
            for (double x : xs) next.push_back(a * x);
            for (double x : xs) next.push_back(a * x + 1.0 - a);
            xs = std::move(next);
        }
        pts.assign(xs.begin(), xs.end());
        break;
    }
    }
    return cloud;
}

double calibration_dimension(const CalibrationSpec& spec) {
    switch (spec.kind) {
    case CalibrationKind::Sequence: return spec.parameter / (1.0 + spec.parameter);
    case CalibrationKind::Grid: return spec.parameter;
    case CalibrationKind::Circle: return 1.0;
    case CalibrationKind::Cantor: return std::log(2.0) / std::log(1.0 / spec.parameter);
    }
    return 0.0;
}

double calibration_assouad_spectrum(const CalibrationSpec& spec, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw Error(ErrorCode::InvalidArgument, "theta must lie in (0,1)");
    if (spec.kind == CalibrationKind::Sequence) {
        const double p = spec.parameter;
        return std::min(1.0, p / ((1.0 + p) * (1.0 - theta)));
    }
    return calibration_dimension(spec);
}

double orbit_covering_radius(double alpha, long m, DensityMetric metric) {
    if (m < 0) throw Error(ErrorCode::InvalidArgument, "m must be non-negative");
    std::vector<double> xs;
    for (long k = 0; k <= m; ++k) xs.push_back(orbit_point(alpha, k));
    std::sort(xs.begin(), xs.end());
    double gap = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) gap = std::max(gap, xs[i] - xs[i - 1]);
    return cover_value(gap, xs.back(), metric);
}

long rotation_density(double alpha, double delta, DensityMetric metric) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0,1)");
    if (!std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be finite");
    check_irrational(alpha);
    constexpr long kLimit = 100000000;
    std::set<double> pts{0.0};
    std::multiset<double> gaps;
    for (long m = 0;; ++m) {
        if (m > 0) {
            const double x = orbit_point(alpha, m);
            const auto [it, fresh] = pts.insert(x);
            if (fresh) {
                const auto next = std::next(it);
                const double lo = *std::prev(it);
                if (next != pts.end()) gaps.erase(gaps.find(*next - lo));
                gaps.insert(x - lo);
                if (next != pts.end()) gaps.insert(*next - x);
            }
        }
        const double gap = gaps.empty() ? 0.0 : *gaps.rbegin();
        if (cover_value(gap, *pts.rbegin(), metric) <= delta) return m;
        if (m >= kLimit) throw Error(ErrorCode::ExplosionGuard, "rotation density above 10^8");
    }
}

double cremer_expansion_check(double alpha, Complex z, int n) {
    if (n < 0) throw Error(ErrorCode::InvalidArgument, "n must be non-negative");
    if (z == Complex(0.0)) throw Error(ErrorCode::InvalidArgument, "z must be nonzero");
    if (n == 0) return 0.0;
    const Complex lambda = std::polar(1.0, 2.0 * std::numbers::pi * alpha);
    Complex w = z;
    for (int k = 0; k < n; ++k) {
        if (std::abs(w) >= 1.0) throw Error(ErrorCode::OrbitEscaped, "orbit left the unit disc", k);
        w = lambda * w + w * w;
    }
    const Complex rotated = std::polar(1.0, 2.0 * std::numbers::pi * frac(static_cast<long double>(n) * alpha)) * z;
    return std::abs(w - rotated) / (std::pow(5.0, n) * std::norm(z));
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& base_dir) {
    ExperimentConfig c;
    std::set<std::string> seen;
    std::optional<std::string> numer, denom, map_file;
    bool have_ladder = false;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value",
                        static_cast<long>(line_no));
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": duplicate key " + key,
                        static_cast<long>(line_no));
        }
        if (key == "numer") {
            numer = std::string(value);
        } else if (key == "denom") {
            denom = std::string(value);
        } else if (key == "map_file") {
            map_file = std::string(value);
        } else if (key == "calibration") {
            c.calibration = parse_calibration(value);
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(parse_count(value, key));
        } else if (key == "depth") {
            c.depth = parse_count(value, key);
        } else if (key == "count") {
            c.count = parse_count(value, key);
        } else if (key == "cloud") {
            if (value == "auto") c.cloud = CloudSource::Auto;
            else if (value == "inverse") c.cloud = CloudSource::Inverse;
            else if (value == "preparabolic") c.cloud = CloudSource::PreParabolic;
            else throw Error(ErrorCode::ParseError, "cloud must be auto, inverse or preparabolic");
        } else if (key == "preparabolic_radius") {
            c.preparabolic_radius = parse_real(value, key);
        } else if (key == "theta_grid") {
            c.theta_grid = parse_real_list(value, key);
        } else if (key == "r_ladder") {
            c.r_ladder = parse_real_list(value, key);
            have_ladder = true;
        } else if (key == "h_mode") {
            const auto parts = split(value, ':');
            if (parts[0] == "pressure") {
                c.h_mode = HMode::Pressure;
                if (parts.size() == 2) c.pressure_order = static_cast<int>(parse_integer(parts[1], key));
            } else if (parts[0] == "fixed" && parts.size() == 2) {
                c.h_mode = HMode::Fixed;
                c.h_fixed = parse_real(parts[1], key);
            } else {
                throw Error(ErrorCode::ParseError, "h_mode must be pressure[:n] or fixed:value");
            }
        } else if (key == "p_max") {
            c.p_max = static_cast<int>(parse_integer(value, key));
        } else if (key == "h_reference") {
            c.h_reference = parse_real(value, key);
        } else if (key == "compare") {
            c.compare.clear();
            for (auto item : split(value, ',')) {
                static const std::set<std::string_view> known{"h", "box", "assouad", "assouad_flat", "lower", "measure"};
                if (!known.contains(item)) throw Error(ErrorCode::ParseError, "unknown comparison '" + std::string(item) + "'");
                c.compare.emplace_back(item);
            }
        } else if (key == "tol_calibration") {
            c.tol_calibration = parse_real(value, key);
        } else if (key == "tol_julia") {
            c.tol_julia = parse_real(value, key);
        } else if (key == "tol_h") {
            c.tol_h = parse_real(value, key);
        } else if (key == "max_centers") {
            c.max_centers = parse_count(value, key);
        } else if (key == "measure_centers") {
            c.measure_centers = parse_count(value, key);
        } else if (key == "outputs") {
            c.outputs = std::string(value);
        } else {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unknown key " + key,
                        static_cast<long>(line_no));
        }
    }

    if (map_file && (numer || denom)) throw Error(ErrorCode::InvalidArgument, "give either map_file or numer/denom");
    if (map_file) {
        fs::path p(*map_file);
        if (p.is_relative()) p = fs::path(base_dir) / p;
        c.map = load_map_spec(p.string());
    } else if (numer) {
        c.map = parse_map_spec("numer = " + *numer + "\n" + (denom ? "denom = " + *denom + "\n" : std::string()));
    } else if (denom) {
        throw Error(ErrorCode::InvalidArgument, "denom without numer");
    }
    if (c.map.has_value() == c.calibration.has_value()) {
        throw Error(ErrorCode::InvalidArgument, "exactly one of a map and a calibration set is required");
    }
    if (!have_ladder) {
        const bool sequence = c.calibration && c.calibration->kind == CalibrationKind::Sequence;
        for (int k = sequence ? 12 : 4; k <= (sequence ? 24 : 11); ++k) c.r_ladder.push_back(std::ldexp(1.0, -k));
    }
    if (c.r_ladder.size() < 4) throw Error(ErrorCode::InvalidArgument, "r_ladder needs at least 4 radii");
    for (std::size_t i = 0; i < c.r_ladder.size(); ++i) {
        if (!(c.r_ladder[i] > 0.0) || (i > 0 && !(c.r_ladder[i] < c.r_ladder[i - 1]))) {
            throw Error(ErrorCode::InvalidArgument, "r_ladder must be positive and strictly decreasing");
        }
    }
    if (c.theta_grid.empty()) throw Error(ErrorCode::InvalidArgument, "theta_grid is empty");
    for (double t : c.theta_grid) {
        if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidArgument, "theta_grid must lie in (0,1)");
    }
    if (c.depth < 20) throw Error(ErrorCode::InvalidArgument, "depth must be at least 20");
    if (!(c.preparabolic_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "preparabolic_radius must be positive");
    if (c.p_max && *c.p_max < 0) throw Error(ErrorCode::InvalidArgument, "p_max must be non-negative");
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    const std::string base = fs::path(path).parent_path().string();
    return parse_experiment_config(read_file(path), base.empty() ? "." : base);
}

ComparisonReport run_experiment(const ExperimentConfig& config) {
    const fs::path out_dir(config.outputs);
    const DirectoryLock lock(out_dir);

    ComparisonReport report;
    const auto& rl = config.r_ladder;
    const double r_min = rl.back();
    const bool calibration = config.calibration.has_value();
    const double tol = calibration ? config.tol_calibration : config.tol_julia;

    RationalMap work_map = RationalMap::quadratic(0.0);
    std::vector<ParabolicPoint> pps;
    std::optional<PredictedSpectra> predicted;
    PointCloud cloud;

    if (calibration) {
        report.subject = to_string(*config.calibration);
        cloud = stage("sample", [&] { return calibration_set(*config.calibration, config.count); });
    } else {
        const RationalMap& map = *config.map;
        report.subject = format_map_spec(map);
        stage("parabolic", [&] {
            pps = parabolic_points_iterated(map);
            const int q = parabolic_period(map);
            work_map = q > 1 ? iterate(map, q) : map;
            report.p_max = config.p_max.value_or(max_petal(pps));
            write_file(out_dir / "fixedpoints.json", fixed_point_report_json(map) + "\n");
        });
        stage("h", [&] {
            if (config.h_mode == HMode::Fixed) {
                report.h = config.h_fixed;
                write_file(out_dir / "pressure.csv", "t,P_n,order,excluded\n");
            } else {
                const int n = config.pressure_order > 0 ? config.pressure_order : default_order(map);
                const auto data = pressure_data(periodic_points(map, n), n);
                report.h = solve_h(data, report.p_max).h;
                std::vector<double> ts;
                for (int k = 0; k <= 40; ++k) ts.push_back(0.05 * k);
                std::ostringstream csv;
                write_pressure_csv(csv, pressure_curve(data, ts));
                write_file(out_dir / "pressure.csv", csv.str());
            }
            check_h_bound(*report.h, report.p_max);
            predicted = predicted_spectra(*report.h, report.p_max, config.theta_grid);
        });
        cloud = stage("sample", [&] {
            const bool pre = config.cloud == CloudSource::PreParabolic ||
                             (config.cloud == CloudSource::Auto && report.p_max > 0 && !pps.empty());
            if (pre) {
                if (pps.empty()) throw Error(ErrorCode::NotParabolic, "no parabolic point to build the cloud from");
                return preparabolic_cloud(work_map, pps, config.preparabolic_radius);
            }
            return inverse_orbit_sample(map, config.seed, config.depth, config.count);
        });
    }
    report.cloud_size = cloud.size();
    stage("sample", [&] { save_cloud((out_dir / "cloud.bin").string(), cloud); });

    SpectrumOptions opts;
    opts.max_centers = config.max_centers;
    if (!pps.empty()) opts.extra_centers = stage("sample", [&] { return preparabolic_extras(work_map, pps); });

    // measure spectra from zooms of a stride of cloud points
    std::vector<SpectrumEstimate> measure_a, measure_l;
    if (!calibration) {
        stage("measure", [&] {
            std::vector<ZoomSequence> zooms;
            // coverage has to span [r_min, R] for the coarsest R = r_0^theta
            const double r_top = std::pow(rl.front(), *std::min_element(config.theta_grid.begin(), config.theta_grid.end()));
            const std::size_t want = std::min(config.measure_centers, cloud.size());
            for (std::size_t i = 0; i < want; ++i) {
                const Complex xi = cloud.points[i * cloud.size() / want];
                try {
                    auto z = hyperbolic_zoom(work_map, pps, xi, 4000);
                    const bool deep = z.terminating || z.entries.back().r <= r_min;
                    if (deep && z.entries.front().r >= r_top) zooms.push_back(std::move(z));
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NoReturns && e.code() != ErrorCode::OrbitEscaped &&
                        e.code() != ErrorCode::InvalidArgument) {
                        throw;
                    }
                }
            }
            if (zooms.empty()) throw Error(ErrorCode::NoReturns, "no sampled point has a usable zoom");
            std::ostringstream csv;
            write_zoom_csv(csv, zooms.front());
            write_file(out_dir / "zoom.csv", csv.str());
            SpectrumOptions mopts;
            mopts.on_constant = ConstantCounts::Zero;
            for (double t : config.theta_grid) {
                measure_a.push_back(measure_spectrum(zooms, *report.h, t, rl, Extremum::Max, mopts));
                measure_l.push_back(measure_spectrum(zooms, *report.h, t, rl, Extremum::Min, mopts));
            }
        });
    }

    std::vector<SpectrumEstimate> assouad, lower;
    std::vector<bool> lower_ok;
    BoxEstimate box;
    stage("spectra", [&] {
        const SpatialIndex index(cloud.points, {}, 0.25 * r_min);
        box = box_dimension(index, rl);
        for (double t : config.theta_grid) {
            assouad.push_back(assouad_spectrum(index, t, rl, opts));
            // a min over centres is only meaningful on evenly sampled clouds, so
            // the lower spectrum is estimated on request only
            if (wants(config, "lower")) {
                lower.push_back(lower_spectrum(index, t, rl, opts));
                lower_ok.push_back(true);
            } else {
                lower.emplace_back();
                lower_ok.push_back(false);
            }
        }
    });
    report.box_h = box.exponent;

    stage("report", [&] {
        auto& rows = report.rows;
        const double dim = calibration ? calibration_dimension(*config.calibration) : *report.h;
        if (report.h && config.h_reference) {
            rows.push_back(compare_row("h", std::nullopt, *report.h, *config.h_reference, config.tol_h, wants(config, "h")));
        }
        rows.push_back(compare_row("box", std::nullopt, box.exponent, dim, tol, wants(config, "box")));
        std::vector<double> pa, pl;
        for (std::size_t i = 0; i < config.theta_grid.size(); ++i) {
            const double t = config.theta_grid[i];
            if (calibration) {
                pa.push_back(calibration_assouad_spectrum(*config.calibration, t));
                pl.push_back(config.calibration->kind == CalibrationKind::Sequence ? 0.0 : dim);
            } else {
                pa.push_back(predicted->set_assouad[i]);
                pl.push_back(predicted->set_lower[i]);
            }
            rows.push_back(compare_row("assouad", t, assouad[i].exponent, pa[i], tol, wants(config, "assouad")));
            if (lower_ok[i]) rows.push_back(compare_row("lower", t, lower[i].exponent, pl[i], tol, wants(config, "lower")));
            if (!calibration) {
                rows.push_back(compare_row("measure_assouad", t, measure_a[i].exponent, predicted->measure_assouad[i], tol,
                                           wants(config, "measure")));
                rows.push_back(compare_row("measure_lower", t, measure_l[i].exponent, predicted->measure_lower[i], tol,
                                           wants(config, "measure")));
            }
        }
        const auto [amin, amax] = std::minmax_element(assouad.begin(), assouad.end(), [](const auto& a, const auto& b) {
            return a.exponent < b.exponent;
        });
        const auto [pmin, pmax] = std::minmax_element(pa.begin(), pa.end());
        rows.push_back(compare_row("assouad_flat", std::nullopt, amax->exponent - amin->exponent, *pmax - *pmin, tol,
                                   wants(config, "assouad_flat")));

        for (const auto& r : rows) {
            if (r.quantity == "h" || r.quantity == "assouad_flat") continue;
            if (!(r.estimated >= 0.0 && r.estimated <= 2.0)) report.bounds_ok = false;
        }
        bool any = false;
        bool all = true;
        for (const auto& r : rows) {
            if (!r.compared) continue;
            any = true;
            all = all && r.pass;
        }
        report.pass = report.bounds_ok && any && all;

        std::vector<SpectrumRow> csv_rows;
        for (std::size_t i = 0; i < config.theta_grid.size(); ++i) {
            const double t = config.theta_grid[i];
            csv_rows.push_back({t, assouad[i].exponent, assouad[i].fit_residual, "assouad", "estimate"});
            csv_rows.push_back({t, pa[i], 0.0, "assouad", "predicted"});
            if (lower_ok[i]) csv_rows.push_back({t, lower[i].exponent, lower[i].fit_residual, "lower", "estimate"});
            csv_rows.push_back({t, pl[i], 0.0, "lower", "predicted"});
            if (!calibration) {
                csv_rows.push_back({t, measure_a[i].exponent, measure_a[i].fit_residual, "measure_assouad", "estimate"});
                csv_rows.push_back({t, predicted->measure_assouad[i], 0.0, "measure_assouad", "predicted"});
                csv_rows.push_back({t, measure_l[i].exponent, measure_l[i].fit_residual, "measure_lower", "estimate"});
                csv_rows.push_back({t, predicted->measure_lower[i], 0.0, "measure_lower", "predicted"});
            }
        }
        std::ostringstream csv;
        write_spectrum_csv(csv, csv_rows);
        write_file(out_dir / "spectrum.csv", csv.str());
        write_file(out_dir / "report.json", report_json(report) + "\n");
    });
    return report;
}

std::string report_json(const ComparisonReport& report) {
    nlohmann::ordered_json j;
    j["subject"] = report.subject;
    j["h"] = report.h ? nlohmann::ordered_json(*report.h) : nlohmann::ordered_json(nullptr);
    j["box_h"] = report.box_h ? nlohmann::ordered_json(*report.box_h) : nlohmann::ordered_json(nullptr);
    j["p_max"] = report.p_max;
    j["cloud_size"] = report.cloud_size;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json row;
        row["quantity"] = r.quantity;
        row["theta"] = r.theta ? nlohmann::ordered_json(*r.theta) : nlohmann::ordered_json(nullptr);
        row["estimated"] = r.estimated;
        row["predicted"] = r.predicted;
        row["deviation"] = r.deviation;
        row["tolerance"] = r.tolerance;
        row["compared"] = r.compared;
        row["pass"] = r.pass;
        rows.push_back(row);
    }
    j["rows"] = rows;
    j["bounds_ok"] = report.bounds_ok;
    j["pass"] = report.pass;
    return j.dump(2);
}

} // namespace parajulia
