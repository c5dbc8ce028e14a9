#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "parajulia/error.hpp"
#include "parajulia/harness.hpp"
#include "parajulia/spatial_index.hpp"
#include "parajulia/spectra.hpp"

using namespace parajulia;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

// Rebuilds the orbit from scratch for every m and sorts it.
long brute_density(double alpha, double delta) {
    for (long m = 0;; ++m) {
        std::vector<long double> xs;
        for (long k = 0; k <= m; ++k) {
            const long double v = static_cast<long double>(k) * alpha;
            xs.push_back(static_cast<double>(v - std::floor(v)));
        }
        std::sort(xs.begin(), xs.end());
        long double worst = 1.0L - xs.back();
        for (std::size_t i = 1; i < xs.size(); ++i) worst = std::max(worst, (xs[i] - xs[i - 1]) / 2);
        if (worst <= delta) return m;
    }
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pj_harness_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("calibration sets have the documented shape") {
    const auto seq = calibration_set(parse_calibration("sequence:2"), 1000);
    REQUIRE(seq.size() == 1001);
    CHECK(seq.points[0] == Complex(0.0));
    CHECK(seq.points[4].real() == doctest::Approx(0.5));
    CHECK(calibration_set(parse_calibration("grid:2"), 1000).size() == 31 * 31);
    CHECK(calibration_set(parse_calibration("grid:1"), 500).size() == 500);
    const auto circ = calibration_set(parse_calibration("circle"), 400);
    for (const auto& z : circ.points) CHECK(std::abs(z) == doctest::Approx(1.0));
    CHECK(calibration_set(parse_calibration("cantor"), 59049).size() == 32768);

    CHECK(code_of([] { calibration_set(parse_calibration("circle"), 99); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { calibration_set(parse_calibration("grid:3"), 1000); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { calibration_set(parse_calibration("cantor:0.7"), 1000); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_calibration("spiral"); }) == ErrorCode::ParseError);
    CHECK(to_string(parse_calibration("sequence:1")) == "sequence:1");
}

TEST_CASE("calibration dimensions") {
    std::vector<double> rl;
    for (int k = 4; k <= 14; ++k) rl.push_back(std::ldexp(1.0, -k));

    const auto cantor = calibration_set(parse_calibration("cantor:0.3333333333333333"), 59049);
    const SpatialIndex ci(cantor.points, {}, 1e-6);
    CHECK(box_dimension(ci, rl).exponent == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(0.03 / 0.631));

    const auto circle = calibration_set(parse_calibration("circle"), 10000);
    std::vector<double> coarse;
    for (int k = 2; k <= 7; ++k) coarse.push_back(std::ldexp(1.0, -k));
    const SpatialIndex oi(circle.points, {}, 1e-5);
    CHECK(std::abs(box_dimension(oi, coarse).exponent - 1.0) < 0.05);
    CHECK(std::abs(assouad_spectrum(oi, 0.5, coarse).exponent - 1.0) < 0.07);

    CHECK(calibration_assouad_spectrum(parse_calibration("sequence:1"), 0.25) == doctest::Approx(2.0 / 3.0));
    CHECK(calibration_assouad_spectrum(parse_calibration("sequence:1"), 0.75) == 1.0);
    CHECK(calibration_dimension(parse_calibration("grid:2")) == 2.0);
}

TEST_CASE("rotation density examples") {
    const double a = std::sqrt(2.0) - 1.0;
    CHECK(rotation_density(a, 0.9) == 1);
    CHECK(rotation_density(a, 0.05) == brute_density(a, 0.05));
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    CHECK(rotation_density(g, 0.2) >= rotation_density(g, 0.4));
    CHECK(orbit_covering_radius(a, 1) == doctest::Approx(1.0 - a));
}

TEST_CASE("rotation density matches a brute-force scan") {
    std::mt19937_64 gen(20261015);
    std::uniform_real_distribution<double> alpha_dist(0.0, 1.0);
    std::uniform_real_distribution<double> delta_dist(0.02, 0.5);
    int checked = 0;
    while (checked < 20) {
        const double alpha = alpha_dist(gen);
        const double delta = delta_dist(gen);
        long fast = 0;
        try {
            fast = rotation_density(alpha, delta);
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::RationalAlpha);
            continue;
        }
        CAPTURE(alpha);
        CAPTURE(delta);
        CHECK(fast == brute_density(alpha, delta));
        ++checked;
    }
}

TEST_CASE("density is monotone and the circle metric is never coarser") {
    const double a = std::sqrt(3.0) - 1.0;
    long prev = 0;
    for (double d = 0.5; d > 0.01; d *= 0.8) {
        const long m = rotation_density(a, d);
        CHECK(m >= prev);
        CHECK(rotation_density(a, d, DensityMetric::Circle) <= m);
        prev = m;
    }
}

TEST_CASE("rotation density rejects rational angles and bad deltas") {
    CHECK(code_of([] { rotation_density(0.5, 0.1); }) == ErrorCode::RationalAlpha);
    CHECK(code_of([] { rotation_density(355.0 / 113.0, 0.1); }) == ErrorCode::RationalAlpha);
    CHECK(code_of([] { rotation_density(0.0, 0.1); }) == ErrorCode::RationalAlpha);
    CHECK(code_of([] { rotation_density(std::sqrt(2.0), 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { rotation_density(std::sqrt(2.0), 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("cremer expansion ratio") {
    const double a = std::sqrt(2.0) - 1.0;
    CHECK(cremer_expansion_check(a, Complex(1e-3, 2e-4), 0) == 0.0);
    CHECK(cremer_expansion_check(a, Complex(1e-3, 2e-4), 2) > 0.0);
    CHECK(cremer_expansion_check(a, Complex(1e-3, 2e-4), 1) == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(cremer_expansion_check(a, Complex(1e-4), 10) <= 1.0);

    double worst = 0.0;
    for (double mag : {1e-3, 3e-4, 1e-4, 1e-5}) {
        for (int j = 0; j < 8; ++j) {
            const Complex z = std::polar(mag, 0.785 * j);
            for (int n = 0; n <= 12; ++n) worst = std::max(worst, cremer_expansion_check(a, z, n));
        }
    }
    CHECK(worst <= 1.0);

    CHECK(code_of([&] { cremer_expansion_check(a, Complex(0.0), 3); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { cremer_expansion_check(a, Complex(0.9), 20); }) == ErrorCode::OrbitEscaped);
}

TEST_CASE("config parsing") {
    const auto c = parse_experiment_config(R"(# z squared
numer = [0, 0, 1]
seed = 7
theta_grid = 0.25, 0.5
r_ladder = 2^-3..2^-9
h_mode = pressure:6
compare = box, assouad, h
h_reference = 1
tol_julia = 0.08
outputs = /tmp/x
)");
    REQUIRE(c.map);
    CHECK(c.map->degree() == 2);
    CHECK(c.seed == 7);
    CHECK(c.theta_grid == std::vector<double>{0.25, 0.5});
    REQUIRE(c.r_ladder.size() == 7);
    CHECK(c.r_ladder.front() == 0.125);
    CHECK(c.r_ladder.back() == std::ldexp(1.0, -9));
    CHECK(c.pressure_order == 6);
    CHECK(c.compare.size() == 3);
    CHECK(*c.h_reference == 1.0);
    CHECK(c.tol_julia == 0.08);
    CHECK(c.tol_calibration == 0.07);

    const auto s = parse_experiment_config("calibration = sequence:1\n");
    CHECK(s.r_ladder.front() == std::ldexp(1.0, -12));
    CHECK(s.r_ladder.back() == std::ldexp(1.0, -24));
    CHECK(parse_experiment_config("calibration = circle\nh_mode = fixed:1.25\n").h_fixed == 1.25);

    CHECK(code_of([] { parse_experiment_config("numer = [0,0,1]\nbogus = 1\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_experiment_config("numer = [0,0,1]\nseed = 1\nseed = 2\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_experiment_config("numer = [0,0,1]\nseed = x\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_experiment_config("numer = [0,0,1]\nno equals sign\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_experiment_config("seed = 1\n"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_experiment_config("numer = [0,0,1]\ncalibration = circle\n"); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_experiment_config("numer = [0,0,1]\ntheta_grid = 0.5, 1\n"); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_experiment_config("numer = [0,0,1]\nr_ladder = 0.1, 0.2, 0.05, 0.01\n"); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_experiment_config("numer = [0,0,1]\ncompare = box, volume\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_experiment_config("numer = [0,0,1]\ndepth = 5\n"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("fixed h below the petal bound aborts in the h stage") {
    auto c = parse_experiment_config("numer = [0.25, 0, 1]\nh_mode = fixed:0.5\np_max = 1\n");
    c.outputs = scratch("invalid_h").string();
    try {
        run_experiment(c);
        FAIL("expected an error");
    } catch (const StageError& e) {
        CHECK(e.code() == ErrorCode::InvalidH);
        CHECK(e.stage() == "h");
    }
    CHECK_FALSE(fs::exists(fs::path(c.outputs) / ".lock"));
}

TEST_CASE("a held lock refuses a second run") {
    auto c = parse_experiment_config("calibration = circle\ncount = 1000\n");
    c.outputs = scratch("lock").string();
    fs::create_directories(c.outputs);
    std::ofstream(fs::path(c.outputs) / ".lock") << "";
    CHECK(code_of([&] { run_experiment(c); }) == ErrorCode::IoError);
}

TEST_CASE("sequence calibration report passes") {
    auto c = parse_experiment_config("calibration = sequence:1\ncount = 100000\ntheta_grid = 0.25, 0.5, 0.75\n");
    c.outputs = scratch("sequence").string();
    const auto r = run_experiment(c);
    CHECK(r.pass);
    CHECK(r.bounds_ok);
    for (const auto& row : r.rows) {
        if (row.quantity == "assouad") CHECK(row.deviation <= 0.07);
    }
}

TEST_CASE("z squared report passes and is byte-deterministic") {
    const std::string text = "numer = [0, 0, 1]\ncount = 100000\nmeasure_centers = 16\nh_mode = pressure:8\n"
                             "h_reference = 1\ncompare = h, box, assouad, lower, measure\n";
    auto a = parse_experiment_config(text);
    auto b = a;
    a.outputs = scratch("det_a").string();
    b.outputs = scratch("det_b").string();
    const auto ra = run_experiment(a);
    run_experiment(b);
    for (const auto& row : ra.rows) {
        CAPTURE(row.quantity);
        CAPTURE(row.theta.value_or(-1.0));
        CAPTURE(row.estimated);
        CHECK(row.pass);
    }
    CHECK(ra.pass);
    REQUIRE(ra.h);
    CHECK(std::abs(*ra.h - 1.0) < 0.02);
    for (const char* f : {"fixedpoints.json", "pressure.csv", "cloud.bin", "zoom.csv", "spectrum.csv", "report.json"}) {
        CAPTURE(f);
        const auto x = slurp(fs::path(a.outputs) / f);
        CHECK_FALSE(x.empty());
        CHECK(x == slurp(fs::path(b.outputs) / f));
    }
}
