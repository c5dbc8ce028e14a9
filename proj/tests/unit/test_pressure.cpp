#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "parajulia/canonical_balls.hpp"
#include "parajulia/error.hpp"
#include "parajulia/fixed_points.hpp"
#include "parajulia/pressure.hpp"

using namespace parajulia;

namespace {

std::size_t total(const std::vector<PeriodicPoint>& pts) {
    std::size_t n = 0;
    for (const auto& p : pts) n += static_cast<std::size_t>(p.multiplicity);
    return n;
}

bool contains(const std::vector<PeriodicPoint>& pts, Complex z, double tol = 1e-10) {
    return std::any_of(pts.begin(), pts.end(), [&](const PeriodicPoint& p) { return std::abs(p.z - z) < tol; });
}

const RationalMap& cauliflower() {
    static const RationalMap m = RationalMap::quadratic(0.25);
    return m;
}

} // namespace

TEST_CASE("z^2 period 2: roots of z^4 = z") {
    const auto pts = periodic_points(RationalMap::quadratic(0.0), 2);
    REQUIRE(pts.size() == 4);
    CHECK(contains(pts, 0.0));
    CHECK(contains(pts, 1.0));
    CHECK(contains(pts, std::polar(1.0, 2.0 * std::numbers::pi / 3.0)));
    CHECK(contains(pts, std::polar(1.0, 4.0 * std::numbers::pi / 3.0)));
    for (const auto& p : pts) {
        if (std::abs(p.z) < 1e-10) {
            CHECK(std::abs(p.multiplier) < 1e-10);
        } else {
            CHECK(std::abs(p.multiplier) == doctest::Approx(4.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("root counts") {
    const auto sq = RationalMap::quadratic(0.0);
    const auto one = periodic_points(sq, 1);
    CHECK(one.size() == 2);
    CHECK(contains(one, 0.0));
    CHECK(contains(one, 1.0));
    CHECK(total(periodic_points(sq, 3)) == 8);
    CHECK(periodic_root_count(sq, 5) == 32);

    // 1/z^2 swaps 0 and infinity, so infinity is periodic only for even n
    const RationalMap inv(Polynomial({1.0}), Polynomial({0.0, 0.0, 1.0}));
    CHECK(periodic_root_count(inv, 1) == 3);
    CHECK(periodic_root_count(inv, 2) == 4);
    CHECK(total(periodic_points(inv, 1)) == 3);
    CHECK(total(periodic_points(inv, 2)) == 4);

    CHECK(default_order(sq) == 20);
    CHECK(default_order(RationalMap::polynomial(Polynomial({0.0, 1.0, 0.0, 1.0}))) == 12);
}

TEST_CASE("parabolic fixed point keeps its multiplicity") {
    const auto pts = periodic_points(cauliflower(), 1);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].multiplicity == 2);
    CHECK(std::abs(pts[0].z - 0.5) < 1e-7);
    for (int n : {4, 8}) {
        const auto many = periodic_points(cauliflower(), n);
        CHECK(total(many) == periodic_root_count(cauliflower(), n));
        CHECK(many.size() + 1 == total(many));
    }
}

TEST_CASE("pressure of z^2 against the closed form") {
    const auto data = pressure_data(periodic_points(RationalMap::quadratic(0.0), 6), 6);
    CHECK(data.log_multipliers.size() == 63);
    CHECK(data.excluded == 0);
    const double exact1 = std::log(63.0 * std::pow(2.0, -6.0)) / 6.0;
    CHECK(pressure_estimate(data, 1.0) == doctest::Approx(exact1).epsilon(1e-10));
    CHECK(pressure_estimate(data, 1.0) == doctest::Approx(-0.0026).epsilon(0.02));
    CHECK(pressure_estimate(data, 0.0) == doctest::Approx(std::log(63.0) / 6.0).epsilon(1e-12));
    CHECK(std::abs(pressure_estimate(data, 0.0) - 0.690) < 1e-3);
    CHECK(pressure_estimate(data, 0.5) > pressure_estimate(data, 1.0));
    for (double t : {-1.0, 0.25, 1.7}) {
        const double exact = std::log(63.0 * std::pow(2.0, -6.0 * t)) / 6.0;
        CHECK(pressure_estimate(data, t) == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("property: P_n strictly decreasing, P_n(0) near log degree") {
    const RationalMap maps[] = {RationalMap::quadratic(0.0), RationalMap::quadratic(-1.0),
                                RationalMap::quadratic(Complex(-0.12, 0.75)), cauliflower()};
    for (const auto& m : maps) {
        for (int n : {6, 8, 10}) {
            const auto data = pressure_data(periodic_points(m, n), n);
            CHECK(std::abs(pressure_estimate(data, 0.0) - std::log(2.0)) < 0.05);
            double prev = pressure_estimate(data, 0.0);
            for (int k = 1; k <= 40; ++k) {
                const double cur = pressure_estimate(data, 0.05 * k);
                CHECK(cur < prev);
                prev = cur;
            }
        }
    }
}

TEST_CASE("solve_h on hyperbolic and parabolic maps") {
    CHECK(std::abs(solve_h(RationalMap::quadratic(0.0), 8).h - 1.0) < 0.02);
    CHECK(std::abs(solve_h(RationalMap::quadratic(-2.0), 8).h - 1.0) < 0.05);
    const RationalMap inv(Polynomial({1.0}), Polynomial({0.0, 0.0, 1.0}));
    CHECK(std::abs(solve_h(inv, 8).h - 1.0) < 0.02);

    const auto est = solve_h(cauliflower(), 12);
    CHECK(est.h > 1.0);
    CHECK(est.h < 1.3);
    CHECK(est.p_max == 1);
    CHECK(est.excluded == 1);
    CHECK(est.lower == doctest::Approx(0.501));
}

TEST_CASE("property: h stays above the parabolic bound") {
    // z + z^2, z + z^3 and -z + z^2 (petal 2 for the second iterate)
    const RationalMap maps[] = {RationalMap::polynomial(Polynomial({0.0, 1.0, 1.0})),
                                RationalMap::polynomial(Polynomial({0.0, 1.0, 0.0, 1.0})),
                                RationalMap::polynomial(Polynomial({0.0, -1.0, 1.0}))};
    for (const auto& m : maps) {
        const int p = max_petal(parabolic_points_iterated(m));
        CHECK(p == (m.numer().coeff(1) == Complex(-1.0) ? 2 : m.degree() - 1));
        const int n = m.degree() == 2 ? 10 : 6;
        const auto est = solve_h(m, n);
        CHECK(est.h > static_cast<double>(p) / (1.0 + p));
        CHECK(est.h < 2.0);
    }
}

TEST_CASE("property: successive estimates settle") {
    for (const auto& m : {RationalMap::quadratic(0.0), cauliflower()}) {
        std::vector<double> h;
        for (int n = 6; n <= 12; n += 2) h.push_back(solve_h(m, n).h);
        for (std::size_t k = 2; k < h.size(); ++k) {
            CHECK(std::abs(h[k] - h[k - 1]) <= std::abs(h[k - 1] - h[k - 2]) + 1e-6);
        }
    }
}

TEST_CASE("canonical ball mass with h from the pressure") {
    const auto m = RationalMap::polynomial(Polynomial({0.0, 1.0, 1.0}));
    const double h = solve_h(m, 12).h;
    const auto pp = parabolic_points(m).front();
    CanonicalOptions opts;
    opts.min_radius = 1e-300;
    const auto balls = canonical_balls(m, pp, 12, opts);
    std::vector<double> mass(13, 0.0);
    for (const auto& b : balls) mass[static_cast<std::size_t>(b.generation)] += std::pow(b.radius, h);
    for (std::size_t g = 1; g < mass.size(); ++g) {
        CHECK(mass[g] > 0.2 * mass[0]);
        CHECK(mass[g] < 5.0 * mass[0]);
    }
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(pressure_estimate(PressureData{}, 1.0), Error);
    try {
        (void)pressure_estimate(PressureData{3, {}, 2}, 1.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptySum);
    }
    // a single repelling fixed point: P_1(t) = -t log 2 < 0 on the whole bracket
    const auto data = pressure_data(periodic_points(RationalMap::quadratic(0.0), 1), 1);
    try {
        (void)solve_h(data, 0);
        FAIL("expected NoSignChange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoSignChange);
    }
    try {
        (void)periodic_points(RationalMap::quadratic(0.0), 21);
        FAIL("expected ExplosionGuard");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ExplosionGuard);
    }
    PeriodicOptions small;
    small.budget = 100;
    CHECK_THROWS_AS(periodic_points(RationalMap::quadratic(0.0), 7, small), Error);
    CHECK_THROWS_AS(periodic_points(RationalMap::quadratic(0.0), 0), Error);
}

TEST_CASE("pressure curve CSV") {
    const auto data = pressure_data(periodic_points(cauliflower(), 6), 6);
    const double ts[] = {0.0, 0.5, 1.0};
    const auto curve = pressure_curve(data, ts);
    CHECK(curve.excluded_parabolic_count == 1);
    std::ostringstream out;
    write_pressure_csv(out, curve);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,P_n,order,excluded");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.substr(line.size() - 4) == ",6,1");
    }
    CHECK(rows == 3);
}
