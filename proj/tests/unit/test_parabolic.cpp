#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "parajulia/error.hpp"
#include "parajulia/fixed_points.hpp"
#include "parajulia/flower.hpp"

using namespace parajulia;

namespace {

Complex turn(double x) { return std::polar(1.0, 2.0 * std::numbers::pi * x); }

RationalMap model(int p) {
    // w -> w + w^(p+1)
    std::vector<Complex> c(static_cast<std::size_t>(p) + 2, 0.0);
    c[1] = 1.0;
    c.back() = 1.0;
    return RationalMap::polynomial(Polynomial(c));
}

} // namespace

TEST_CASE("classify_multiplier") {
    auto c = classify_multiplier(1.0);
    CHECK(c.kind == FixedPointClass::RationallyIndifferent);
    CHECK(c.num == 0);
    CHECK(c.den == 1);
    c = classify_multiplier(turn(1.0 / 3.0));
    CHECK(c.kind == FixedPointClass::RationallyIndifferent);
    CHECK(c.num == 1);
    CHECK(c.den == 3);
    CHECK(classify_multiplier(turn(std::sqrt(2.0) - 1.0)).kind == FixedPointClass::CremerCandidate);
    CHECK(classify_multiplier(0.0).kind == FixedPointClass::Attracting);
    CHECK(classify_multiplier(2.0).kind == FixedPointClass::Repelling);
    c = classify_multiplier(turn(-2.0 / 7.0));
    CHECK(c.kind == FixedPointClass::RationallyIndifferent);
    CHECK(c.num == 5);
    CHECK(c.den == 7);
    CHECK(classify_multiplier(turn(1.0 - 1e-12)).num == 0);
    CHECK(classify_multiplier(Complex(NAN, 0.0)).kind == FixedPointClass::Undetermined);
}

TEST_CASE("property: tightening tol never swaps attracting and repelling") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mod(0.9, 1.1), ang(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const Complex l = mod(rng) * turn(ang(rng));
        for (double loose : {1e-2, 1e-4}) {
            const auto a = classify_multiplier(l, {loose, 1000}).kind;
            const auto b = classify_multiplier(l, {1e-9, 1000}).kind;
            if (a == FixedPointClass::Attracting) CHECK(b != FixedPointClass::Repelling);
            if (a == FixedPointClass::Repelling) CHECK(b != FixedPointClass::Attracting);
            if (a == FixedPointClass::Attracting || a == FixedPointClass::Repelling) CHECK(a == b);
        }
    }
}

TEST_CASE("fixed points of z^2") {
    const auto fps = find_fixed_points(RationalMap::quadratic(0.0));
    REQUIRE(fps.size() == 2);
    CHECK(std::abs(fps[0].location) < 1e-14);
    CHECK(std::abs(fps[0].multiplier) < 1e-14);
    CHECK(fps[0].classification.kind == FixedPointClass::Attracting);
    CHECK(std::abs(fps[1].location - 1.0) < 1e-14);
    CHECK(std::abs(fps[1].multiplier - 2.0) < 1e-14);
    CHECK(fps[1].classification.kind == FixedPointClass::Repelling);
}

TEST_CASE("fixed points of the cauliflower") {
    const RationalMap t = RationalMap::quadratic(0.25);
    const auto fps = find_fixed_points(t);
    REQUIRE(fps.size() == 1);
    CHECK(fps[0].multiplicity == 2);
    CHECK(std::abs(fps[0].location - 0.5) < 1e-12);
    CHECK(std::abs(fps[0].multiplier - 1.0) < 1e-12);
    CHECK(fps[0].classification.kind == FixedPointClass::RationallyIndifferent);
    CHECK(fps[0].classification.num == 0);
    for (const auto& fp : fps) {
        CHECK(std::abs(t(fp.location) - fp.location) < 1e-10 * (1.0 + std::abs(fp.location)));
    }
}

TEST_CASE("Cremer candidate") {
    const double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
    const RationalMap t = RationalMap::polynomial(Polynomial({0.0, turn(alpha), 1.0}));
    const auto fps = find_fixed_points(t);
    REQUIRE(fps.size() == 2);
    bool found = false;
    for (const auto& fp : fps) {
        if (std::abs(fp.location) < 1e-12) {
            found = true;
            CHECK(std::abs(std::abs(fp.multiplier) - 1.0) < 1e-12);
            CHECK(fp.classification.kind == FixedPointClass::CremerCandidate);
        }
    }
    CHECK(found);
}

TEST_CASE("petal numbers") {
    auto pp = petal_number(model(1), 0.0);
    CHECK(pp.petal == 1);
    CHECK(std::abs(pp.leading_coeff - 1.0) < 1e-14);
    REQUIRE(pp.repelling_dirs.size() == 1);
    CHECK(std::abs(pp.repelling_dirs[0] - 1.0) < 1e-14);
    CHECK(pp.r_omega == 0.125);

    pp = petal_number(model(2), 0.0);
    CHECK(pp.petal == 2);
    REQUIRE(pp.repelling_dirs.size() == 2);
    CHECK(std::abs(pp.repelling_dirs[0] - 1.0) < 1e-14);
    CHECK(std::abs(pp.repelling_dirs[1] + 1.0) < 1e-14);

    pp = petal_number(RationalMap::quadratic(0.25), 0.5);
    CHECK(pp.petal == 1);
    CHECK(std::abs(pp.leading_coeff - 1.0) < 1e-12);
    CHECK(std::abs(pp.repelling_dirs[0] - 1.0) < 1e-12);
}

TEST_CASE("property: model maps have petal p") {
    for (int p = 1; p <= 4; ++p) {
        const auto pp = petal_number(model(p), 0.0);
        CHECK(pp.petal == p);
        for (const auto& u : pp.repelling_dirs) {
            const Complex v = pp.leading_coeff * std::pow(u, p);
            CHECK(v.real() > 0.0);
            CHECK(std::abs(v.imag()) < 1e-12);
        }
    }
}

TEST_CASE("local form matches on a small circle") {
    const RationalMap maps[] = {RationalMap::quadratic(0.25), model(2),
                                RationalMap(Polynomial({0.0, 1.0, 1.0}), Polynomial({1.0, 0.0, 0.5}))};
    const Complex omegas[] = {0.5, 0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        const auto pp = petal_number(maps[i], omegas[i]);
        for (int k = 0; k < 16; ++k) {
            const Complex w = 1e-3 * turn(k / 16.0);
            const Complex model_value = pp.omega + w + pp.leading_coeff * std::pow(w, pp.petal + 1);
            CHECK(std::abs(maps[i](pp.omega + w) - model_value) < 1e-8);
        }
    }
}

TEST_CASE("petal errors") {
    CHECK_THROWS_AS((void)petal_number(RationalMap::quadratic(0.0), 1.0), Error);
    try {
        (void)petal_number(RationalMap::quadratic(0.0), 1.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotParabolic);
    }
}

TEST_CASE("parabolic iterate for a rotation number 1/2") {
    // z -> -z + z^2 has multiplier -1 at 0
    const RationalMap t = RationalMap::polynomial(Polynomial({0.0, -1.0, 1.0}));
    CHECK(parabolic_period(t) == 2);
    CHECK(parabolic_points(t).empty());
    const auto pps = parabolic_points(iterate(t, 2));
    REQUIRE(pps.size() == 1);
    CHECK(pps[0].petal == 2);
    const auto direct = parabolic_points_iterated(t);
    REQUIRE(direct.size() == 1);
    CHECK(direct[0].petal == 2);
    CHECK(std::abs(direct[0].omega) < 1e-9);
    CHECK(parabolic_points_iterated(RationalMap::quadratic(0.25)).size() == 1);
}

TEST_CASE("h bound") {
    CHECK_NOTHROW(check_h_bound(1.08, 1));
    CHECK_NOTHROW(check_h_bound(0.3, 0));
    for (double h : {0.5, 0.4, 2.5}) {
        try {
            check_h_bound(h, 1);
            FAIL("expected InvalidH");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidH);
        }
    }
}

TEST_CASE("fixed point report") {
    const auto j = nlohmann::json::parse(fixed_point_report_json(RationalMap::quadratic(0.25)));
    REQUIRE(j.size() == 1);
    CHECK(j[0]["class"] == "RationallyIndifferent");
    CHECK(j[0]["petal"] == 1);
    CHECK(j[0]["directions"].size() == 1);
}

TEST_CASE("flower deviation on synthetic clouds") {
    ParabolicPoint pp;
    pp.omega = Complex(0.5, 0.0);
    pp.petal = 1;
    pp.leading_coeff = 1.0;
    pp.repelling_dirs = {1.0};
    pp.r_omega = 0.125;
    std::vector<double> radii;
    for (int k = 4; k <= 10; ++k) radii.push_back(std::ldexp(1.0, -k));

    std::vector<Complex> on_ray, parabola;
    for (int i = 1; i <= 4000; ++i) {
        const double t = std::ldexp(1.0, -11) * i / 40.0 + 1e-9;
        on_ray.push_back(pp.omega + t);
        parabola.push_back(pp.omega + Complex(t, t * t));
        parabola.push_back(pp.omega + Complex(t, -t * t));
    }
    auto report = flower_deviation(on_ray, pp, radii);
    for (const auto& s : report.samples) CHECK(s.max_deviation == 0.0);
    CHECK(!report.slope.has_value());

    report = flower_deviation(parabola, pp, radii);
    REQUIRE(report.slope.has_value());
    CHECK(*report.slope == doctest::Approx(2.0).epsilon(0.025));

    std::vector<Complex> sparse(on_ray.begin(), on_ray.begin() + 10);
    try {
        (void)flower_deviation(sparse, pp, radii);
        FAIL("expected InsufficientPoints");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientPoints);
    }
}

TEST_CASE("property: flower deviation is rotation invariant") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    ParabolicPoint pp;
    pp.omega = Complex(0.25, -0.5);
    pp.petal = 2;
    pp.repelling_dirs = {1.0, -1.0};
    pp.r_omega = 0.125;
    std::vector<Complex> cloud;
    for (int i = 0; i < 3000; ++i) cloud.push_back(pp.omega + Complex(u(rng), u(rng)));
    const std::vector<double> radii{0.1, 0.05, 0.02};
    const auto base = flower_deviation(cloud, pp, radii, 1);
    for (double angle : {0.3, 1.7, -2.2}) {
        const Complex rot = std::polar(1.0, angle);
        ParabolicPoint q = pp;
        for (auto& d : q.repelling_dirs) d *= rot;
        std::vector<Complex> turned;
        for (const auto& z : cloud) turned.push_back(pp.omega + (z - pp.omega) * rot);
        const auto r = flower_deviation(turned, q, radii, 1);
        for (std::size_t i = 0; i < radii.size(); ++i) {
            CHECK(std::abs(r.samples[i].max_deviation - base.samples[i].max_deviation) < 1e-12);
        }
    }
}
