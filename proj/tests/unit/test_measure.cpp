#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parajulia/error.hpp"
#include "parajulia/measure.hpp"
#include "parajulia/pressure.hpp"
#include "parajulia/random.hpp"
#include "parajulia/spatial_index.hpp"

using namespace parajulia;

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

const RationalMap& cauliflower() {
    static const RationalMap m = RationalMap::quadratic(0.25);
    return m;
}

double cauliflower_h() {
    static const double h = solve_h(cauliflower(), 12).h;
    return h;
}

// log-uniform radius in [lo, hi]
double log_uniform(Rng& rng, double lo, double hi) { return lo * std::pow(hi / lo, rng.uniform()); }

} // namespace

TEST_CASE("zoom of z^2 on the circle") {
    const auto zoom = hyperbolic_zoom(RationalMap::quadratic(0.0), std::polar(1.0, 0.3), 10);
    REQUIRE(zoom.entries.size() == 11);
    CHECK_FALSE(zoom.terminating);
    CHECK(zoom.parabolic.empty());
    for (std::size_t j = 0; j < zoom.entries.size(); ++j) {
        CHECK(zoom.entries[j].n == static_cast<long>(j));
        CHECK(zoom.entries[j].r == doctest::Approx(std::ldexp(1.0, -static_cast<int>(j))).epsilon(1e-12));
        CHECK(zoom.entries[j].omega == -1);
    }
}

TEST_CASE("property: r_j is the chain-rule radius at n_j and strictly decreasing") {
    const auto pps = parabolic_points_iterated(cauliflower());
    const auto cloud = inverse_orbit_sample(cauliflower(), 5, 40, 40);
    for (const Complex& xi : cloud.points) {
        const auto zoom = hyperbolic_zoom(cauliflower(), pps, xi, 300);
        for (std::size_t j = 0; j < zoom.entries.size(); ++j) {
            const auto& e = zoom.entries[j];
            const auto orb = orbit(cauliflower(), xi, static_cast<std::size_t>(e.n));
            CHECK(e.r == doctest::Approx(1.0 / orb.derivative_modulus).epsilon(1e-8));
            if (j > 0) CHECK(e.r < zoom.entries[j - 1].r);
            CHECK(e.r >= 1e-13);
        }
    }
}

TEST_CASE("pre-parabolic point gives a terminating zoom ending at the canonical radius") {
    const auto pps = parabolic_points_iterated(cauliflower());
    REQUIRE(pps.size() == 1);
    Complex xi = -0.5;  // the other preimage of the parabolic point 1/2
    for (int k = 0; k < 8; ++k) xi = cauliflower().preimage_roots(xi)[static_cast<std::size_t>(k % 2)];
    const auto zoom = hyperbolic_zoom(cauliflower(), pps, xi, 400);
    CHECK(zoom.terminating);
    CHECK(zoom.entries.back().n == 8);
    CHECK(zoom.entries.back().omega == 0);
    const double canonical = 1.0 / orbit(cauliflower(), xi, 8).derivative_modulus;
    CHECK(zoom.entries.back().r == doctest::Approx(canonical).epsilon(1e-8));

    const double h = cauliflower_h();
    const auto tail = phi(zoom, 0.01 * canonical, h);
    CHECK(tail.case_tag == PhiCase::PreParabolicTail);
    CHECK(tail.value == doctest::Approx(std::pow(0.01, (h - 1.0) * 1)).epsilon(1e-12));
    CHECK(tail.omega_used.has_value());

    // the parabolic point itself
    const auto at_omega = hyperbolic_zoom(cauliflower(), pps, 0.5, 50);
    CHECK(at_omega.terminating);
    REQUIRE(at_omega.entries.size() == 1);
    CHECK(phi(at_omega, 1e-3, h).case_tag == PhiCase::PreParabolicTail);
}

TEST_CASE("parabolic passage length grows like distance^-p") {
    const auto map = RationalMap::polynomial(Polynomial({0.0, 1.0, 1.0}));
    const auto pps = parabolic_points_iterated(map);
    REQUIRE(pps.size() == 1);
    CHECK(pps[0].petal == 1);
    Complex x = julia_start_point(map);
    std::vector<double> products;
    for (int k = 1; k <= 10000; ++k) {
        const auto pre = map.preimage_roots(x);
        x = std::abs(pre[0]) < std::abs(pre[1]) ? pre[0] : pre[1];
        if (k == 100 || k == 1000 || k == 10000) {
            const auto zoom = hyperbolic_zoom(map, pps, x, 20000);
            products.push_back(static_cast<double>(zoom.entries.front().n) * std::abs(x));
        }
    }
    for (double v : products) CHECK(v == doctest::Approx(products.back()).epsilon(0.05));
}

TEST_CASE("zoom errors") {
    const auto pps = parabolic_points_iterated(cauliflower());
    CHECK(code_of([&] { (void)hyperbolic_zoom(RationalMap::quadratic(0.0), 1.5, 20); }) == ErrorCode::OrbitEscaped);
    // attracted to 1/2 along the real axis without landing on it
    CHECK(code_of([&] { (void)hyperbolic_zoom(cauliflower(), pps, 0.45, 60); }) == ErrorCode::NoReturns);
    CHECK(code_of([&] { (void)hyperbolic_zoom(cauliflower(), pps, 0.0, 10, 0.1); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { (void)hyperbolic_zoom(cauliflower(), pps, 0.0, -1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("phi examples") {
    const double radii[] = {1e-2, 1e-4};
    const int petals[] = {1};
    const auto zoom = synthetic_zoom(radii, petals, false);
    const auto at_j = phi(zoom, 1e-2, 1.5);
    CHECK(at_j.value == 1.0);
    CHECK(at_j.case_tag == PhiCase::RadialOuter);
    CHECK(at_j.j_used == 0);

    const double r_m = phi_threshold(1e-2, 1e-4, 1);
    CHECK(r_m == doctest::Approx(1e-3).epsilon(1e-12));
    const auto mid = phi(zoom, r_m, 1.5);
    CHECK(mid.value == doctest::Approx(0.31623).epsilon(1e-5));
    CHECK(phi_outer(r_m, 1e-2, 1, 1.5) == doctest::Approx(std::pow(1e-2, 0.25)).epsilon(1e-12));
    CHECK(phi_inner(r_m, 1e-4, 1.5) == doctest::Approx(std::pow(1e-2, 0.25)).epsilon(1e-12));
    CHECK(mid.r_m == doctest::Approx(r_m).epsilon(1e-12));
    CHECK(phi(zoom, 2e-3, 1.5).case_tag == PhiCase::RadialOuter);
    CHECK(phi(zoom, 5e-4, 1.5).case_tag == PhiCase::RadialInner);
    CHECK(phi(zoom, 1e-4, 1.5).value == doctest::Approx(1.0));

    for (double r : {1e-2, 3e-3, 1e-3, 2e-4, 1e-4}) {
        CHECK(phi(zoom, r, 1.0).value == 1.0);
        CHECK(measure_ball(zoom, r, 1.0) == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("phi errors") {
    const double radii[] = {1.0, 1e-3, 1e-6};
    const int petals[] = {1, 0};
    const auto zoom = synthetic_zoom(radii, petals, false);
    CHECK(code_of([&] { (void)phi(zoom, 2.0, 1.2); }) == ErrorCode::OutOfRange);
    CHECK(code_of([&] { (void)phi(zoom, 1e-7, 1.2); }) == ErrorCode::OutOfRange);
    CHECK(code_of([&] { (void)phi(zoom, 0.0, 1.2); }) == ErrorCode::OutOfRange);
    CHECK(code_of([&] { (void)phi(zoom, 1e-2, 0.5); }) == ErrorCode::InvalidH);
    CHECK(code_of([&] { (void)phi(zoom, 1e-2, 2.5); }) == ErrorCode::InvalidH);
    CHECK_NOTHROW((void)phi(zoom, 1e-6, 1.2));
    // the block without a passage has phi = 1
    CHECK(phi(zoom, 1e-4, 1.2).value == doctest::Approx(1.0));
    const double bad[] = {1.0, 2.0};
    const int one[] = {1};
    CHECK(code_of([&] { (void)synthetic_zoom(bad, one, false); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { (void)synthetic_zoom(radii, one, false); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("property: case branches agree at the threshold") {
    Rng rng(11);
    for (int i = 0; i < 10000; ++i) {
        const int p = 1 + static_cast<int>(rng.index(4));
        const double h = static_cast<double>(p) / (1 + p) + 1e-3 + rng.uniform() * (2.0 - static_cast<double>(p) / (1 + p) - 1e-3);
        const double r_j = log_uniform(rng, 1e-8, 1.0);
        const double r_next = r_j * log_uniform(rng, 1e-8, 0.5);
        const double r_m = phi_threshold(r_j, r_next, p);
        const double a = phi_outer(r_m, r_j, p, h);
        const double b = phi_inner(r_m, r_next, h);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(a, b));
    }
}

TEST_CASE("property: phi monotone between r_m and r_j") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const int p = 1 + static_cast<int>(rng.index(3));
        const double radii[] = {1.0, log_uniform(rng, 1e-8, 1e-2)};
        const int petals[] = {p};
        const auto zoom = synthetic_zoom(radii, petals, false);
        const double r_m = phi_threshold(radii[0], radii[1], p);
        for (double h : {0.9, 1.4}) {
            if (h <= static_cast<double>(p) / (1 + p)) continue;
            double prev = phi(zoom, r_m * 1.0001, h).value;
            for (int k = 1; k <= 20; ++k) {
                const double r = r_m * std::pow(1.0 / r_m, k / 20.0);
                const double cur = phi(zoom, std::min(r, 1.0), h).value;
                if (h > 1.0) {
                    CHECK(cur > prev);
                } else {
                    CHECK(cur < prev);
                }
                prev = cur;
            }
        }
    }
}

TEST_CASE("property: doubling ratios stay in the band") {
    Rng rng(13);
    for (int p : {1, 2}) {
        for (double h : {0.8, 1.2, 1.5}) {
            if (h <= static_cast<double>(p) / (1 + p)) continue;
            // blocks of random lengths, some without a passage, ending in a tail
            std::vector<double> radii{1.0};
            std::vector<int> petals;
            while (radii.back() > 1e-30) {
                radii.push_back(radii.back() * log_uniform(rng, 1e-6, 0.3));
                petals.push_back(rng.uniform() < 0.7 ? p : 0);
            }
            petals.push_back(p);
            const auto zoom = synthetic_zoom(radii, petals, true);
            const double top = std::pow(2.0, std::max(1.0, h + (h - 1.0) * p)) * 1.2;
            for (int i = 0; i < 100; ++i) {
                const double r = log_uniform(rng, 1e-40, 0.5);
                const double ratio = std::exp(log_measure_ball(zoom, 2 * r, h) - log_measure_ball(zoom, r, h));
                CHECK(ratio >= 1.0);
                CHECK(ratio <= top);
            }
        }
    }
}

TEST_CASE("two-scale ratio on a tail matches the spectrum formula") {
    for (int p : {1, 2}) {
        for (double h : {1.2, 1.5}) {
            const double radii[] = {1.0};
            const int petals[] = {p};
            const auto zoom = synthetic_zoom(radii, petals, true);
            for (double theta : {0.2, 0.5, 0.8}) {
                const double r = 1e-6;
                const double big = std::pow(r, theta);
                const double s = (log_measure_ball(zoom, big, h) - log_measure_ball(zoom, r, h)) / std::log(big / r);
                CHECK(s == doctest::Approx(h + (h - 1.0) * p).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("zoom CSV") {
    const double radii[] = {1.0, 0.5, 0.01};
    const int petals[] = {0, 2};
    std::ostringstream out;
    write_zoom_csv(out, synthetic_zoom(radii, petals, false));
    CHECK(out.str() == "j,n_j,r_j,omega_re,omega_im\n0,0,1,,\n1,1,0.5,0,0\n2,2,0.01,,\n");
}

TEST_CASE("empirical measure of z^2 with h = 1 is arclength") {
    const auto cloud = empirical_measure(RationalMap::quadratic(0.0), 1.0, 1, 18, 1 << 18);
    CHECK(cloud.size() == (1u << 18));
    double total = 0.0;
    for (double w : cloud.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const auto idx = build_index(cloud, 1e-7);
    CHECK(idx.range_weight(1.0, 0.1) / idx.range_weight(1.0, 0.2) == doctest::Approx(0.5).epsilon(0.05));
    // deeper than the tree: random continuation, weights stay uniform
    const auto deep = empirical_measure(RationalMap::quadratic(0.0), 1.0, 2, 24, 1 << 12);
    CHECK(deep.size() == (1u << 12));
    for (double w : deep.weights) CHECK(w == doctest::Approx(1.0 / (1 << 12)).epsilon(1e-9));
}

TEST_CASE("empirical measure: determinism and pushforward") {
    const double h = cauliflower_h();
    const auto a = empirical_measure(cauliflower(), h, 9, 20, 1 << 14);
    const auto b = empirical_measure(cauliflower(), h, 9, 20, 1 << 14);
    CHECK(a.points == b.points);
    CHECK(a.weights == b.weights);

    const auto cloud = empirical_measure(cauliflower(), h, 1, 20, 1 << 20);
    const auto idx = build_index(cloud, 1e-7);
    // small balls away from the critical point 0, where T is injective
    Rng rng(21);
    int tested = 0;
    while (tested < 5) {
        const Complex x = cloud.points[rng.index(cloud.size())];
        if (std::abs(x) < 0.5) continue;
        const double rho = 0.05;
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const Complex z = cloud.points[i];
            if (in_ball(z, x, rho)) rhs += cloud.weights[i] * std::pow(std::abs(cauliflower().derivative(z)), h);
            for (const Complex& y : cauliflower().preimage_roots(z)) {
                if (in_ball(y, x, rho)) {
                    lhs += cloud.weights[i];
                    break;
                }
            }
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(0.05));
        ++tested;
    }
    (void)idx;
}

TEST_CASE("property: zoom measure against the empirical measure") {
    SUBCASE("circle") {
        const auto map = RationalMap::quadratic(0.0);
        const auto cloud = empirical_measure(map, 1.0, 3, 20, 1 << 20);
        const auto idx = build_index(cloud, 1e-8);
        Rng rng(4);
        for (int i = 0; i < 50; ++i) {
            const Complex xi = cloud.points[rng.index(cloud.size())];
            const double r = log_uniform(rng, 0.02, 0.4);
            const auto zoom = hyperbolic_zoom(map, xi, 20);
            const double model = log_measure_ball(zoom, r, 1.0) - log_measure_ball(zoom, r / 8, 1.0);
            const double emp = std::log(idx.range_weight(xi, r) / idx.range_weight(xi, r / 8));
            CHECK(std::abs(model - emp) < 0.25);
        }
    }
    SUBCASE("cauliflower") {
        // the measure formula holds up to a bounded factor: most pairs agree
        // within 0.25 and the deviations have no bias
        const double h = cauliflower_h();
        const auto cloud = empirical_measure(cauliflower(), h, 3, 20, 1 << 20);
        const auto idx = build_index(cloud, 1e-8);
        const auto pps = parabolic_points_iterated(cauliflower());
        std::vector<double> cdf(cloud.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) cdf[i] = acc += cloud.weights[i];
        Rng rng(4);
        std::vector<double> dev;
        while (dev.size() < 50) {
            const auto k = std::min<std::size_t>(
                static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), rng.uniform()) - cdf.begin()),
                cloud.size() - 1);
            const Complex xi = cloud.points[k];
            const auto zoom = hyperbolic_zoom(cauliflower(), pps, xi, 200);
            const double r = std::min(zoom.entries.front().r, log_uniform(rng, 0.02, 0.1));
            const double model = log_measure_ball(zoom, r, h) - log_measure_ball(zoom, r / 8, h);
            dev.push_back(model - std::log(idx.range_weight(xi, r) / idx.range_weight(xi, r / 8)));
        }
        double mean = 0.0;
        int within = 0;
        for (double d : dev) {
            mean += d / static_cast<double>(dev.size());
            if (std::abs(d) < 0.25) ++within;
        }
        CHECK(std::abs(mean) < 0.1);
        CHECK(within >= 45);
    }
}
