#include "parajulia/escape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "parajulia/error.hpp"

namespace parajulia {

namespace {

void require_polynomial(const RationalMap& map) {
    if (!map.is_polynomial()) {
        throw Error(ErrorCode::InvalidMap, "escape-time membership needs a polynomial map");
    }
}

} // namespace

double default_bailout(const RationalMap& map) {
    require_polynomial(map);
    const Polynomial p = Complex{1.0, 0.0} / map.denom().coeff(0) * map.numer();
    double lower = 0.0;
    for (int k = 0; k < p.degree(); ++k) lower += std::abs(p.coeff(k));
    const double escape = std::max(1.0, (2.0 + lower) / std::abs(p.leading()));
    return std::max(escape, 2.5 * std::max(1.0, map.coefficient_scale()));
}

bool escape_membership(const RationalMap& map, Complex z, std::size_t max_iter, double bailout) {
    require_polynomial(map);
    if (!(bailout > 2.0 * std::max(1.0, map.coefficient_scale()))) {
        throw Error(ErrorCode::InvalidArgument, "bailout must exceed 2 max(1, coefficient scale)");
    }
    const Polynomial p = Complex{1.0, 0.0} / map.denom().coeff(0) * map.numer();
    for (std::size_t k = 0; k < max_iter; ++k) {
        if (!(std::abs(z) < bailout)) return false;
        z = p(z);
    }
    return std::abs(z) < bailout;
}

Complex bisect_boundary(const RationalMap& map, Complex inside, Complex outside, double tol, std::size_t max_iter,
                        double bailout) {
    while (std::abs(outside - inside) > tol) {
        const Complex mid = 0.5 * (inside + outside);
        if (escape_membership(map, mid, max_iter, bailout)) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    return 0.5 * (inside + outside);
}

bool near_escape_boundary(const RationalMap& map, Complex z, double radius, std::size_t max_iter, double bailout,
                          int samples) {
    bool seen_in = false;
    bool seen_out = false;
    auto visit = [&](Complex w) {
        if (escape_membership(map, w, max_iter, bailout)) {
            seen_in = true;
        } else {
            seen_out = true;
        }
        return seen_in && seen_out;
    };
    if (visit(z)) return true;
    for (const double rho : {radius, 0.5 * radius}) {
        for (int k = 0; k < samples; ++k) {
            if (visit(z + std::polar(rho, 2.0 * std::numbers::pi * (k + 0.5) / samples))) return true;
        }
    }
    return false;
}

PointCloud escape_boundary_scan(const RationalMap& map, const BoundaryScanOptions& options) {
    require_polynomial(map);
    if (options.grid < 2) {
        throw Error(ErrorCode::InvalidArgument, "grid must have at least 2 points per side");
    }
    const double bailout = options.bailout > 0.0 ? options.bailout : default_bailout(map);
    const std::size_t n = options.grid;
    const double step = 2.0 * options.half_width / static_cast<double>(n - 1);
    auto node = [&](std::size_t i, std::size_t j) {
        return options.center + Complex(-options.half_width + step * static_cast<double>(i),
                                        -options.half_width + step * static_cast<double>(j));
    };
    std::vector<char> inside(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            inside[i * n + j] = escape_membership(map, node(i, j), options.max_iter, bailout) ? 1 : 0;
        }
    }
    PointCloud cloud;
    cloud.provenance = Provenance::EscapeBoundary;
    auto edge = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
        const char a = inside[i0 * n + j0];
        const char b = inside[i1 * n + j1];
        if (a == b) return;
        const Complex in = a ? node(i0, j0) : node(i1, j1);
        const Complex out = a ? node(i1, j1) : node(i0, j0);
        cloud.points.push_back(bisect_boundary(map, in, out, options.tol, options.max_iter, bailout));
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i + 1 < n) edge(i, j, i + 1, j);
            if (j + 1 < n) edge(i, j, i, j + 1);
        }
    }
    return cloud;
}

} // namespace parajulia
