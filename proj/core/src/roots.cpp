#include "parajulia/roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "parajulia/error.hpp"

namespace parajulia {

namespace {

double backward_error(const Polynomial& p, Complex z) {
    double denom = 0.0;
    const double az = std::abs(z);
    double power = 1.0;
    for (const Complex& c : p.coeffs()) {
        denom += std::abs(c) * power;
        power *= az;
    }
    if (denom == 0.0) {
        return 0.0;
    }
    return std::abs(p(z)) / denom;
}

Complex newton_polish(const Polynomial& p, Complex z) {
    double best = backward_error(p, z);
    for (int it = 0; it < 8 && best > 0.0; ++it) {
        const auto [v, dv] = p.eval_with_derivative(z);
        if (dv == Complex{}) {
            break;
        }
        const Complex candidate = z - v / dv;
        const double err = backward_error(p, candidate);
        if (!(err < best)) {
            break;
        }
        z = candidate;
        best = err;
    }
    return z;
}

std::vector<Complex> quadratic_roots(Complex a, Complex b, Complex c) {
    const Complex disc = std::sqrt(b * b - 4.0 * a * c);
    // Choose the sign that avoids cancellation.
    const Complex q = (std::real(std::conj(b) * disc) >= 0.0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
    if (q == Complex{}) {
        return {Complex{}, Complex{}};
    }
    return {q / a, c / q};
}

std::vector<Complex> aberth_roots(const Polynomial& p, const RootOptions& options) {
    const int n = p.degree();
    const auto coeffs = p.coeffs();
    // Initial radius from the geometric mean of root moduli, points spread on
    // a circle with an irrational angular offset to break symmetry.
    double radius = std::pow(std::abs(coeffs.front()) / std::abs(coeffs.back()), 1.0 / n);
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        radius = 1.0;
    }
    std::vector<Complex> z(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / n + 0.4;
        z[static_cast<std::size_t>(k)] = std::polar(radius, angle);
    }
    for (int it = 0; it < options.max_iterations; ++it) {
        bool converged = true;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const auto [v, dv] = p.eval_with_derivative(z[i]);
            if (v == Complex{}) {
                continue;
            }
            const Complex ratio = v / dv;
            Complex sum{};
            for (std::size_t j = 0; j < z.size(); ++j) {
                if (j != i) {
                    sum += 1.0 / (z[i] - z[j]);
                }
            }
            Complex step = ratio / (1.0 - ratio * sum);
            if (!is_finite(step)) {
                step = Complex{1e-8 * (1.0 + std::abs(z[i])), 1e-8};
            }
            z[i] -= step;
            if (std::abs(step) > options.tolerance * (1.0 + std::abs(z[i]))) {
                converged = false;
            }
        }
        if (converged) {
            break;
        }
    }
    return z;
}

} // namespace

std::vector<Complex> polynomial_roots(const Polynomial& p, const RootOptions& options) {
    if (p.degree() < 1) {
        throw Error(ErrorCode::RootFindFailure, "polynomial has no roots (degree < 1)");
    }
    // Exact zero roots are split off first.
    const auto coeffs = p.coeffs();
    std::size_t zeros = 0;
    while (zeros < coeffs.size() && coeffs[zeros] == Complex{}) {
        ++zeros;
    }
    std::vector<Complex> roots(zeros, Complex{});
    const Polynomial reduced(std::vector<Complex>(coeffs.begin() + static_cast<std::ptrdiff_t>(zeros), coeffs.end()));
    std::vector<Complex> rest;
    switch (reduced.degree()) {
    case 0:
        break;
    case 1:
        rest = {-reduced.coeff(0) / reduced.coeff(1)};
        break;
    case 2:
        rest = quadratic_roots(reduced.coeff(2), reduced.coeff(1), reduced.coeff(0));
        break;
    default:
        rest = aberth_roots(reduced, options);
        break;
    }
    for (Complex& r : rest) {
        r = newton_polish(reduced, r);
        if (!is_finite(r) || backward_error(reduced, r) > options.residual_tolerance) {
            throw Error(ErrorCode::RootFindFailure,
                        "root approximation " + format_complex(r) + " did not reach the residual tolerance");
        }
    }
    roots.insert(roots.end(), rest.begin(), rest.end());
    return roots;
}

Complex refine_multiple_root(const Polynomial& p, Complex z, int multiplicity) {
    Polynomial q = p;
    for (int k = 1; k < multiplicity; ++k) {
        q = q.derivative();
    }
    if (q.degree() < 1) {
        return z;
    }
    for (int it = 0; it < 20; ++it) {
        const auto [v, dv] = q.eval_with_derivative(z);
        if (dv == Complex{}) break;
        const Complex step = v / dv;
        if (!is_finite(step)) break;
        z -= step;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(z))) break;
    }
    return z;
}

std::vector<Root> cluster_roots(std::span<const Complex> roots, double tol) {
    std::vector<int> group(roots.size(), -1);
    std::vector<Root> out;
    std::vector<Complex> sums;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (group[i] >= 0) {
            continue;
        }
        const int g = static_cast<int>(out.size());
        group[i] = g;
        Complex sum = roots[i];
        int count = 1;
        // Single-linkage grow so that chains of close approximations merge.
        std::vector<std::size_t> frontier{i};
        while (!frontier.empty()) {
            const std::size_t a = frontier.back();
            frontier.pop_back();
            for (std::size_t j = 0; j < roots.size(); ++j) {
                if (group[j] < 0 && std::abs(roots[a] - roots[j]) <= tol * (1.0 + std::abs(roots[a]))) {
                    group[j] = g;
                    sum += roots[j];
                    ++count;
                    frontier.push_back(j);
                }
            }
        }
        out.push_back({sum / static_cast<double>(count), count});
    }
    return out;
}

int aberth_complete(const NewtonQuotient& quotient, std::span<const Complex> fixed, std::span<Complex> free,
                    const ImplicitRootOptions& options) {
    std::vector<char> done(free.size(), 0);
    std::vector<double> last_step(free.size(), std::numeric_limits<double>::infinity());
    int remaining = static_cast<int>(free.size());
    for (int it = 0; it < options.max_iterations && remaining > 0; ++it) {
        remaining = 0;
        for (std::size_t i = 0; i < free.size(); ++i) {
            if (done[i]) {
                continue;
            }
            const Complex ratio = quotient(free[i]);
            if (ratio == Complex{}) {
                done[i] = 1;
                continue;
            }
            Complex sum{};
            for (const Complex& r : fixed) {
                sum += 1.0 / (free[i] - r);
            }
            for (std::size_t j = 0; j < free.size(); ++j) {
                if (j != i) {
                    sum += 1.0 / (free[i] - free[j]);
                }
            }
            Complex step = ratio / (1.0 - ratio * sum);
            if (!is_finite(step)) {
                // Coincident approximations or a critical point: nudge and retry.
                step = Complex{1e-7 * (1.0 + std::abs(free[i])), 0.7e-7};
            }
            free[i] -= step;
            const double size = std::abs(step);
            const double scale = 1.0 + std::abs(free[i]);
            // near a multiple root the step stalls at rounding level instead of shrinking
            const bool stalled = size < 1e-6 * scale && size > 0.5 * last_step[i] && std::abs(ratio) < 1e-6 * scale;
            last_step[i] = size;
            if (size <= options.tolerance * scale || stalled) {
                done[i] = 1;
            } else {
                ++remaining;
            }
        }
    }
    return remaining;
}

} // namespace parajulia
