#include "parajulia/rational_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parajulia/error.hpp"

namespace parajulia {

RationalMap::RationalMap(Polynomial numer, Polynomial denom) : numer_(std::move(numer)), denom_(std::move(denom)) {
    if (denom_.is_zero()) {
        throw Error(ErrorCode::InvalidMap, "denominator is the zero polynomial");
    }
    if (numer_.is_zero()) {
        throw Error(ErrorCode::InvalidMap, "numerator is the zero polynomial");
    }
    degree_ = std::max(numer_.degree(), denom_.degree());
    if (degree_ < 2) {
        throw Error(ErrorCode::InvalidMap, "rational map must have degree >= 2, got " + std::to_string(degree_));
    }
    if (denom_.degree() >= 1) {
        const double scale = numer_.scale();
        for (const Complex& pole : polynomial_roots(denom_)) {
            double magnitude = 0.0;
            double power = 1.0;
            for (const Complex& c : numer_.coeffs()) {
                magnitude += std::abs(c) * power;
                power *= std::abs(pole);
            }
            if (std::abs(numer_(pole)) <= 1e-9 * std::max(magnitude, scale)) {
                throw Error(ErrorCode::InvalidMap,
                            "numerator and denominator share the root " + format_complex(pole));
            }
        }
    }
}

RationalMap RationalMap::polynomial(Polynomial p) { return {std::move(p), Polynomial({Complex{1.0, 0.0}})}; }

RationalMap RationalMap::quadratic(Complex c) { return polynomial(Polynomial({c, Complex{}, Complex{1.0, 0.0}})); }

double RationalMap::coefficient_scale() const noexcept { return std::max(numer_.scale(), denom_.scale()); }

Complex RationalMap::operator()(Complex z) const {
    const Complex d = denom_(z);
    if (std::abs(d) < kPoleTolerance * coefficient_scale()) {
        throw Error(ErrorCode::PoleHit, "denominator vanishes at " + format_complex(z));
    }
    const Complex value = numer_(z) / d;
    if (!is_finite(value)) {
        throw Error(ErrorCode::PoleHit, "value overflows at " + format_complex(z));
    }
    return value;
}

std::pair<Complex, Complex> RationalMap::eval_with_derivative(Complex z) const {
    const auto [n, dn] = numer_.eval_with_derivative(z);
    const auto [d, dd] = denom_.eval_with_derivative(z);
    if (std::abs(d) < kPoleTolerance * coefficient_scale()) {
        throw Error(ErrorCode::PoleHit, "denominator vanishes at " + format_complex(z));
    }
    const Complex value = n / d;
    const Complex deriv = (dn * d - n * dd) / (d * d);
    if (!is_finite(value) || !is_finite(deriv)) {
        throw Error(ErrorCode::PoleHit, "value overflows at " + format_complex(z));
    }
    return {value, deriv};
}

Complex RationalMap::derivative(Complex z) const { return eval_with_derivative(z).second; }

std::vector<Complex> RationalMap::preimage_roots(Complex w) const {
    const Polynomial equation = numer_ - w * denom_;
    if (equation.degree() < 1) {
        return {};
    }
    return polynomial_roots(equation);
}

std::vector<Root> RationalMap::preimages(Complex w) const {
    const std::vector<Complex> raw = preimage_roots(w);
    return cluster_roots(raw, 1e-7);
}

Polynomial RationalMap::fixed_point_polynomial() const {
    return numer_ - Polynomial({Complex{}, Complex{1.0, 0.0}}) * denom_;
}

Polynomial RationalMap::critical_point_polynomial() const {
    return numer_.derivative() * denom_ - numer_ * denom_.derivative();
}

OrbitResult orbit(const RationalMap& map, Complex z, std::size_t n) {
    OrbitResult result;
    result.points.reserve(n + 1);
    result.points.push_back(z);
    for (std::size_t k = 0; k < n; ++k) {
        std::pair<Complex, Complex> step;
        try {
            step = map.eval_with_derivative(z);
        } catch (const Error& e) {
            throw Error(ErrorCode::PoleHit, e.what(), static_cast<long>(k));
        }
        const double m = std::abs(step.second);
        result.log_derivative += std::log(m);
        result.derivative_modulus *= m;
        z = step.first;
        result.points.push_back(z);
    }
    return result;
}

namespace {

// Homogenized evaluation p(X/Y) * Y^d for a polynomial p with formal degree d.
Polynomial homogeneous_substitute(const Polynomial& p, int formal_degree, const Polynomial& x, const Polynomial& y) {
    Polynomial out;
    std::vector<Polynomial> xpow{Polynomial({Complex{1.0, 0.0}})};
    std::vector<Polynomial> ypow{Polynomial({Complex{1.0, 0.0}})};
    for (int k = 1; k <= formal_degree; ++k) {
        xpow.push_back(xpow.back() * x);
        ypow.push_back(ypow.back() * y);
    }
    for (int k = 0; k <= p.degree(); ++k) {
        out = out + p.coeff(k) * (xpow[static_cast<std::size_t>(k)] * ypow[static_cast<std::size_t>(formal_degree - k)]);
    }
    return out;
}

} // namespace

RationalMap compose(const RationalMap& outer, const RationalMap& inner) {
    const int d = outer.degree();
    Polynomial numer = homogeneous_substitute(outer.numer(), d, inner.numer(), inner.denom());
    Polynomial denom = homogeneous_substitute(outer.denom(), d, inner.numer(), inner.denom());
    return {std::move(numer), std::move(denom)};
}

RationalMap iterate(const RationalMap& map, int k) {
    if (k < 1) {
        throw Error(ErrorCode::InvalidArgument, "iterate count must be >= 1");
    }
    RationalMap result = map;
    for (int i = 1; i < k; ++i) {
        result = compose(map, result);
    }
    return result;
}

} // namespace parajulia
