#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/polynomial.hpp"
#include "parajulia/roots.hpp"

namespace parajulia {

/// A rational self-map T = numer / denom of the plane, degree >= 2.
///
/// Immutable after construction. Construction rejects maps whose numerator
/// and denominator share a root: the numerator is evaluated at every root of
/// the denominator and must stay away from zero relative to its scale, which
/// is the resultant test carried out root by root.
class RationalMap {
public:
    RationalMap(Polynomial numer, Polynomial denom);

    static RationalMap polynomial(Polynomial p);
    /// z -> z^2 + c
    static RationalMap quadratic(Complex c);

    [[nodiscard]] const Polynomial& numer() const noexcept { return numer_; }
    [[nodiscard]] const Polynomial& denom() const noexcept { return denom_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] bool is_polynomial() const noexcept { return denom_.degree() == 0; }
    /// max |coefficient| over numerator and denominator.
    [[nodiscard]] double coefficient_scale() const noexcept;

    /// T(z). Throws Error(PoleHit) when |denom(z)| is below the pole tolerance.
    [[nodiscard]] Complex operator()(Complex z) const;
    [[nodiscard]] Complex eval(Complex z) const { return (*this)(z); }
    /// T'(z) by the quotient rule.
    [[nodiscard]] Complex derivative(Complex z) const;
    [[nodiscard]] std::pair<Complex, Complex> eval_with_derivative(Complex z) const;

    /// All solutions of T(z) = w repeated by multiplicity (numer - w*denom = 0).
    [[nodiscard]] std::vector<Complex> preimage_roots(Complex w) const;
    /// Same solutions with near-coincident approximations merged and counted.
    [[nodiscard]] std::vector<Root> preimages(Complex w) const;

    /// numer(z) - z*denom(z): its roots are the finite fixed points.
    [[nodiscard]] Polynomial fixed_point_polynomial() const;
    /// numer'*denom - numer*denom': its roots are the finite critical points.
    [[nodiscard]] Polynomial critical_point_polynomial() const;

private:
    Polynomial numer_;
    Polynomial denom_;
    int degree_ = 0;
};

/// Relative pole tolerance: |denom(z)| below this times the coefficient scale is a pole.
inline constexpr double kPoleTolerance = 1e-300;

struct OrbitResult {
    std::vector<Complex> points;  ///< z, T(z), ..., T^n(z)
    double derivative_modulus = 1.0;  ///< |(T^n)'(z)|
    double log_derivative = 0.0;  ///< log |(T^n)'(z)|, finite even when the modulus overflows
};

/// Forward orbit with the chain-rule derivative product. A pole hit is
/// reported as Error(PoleHit) carrying the step index.
OrbitResult orbit(const RationalMap& map, Complex z, std::size_t n);

/// T o S as a rational map (degree multiplies).
RationalMap compose(const RationalMap& outer, const RationalMap& inner);
/// T^k as a rational map. Intended for small k: coefficients are explicit.
RationalMap iterate(const RationalMap& map, int k);

} // namespace parajulia
