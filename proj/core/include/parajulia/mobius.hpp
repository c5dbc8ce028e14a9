#pragma once

#include "parajulia/complex.hpp"
#include "parajulia/rational_map.hpp"

namespace parajulia {

/// z -> (a z + b) / (c z + d) with ad - bc != 0.
class Mobius {
public:
    Mobius(Complex a, Complex b, Complex c, Complex d);

    static Mobius identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mobius translation(Complex t) { return {1.0, t, 0.0, 1.0}; }
    /// z -> 1 / (z - center), sends center to infinity.
    static Mobius inversion(Complex center) { return {0.0, 1.0, 1.0, -center}; }

    [[nodiscard]] Complex a() const noexcept { return a_; }
    [[nodiscard]] Complex b() const noexcept { return b_; }
    [[nodiscard]] Complex c() const noexcept { return c_; }
    [[nodiscard]] Complex d() const noexcept { return d_; }
    [[nodiscard]] Complex determinant() const noexcept { return a_ * d_ - b_ * c_; }

    /// Throws Error(PoleHit) at the pole -d/c.
    [[nodiscard]] Complex operator()(Complex z) const;
    [[nodiscard]] Mobius inverse() const { return {d_, -b_, -c_, a_}; }

private:
    Complex a_, b_, c_, d_;
};

/// m o T o m^-1 in lowest terms. Throws Error(DegenerateConjugation) when
/// cancellation leaves degree below 2.
RationalMap conjugate(const RationalMap& map, const Mobius& m);

} // namespace parajulia
