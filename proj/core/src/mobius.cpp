#include "parajulia/mobius.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "parajulia/error.hpp"
#include "parajulia/roots.hpp"

namespace parajulia {

Mobius::Mobius(Complex a, Complex b, Complex c, Complex d) : a_(a), b_(b), c_(c), d_(d) {
    const double size = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    if (!(std::abs(determinant()) > 1e-14 * size * size)) {
        throw Error(ErrorCode::DegenerateConjugation, "Mobius map has zero determinant");
    }
}

Complex Mobius::operator()(Complex z) const {
    const Complex den = c_ * z + d_;
    if (std::abs(den) < 1e-300) {
        throw Error(ErrorCode::PoleHit, "Mobius pole at " + format_complex(z));
    }
    return (a_ * z + b_) / den;
}

namespace {

// p(X/Y) * Y^deg for linear forms X, Y.
Polynomial homogenize(const Polynomial& p, int deg, const Polynomial& x, const Polynomial& y) {
    Polynomial out;
    for (int k = 0; k <= p.degree(); ++k) {
        out = out + p.coeff(k) * (x.pow(k) * y.pow(deg - k));
    }
    return out;
}

// Divides out (z - root) factors shared by numerator and denominator.
void cancel_common(Polynomial& numer, Polynomial& denom) {
    bool changed = true;
    while (changed && numer.degree() >= 1 && denom.degree() >= 1) {
        changed = false;
        for (const Complex& r : polynomial_roots(denom)) {
            double mag = 0.0;
            double pw = 1.0;
            for (const Complex& c : numer.coeffs()) {
                mag += std::abs(c) * pw;
                pw *= std::abs(r);
            }
            if (std::abs(numer(r)) <= 1e-9 * std::max(mag, 1e-300)) {
                // synthetic division by (z - r), remainders dropped
                auto divide = [&](const Polynomial& p) {
                    const auto c = p.coeffs();
                    std::vector<Complex> q(c.size() - 1);
                    Complex carry = 0.0;
                    for (std::size_t k = c.size() - 1; k >= 1; --k) {
                        carry = c[k] + carry * r;
                        q[k - 1] = carry;
                    }
                    return Polynomial(std::move(q));
                };
                numer = divide(numer);
                denom = divide(denom);
                changed = true;
                break;
            }
        }
    }
}

} // namespace

RationalMap conjugate(const RationalMap& map, const Mobius& m) {
    // T o m^-1 with m^-1(z) = (d z - b) / (-c z + a)
    const Polynomial x({-m.b(), m.d()});
    const Polynomial y({m.a(), -m.c()});
    const int deg = map.degree();
    const Polynomial p = homogenize(map.numer(), deg, x, y);
    const Polynomial q = homogenize(map.denom(), deg, x, y);
    Polynomial numer = m.a() * p + m.b() * q;
    Polynomial denom = m.c() * p + m.d() * q;
    const double scale = std::max(numer.scale(), denom.scale());
    if (scale == 0.0) {
        throw Error(ErrorCode::DegenerateConjugation, "conjugated map vanishes");
    }
    numer = (Complex{1.0 / scale, 0.0} * numer).trimmed(1e-14);
    denom = (Complex{1.0 / scale, 0.0} * denom).trimmed(1e-14);
    if (denom.is_zero() || numer.is_zero()) {
        throw Error(ErrorCode::DegenerateConjugation, "conjugated map is constant or infinite");
    }
    cancel_common(numer, denom);
    if (std::max(numer.degree(), denom.degree()) < 2) {
        throw Error(ErrorCode::DegenerateConjugation, "conjugation dropped degree below 2");
    }
    return {numer, denom};
}

} // namespace parajulia
