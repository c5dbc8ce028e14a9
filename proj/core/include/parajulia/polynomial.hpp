#pragma once

#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "parajulia/complex.hpp"

namespace parajulia {

/// Dense complex polynomial, coefficients in ascending degree.
///
/// Trailing zero coefficients are stripped on construction so that degree()
/// is the true degree; the zero polynomial has degree -1 and no coefficients.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Complex> coeffs);
    Polynomial(std::initializer_list<Complex> coeffs);

    static Polynomial constant(Complex c) { return Polynomial({c}); }
    static Polynomial monomial(Complex c, int power);

    [[nodiscard]] int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    [[nodiscard]] bool is_zero() const noexcept { return coeffs_.empty(); }
    [[nodiscard]] std::span<const Complex> coeffs() const noexcept { return coeffs_; }
    [[nodiscard]] Complex coeff(int k) const noexcept;
    [[nodiscard]] Complex leading() const noexcept;
    /// Largest coefficient modulus, 0 for the zero polynomial.
    [[nodiscard]] double scale() const noexcept;

    [[nodiscard]] Complex operator()(Complex z) const noexcept;
    /// Horner evaluation of p(z) and p'(z) in one pass.
    [[nodiscard]] std::pair<Complex, Complex> eval_with_derivative(Complex z) const noexcept;

    [[nodiscard]] Polynomial derivative() const;
    /// Coefficients of q(w) = p(center + w).
    [[nodiscard]] Polynomial taylor_shift(Complex center) const;
    /// Drops trailing coefficients below tol * scale().
    [[nodiscard]] Polynomial trimmed(double tol) const;
    [[nodiscard]] Polynomial pow(int k) const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(Complex s, const Polynomial& p);

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void normalize();

    std::vector<Complex> coeffs_;
};

/// Power series quotient a/b truncated to `terms` coefficients. b(0) must be nonzero.
std::vector<Complex> series_divide(std::span<const Complex> a, std::span<const Complex> b, int terms);

} // namespace parajulia
