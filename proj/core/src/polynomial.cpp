#include "parajulia/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "parajulia/error.hpp"

namespace parajulia {

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

Polynomial::Polynomial(std::initializer_list<Complex> coeffs) : coeffs_(coeffs) { normalize(); }

Polynomial Polynomial::monomial(Complex c, int power) {
    std::vector<Complex> coeffs(static_cast<std::size_t>(power) + 1, Complex{});
    coeffs.back() = c;
    return Polynomial(std::move(coeffs));
}

void Polynomial::normalize() {
    while (!coeffs_.empty() && coeffs_.back() == Complex{}) {
        coeffs_.pop_back();
    }
}

Complex Polynomial::coeff(int k) const noexcept {
    if (k < 0 || k >= static_cast<int>(coeffs_.size())) {
        return {};
    }
    return coeffs_[static_cast<std::size_t>(k)];
}

Complex Polynomial::leading() const noexcept { return coeffs_.empty() ? Complex{} : coeffs_.back(); }

double Polynomial::scale() const noexcept {
    double s = 0.0;
    for (const Complex& c : coeffs_) {
        s = std::max(s, std::abs(c));
    }
    return s;
}

Complex Polynomial::operator()(Complex z) const noexcept {
    Complex acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * z + *it;
    }
    return acc;
}

std::pair<Complex, Complex> Polynomial::eval_with_derivative(Complex z) const noexcept {
    Complex p{};
    Complex dp{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        dp = dp * z + p;
        p = p * z + *it;
    }
    return {p, dp};
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) {
        return {};
    }
    std::vector<Complex> out(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) {
        out[k - 1] = coeffs_[k] * static_cast<double>(k);
    }
    return Polynomial(std::move(out));
}

Polynomial Polynomial::taylor_shift(Complex center) const {
    // Repeated synthetic division: exact in the sense of polynomial algebra.
    std::vector<Complex> c = coeffs_;
    const std::size_t n = c.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t k = n - 1; k > i; --k) {
            c[k - 1] += center * c[k];
        }
    }
    return Polynomial(std::move(c));
}

Polynomial Polynomial::trimmed(double tol) const {
    const double cut = tol * scale();
    std::vector<Complex> c = coeffs_;
    while (!c.empty() && std::abs(c.back()) <= cut) {
        c.pop_back();
    }
    return Polynomial(std::move(c));
}

Polynomial Polynomial::pow(int k) const {
    if (k < 0) {
        throw Error(ErrorCode::InvalidArgument, "negative polynomial power");
    }
    Polynomial result({Complex{1.0, 0.0}});
    Polynomial base = *this;
    while (k > 0) {
        if (k & 1) {
            result = result * base;
        }
        k >>= 1;
        if (k > 0) {
            base = base * base;
        }
    }
    return result;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Complex> out(std::max(a.coeffs_.size(), b.coeffs_.size()));
    for (std::size_t k = 0; k < a.coeffs_.size(); ++k) out[k] += a.coeffs_[k];
    for (std::size_t k = 0; k < b.coeffs_.size(); ++k) out[k] += b.coeffs_[k];
    return Polynomial(std::move(out));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Complex{-1.0, 0.0} * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) {
        return {};
    }
    std::vector<Complex> out(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
            out[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
    }
    return Polynomial(std::move(out));
}

Polynomial operator*(Complex s, const Polynomial& p) {
    std::vector<Complex> out = p.coeffs_;
    for (Complex& c : out) c *= s;
    return Polynomial(std::move(out));
}

std::vector<Complex> series_divide(std::span<const Complex> a, std::span<const Complex> b, int terms) {
    if (b.empty() || b[0] == Complex{}) {
        throw Error(ErrorCode::InvalidArgument, "series division by a series with zero constant term");
    }
    std::vector<Complex> q(static_cast<std::size_t>(terms));
    for (int k = 0; k < terms; ++k) {
        Complex acc = k < static_cast<int>(a.size()) ? a[static_cast<std::size_t>(k)] : Complex{};
        for (int j = 1; j <= k && j < static_cast<int>(b.size()); ++j) {
            acc -= b[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(k - j)];
        }
        q[static_cast<std::size_t>(k)] = acc / b[0];
    }
    return q;
}

} // namespace parajulia
