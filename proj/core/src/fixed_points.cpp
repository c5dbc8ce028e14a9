#include "parajulia/fixed_points.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "parajulia/error.hpp"
#include "parajulia/roots.hpp"

namespace parajulia {

std::string_view to_string(FixedPointClass c) {
    switch (c) {
    case FixedPointClass::Attracting: return "Attracting";
    case FixedPointClass::Repelling: return "Repelling";
    case FixedPointClass::RationallyIndifferent: return "RationallyIndifferent";
    case FixedPointClass::CremerCandidate: return "CremerCandidate";
    case FixedPointClass::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

Classification classify_multiplier(Complex multiplier, const ClassifyOptions& options) {
    Classification out;
    if (!is_finite(multiplier)) {
        return out;
    }
    const double modulus = std::abs(multiplier);
    if (modulus < 1.0 - options.tol) {
        out.kind = FixedPointClass::Attracting;
        return out;
    }
    if (modulus > 1.0 + options.tol) {
        out.kind = FixedPointClass::Repelling;
        return out;
    }
    double x = std::arg(multiplier) / (2.0 * std::numbers::pi);
    x -= std::floor(x);
    // convergents h_k / k_k of x
    long h_prev = 1, h = 0, k_prev = 0, k = 1;
    double rest = x;
    while (k <= options.qmax) {
        double gap = std::abs(x - static_cast<double>(h) / static_cast<double>(k));
        gap = std::min(gap, 1.0 - gap);
        if (gap <= options.tol) {
            out.kind = FixedPointClass::RationallyIndifferent;
            out.den = k;
            out.num = h % k;
            return out;
        }
        if (rest <= 0.0) break;
        const double inv = 1.0 / rest;
        const double a = std::floor(inv);
        rest = inv - a;
        if (a > 1e12) {
            // next convergent denominator exceeds any qmax
            break;
        }
        const long ai = static_cast<long>(a);
        const long h_next = ai * h + h_prev;
        const long k_next = ai * k + k_prev;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
    }
    out.kind = FixedPointClass::CremerCandidate;
    return out;
}

std::vector<FixedPointInfo> find_fixed_points(const RationalMap& map, const ClassifyOptions& options) {
    const Polynomial fp = map.fixed_point_polynomial();
    std::vector<FixedPointInfo> out;
    if (fp.degree() < 1) {
        return out;
    }
    const auto roots = polynomial_roots(fp);
    for (const Root& r : cluster_roots(roots, 1e-5)) {
        FixedPointInfo info;
        info.location = r.multiplicity > 1 ? refine_multiple_root(fp, r.z, r.multiplicity) : r.z;
        info.multiplicity = r.multiplicity;
        info.multiplier = map.derivative(info.location);
        info.classification = classify_multiplier(info.multiplier, options);
        out.push_back(info);
    }
    std::sort(out.begin(), out.end(), [](const FixedPointInfo& a, const FixedPointInfo& b) {
        if (a.location.real() != b.location.real()) return a.location.real() < b.location.real();
        return a.location.imag() < b.location.imag();
    });
    return out;
}

std::vector<Complex> local_expansion(const RationalMap& map, Complex omega, int terms) {
    const Polynomial n = map.numer().taylor_shift(omega);
    const Polynomial d = map.denom().taylor_shift(omega);
    std::vector<Complex> c = series_divide(n.coeffs(), d.coeffs(), terms);
    if (!c.empty()) c[0] -= omega;
    return c;
}

ParabolicPoint petal_number(const RationalMap& map, Complex omega, double multiplier_tol) {
    const Complex lambda = map.derivative(omega);
    if (std::abs(lambda - 1.0) > multiplier_tol) {
        throw Error(ErrorCode::NotParabolic, "multiplier " + format_complex(lambda) + " is not 1");
    }
    const int terms = 2 * map.degree() + 2;
    const std::vector<Complex> c = local_expansion(map, omega, terms);
    double scale = 0.0;
    for (const Complex& x : c) scale = std::max(scale, std::abs(x));
    const double cutoff = 1e-7 * std::max(1.0, scale);
    ParabolicPoint pp;
    pp.omega = omega;
    for (int k = 2; k < terms; ++k) {
        if (std::abs(c[static_cast<std::size_t>(k)]) > cutoff) {
            pp.petal = k - 1;
            pp.leading_coeff = c[static_cast<std::size_t>(k)];
            break;
        }
    }
    if (pp.petal == 0) {
        throw Error(ErrorCode::DegenerateExpansion, "local expansion vanishes to order " + std::to_string(terms - 1));
    }
    const double base = -std::arg(pp.leading_coeff);
    for (int k = 0; k < pp.petal; ++k) {
        pp.repelling_dirs.push_back(std::polar(1.0, (base + 2.0 * std::numbers::pi * k) / pp.petal));
    }
    pp.r_omega = working_radius(map, omega);
    return pp;
}

double working_radius(const RationalMap& map, Complex omega) {
    double nearest = std::numeric_limits<double>::infinity();
    const Polynomial fp = map.fixed_point_polynomial();
    if (fp.degree() >= 1) {
        for (const Complex& z : polynomial_roots(fp)) {
            const double d = std::abs(z - omega);
            if (d > 1e-5 * (1.0 + std::abs(omega))) nearest = std::min(nearest, d);
        }
    }
    std::vector<Complex> critical;
    const Polynomial cp = map.critical_point_polynomial();
    if (cp.degree() >= 1) critical = polynomial_roots(cp);
    for (const Complex& z : critical) {
        nearest = std::min(nearest, std::abs(z - omega));
    }
    if (!std::isfinite(nearest)) nearest = 4.0;
    double r = std::exp2(std::floor(std::log2(0.25 * nearest)));
    for (const Complex& z : critical) {
        Complex value;
        try {
            value = map(z);
        } catch (const Error&) {
            continue;
        }
        while (std::abs(value - omega) <= r) r *= 0.5;
    }
    return r;
}

int parabolic_period(const RationalMap& map, const ClassifyOptions& options) {
    long period = 1;
    for (const auto& fp : find_fixed_points(map, options)) {
        if (fp.classification.kind == FixedPointClass::RationallyIndifferent) {
            period = std::lcm(period, fp.classification.den);
        }
    }
    return static_cast<int>(period);
}

std::vector<ParabolicPoint> parabolic_points(const RationalMap& map, const ClassifyOptions& options) {
    std::vector<ParabolicPoint> out;
    for (const auto& fp : find_fixed_points(map, options)) {
        if (fp.classification.kind == FixedPointClass::RationallyIndifferent && fp.classification.num == 0) {
            out.push_back(petal_number(map, fp.location, std::max(1e-8, options.tol)));
        }
    }
    return out;
}

std::vector<ParabolicPoint> parabolic_points_iterated(const RationalMap& map, const ClassifyOptions& options) {
    const int q = parabolic_period(map, options);
    if (q == 1) return parabolic_points(map, options);
    if (std::pow(static_cast<double>(map.degree()), q) > 65536.0) {
        throw Error(ErrorCode::ExplosionGuard, "parabolic period " + std::to_string(q) + " is too large to iterate");
    }
    return parabolic_points(iterate(map, q), options);
}

int max_petal(const std::vector<ParabolicPoint>& points) {
    int p = 0;
    for (const auto& pp : points) p = std::max(p, pp.petal);
    return p;
}

void check_h_bound(double h, int p_max) {
    const double bound = static_cast<double>(p_max) / (1.0 + p_max);
    if (!(h > bound) || !(h <= 2.0)) {
        throw Error(ErrorCode::InvalidH, "h = " + format_double(h) + " must lie in (" + format_double(bound) + ", 2]");
    }
}

std::string fixed_point_report_json(const RationalMap& map, const ClassifyOptions& options) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& fp : find_fixed_points(map, options)) {
        nlohmann::json rec;
        rec["location"] = {fp.location.real(), fp.location.imag()};
        rec["multiplier"] = {fp.multiplier.real(), fp.multiplier.imag()};
        rec["class"] = std::string(to_string(fp.classification.kind));
        rec["multiplicity"] = fp.multiplicity;
        if (fp.classification.kind == FixedPointClass::RationallyIndifferent) {
            rec["rotation"] = std::to_string(fp.classification.num) + "/" + std::to_string(fp.classification.den);
            if (fp.classification.num == 0) {
                const ParabolicPoint pp = petal_number(map, fp.location, std::max(1e-8, options.tol));
                rec["petal"] = pp.petal;
                rec["leading_coeff"] = {pp.leading_coeff.real(), pp.leading_coeff.imag()};
                nlohmann::json dirs = nlohmann::json::array();
                for (const auto& u : pp.repelling_dirs) dirs.push_back({u.real(), u.imag()});
                rec["directions"] = dirs;
                rec["r_omega"] = pp.r_omega;
            }
        }
        records.push_back(rec);
    }
    return records.dump(2);
}

} // namespace parajulia
