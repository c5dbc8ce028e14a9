#pragma once

#include <string>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/rational_map.hpp"

namespace parajulia {

enum class FixedPointClass { Attracting, Repelling, RationallyIndifferent, CremerCandidate, Undetermined };

std::string_view to_string(FixedPointClass c);

struct Classification {
    FixedPointClass kind = FixedPointClass::Undetermined;
    /// Rotation number num/den of an indifferent multiplier, reduced, 0 <= num < den.
    long num = 0;
    long den = 1;
};

struct ClassifyOptions {
    double tol = 1e-9;
    long qmax = 1000;
};

/// |l| < 1 - tol attracting, |l| > 1 + tol repelling; otherwise the
/// continued-fraction convergents of arg(l)/2pi with denominator <= qmax are
/// tried and the first within tol (on the circle) makes it rationally indifferent.
Classification classify_multiplier(Complex multiplier, const ClassifyOptions& options = {});

struct FixedPointInfo {
    Complex location;
    Complex multiplier;
    Classification classification;
    int multiplicity = 1;  ///< as a root of numer - z denom
};

/// All finite fixed points. Multiple roots are merged and refined on the
/// derivative of the fixed-point polynomial so multipliers stay accurate.
std::vector<FixedPointInfo> find_fixed_points(const RationalMap& map, const ClassifyOptions& options = {});

struct ParabolicPoint {
    Complex omega;
    int petal = 0;  ///< p in T(z) = z + a (z - omega)^(p+1) + ...
    Complex leading_coeff;
    std::vector<Complex> repelling_dirs;  ///< unit u with a u^p real positive
    double r_omega = 0.0;
};

/// Local expansion at a fixed point with multiplier 1.
/// Throws NotParabolic when |T'(omega) - 1| > multiplier_tol and
/// DegenerateExpansion when no nonzero coefficient is found.
ParabolicPoint petal_number(const RationalMap& map, Complex omega, double multiplier_tol = 1e-8);

/// Taylor coefficients c_k of T(omega + w) - omega, k < terms.
std::vector<Complex> local_expansion(const RationalMap& map, Complex omega, int terms);

/// Largest power of two <= quarter distance from omega to the nearest other
/// fixed or critical point, halved while a critical value lies in the ball.
double working_radius(const RationalMap& map, Complex omega);

/// Fixed points with multiplier 1, each expanded with petal_number.
std::vector<ParabolicPoint> parabolic_points(const RationalMap& map, const ClassifyOptions& options = {});

/// Least k such that every rationally indifferent fixed point of T has
/// multiplier 1 under T^k (lcm of rotation denominators).
int parabolic_period(const RationalMap& map, const ClassifyOptions& options = {});

/// Parabolic points of T^q with q = parabolic_period(T), so a fixed point
/// with multiplier exp(2 pi i k/q) is expanded under T^q. Throws
/// ExplosionGuard when degree^q exceeds 2^16.
std::vector<ParabolicPoint> parabolic_points_iterated(const RationalMap& map, const ClassifyOptions& options = {});

int max_petal(const std::vector<ParabolicPoint>& points);

/// Throws Error(InvalidH) unless h > p_max / (1 + p_max) and h < 2.
void check_h_bound(double h, int p_max);

/// JSON array of {location, multiplier, class, rotation?, petal?, directions?}.
std::string fixed_point_report_json(const RationalMap& map, const ClassifyOptions& options = {});

} // namespace parajulia
