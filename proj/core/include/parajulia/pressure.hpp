#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/rational_map.hpp"

namespace parajulia {

struct PeriodicPoint {
    Complex z;
    Complex multiplier;  ///< (T^n)'(z)
    int multiplicity = 1;
};

struct PeriodicOptions {
    /// Largest admissible number of roots, degree^n.
    std::size_t budget = std::size_t{1} << 20;
    /// Distinct roots closer than merge_tol (1 + |z|) are merged.
    double merge_tol = 1e-12;
};

/// Solutions of T^n(z) = z with multipliers of T^n, merged duplicates
/// carrying their multiplicity.
///
/// T^n is never expanded: T^n(z) - z and its derivative come from iterating
/// the homogeneous coordinates [X:Y] of T with rescaling, so only the Newton
/// quotient is formed. Seeds are the n-th preimages of generic Julia points,
/// whose inverse branches contract onto the periodic points; seeds are
/// Newton-polished and merged, and roots still missing (for instance the
/// extra copies of a parabolic fixed point) are found by Aberth iteration
/// with the known roots held fixed.
///
/// Throws ExplosionGuard above the budget and RootFindFailure (index = number
/// of roots not found) when the count cannot be completed.
std::vector<PeriodicPoint> periodic_points(const RationalMap& map, int n, const PeriodicOptions& options = {});

/// Number of finite solutions of T^n(z) = z with multiplicity.
std::size_t periodic_root_count(const RationalMap& map, int n);

/// Largest n with degree^n <= budget.
int default_order(const RationalMap& map, std::size_t budget = std::size_t{1} << 20);

/// log |(T^n)'| over the repelling periodic points that enter the pressure sum.
struct PressureData {
    int order = 0;
    std::vector<double> log_multipliers;  ///< sorted ascending
    std::size_t excluded = 0;  ///< points with |multiplier| within exclusion_tol of 1
};

PressureData pressure_data(std::span<const PeriodicPoint> points, int n, double exclusion_tol = 1e-6);

/// P_n(t) = (1/n) log sum |(T^n)'(z)|^-t. Throws EmptySum when no point is left.
double pressure_estimate(const PressureData& data, double t);
double pressure_estimate(const RationalMap& map, double t, int n, double exclusion_tol = 1e-6);

struct PressureCurve {
    int order = 0;
    std::vector<std::pair<double, double>> samples;  ///< (t, P_n(t))
    std::size_t excluded_parabolic_count = 0;
};

PressureCurve pressure_curve(const PressureData& data, std::span<const double> ts);
/// CSV with header `t,P_n,order,excluded`.
void write_pressure_csv(std::ostream& out, const PressureCurve& curve);

struct SolveOptions {
    double tol = 1e-10;
    double exclusion_tol = 1e-6;
    /// Lower bracket end offset above p_max / (1 + p_max).
    double bracket_margin = 1e-3;
};

struct HEstimate {
    double h = 0.0;
    int order = 0;
    int p_max = 0;
    std::size_t excluded = 0;
    double lower = 0.0;
    double upper = 2.0;
};

/// Zero of P_n on [p_max/(1+p_max) + margin, 2] by bisection.
/// Throws NoSignChange when P_n does not change sign on the bracket.
HEstimate solve_h(const RationalMap& map, int n, const SolveOptions& options = {});
HEstimate solve_h(const PressureData& data, int p_max, const SolveOptions& options = {});

} // namespace parajulia
