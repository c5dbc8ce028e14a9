#pragma once

#include <functional>
#include <span>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/polynomial.hpp"

namespace parajulia {

struct Root {
    Complex z;
    int multiplicity = 1;
};

struct RootOptions {
    int max_iterations = 500;
    /// Aberth stops once every correction is below tolerance * (1 + |z|).
    double tolerance = 1e-15;
    /// Accepted backward error |p(z)| / sum_k |a_k||z|^k after iteration.
    double residual_tolerance = 1e-10;
};

/// All roots of p repeated according to multiplicity, exactly p.degree() values.
///
/// Degrees 1 and 2 use closed forms; higher degrees use Aberth-Ehrlich
/// simultaneous iteration. Every root gets a final Newton polish.
/// Throws Error(RootFindFailure) if the backward error stays above tolerance.
std::vector<Complex> polynomial_roots(const Polynomial& p, const RootOptions& options = {});

/// Merges approximations closer than tol * (1 + |z|) into one root at the
/// cluster centroid; the centroid of the approximations to a multiple root
/// is far more accurate than any single one of them.
std::vector<Root> cluster_roots(std::span<const Complex> roots, double tol);

/// Sharpens a root of multiplicity m by Newton iteration on p^(m-1), where it is simple.
Complex refine_multiple_root(const Polynomial& p, Complex z, int multiplicity);

/// Newton quotient p(z)/p'(z) of a polynomial known only through evaluation.
using NewtonQuotient = std::function<Complex(Complex)>;

struct ImplicitRootOptions {
    int max_iterations = 2000;
    double tolerance = 1e-14;
};

/// Aberth-Ehrlich iteration on `free` approximations while `fixed` roots stay
/// put. The fixed roots act as an implicit deflation, so free approximations
/// are driven towards the roots that are still missing. Returns the number of
/// free approximations that did not meet the tolerance.
int aberth_complete(const NewtonQuotient& quotient, std::span<const Complex> fixed,
                    std::span<Complex> free, const ImplicitRootOptions& options = {});

} // namespace parajulia
