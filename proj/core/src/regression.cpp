#include "parajulia/regression.hpp"

#include <cmath>

#include "parajulia/error.hpp"

namespace parajulia {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw Error(ErrorCode::InvalidArgument, "fit_line needs equally long x and y");
    }
    const std::size_t n = x.size();
    if (n < 2) {
        throw Error(ErrorCode::DegenerateFit, "need at least 2 points for a line fit");
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw Error(ErrorCode::DegenerateFit, "all x values coincide");
    }
    LineFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (fit.slope * x[i] + fit.intercept);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

} // namespace parajulia
