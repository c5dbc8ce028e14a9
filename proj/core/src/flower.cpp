#include "parajulia/flower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parajulia/error.hpp"
#include "parajulia/regression.hpp"

namespace parajulia {

double distance_to_rays(Complex w, std::span<const Complex> directions) {
    double best = std::abs(w);
    for (const Complex& u : directions) {
        const Complex local = w * std::conj(u);
        if (local.real() >= 0.0) best = std::min(best, std::abs(local.imag()));
    }
    return best;
}

FlowerReport flower_deviation(std::span<const Complex> cloud, const ParabolicPoint& pp, std::span<const double> radii,
                              std::size_t min_points) {
    if (radii.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no radii given");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || (pp.r_omega > 0.0 && radii[i] >= pp.r_omega) || (i > 0 && radii[i] >= radii[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "radii must decrease and stay below r_omega", static_cast<long>(i));
        }
    }
    // distance to omega and to the rays, computed once per point
    std::vector<std::pair<double, double>> near;
    for (const Complex& z : cloud) {
        const Complex w = z - pp.omega;
        const double d = std::abs(w);
        if (d <= radii.front()) near.emplace_back(d, distance_to_rays(w, pp.repelling_dirs));
    }
    FlowerReport report;
    for (const double r : radii) {
        FlowerSample s;
        s.r = r;
        for (const auto& [d, dev] : near) {
            if (d <= r) {
                ++s.count;
                s.max_deviation = std::max(s.max_deviation, dev);
            }
        }
        report.samples.push_back(s);
    }
    if (report.samples.back().count < min_points) {
        throw Error(ErrorCode::InsufficientPoints,
                    std::to_string(report.samples.back().count) + " points in the smallest ball, need " +
                        std::to_string(min_points));
    }
    std::vector<double> x, y;
    for (const auto& s : report.samples) {
        if (s.max_deviation > 0.0) {
            x.push_back(std::log(s.r));
            y.push_back(std::log(s.max_deviation));
        }
    }
    if (x.size() >= 2) {
        const LineFit fit = fit_line(x, y);
        report.slope = fit.slope;
        report.residual = fit.residual;
    }
    return report;
}

} // namespace parajulia
