#include "parajulia/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "parajulia/error.hpp"
#include "parajulia/fixed_points.hpp"
#include "parajulia/parallel.hpp"
#include "parajulia/regression.hpp"

namespace parajulia {

namespace {

constexpr std::size_t kMinScales = 4;

struct CellKey {
    std::int64_t x, y;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept {
        const auto a = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
        const auto b = static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL;
        return static_cast<std::size_t>(a ^ (b >> 29) ^ (b << 7));
    }
};

// Incremental greedy net over a hash grid of side `spacing`: a kept point
// within the spacing must sit in one of the 9 surrounding grid cells.
class NetBuilder {
public:
    explicit NetBuilder(double spacing) : s_(spacing) {
        if (!(spacing > 0.0) || !std::isfinite(spacing)) {
            throw Error(ErrorCode::InvalidArgument, "net spacing must be positive");
        }
    }

    bool offer(Complex p) {
        const CellKey k = key(p);
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                const auto it = grid_.find({k.x + dx, k.y + dy});
                if (it == grid_.end()) continue;
                for (const Complex& q : it->second) {
                    if (in_ball(q, p, s_)) return false;
                }
            }
        }
        grid_[k].push_back(p);
        ++size_;
        return true;
    }

    [[nodiscard]] std::size_t size() const noexcept { return size_; }

private:
    CellKey key(Complex p) const {
        const double gx = std::floor(p.real() / s_);
        const double gy = std::floor(p.imag() / s_);
        constexpr double lim = 4.0e18;
        if (!(std::abs(gx) < lim) || !(std::abs(gy) < lim)) {
            throw Error(ErrorCode::ScaleTooFine, "net spacing too small for the cloud coordinates");
        }
        return {static_cast<std::int64_t>(gx), static_cast<std::int64_t>(gy)};
    }

    double s_;
    std::size_t size_ = 0;
    std::unordered_map<CellKey, std::vector<Complex>, CellHash> grid_;
};

std::vector<Complex> input_order(const SpatialIndex& index) {
    const auto pts = index.points();
    const auto perm = index.permutation();
    std::vector<Complex> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out[perm[i]] = pts[i];
    return out;
}

std::size_t net_size_in_ball(const SpatialIndex& index, Complex x, double R, double spacing) {
    std::vector<std::size_t> ids;
    index.for_each_in_ball(x, R, [&](std::size_t i) { ids.push_back(i); });
    const auto perm = index.permutation();
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return perm[a] < perm[b]; });
    NetBuilder net(spacing);
    const auto pts = index.points();
    for (std::size_t i : ids) net.offer(pts[i]);
    return net.size();
}

void check_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "theta must lie in (0,1), got " + format_double(theta));
    }
}

void check_scales(std::span<const double> r_list) {
    if (r_list.size() < kMinScales) {
        throw Error(ErrorCode::InvalidArgument, "need at least 4 scales, got " + std::to_string(r_list.size()));
    }
    for (double r : r_list) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw Error(ErrorCode::InvalidArgument, "scales must be positive and finite");
        }
    }
}

void check_guard(const SpatialIndex& index, double r_min, double factor) {
    const double nn = index.median_nearest_neighbor();
    if (std::isfinite(nn) && r_min < factor * nn) {
        throw Error(ErrorCode::ScaleTooFine, "scale " + format_double(r_min) + " is below " + format_double(factor) +
                                                 " x the median nearest-neighbour distance " + format_double(nn));
    }
}

// Extremum over centres of table[c]; entries that are not finite (or zero
// counts, passed in as -inf logs) never win. Ties go to the lowest index.
std::size_t pick(const std::vector<double>& column, Extremum kind) {
    std::size_t best = column.size();
    for (std::size_t c = 0; c < column.size(); ++c) {
        const double v = column[c];
        if (!std::isfinite(v)) continue;
        if (best == column.size() || (kind == Extremum::Max ? v > column[best] : v < column[best])) best = c;
    }
    return best;
}

// Fits y against x unless y is constant, which the options decide.
LineFit fit_or_flat(std::span<const double> x, std::span<const double> y, ConstantCounts on_constant) {
    const bool flat = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
    if (flat) {
        if (on_constant == ConstantCounts::Zero) return LineFit{0.0, y.front(), 0.0, y.size()};
        throw Error(ErrorCode::DegenerateFit, "extremal counts are equal at every scale");
    }
    return fit_line(x, y);
}

struct Extremal {
    std::vector<double> values;
    std::vector<std::size_t> argext;
};

// logs[c * scales + k] -> extremal value per scale
Extremal reduce(const std::vector<double>& logs, std::size_t centers, std::size_t scales, Extremum kind) {
    Extremal out;
    std::vector<double> column(centers);
    for (std::size_t k = 0; k < scales; ++k) {
        for (std::size_t c = 0; c < centers; ++c) column[c] = logs[c * scales + k];
        const std::size_t best = pick(column, kind);
        if (best == centers) {
            throw Error(ErrorCode::InsufficientPoints, "no centre has a usable value at scale index " + std::to_string(k),
                        static_cast<long>(k));
        }
        out.values.push_back(column[best]);
        out.argext.push_back(best);
    }
    return out;
}

std::vector<ScalePair> scale_pairs(double theta, std::span<const double> r_list, double unit) {
    if (!(unit > 0.0) || !std::isfinite(unit)) throw Error(ErrorCode::InvalidArgument, "unit_length must be positive");
    std::vector<ScalePair> out;
    for (double r : r_list) out.push_back({r, unit * std::exp(theta * std::log(r / unit))});
    return out;
}

std::size_t finest_position(std::span<const double> r_list) {
    return static_cast<std::size_t>(std::min_element(r_list.begin(), r_list.end()) - r_list.begin());
}

DimensionEstimate ladder_dimension(const SpatialIndex& index, std::span<const double> base_list, Extremum kind,
                                   const SpectrumOptions& options) {
    if (base_list.empty()) throw Error(ErrorCode::InvalidArgument, "empty base scale list");
    std::vector<double> rho;
    for (int e = 4; e <= 10; ++e) rho.push_back(std::ldexp(1.0, e));
    double r_min = std::numeric_limits<double>::infinity();
    std::vector<int> levels;
    for (double R : base_list) {
        if (!(R > 0.0) || !std::isfinite(R)) throw Error(ErrorCode::InvalidArgument, "base scales must be positive");
        for (double q : rho) {
            levels.push_back(index.level_for(R / q));
            r_min = std::min(r_min, R / q);
        }
    }
    if (kind == Extremum::Min) check_guard(index, r_min, options.guard_factor);

    const auto centers = spectrum_centers(input_order(index), r_min, options);
    const std::size_t m = levels.size();
    std::vector<double> logs(centers.size() * m);
    parallel_for(centers.size(), [&](std::size_t c) {
        for (std::size_t b = 0; b < base_list.size(); ++b) {
            for (std::size_t q = 0; q < rho.size(); ++q) {
                const std::size_t k = b * rho.size() + q;
                const auto n = index.occupied_cells_in_ball(centers[c], base_list[b], levels[k]);
                logs[c * m + k] = n > 0 ? std::log(static_cast<double>(n)) : -std::numeric_limits<double>::infinity();
            }
        }
    });
    const auto ext = reduce(logs, centers.size(), m, kind);

    std::vector<double> x;
    for (double q : rho) x.push_back(std::log(q));
    DimensionEstimate out;
    bool first = true;
    for (std::size_t b = 0; b < base_list.size(); ++b) {
        const std::span<const double> y(ext.values.data() + b * rho.size(), rho.size());
        const auto fit = fit_or_flat(x, y, options.on_constant);
        out.ladder_slopes.push_back(fit.slope);
        const bool better = kind == Extremum::Max ? fit.slope > out.exponent : fit.slope < out.exponent;
        if (first || better) {
            out.exponent = fit.slope;
            out.base_R = base_list[b];
            out.fit_residual = fit.residual;
            first = false;
        }
    }
    return out;
}

double saturating_term(int p, double theta) { return std::min(1.0, theta * p / (1.0 - theta)); }

void check_prediction_args(double h, int p_max, double theta) {
    if (p_max < 0) throw Error(ErrorCode::InvalidArgument, "p_max must be non-negative");
    check_h_bound(h, p_max);
    check_theta(theta);
}

} // namespace

std::size_t box_count(const SpatialIndex& index, double r) { return index.occupied_cells(index.level_for(r)); }

std::vector<std::size_t> greedy_net(std::span<const Complex> points, double spacing) {
    NetBuilder net(spacing);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (net.offer(points[i])) kept.push_back(i);
    }
    return kept;
}

std::size_t covering_number(const SpatialIndex& index, double r) { return greedy_net(input_order(index), r).size(); }

std::size_t packing_number(const SpatialIndex& index, double r) {
    return greedy_net(input_order(index), 2.0 * r).size();
}

std::size_t covering_number(const SpatialIndex& index, Complex x, double R, double r) {
    return net_size_in_ball(index, x, R, r);
}

std::size_t packing_number(const SpatialIndex& index, Complex x, double R, double r) {
    return net_size_in_ball(index, x, R, 2.0 * r);
}

BoxEstimate box_dimension(const SpatialIndex& index, std::span<const double> r_list) {
    check_scales(r_list);
    BoxEstimate out;
    std::vector<double> x, y;
    for (double r : r_list) {
        const std::size_t n = box_count(index, r);
        out.radii.push_back(r);
        out.counts.push_back(n);
        x.push_back(-std::log(r));
        y.push_back(std::log(static_cast<double>(std::max<std::size_t>(n, 1))));
    }
    const auto fit = fit_or_flat(x, y, ConstantCounts::Zero);
    out.exponent = fit.slope;
    out.fit_residual = fit.residual;
    return out;
}

std::vector<Complex> spectrum_centers(std::span<const Complex> points, double r_min, const SpectrumOptions& options) {
    if (options.max_centers == 0) throw Error(ErrorCode::InvalidArgument, "max_centers must be positive");
    std::vector<Complex> out;
    double spacing = 0.5 * r_min;
    for (;;) {
        NetBuilder net(spacing);
        out.clear();
        bool over = false;
        for (const Complex& p : points) {
            if (net.offer(p)) {
                out.push_back(p);
                if (out.size() > options.max_centers) {
                    over = true;
                    break;
                }
            }
        }
        if (!over) break;
        spacing *= 2.0;
    }
    out.insert(out.end(), options.extra_centers.begin(), options.extra_centers.end());
    return out;
}

SpectrumEstimate count_spectrum(const SpatialIndex& index, double theta, std::span<const double> r_list, Extremum kind,
                                const SpectrumOptions& options) {
    check_theta(theta);
    check_scales(r_list);
    if (index.size() == 0) throw Error(ErrorCode::InsufficientPoints, "empty cloud");
    const auto pairs = scale_pairs(theta, r_list, options.unit_length);
    std::vector<int> levels;
    for (double r : r_list) levels.push_back(index.level_for(r));
    const double r_min = r_list[finest_position(r_list)];
    if (kind == Extremum::Min) check_guard(index, r_min, options.guard_factor);

    const auto centers = spectrum_centers(input_order(index), r_min, options);
    const std::size_t m = r_list.size();
    std::vector<double> logs(centers.size() * m);
    parallel_for(centers.size(), [&](std::size_t c) {
        for (std::size_t k = 0; k < m; ++k) {
            const auto n = index.occupied_cells_in_ball(centers[c], pairs[k].R, levels[k]);
            logs[c * m + k] = n > 0 ? std::log(static_cast<double>(n)) : -std::numeric_limits<double>::infinity();
        }
    });
    const auto ext = reduce(logs, centers.size(), m, kind);

    std::vector<double> x;
    for (const auto& sp : pairs) x.push_back(std::log(sp.R / sp.r));
    const auto fit = fit_or_flat(x, ext.values, options.on_constant);

    SpectrumEstimate out;
    out.theta = theta;
    out.exponent = fit.slope;
    out.fit_residual = fit.residual;
    out.scales_used = pairs;
    out.extremal_center = centers[ext.argext[finest_position(r_list)]];
    for (double v : ext.values) out.values.push_back(std::exp(v));
    return out;
}

SpectrumEstimate assouad_spectrum(const SpatialIndex& index, double theta, std::span<const double> r_list,
                                  const SpectrumOptions& options) {
    return count_spectrum(index, theta, r_list, Extremum::Max, options);
}

SpectrumEstimate lower_spectrum(const SpatialIndex& index, double theta, std::span<const double> r_list,
                                const SpectrumOptions& options) {
    return count_spectrum(index, theta, r_list, Extremum::Min, options);
}

DimensionEstimate assouad_dimension(const SpatialIndex& index, std::span<const double> base_list,
                                    const SpectrumOptions& options) {
    return ladder_dimension(index, base_list, Extremum::Max, options);
}

DimensionEstimate lower_dimension(const SpatialIndex& index, std::span<const double> base_list,
                                  const SpectrumOptions& options) {
    return ladder_dimension(index, base_list, Extremum::Min, options);
}

SpectrumEstimate measure_spectrum(const LogMassOracle& log_mass, std::span<const Complex> centers, double theta,
                                  std::span<const double> r_list, Extremum kind, const SpectrumOptions& options) {
    check_theta(theta);
    check_scales(r_list);
    if (centers.empty()) throw Error(ErrorCode::InsufficientPoints, "no centres");
    const auto pairs = scale_pairs(theta, r_list, options.unit_length);
    const std::size_t m = r_list.size();
    std::vector<double> logs(centers.size() * m);
    parallel_for(centers.size(), [&](std::size_t c) {
        for (std::size_t k = 0; k < m; ++k) {
            logs[c * m + k] = log_mass(c, pairs[k].R) - log_mass(c, pairs[k].r);
        }
    });
    const auto ext = reduce(logs, centers.size(), m, kind);

    std::vector<double> x;
    for (const auto& sp : pairs) x.push_back(std::log(sp.R / sp.r));
    const auto fit = fit_or_flat(x, ext.values, options.on_constant);

    SpectrumEstimate out;
    out.theta = theta;
    out.exponent = fit.slope;
    out.fit_residual = fit.residual;
    out.scales_used = pairs;
    out.extremal_center = centers[ext.argext[finest_position(r_list)]];
    out.values = ext.values;
    return out;
}

SpectrumEstimate measure_spectrum(std::span<const ZoomSequence> zooms, double h, double theta,
                                  std::span<const double> r_list, Extremum kind, const SpectrumOptions& options) {
    std::vector<Complex> centers;
    for (const auto& z : zooms) centers.push_back(z.xi);
    const LogMassOracle oracle = [&](std::size_t c, double r) { return log_measure_ball(zooms[c], r, h); };
    return measure_spectrum(oracle, centers, theta, r_list, kind, options);
}

double predicted_set_assouad(double h, int p_max, double theta) {
    check_prediction_args(h, p_max, theta);
    if (p_max == 0 || h >= 1.0) return h;
    return h + saturating_term(p_max, theta) * (1.0 - h);
}

double predicted_set_lower(double h, int p_max, double theta) {
    check_prediction_args(h, p_max, theta);
    if (p_max == 0 || h < 1.0) return h;
    return h + saturating_term(p_max, theta) * (1.0 - h);
}

double predicted_measure_assouad(double h, int p_max, double theta) {
    check_prediction_args(h, p_max, theta);
    if (p_max == 0) return h;
    if (h < 1.0) return h + saturating_term(p_max, theta) * (1.0 - h);
    return h + (h - 1.0) * p_max;
}

double predicted_measure_lower(double h, int p_max, double theta) {
    check_prediction_args(h, p_max, theta);
    if (p_max == 0) return h;
    if (h < 1.0) return h + (h - 1.0) * p_max;
    return h + saturating_term(p_max, theta) * (1.0 - h);
}

double sequence_assouad_spectrum(int p, double theta) {
    if (p < 1) throw Error(ErrorCode::InvalidArgument, "sequence exponent p must be at least 1");
    check_theta(theta);
    return std::min(1.0, p / ((1.0 + p) * (1.0 - theta)));
}

PredictedSpectra predicted_spectra(double h, int p_max, std::span<const double> theta_grid) {
    if (p_max < 0) throw Error(ErrorCode::InvalidArgument, "p_max must be non-negative");
    check_h_bound(h, p_max);
    PredictedSpectra out;
    out.h = h;
    out.p_max = p_max;
    for (double t : theta_grid) {
        out.theta.push_back(t);
        out.set_assouad.push_back(predicted_set_assouad(h, p_max, t));
        out.set_lower.push_back(predicted_set_lower(h, p_max, t));
        out.measure_assouad.push_back(predicted_measure_assouad(h, p_max, t));
        out.measure_lower.push_back(predicted_measure_lower(h, p_max, t));
    }
    if (p_max == 0) {
        out.set = {h, h, h};
        out.measure = {h, h, h};
    } else {
        const double tilt = h + (h - 1.0) * p_max;
        out.set = {h, std::max(1.0, h), std::min(1.0, h)};
        out.measure = {std::max(h, tilt), std::max(1.0, tilt), std::min(1.0, tilt)};
    }
    return out;
}

void write_spectrum_csv(std::ostream& out, std::span<const SpectrumRow> rows) {
    out << "theta,exponent,residual,kind,source\n";
    for (const auto& r : rows) {
        out << format_double(r.theta) << ',' << format_double(r.exponent) << ',' << format_double(r.residual) << ','
            << r.kind << ',' << r.source << '\n';
    }
}

} // namespace parajulia
