#include "parajulia/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "parajulia/error.hpp"
#include "parajulia/escape.hpp"
#include "parajulia/parallel.hpp"
#include "parajulia/random.hpp"

namespace parajulia {

namespace {

constexpr double kLandingTol = 1e-9;
// a computed orbit on J drifts off by a factor |T'| per step; below this
// radius it no longer shadows a true orbit
constexpr double kMaxLog = 29.9;

int petal_of(const ZoomSequence& zoom, int omega) {
    return omega < 0 ? 0 : zoom.parabolic[static_cast<std::size_t>(omega)].petal;
}

} // namespace

int ZoomSequence::p_max() const { return max_petal(parabolic); }

ZoomSequence hyperbolic_zoom(const RationalMap& map, Complex xi, int depth, double return_radius) {
    const auto parabolic = parabolic_points_iterated(map);
    return hyperbolic_zoom(map, parabolic, xi, depth, return_radius);
}

ZoomSequence hyperbolic_zoom(const RationalMap& map, std::span<const ParabolicPoint> parabolic, Complex xi, int depth,
                             double return_radius) {
    if (depth < 0 || !is_finite(xi)) {
        throw Error(ErrorCode::InvalidArgument, "zoom needs a finite point and depth >= 0");
    }
    double largest = 0.0;
    for (const auto& pp : parabolic) largest = std::max(largest, pp.r_omega);
    double rho = return_radius;
    if (rho == 0.0) {
        rho = 2.0 * largest;
    } else if (!(rho > largest)) {
        throw Error(ErrorCode::InvalidArgument, "return radius must exceed every working radius");
    }
    const double bailout = map.is_polynomial() ? default_bailout(map) : std::numeric_limits<double>::infinity();

    ZoomSequence zoom;
    zoom.xi = xi;
    zoom.parabolic.assign(parabolic.begin(), parabolic.end());
    auto region = [&](Complex z) {
        for (std::size_t i = 0; i < parabolic.size(); ++i) {
            if (std::abs(z - parabolic[i].omega) < rho) return static_cast<int>(i);
        }
        return -1;
    };

    std::vector<long> dwell(parabolic.size(), 0);
    auto close_block = [&]() {
        auto& entry = zoom.entries.back();
        const auto best = std::max_element(dwell.begin(), dwell.end());
        if (best != dwell.end() && *best > 0) {
            entry.omega = static_cast<int>(best - dwell.begin());
            entry.mixed = std::count_if(dwell.begin(), dwell.end(), [](long d) { return d > 0; }) > 1;
            if (entry.mixed) ++zoom.mixed_blocks;
        }
        std::fill(dwell.begin(), dwell.end(), 0L);
    };

    Complex z = xi;
    double log_deriv = 0.0;
    bool cut = false;
    int tail_region = -2;  // region shared by every iterate since the last return
    double tail_closest = std::numeric_limits<double>::infinity();
    for (long k = 0;; ++k) {
        if (!is_finite(z) || std::abs(z) > bailout) {
            throw Error(ErrorCode::OrbitEscaped, "orbit left the working region at step " + std::to_string(k), k);
        }
        const int u = region(z);
        if (u < 0) {
            tail_region = -2;
            tail_closest = std::numeric_limits<double>::infinity();
            if (log_deriv > kMaxLog) {
                cut = true;
                break;
            }
            const double r = std::exp(-log_deriv);
            // only returns that shrink the radius extend the zoom
            if (zoom.entries.empty() || r < zoom.entries.back().r) {
                if (!zoom.entries.empty()) close_block();
                zoom.entries.push_back({k, r, -1, false});
            }
        } else {
            ++dwell[static_cast<std::size_t>(u)];
            tail_region = tail_region == -2 || tail_region == u ? u : -1;
            tail_closest = std::min(tail_closest, std::abs(z - parabolic[static_cast<std::size_t>(u)].omega));
        }
        if (k == depth) break;
        std::pair<Complex, Complex> step;
        try {
            step = map.eval_with_derivative(z);
        } catch (const Error&) {
            throw Error(ErrorCode::OrbitEscaped, "orbit hit a pole at step " + std::to_string(k), k);
        }
        const double d = std::abs(step.second);
        if (!(d > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "orbit passes through a critical point at step " + std::to_string(k));
        }
        log_deriv += std::log(d);
        z = step.first;
    }

    const bool landed = !cut && tail_region >= 0 && tail_closest < kLandingTol;
    if (zoom.entries.empty()) {
        if (!landed) {
            throw Error(ErrorCode::NoReturns, "the orbit never leaves the parabolic neighbourhoods");
        }
        zoom.entries.push_back({0, 1.0, -1, false});
    }
    if (landed) {
        zoom.terminating = true;
        zoom.entries.back().omega = tail_region;
        zoom.entries.back().mixed = false;
    } else {
        // the block after the last entry is unfinished and never used
        zoom.entries.back().omega = -1;
    }
    return zoom;
}

ZoomSequence synthetic_zoom(std::span<const double> radii, std::span<const int> petals, bool terminating) {
    if (radii.empty()) {
        throw Error(ErrorCode::InvalidArgument, "a zoom needs at least one radius");
    }
    const std::size_t blocks = radii.size() - 1 + (terminating ? 1 : 0);
    if (petals.size() != blocks) {
        throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(blocks) + " petal numbers");
    }
    ZoomSequence zoom;
    for (std::size_t j = 0; j < radii.size(); ++j) {
        if (!(radii[j] > 0.0) || (j > 0 && !(radii[j] < radii[j - 1]))) {
            throw Error(ErrorCode::InvalidArgument, "radii must be positive and strictly decreasing");
        }
        zoom.entries.push_back({static_cast<long>(j), radii[j], -1, false});
    }
    for (std::size_t j = 0; j < petals.size(); ++j) {
        if (petals[j] < 0) {
            throw Error(ErrorCode::InvalidArgument, "petal numbers must be non-negative");
        }
        if (petals[j] == 0) continue;
        auto it = std::find_if(zoom.parabolic.begin(), zoom.parabolic.end(),
                               [&](const ParabolicPoint& pp) { return pp.petal == petals[j]; });
        if (it == zoom.parabolic.end()) {
            ParabolicPoint pp;
            pp.petal = petals[j];
            zoom.parabolic.push_back(pp);
            it = zoom.parabolic.end() - 1;
        }
        zoom.entries[j].omega = static_cast<int>(it - zoom.parabolic.begin());
    }
    if (terminating && zoom.entries.back().omega < 0) {
        throw Error(ErrorCode::InvalidArgument, "a terminating zoom needs a petal for its tail");
    }
    zoom.terminating = terminating;
    return zoom;
}

void write_zoom_csv(std::ostream& out, const ZoomSequence& zoom) {
    out << "j,n_j,r_j,omega_re,omega_im\n";
    for (std::size_t j = 0; j < zoom.entries.size(); ++j) {
        const auto& e = zoom.entries[j];
        out << j << ',' << e.n << ',' << format_double(e.r) << ',';
        if (e.omega >= 0) {
            const Complex w = zoom.parabolic[static_cast<std::size_t>(e.omega)].omega;
            out << format_double(w.real()) << ',' << format_double(w.imag());
        } else {
            out << ',';
        }
        out << '\n';
    }
}

std::string_view to_string(PhiCase c) {
    switch (c) {
    case PhiCase::RadialOuter: return "RadialOuter";
    case PhiCase::RadialInner: return "RadialInner";
    case PhiCase::PreParabolicTail: return "PreParabolicTail";
    }
    return "?";
}

double phi_threshold(double r_j, double r_next, int p) {
    return r_j * std::pow(r_next / r_j, 1.0 / (1.0 + p));
}

double phi_outer(double r, double r_j, int p, double h) { return std::pow(r / r_j, (h - 1.0) * p); }

double phi_inner(double r, double r_next, double h) { return std::pow(r_next / r, h - 1.0); }

PhiEvaluation phi(const ZoomSequence& zoom, double r, double h) {
    check_h_bound(h, zoom.p_max());
    const auto& e = zoom.entries;
    if (e.empty() || !(r > 0.0) || !std::isfinite(r) || r > e.front().r) {
        throw Error(ErrorCode::OutOfRange, "r = " + format_double(r) + " is outside the zoom");
    }
    PhiEvaluation out;
    const double log_r = std::log(r);
    if (r < e.back().r || e.size() == 1) {
        if (!zoom.terminating) {
            if (r == e.back().r) return out;
            throw Error(ErrorCode::OutOfRange,
                        "r = " + format_double(r) + " is below the last radius " + format_double(e.back().r));
        }
        const int p = petal_of(zoom, e.back().omega);
        out.case_tag = PhiCase::PreParabolicTail;
        out.j_used = static_cast<int>(e.size()) - 1;
        out.r_m = e.back().r;
        out.petal = p;
        out.omega_used = zoom.parabolic[static_cast<std::size_t>(e.back().omega)].omega;
        out.log_value = (h - 1.0) * p * (log_r - std::log(e.back().r));
        out.value = std::exp(out.log_value);
        return out;
    }
    // first entry with r_k <= r; the block is the one above it
    const auto it = std::partition_point(e.begin(), e.end(), [&](const ZoomEntry& x) { return x.r > r; });
    const std::size_t j = it == e.begin() ? 0 : static_cast<std::size_t>(it - e.begin()) - 1;
    const int p = petal_of(zoom, e[j].omega);
    const double log_j = std::log(e[j].r);
    const double log_next = std::log(e[j + 1].r);
    const double log_m = log_j + (log_next - log_j) / (1.0 + p);
    out.j_used = static_cast<int>(j);
    out.r_m = std::exp(log_m);
    out.petal = p;
    if (e[j].omega >= 0) out.omega_used = zoom.parabolic[static_cast<std::size_t>(e[j].omega)].omega;
    if (log_r > log_m) {
        out.case_tag = PhiCase::RadialOuter;
        out.log_value = (h - 1.0) * p * (log_r - log_j);
    } else {
        out.case_tag = PhiCase::RadialInner;
        out.log_value = (h - 1.0) * (log_next - log_r);
    }
    out.value = std::exp(out.log_value);
    return out;
}

double log_measure_ball(const ZoomSequence& zoom, double r, double h) {
    return h * std::log(r) + phi(zoom, r, h).log_value;
}

double measure_ball(const ZoomSequence& zoom, double r, double h) { return std::exp(log_measure_ball(zoom, r, h)); }

PointCloud empirical_measure(const RationalMap& map, double h, std::uint64_t seed, std::size_t depth,
                             std::size_t count) {
    if (depth < 1 || count < 1 || !std::isfinite(h)) {
        throw Error(ErrorCode::InvalidArgument, "empirical measure needs depth >= 1, count >= 1 and finite h");
    }
    constexpr double kBound = 1e6;
    auto check = [](Complex y) {
        if (!(std::abs(y) <= kBound)) {
            throw Error(ErrorCode::UnboundedJulia, "backward path left the disk of radius 1e6");
        }
    };
    // the whole tree down to the deepest level that fits in count
    std::vector<Complex> points{julia_start_point(map)};
    std::vector<double> log_weight{0.0};
    std::size_t level = 0;
    const auto d = static_cast<std::size_t>(map.degree());
    while (level < depth && points.size() * d <= count) {
        std::vector<Complex> next;
        std::vector<double> next_weight;
        next.reserve(points.size() * d);
        next_weight.reserve(points.size() * d);
        for (std::size_t i = 0; i < points.size(); ++i) {
            for (const Complex& y : map.preimage_roots(points[i])) {
                const double dy = std::abs(map.derivative(y));
                // a critical preimage has no inverse branch
                if (!(dy > 0.0)) continue;
                check(y);
                next.push_back(y);
                next_weight.push_back(log_weight[i] - h * std::log(dy));
            }
        }
        points.swap(next);
        log_weight.swap(next_weight);
        ++level;
    }
    // random derivative-weighted continuation below the tree
    if (level < depth) {
        parallel_for(points.size(), [&](std::size_t i) {
            Rng rng(stream_seed(seed, i));
            std::vector<double> w;
            for (std::size_t step = level; step < depth; ++step) {
                const std::vector<Complex> branches = map.preimage_roots(points[i]);
                w.assign(branches.size(), 0.0);
                double total = 0.0;
                for (std::size_t b = 0; b < branches.size(); ++b) {
                    const double dy = std::abs(map.derivative(branches[b]));
                    w[b] = dy > 0.0 ? std::pow(dy, -h) : 0.0;
                    total += w[b];
                }
                double u = rng.uniform() * total;
                std::size_t pick = branches.size() - 1;
                for (std::size_t b = 0; b < branches.size(); ++b) {
                    u -= w[b];
                    if (u < 0.0) {
                        pick = b;
                        break;
                    }
                }
                // importance weight: target |g'|^h over the probability |g'|^h / total
                log_weight[i] += std::log(total);
                points[i] = branches[pick];
                check(points[i]);
            }
        });
    }
    PointCloud cloud;
    cloud.provenance = Provenance::InverseIteration;
    cloud.seed = seed;
    cloud.points = std::move(points);
    cloud.weights.resize(cloud.points.size());
    const double top = *std::max_element(log_weight.begin(), log_weight.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < log_weight.size(); ++i) {
        cloud.weights[i] = std::exp(log_weight[i] - top);
        sum += cloud.weights[i];
    }
    for (double& w : cloud.weights) w /= sum;
    return cloud;
}

} // namespace parajulia
