#include "parajulia/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "parajulia/error.hpp"
#include "parajulia/fixed_points.hpp"
#include "parajulia/parallel.hpp"
#include "parajulia/roots.hpp"
#include "parajulia/sampler.hpp"

namespace parajulia {

namespace {

// T in homogeneous form with both coefficient lists padded to the degree.
class HomogeneousMap {
public:
    explicit HomogeneousMap(const RationalMap& map) : degree_(map.degree()) {
        a_.assign(static_cast<std::size_t>(degree_) + 1, 0.0);
        b_.assign(static_cast<std::size_t>(degree_) + 1, 0.0);
        for (int k = 0; k <= map.numer().degree(); ++k) a_[static_cast<std::size_t>(k)] = map.numer().coeff(k);
        for (int k = 0; k <= map.denom().degree(); ++k) b_[static_cast<std::size_t>(k)] = map.denom().coeff(k);
    }

    // Newton quotient of F(z) = X_n(z) - z Y_n(z) where [X_n : Y_n] = T^n([z : 1]).
    [[nodiscard]] Complex newton_quotient(Complex z, int n) const {
        Complex x = z, y = 1.0, dx = 1.0, dy = 0.0;
        const auto d = static_cast<std::size_t>(degree_);
        Complex px[kMaxDegree + 1], py[kMaxDegree + 1];
        for (int step = 0; step < n; ++step) {
            px[0] = 1.0;
            py[0] = 1.0;
            for (std::size_t k = 1; k <= d; ++k) {
                px[k] = px[k - 1] * x;
                py[k] = py[k - 1] * y;
            }
            Complex nv = 0.0, nx = 0.0, ny = 0.0, dv = 0.0, dxv = 0.0, dyv = 0.0;
            for (std::size_t k = 0; k <= d; ++k) {
                const Complex mono = px[k] * py[d - k];
                nv += a_[k] * mono;
                dv += b_[k] * mono;
                if (k > 0) {
                    const Complex m = static_cast<double>(k) * px[k - 1] * py[d - k];
                    nx += a_[k] * m;
                    dxv += b_[k] * m;
                }
                if (k < d) {
                    const Complex m = static_cast<double>(d - k) * px[k] * py[d - k - 1];
                    ny += a_[k] * m;
                    dyv += b_[k] * m;
                }
            }
            const Complex ndx = nx * dx + ny * dy;
            const Complex ndy = dxv * dx + dyv * dy;
            const double s = std::max({std::abs(nv.real()), std::abs(nv.imag()), std::abs(dv.real()), std::abs(dv.imag())});
            const double inv = s > 0.0 ? 1.0 / s : 1.0;
            x = nv * inv;
            y = dv * inv;
            dx = ndx * inv;
            dy = ndy * inv;
        }
        const Complex f = x - z * y;
        const Complex df = dx - y - z * dy;
        return f / df;
    }

    static constexpr std::size_t kMaxDegree = 64;

private:
    int degree_;
    std::vector<Complex> a_, b_;
};

// Whether infinity is a fixed point of T^n, followed through the leading
// coefficients [x : y] of the homogeneous iterates.
bool infinity_is_periodic(const RationalMap& map, int n) {
    Complex x = 1.0, y = 0.0;
    const int d = map.degree();
    for (int step = 0; step < n; ++step) {
        Complex nv = 0.0, dv = 0.0;
        for (int k = 0; k <= d; ++k) {
            const Complex mono = std::pow(x, k) * std::pow(y, d - k);
            nv += map.numer().coeff(k) * mono;
            dv += map.denom().coeff(k) * mono;
        }
        const double s = std::max(std::abs(nv), std::abs(dv));
        x = nv / s;
        y = dv / s;
    }
    return std::abs(y) <= 1e-12 * std::abs(x);
}

// Preimages of w, closed form for quadratic maps.
class Preimager {
public:
    explicit Preimager(const RationalMap& map) : map_(map) {
        if (map.degree() == 2) {
            for (int k = 0; k <= 2; ++k) {
                a_[k] = map.numer().coeff(k);
                b_[k] = map.denom().coeff(k);
            }
        }
    }

    void operator()(Complex w, std::vector<Complex>& out) const {
        out.clear();
        if (map_.degree() != 2) {
            out = map_.preimage_roots(w);
            return;
        }
        const Complex a = a_[2] - w * b_[2], b = a_[1] - w * b_[1], c = a_[0] - w * b_[0];
        const double scale = std::abs(a) + std::abs(b) + std::abs(c);
        if (std::abs(a) <= 1e-14 * scale) {
            if (std::abs(b) > 1e-14 * scale) out.push_back(-c / b);
            return;
        }
        const Complex disc = std::sqrt(b * b - 4.0 * a * c);
        const Complex q = -0.5 * (b + (std::real(std::conj(b) * disc) >= 0.0 ? disc : -disc));
        const Complex r1 = q / a;
        out.push_back(r1);
        out.push_back(q != Complex{} ? c / q : r1);
    }

private:
    const RationalMap& map_;
    Complex a_[3], b_[3];
};

// Seeds for the roots of T^n(z) = z. Every n-th preimage s of z0 lies on an
// inverse branch g of T^n with g(z0) = s; iterating g, with the branch
// followed by nearest-preimage continuation along the previous path, moves s
// onto the fixed point of g before Newton polishing.
std::vector<Complex> branch_seeds(const RationalMap& map, Complex z0, int n) {
    const Preimager preimage(map);
    const auto levels = static_cast<std::size_t>(n);
    // breadth-first over the top of the tree to get independent subtrees
    std::vector<std::vector<Complex>> heads{{z0}};
    std::vector<Complex> pre;
    std::size_t depth = 0;
    while (depth < levels && heads.size() < 512) {
        std::vector<std::vector<Complex>> next;
        for (const auto& path : heads) {
            preimage(path.back(), pre);
            for (const Complex& y : pre) {
                next.push_back(path);
                next.back().push_back(y);
            }
        }
        heads.swap(next);
        ++depth;
    }
    std::vector<std::vector<Complex>> leaves(heads.size());
    parallel_for(heads.size(), [&](std::size_t h) {
        // path[k] is the point k levels below z0
        std::vector<Complex> path = heads[h];
        path.resize(levels + 1);
        std::vector<std::vector<Complex>> options(levels + 1);
        std::vector<std::size_t> choice(levels + 1, 0);
        std::vector<Complex> ref(levels + 1), fresh(levels + 1), buf;
        auto refine = [&]() {
            ref = path;
            Complex x = ref[levels];
            for (int it = 0; it < 8; ++it) {
                fresh[0] = x;
                for (std::size_t k = 1; k <= levels; ++k) {
                    preimage(fresh[k - 1], buf);
                    if (buf.empty()) return x;
                    std::size_t best = 0;
                    for (std::size_t m = 1; m < buf.size(); ++m) {
                        if (std::abs(buf[m] - ref[k]) < std::abs(buf[best] - ref[k])) best = m;
                    }
                    fresh[k] = buf[best];
                }
                const Complex y = fresh[levels];
                if (!is_finite(y)) return x;
                ref.swap(fresh);
                const bool settled = std::abs(y - x) <= 1e-9 * (1.0 + std::abs(x));
                x = y;
                if (settled) break;
            }
            return x;
        };
        // depth-first over the remaining levels
        std::size_t k = depth;
        if (k == levels) {
            leaves[h].push_back(refine());
            return;
        }
        preimage(path[k], options[k + 1]);
        choice[k + 1] = 0;
        ++k;
        while (k > depth) {
            if (choice[k] >= options[k].size()) {
                --k;
                continue;
            }
            path[k] = options[k][choice[k]++];
            if (k == levels) {
                leaves[h].push_back(refine());
                continue;
            }
            preimage(path[k], options[k + 1]);
            choice[k + 1] = 0;
            ++k;
        }
    });
    std::vector<Complex> seeds;
    for (const auto& l : leaves) seeds.insert(seeds.end(), l.begin(), l.end());
    return seeds;
}

struct Candidate {
    Complex z;
    int multiplicity;
};

// Groups roots within tol (1 + |z|); roots of a parabolic cluster whose
// multipliers are both near 1 group within 1e-6, since multiple roots are
// only located to about the square root of machine precision. Duplicates of
// one root found from different seeds collapse (accumulate = false); copies
// completed by Aberth iteration add up (accumulate = true).
std::vector<Candidate> merge_roots(std::vector<Candidate> roots, const RationalMap& map, int n, double tol,
                                  bool accumulate) {
    std::sort(roots.begin(), roots.end(), [](const Candidate& a, const Candidate& b) {
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });
    if (!accumulate && !roots.empty()) {
        // many seeds converge to the same root; drop the adjacent copies first
        std::size_t kept = 0;
        for (std::size_t i = 1; i < roots.size(); ++i) {
            if (std::abs(roots[i].z - roots[kept].z) > tol * (1.0 + std::abs(roots[kept].z))) roots[++kept] = roots[i];
        }
        roots.resize(kept + 1);
    }
    auto near_unit = [&](Complex z) {
        try {
            Complex m = 1.0;
            Complex w = z;
            for (int k = 0; k < n; ++k) {
                const auto [v, d] = map.eval_with_derivative(w);
                m *= d;
                w = v;
            }
            return std::abs(std::abs(m) - 1.0) < 1e-3;
        } catch (const Error&) {
            return false;
        }
    };
    std::vector<int> parent(roots.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
        return i;
    };
    const double wide = 1e-6;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            const double scale = 1.0 + std::abs(roots[i].z);
            if (roots[j].z.real() - roots[i].z.real() > wide * scale) break;
            const double dist = std::abs(roots[j].z - roots[i].z);
            if (dist <= tol * scale || (dist <= wide * scale && near_unit(roots[i].z) && near_unit(roots[j].z))) {
                parent[static_cast<std::size_t>(find(static_cast<int>(j)))] = find(static_cast<int>(i));
            }
        }
    }
    std::vector<Candidate> merged;
    std::vector<int> slot(roots.size(), -1);
    std::vector<Complex> sums;
    std::vector<int> counts;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const auto r = static_cast<std::size_t>(find(static_cast<int>(i)));
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(merged.size());
            merged.push_back({roots[i].z, 0});
            sums.push_back(0.0);
            counts.push_back(0);
        }
        const auto s = static_cast<std::size_t>(slot[r]);
        if (accumulate) {
            merged[s].multiplicity += roots[i].multiplicity;
        } else {
            merged[s].multiplicity = std::max(merged[s].multiplicity, roots[i].multiplicity);
        }
        sums[s] += roots[i].z;
        ++counts[s];
    }
    // the centroid of a multiple root is more accurate than any member; a
    // cluster of simple roots keeps a member so its multiplier stays exact
    for (std::size_t s = 0; s < merged.size(); ++s) {
        if (counts[s] > 1 && near_unit(merged[s].z)) merged[s].z = sums[s] / static_cast<double>(counts[s]);
    }
    return merged;
}

} // namespace

std::size_t periodic_root_count(const RationalMap& map, int n) {
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "period must be at least 1");
    }
    double count = std::pow(static_cast<double>(map.degree()), n);
    if (!map.is_polynomial() && !infinity_is_periodic(map, n)) count += 1.0;
    return static_cast<std::size_t>(count);
}

int default_order(const RationalMap& map, std::size_t budget) {
    int n = 1;
    double roots = map.degree();
    while (roots * map.degree() <= static_cast<double>(budget)) {
        roots *= map.degree();
        ++n;
    }
    return n;
}

std::vector<PeriodicPoint> periodic_points(const RationalMap& map, int n, const PeriodicOptions& options) {
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "period must be at least 1");
    }
    if (map.degree() > static_cast<int>(HomogeneousMap::kMaxDegree)) {
        throw Error(ErrorCode::InvalidArgument, "degree too large for periodic point search");
    }
    if (std::pow(static_cast<double>(map.degree()), n) > static_cast<double>(options.budget)) {
        throw Error(ErrorCode::ExplosionGuard, "degree^n exceeds the periodic point budget");
    }
    const std::size_t target = periodic_root_count(map, n);
    const HomogeneousMap hom(map);
    auto quotient = [&](Complex z) { return hom.newton_quotient(z, n); };

    auto polish = [&](Complex z, bool& ok) {
        ok = false;
        for (int it = 0; it < 80; ++it) {
            const Complex step = quotient(z);
            if (!is_finite(step)) return z;
            z -= step;
            if (std::abs(step) <= 1e-14 * (1.0 + std::abs(z))) {
                ok = true;
                return z;
            }
        }
        return z;
    };

    std::vector<Candidate> found;
    std::size_t have = 0;
    std::size_t distinct = 0;
    // a handful of missing roots are the extra copies of multiple roots; those go
    // straight to the Aberth completion
    for (std::uint64_t round = 0; round < 3 && (round == 0 || have + 4 < target); ++round) {
        const PointCloud base = inverse_orbit_sample(map, 0x5eed + round, 20, 1);
        const std::vector<Complex> seeds = branch_seeds(map, base.points.front(), n);
        std::vector<Complex> polished(seeds.size());
        std::vector<char> ok(seeds.size(), 0);
        parallel_for(seeds.size(), [&](std::size_t i) {
            bool good = false;
            polished[i] = polish(seeds[i], good);
            ok[i] = good ? 1 : 0;
        });
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            if (ok[i]) found.push_back({polished[i], 1});
        }
        found = merge_roots(std::move(found), map, n, options.merge_tol, false);
        if (round > 0 && found.size() == distinct) break;
        distinct = found.size();
        have = 0;
        for (const auto& c : found) have += static_cast<std::size_t>(c.multiplicity);
        if (have > target) {
            // more distinct roots than the degree: one root was split in two
            throw Error(ErrorCode::RootFindFailure, "more periodic points than the degree allows",
                        static_cast<long>(have - target));
        }
    }
    if (have < target) {
        std::vector<Complex> fixed;
        for (const auto& c : found) {
            for (int k = 0; k < c.multiplicity; ++k) fixed.push_back(c.z);
        }
        double radius = 1.0;
        for (const auto& z : fixed) radius = std::max(radius, 1.1 * std::abs(z));
        std::vector<Complex> free(target - have);
        for (std::size_t i = 0; i < free.size(); ++i) {
            free[i] = std::polar(radius, 0.4 + 2.0 * 3.141592653589793 * static_cast<double>(i) / static_cast<double>(free.size()));
        }
        ImplicitRootOptions aberth;
        aberth.max_iterations = 500;
        const int missing = aberth_complete(quotient, fixed, free, aberth);
        if (missing > 0) {
            throw Error(ErrorCode::RootFindFailure, std::to_string(missing) + " periodic points did not converge",
                        missing);
        }
        for (const Complex& z : free) found.push_back({z, 1});
        found = merge_roots(std::move(found), map, n, options.merge_tol, true);
    }
    std::vector<PeriodicPoint> out;
    out.reserve(found.size());
    for (const auto& c : found) {
        PeriodicPoint p;
        p.z = c.z;
        p.multiplicity = c.multiplicity;
        p.multiplier = 1.0;
        Complex w = c.z;
        try {
            for (int k = 0; k < n; ++k) {
                const auto [v, d] = map.eval_with_derivative(w);
                p.multiplier *= d;
                w = v;
            }
        } catch (const Error&) {
            p.multiplier = Complex(std::numeric_limits<double>::infinity(), 0.0);
        }
        out.push_back(p);
    }
    return out;
}

PressureData pressure_data(std::span<const PeriodicPoint> points, int n, double exclusion_tol) {
    PressureData data;
    data.order = n;
    for (const auto& p : points) {
        const double m = std::abs(p.multiplier);
        if (std::abs(m - 1.0) <= exclusion_tol) {
            ++data.excluded;
            continue;
        }
        if (m > 1.0 && std::isfinite(m)) data.log_multipliers.push_back(std::log(m));
    }
    std::sort(data.log_multipliers.begin(), data.log_multipliers.end());
    return data;
}

double pressure_estimate(const PressureData& data, double t) {
    if (data.log_multipliers.empty()) {
        throw Error(ErrorCode::EmptySum, "no repelling periodic points left in the pressure sum");
    }
    // log-sum-exp with the largest term factored out, summed in sorted order
    const double top = std::max(-t * data.log_multipliers.front(), -t * data.log_multipliers.back());
    double sum = 0.0;
    for (const double l : data.log_multipliers) sum += std::exp(-t * l - top);
    return (top + std::log(sum)) / data.order;
}

double pressure_estimate(const RationalMap& map, double t, int n, double exclusion_tol) {
    return pressure_estimate(pressure_data(periodic_points(map, n), n, exclusion_tol), t);
}

PressureCurve pressure_curve(const PressureData& data, std::span<const double> ts) {
    PressureCurve curve;
    curve.order = data.order;
    curve.excluded_parabolic_count = data.excluded;
    for (const double t : ts) curve.samples.emplace_back(t, pressure_estimate(data, t));
    return curve;
}

void write_pressure_csv(std::ostream& out, const PressureCurve& curve) {
    out << "t,P_n,order,excluded\n";
    for (const auto& [t, p] : curve.samples) {
        out << format_double(t) << ',' << format_double(p) << ',' << curve.order << ','
            << curve.excluded_parabolic_count << '\n';
    }
}

HEstimate solve_h(const PressureData& data, int p_max, const SolveOptions& options) {
    HEstimate est;
    est.order = data.order;
    est.p_max = p_max;
    est.excluded = data.excluded;
    est.lower = static_cast<double>(p_max) / (1.0 + p_max) + options.bracket_margin;
    est.upper = 2.0;
    double lo = est.lower, hi = est.upper;
    const double p_lo = pressure_estimate(data, lo);
    const double p_hi = pressure_estimate(data, hi);
    if (!(p_lo > 0.0 && p_hi < 0.0)) {
        throw Error(ErrorCode::NoSignChange, "P_n(" + format_double(lo) + ") = " + format_double(p_lo) + ", P_n(" +
                                                 format_double(hi) + ") = " + format_double(p_hi));
    }
    while (hi - lo > options.tol) {
        const double mid = 0.5 * (lo + hi);
        if (pressure_estimate(data, mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    est.h = 0.5 * (lo + hi);
    return est;
}

HEstimate solve_h(const RationalMap& map, int n, const SolveOptions& options) {
    const int p_max = max_petal(parabolic_points_iterated(map));
    return solve_h(pressure_data(periodic_points(map, n), n, options.exclusion_tol), p_max, options);
}

} // namespace parajulia
