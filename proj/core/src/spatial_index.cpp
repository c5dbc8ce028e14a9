#include "parajulia/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "parajulia/error.hpp"

namespace parajulia {

namespace {

std::uint64_t spread(std::uint64_t v) {
    v &= 0xffffffffULL;
    v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
    v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
    v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
    v = (v | (v << 2)) & 0x3333333333333333ULL;
    v = (v | (v << 1)) & 0x5555555555555555ULL;
    return v;
}

std::uint64_t interleave(std::uint64_t x, std::uint64_t y) { return spread(x) | (spread(y) << 1); }

double box_min_dist2(double x, double y, double x0, double y0, double x1, double y1) {
    const double dx = x < x0 ? x0 - x : (x > x1 ? x - x1 : 0.0);
    const double dy = y < y0 ? y0 - y : (y > y1 ? y - y1 : 0.0);
    return dx * dx + dy * dy;
}

double box_max_dist2(double x, double y, double x0, double y0, double x1, double y1) {
    const double dx = std::max(std::abs(x - x0), std::abs(x - x1));
    const double dy = std::max(std::abs(y - y0), std::abs(y - y1));
    return dx * dx + dy * dy;
}

constexpr std::size_t kLeafScan = 32;

} // namespace

struct SpatialIndex::LevelTable {
    std::once_flag once;
    /// starts[i] = number of cell starts among sorted positions < i
    std::vector<std::uint32_t> starts;
};

SpatialIndex::SpatialIndex(std::span<const Complex> points, std::span<const double> weights, double finest_cell)
    : finest_(finest_cell) {
    if (!(finest_cell > 0.0) || !std::isfinite(finest_cell)) {
        throw Error(ErrorCode::InvalidArgument, "finest_cell must be positive");
    }
    if (!weights.empty() && weights.size() != points.size()) {
        throw Error(ErrorCode::InvalidArgument, "weights must match points");
    }
    const std::size_t n = points.size();
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    if (n > 0) {
        x0 = x1 = points[0].real();
        y0 = y1 = points[0].imag();
    }
    for (const Complex& p : points) {
        if (!is_finite(p)) {
            throw Error(ErrorCode::InvalidArgument, "non-finite point in cloud");
        }
        x0 = std::min(x0, p.real());
        x1 = std::max(x1, p.real());
        y0 = std::min(y0, p.imag());
        y1 = std::max(y1, p.imag());
    }
    const double extent = std::max(x1 - x0, y1 - y0) / finest_;
    if (extent >= std::ldexp(1.0, 31)) {
        throw Error(ErrorCode::ScaleTooFine, "finest_cell too small for the cloud extent");
    }
    levels_ = extent > 0.0 ? static_cast<int>(std::floor(std::log2(extent))) + 1 : 0;
    while (std::ldexp(1.0, levels_) <= extent) ++levels_;
    root_side_ = std::ldexp(finest_, levels_);
    // centred on the bounding box, so the grid maps to itself under quarter
    // turns and power-of-two scalings of the cloud
    origin_ = Complex(0.5 * (x0 + x1) - 0.5 * root_side_, 0.5 * (y0 + y1) - 0.5 * root_side_);

    std::vector<std::uint64_t> raw(n);
    const std::uint64_t top = (std::uint64_t{1} << levels_) - 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ix = std::min(top, static_cast<std::uint64_t>((points[i].real() - origin_.real()) / finest_));
        const auto iy = std::min(top, static_cast<std::uint64_t>((points[i].imag() - origin_.imag()) / finest_));
        raw[i] = interleave(ix, iy);
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    points_.resize(n);
    codes_.resize(n);
    weight_prefix_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        points_[i] = points[order_[i]];
        codes_[i] = raw[order_[i]];
        weight_prefix_[i + 1] = weight_prefix_[i] + (weights.empty() ? 1.0 : weights[order_[i]]);
    }
    tables_ = std::make_unique<LevelTable[]>(static_cast<std::size_t>(levels_) + 1);
}

SpatialIndex::SpatialIndex(SpatialIndex&&) noexcept = default;
SpatialIndex& SpatialIndex::operator=(SpatialIndex&&) noexcept = default;
SpatialIndex::~SpatialIndex() = default;

double SpatialIndex::cell_side(int level) const noexcept { return std::ldexp(root_side_, -level); }

int SpatialIndex::level_for(double r) const {
    if (!(r >= 2.0 * finest_)) {
        throw Error(ErrorCode::ScaleTooFine,
                    "scale " + format_double(r) + " is below twice the finest cell " + format_double(finest_));
    }
    int level = 0;
    while (level < levels_ && cell_side(level) > r) ++level;
    return level;
}

const std::vector<std::uint32_t>& SpatialIndex::level_table(int level) const {
    if (level < 0 || level > levels_) {
        throw Error(ErrorCode::OutOfRange, "level " + std::to_string(level) + " outside the index");
    }
    LevelTable& table = tables_[static_cast<std::size_t>(level)];
    std::call_once(table.once, [&] {
        const int shift = 2 * (levels_ - level);
        const std::size_t n = codes_.size();
        table.starts.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const bool start = i == 0 || (codes_[i] >> shift) != (codes_[i - 1] >> shift);
            table.starts[i + 1] = table.starts[i] + (start ? 1U : 0U);
        }
    });
    return table.starts;
}

std::size_t SpatialIndex::distinct_cells(int level, std::size_t lo, std::size_t hi) const {
    if (hi <= lo) return 0;
    const auto& starts = level_table(level);
    return 1 + starts[hi] - starts[lo + 1];
}

std::size_t SpatialIndex::occupied_cells(int level) const { return distinct_cells(level, 0, points_.size()); }

std::size_t SpatialIndex::child_split(std::uint64_t code_start, std::size_t lo, std::size_t hi) const {
    return static_cast<std::size_t>(std::lower_bound(codes_.begin() + static_cast<std::ptrdiff_t>(lo),
                                                     codes_.begin() + static_cast<std::ptrdiff_t>(hi), code_start) -
                                    codes_.begin());
}

void SpatialIndex::push_children(const Node& node, std::vector<Node>& stack) const {
    const int shift = 2 * (levels_ - node.level - 1);
    const std::uint64_t base = interleave(node.cx, node.cy) << 2;
    std::size_t bounds[5];
    bounds[0] = node.lo;
    bounds[4] = node.hi;
    for (std::uint64_t q = 1; q < 4; ++q) bounds[q] = child_split((base + q) << shift, bounds[q - 1], node.hi);
    for (int q = 3; q >= 0; --q) {
        if (bounds[q] == bounds[q + 1]) continue;
        stack.push_back({node.level + 1, 2 * node.cx + (static_cast<std::uint64_t>(q) & 1U),
                         2 * node.cy + (static_cast<std::uint64_t>(q) >> 1), bounds[q], bounds[q + 1]});
    }
}

SpatialIndex::Relation SpatialIndex::relate(const Node& node, Complex x, double radius, double inset) const {
    const double side = cell_side(node.level);
    const double pad = 1e-12 * root_side_;
    const double bx0 = origin_.real() + static_cast<double>(node.cx) * side + inset;
    const double by0 = origin_.imag() + static_cast<double>(node.cy) * side + inset;
    const double bx1 = bx0 + side - 2.0 * inset;
    const double by1 = by0 + side - 2.0 * inset;
    const double outer = radius + pad;
    if (box_min_dist2(x.real(), x.imag(), bx0 - pad, by0 - pad, bx1 + pad, by1 + pad) > outer * outer) {
        return Relation::Outside;
    }
    if (radius > pad) {
        const double inner = radius - pad;
        if (box_max_dist2(x.real(), x.imag(), bx0 - pad, by0 - pad, bx1 + pad, by1 + pad) <= inner * inner) {
            return Relation::Inside;
        }
    }
    return Relation::Partial;
}

template <class Whole, class Scan>
void SpatialIndex::ball_walk(Complex x, double radius, Whole&& whole, Scan&& scan) const {
    if (points_.empty() || !(radius >= 0.0)) return;
    std::vector<Node> stack{{0, 0, 0, 0, points_.size()}};
    while (!stack.empty()) {
        const Node node = stack.back();
        stack.pop_back();
        switch (relate(node, x, radius, 0.0)) {
        case Relation::Outside: break;
        case Relation::Inside: whole(node.lo, node.hi); break;
        case Relation::Partial:
            if (node.level == levels_ || node.hi - node.lo <= kLeafScan) {
                for (std::size_t i = node.lo; i < node.hi; ++i) {
                    if (in_ball(points_[i], x, radius)) scan(i);
                }
            } else {
                push_children(node, stack);
            }
            break;
        }
    }
}

std::size_t SpatialIndex::range_count(Complex x, double radius) const {
    std::size_t count = 0;
    ball_walk(x, radius, [&](std::size_t lo, std::size_t hi) { count += hi - lo; }, [&](std::size_t) { ++count; });
    return count;
}

double SpatialIndex::range_weight(Complex x, double radius) const {
    double total = 0.0;
    ball_walk(
        x, radius, [&](std::size_t lo, std::size_t hi) { total += weight_prefix_[hi] - weight_prefix_[lo]; },
        [&](std::size_t i) { total += weight_prefix_[i + 1] - weight_prefix_[i]; });
    return total;
}

void SpatialIndex::for_each_in_ball(Complex x, double radius, const std::function<void(std::size_t)>& visit) const {
    ball_walk(
        x, radius,
        [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) visit(i);
        },
        visit);
}

std::size_t SpatialIndex::occupied_cells_in_ball(Complex x, double radius, int level) const {
    if (level < 0 || level > levels_) {
        throw Error(ErrorCode::OutOfRange, "level " + std::to_string(level) + " outside the index");
    }
    if (points_.empty() || !(radius >= 0.0)) return 0;
    const double half = 0.5 * cell_side(level);
    std::size_t count = 0;
    std::vector<Node> stack{{0, 0, 0, 0, points_.size()}};
    while (!stack.empty()) {
        const Node node = stack.back();
        stack.pop_back();
        if (node.level == level) {
            const double side = cell_side(level);
            const Complex centre(origin_.real() + (static_cast<double>(node.cx) + 0.5) * side,
                                 origin_.imag() + (static_cast<double>(node.cy) + 0.5) * side);
            if (in_ball(centre, x, radius)) ++count;
            continue;
        }
        // the box spanned by the centres of level cells inside this node
        switch (relate(node, x, radius, half)) {
        case Relation::Outside: break;
        case Relation::Inside: count += distinct_cells(level, node.lo, node.hi); break;
        case Relation::Partial: push_children(node, stack); break;
        }
    }
    return count;
}

double SpatialIndex::nearest_neighbor_distance(std::size_t i) const {
    if (points_.size() < 2) return std::numeric_limits<double>::infinity();
    const Complex p = points_[i];
    double radius = finest_;
    while (range_count(p, radius) < 2) {
        radius *= 2.0;
        if (radius > 4.0 * root_side_) return std::numeric_limits<double>::infinity();
    }
    double best = std::numeric_limits<double>::infinity();
    for_each_in_ball(p, radius, [&](std::size_t j) {
        if (j != i) best = std::min(best, std::abs(points_[j] - p));
    });
    return best;
}

double SpatialIndex::median_nearest_neighbor(std::size_t sample) const {
    const std::size_t n = points_.size();
    if (n < 2) return std::numeric_limits<double>::infinity();
    const std::size_t take = std::max<std::size_t>(1, std::min(sample, n));
    std::vector<double> d;
    d.reserve(take);
    // a fixed stride in input order, so the sample does not depend on the grid
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) rank[order_[i]] = i;
    for (std::size_t k = 0; k < take; ++k) d.push_back(nearest_neighbor_distance(rank[k * n / take]));
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
    return d[d.size() / 2];
}

SpatialIndex build_index(const PointCloud& cloud, double finest_cell) {
    return SpatialIndex(cloud.points, cloud.weights, finest_cell);
}

} // namespace parajulia
