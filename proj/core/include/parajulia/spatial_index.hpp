#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "parajulia/complex.hpp"
#include "parajulia/sampler.hpp"

namespace parajulia {

/// Closed-ball predicate shared by every query and by brute-force checks.
inline bool in_ball(Complex p, Complex center, double radius) noexcept {
    const double dx = p.real() - center.real();
    const double dy = p.imag() - center.imag();
    return dx * dx + dy * dy <= radius * radius;
}

/// Linear quadtree over a point cloud.
///
/// Points are sorted by the Morton code of their finest-level cell, so every
/// dyadic cell at every level owns a contiguous range of the sorted arrays.
/// Level 0 is a single root square centred on the bounding box;
/// level k cells have side root_side / 2^k and the finest level has side
/// finest_cell. Ball queries descend the tree, accept or reject whole cells
/// whose box is clearly inside or outside, and test the remaining points one
/// by one, so counts are exact for the in_ball predicate.
///
/// Per-level occupancy tables are built lazily behind a once-flag; all
/// queries are const and safe to call concurrently.
class SpatialIndex {
public:
    SpatialIndex(std::span<const Complex> points, std::span<const double> weights, double finest_cell);

    SpatialIndex(SpatialIndex&&) noexcept;
    SpatialIndex& operator=(SpatialIndex&&) noexcept;
    ~SpatialIndex();

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double finest_cell() const noexcept { return finest_; }
    /// Index of the finest level.
    [[nodiscard]] int levels() const noexcept { return levels_; }
    [[nodiscard]] double cell_side(int level) const noexcept;
    [[nodiscard]] Complex origin() const noexcept { return origin_; }
    /// Points in Morton order.
    [[nodiscard]] std::span<const Complex> points() const noexcept { return points_; }
    /// Position of each sorted point in the input.
    [[nodiscard]] std::span<const std::size_t> permutation() const noexcept { return order_; }
    [[nodiscard]] double total_weight() const noexcept { return weight_prefix_.back(); }

    /// Coarsest level whose cell side is <= r. Throws ScaleTooFine when
    /// r < 2 finest_cell.
    [[nodiscard]] int level_for(double r) const;
    /// Number of distinct occupied cells at a level.
    [[nodiscard]] std::size_t occupied_cells(int level) const;

    /// Points with |p - x| <= radius.
    [[nodiscard]] std::size_t range_count(Complex x, double radius) const;
    /// Total weight of those points (unit weights for an unweighted cloud).
    [[nodiscard]] double range_weight(Complex x, double radius) const;
    /// Occupied cells at `level` whose centre lies in the closed ball.
    [[nodiscard]] std::size_t occupied_cells_in_ball(Complex x, double radius, int level) const;
    /// Calls visit(sorted_index) for every point in the ball.
    void for_each_in_ball(Complex x, double radius, const std::function<void(std::size_t)>& visit) const;

    /// Distance from sorted point i to its nearest other point (infinity for a single point).
    [[nodiscard]] double nearest_neighbor_distance(std::size_t i) const;
    /// Median nearest-neighbour distance over at most `sample` points taken at a
    /// fixed stride in input order.
    [[nodiscard]] double median_nearest_neighbor(std::size_t sample = 4096) const;

private:
    struct Node {
        int level;
        std::uint64_t cx, cy;
        std::size_t lo, hi;
    };
    struct LevelTable;
    enum class Relation { Outside, Inside, Partial };

    [[nodiscard]] Relation relate(const Node& node, Complex x, double radius, double inset) const;
    void push_children(const Node& node, std::vector<Node>& stack) const;
    template <class Whole, class Scan>
    void ball_walk(Complex x, double radius, Whole&& whole, Scan&& scan) const;

    [[nodiscard]] std::size_t distinct_cells(int level, std::size_t lo, std::size_t hi) const;
    [[nodiscard]] const std::vector<std::uint32_t>& level_table(int level) const;
    [[nodiscard]] std::size_t child_split(std::uint64_t code_start, std::size_t lo, std::size_t hi) const;

    std::vector<Complex> points_;
    std::vector<std::uint64_t> codes_;
    std::vector<std::size_t> order_;
    std::vector<double> weight_prefix_;
    Complex origin_;
    double finest_ = 0.0;
    double root_side_ = 0.0;
    int levels_ = 0;
    std::unique_ptr<LevelTable[]> tables_;
};

SpatialIndex build_index(const PointCloud& cloud, double finest_cell);

} // namespace parajulia
