#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "riskeig/types.hpp"

namespace riskeig {

/// Tensor grid on the box [-r, r]^d with n nodes per axis (n odd), row-major
/// in 2D (the first coordinate varies fastest).
class Grid {
public:
    Grid(int dimension, double radius, int nodes_per_axis);

    int dimension() const { return dimension_; }
    double radius() const { return radius_; }
    int nodes_per_axis() const { return n_; }
    double spacing() const { return h_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<Point>& nodes() const { return nodes_; }
    const Point& node(std::size_t i) const { return nodes_[i]; }
    bool on_boundary(std::size_t i) const { return boundary_[i] != 0; }
    const std::vector<std::uint8_t>& boundary_mask() const { return boundary_; }
    std::size_t center_index() const { return center_; }

    /// Coordinate of index i along an axis: r (i - m) / m, m = (n - 1) / 2.
    double axis_coordinate(int i) const;

    /// Per-axis multi index of a node.
    std::array<int, 2> multi_index(std::size_t i) const;
    std::size_t flat_index(int i, int j = 0) const;

    /// Node nearest to x (clamped into the box).
    std::size_t nearest(const Point& x) const;

    bool contains(const Point& x) const;

private:
    int dimension_;
    double radius_;
    int n_;
    double h_;
    std::vector<Point> nodes_;
    std::vector<std::uint8_t> boundary_;
    std::size_t center_;
};

Grid build_grid(int dimension, double radius, int nodes_per_axis);

}  // namespace riskeig
