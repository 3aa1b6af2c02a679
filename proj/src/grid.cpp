#include "riskeig/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskeig/error.hpp"

namespace riskeig {

Grid::Grid(int dimension, double radius, int nodes_per_axis)
    : dimension_(dimension), radius_(radius), n_(nodes_per_axis) {
    if (dimension != 1 && dimension != 2) throw InvalidArgument("grid dimension must be 1 or 2");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("grid.radius must be positive");
    if (nodes_per_axis < 3) throw InvalidArgument("grid needs at least 3 nodes per axis");
    if (nodes_per_axis % 2 == 0)
        throw InvalidArgument("nodes_per_axis must be odd so that the origin is a node (got " +
                              std::to_string(nodes_per_axis) + ")");
    h_ = 2.0 * radius / (n_ - 1);
    const std::size_t count = dimension == 1 ? std::size_t(n_) : std::size_t(n_) * std::size_t(n_);
    nodes_.resize(count);
    boundary_.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto [i, j] = multi_index(k);
        nodes_[k] = {axis_coordinate(i), dimension == 2 ? axis_coordinate(j) : 0.0};
        const bool edge_i = i == 0 || i == n_ - 1;
        const bool edge_j = dimension == 2 && (j == 0 || j == n_ - 1);
        boundary_[k] = (edge_i || edge_j) ? 1 : 0;
    }
    const int m = (n_ - 1) / 2;
    center_ = flat_index(m, dimension == 2 ? m : 0);
}

double Grid::axis_coordinate(int i) const {
    const int m = (n_ - 1) / 2;
    return radius_ * static_cast<double>(i - m) / static_cast<double>(m);
}

std::array<int, 2> Grid::multi_index(std::size_t k) const {
    if (dimension_ == 1) return {static_cast<int>(k), 0};
    return {static_cast<int>(k % std::size_t(n_)), static_cast<int>(k / std::size_t(n_))};
}

std::size_t Grid::flat_index(int i, int j) const {
    return dimension_ == 1 ? std::size_t(i) : std::size_t(j) * std::size_t(n_) + std::size_t(i);
}

std::size_t Grid::nearest(const Point& x) const {
    auto axis = [&](double v) {
        const double t = std::round((v + radius_) / h_);
        return static_cast<int>(std::clamp(t, 0.0, static_cast<double>(n_ - 1)));
    };
    return dimension_ == 1 ? flat_index(axis(x[0])) : flat_index(axis(x[0]), axis(x[1]));
}

bool Grid::contains(const Point& x) const {
    return std::abs(x[0]) <= radius_ && (dimension_ == 1 || std::abs(x[1]) <= radius_);
}

Grid build_grid(int dimension, double radius, int nodes_per_axis) { return Grid(dimension, radius, nodes_per_axis); }

}  // namespace riskeig
