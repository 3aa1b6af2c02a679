#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace riskeig {

// Spatial dimension is 1 or 2; unused trailing components stay zero.
using Point = std::array<double, 2>;
using Vec2 = std::array<double, 2>;

/// Row-major 2x2 matrix {m00, m01, m10, m11}. In 1D only m00 is used.
using Mat2 = std::array<double, 4>;

enum class Direction { maximize, minimize };
enum class BoundaryCondition { neumann, dirichlet };

/// Selects the serial reference kernels or their OpenMP counterparts.
/// Both produce bit-identical results.
enum class Exec { serial, parallel };

inline double norm(const Point& x, int dimension) {
    return dimension == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

inline double sup_norm(const Point& x, int dimension) {
    return dimension == 1 ? std::abs(x[0]) : std::max(std::abs(x[0]), std::abs(x[1]));
}

const char* to_string(Direction d);
const char* to_string(BoundaryCondition bc);

}  // namespace riskeig
