#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; each output element is computed by the same arithmetic in
// both, so the results are bit-identical for any thread count.

#include <cstddef>
#include <span>

#include "riskeig/sparse.hpp"
#include "riskeig/types.hpp"

namespace riskeig::kernels {

/// Read-only view of a CSR matrix.
struct CsrView {
    std::size_t rows;
    const std::size_t* row_ptr;
    const std::size_t* col;
    const double* val;

    static CsrView of(const CsrMatrix& m) { return {m.rows, m.row_ptr.data(), m.col.data(), m.val.data()}; }
};

inline double row_dot(const CsrView& a, std::size_t i, const double* x) {
    double s = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * x[a.col[k]];
    return s;
}

/// Pointwise optimization over controls of (A_u v)(x) + c_u(x) v(x).
/// `rewards[u]` points at the reward of control u over the rows.
struct SemilinearArgs {
    std::span<const CsrView> generators;
    std::span<const double* const> rewards;
    std::span<const double> v;
    Direction direction;
    std::span<double> out;
    std::span<int> policy;
};

namespace serial {
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
void semilinear(const SemilinearArgs& args);

/// Runs fn(i) for i in [0, count) in index order.
template <class Fn>
void for_each_index(std::size_t count, Fn&& fn) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
}
}  // namespace serial

namespace omp {
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
void semilinear(const SemilinearArgs& args);

template <class Fn>
void for_each_index(std::size_t count, Fn&& fn) {
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}
}  // namespace omp

void spmv(Exec exec, const CsrView& a, std::span<const double> x, std::span<double> y);
void semilinear(Exec exec, const SemilinearArgs& args);

/// Dispatches to the serial or OpenMP loop. Exceptions thrown by fn inside
/// the parallel region are captured and the one with the lowest index is
/// rethrown, so error reporting does not depend on scheduling.
template <class Fn>
void for_each_index(Exec exec, std::size_t count, Fn&& fn);

}  // namespace riskeig::kernels

#include "riskeig/kernels_impl.hpp"
