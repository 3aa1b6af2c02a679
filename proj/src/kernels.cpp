#include "riskeig/kernels.hpp"

namespace riskeig::kernels {

namespace {

inline void semilinear_row(const SemilinearArgs& args, std::size_t i) {
    const double* v = args.v.data();
    const bool maximize = args.direction == Direction::maximize;
    double best = row_dot(args.generators[0], i, v) + args.rewards[0][i] * v[i];
    int arg = 0;
    for (std::size_t u = 1; u < args.generators.size(); ++u) {
        const double val = row_dot(args.generators[u], i, v) + args.rewards[u][i] * v[i];
        if (maximize ? val > best : val < best) {
            best = val;
            arg = static_cast<int>(u);
        }
    }
    args.out[i] = best;
    args.policy[i] = arg;
}

}  // namespace

namespace serial {

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < a.rows; ++i) y[i] = row_dot(a, i, x.data());
}

void semilinear(const SemilinearArgs& args) {
    for (std::size_t i = 0; i < args.v.size(); ++i) semilinear_row(args, i);
}

}  // namespace serial

namespace omp {

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
    const auto n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[std::size_t(i)] = row_dot(a, std::size_t(i), x.data());
}

void semilinear(const SemilinearArgs& args) {
    const auto n = static_cast<std::ptrdiff_t>(args.v.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) semilinear_row(args, std::size_t(i));
}

}  // namespace omp

void spmv(Exec exec, const CsrView& a, std::span<const double> x, std::span<double> y) {
    exec == Exec::serial ? serial::spmv(a, x, y) : omp::spmv(a, x, y);
}

void semilinear(Exec exec, const SemilinearArgs& args) {
    exec == Exec::serial ? serial::semilinear(args) : omp::semilinear(args);
}

}  // namespace riskeig::kernels
