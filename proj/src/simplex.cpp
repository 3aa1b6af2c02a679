#include "riskeig/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "riskeig/error.hpp"

namespace riskeig {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr int kDegenerateRunBeforeBland = 50;

Eigen::MatrixXd basis_inverse(const Eigen::SparseMatrix<double>& a, const std::vector<std::size_t>& basis) {
    const auto m = a.rows();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, static_cast<Eigen::Index>(basis[k])); it; ++it)
            b(it.row(), k) = it.value();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    if (!lu.isInvertible()) throw InternalError("simplex basis is singular");
    return lu.inverse();
}

}  // namespace

SimplexResult solve_simplex(const EqualityLp& lp, std::span<const std::size_t> initial_basis,
                            const SimplexOptions& options) {
    const auto m = lp.a.rows();
    const auto ncols = lp.a.cols();
    if (static_cast<Eigen::Index>(lp.b.size()) != m || static_cast<Eigen::Index>(lp.c.size()) != ncols)
        throw InvalidArgument("simplex: dimensions of A, b and c disagree");
    if (static_cast<Eigen::Index>(initial_basis.size()) != m)
        throw InvalidArgument("simplex: the initial basis needs one column per constraint");

    std::vector<std::size_t> basis(initial_basis.begin(), initial_basis.end());
    std::vector<char> in_basis(static_cast<std::size_t>(ncols), 0);
    for (std::size_t j : basis) {
        if (j >= static_cast<std::size_t>(ncols) || in_basis[j]) throw InvalidArgument("simplex: invalid initial basis");
        in_basis[j] = 1;
    }

    const Eigen::Map<const Eigen::VectorXd> b(lp.b.data(), m);
    Eigen::MatrixXd binv = basis_inverse(lp.a, basis);
    Eigen::VectorXd xb = binv * b;
    for (Eigen::Index i = 0; i < m; ++i)
        if (xb[i] < -options.feasibility_tol)
            throw InternalError("simplex: initial basis is infeasible (basic value " + std::to_string(xb[i]) + ")");

    Eigen::VectorXd cb(m), y(m), w(m);
    int degenerate_run = 0;
    int since_refactor = 0;
    int iter = 0;
    for (;; ++iter) {
        for (Eigen::Index i = 0; i < m; ++i) cb[i] = lp.c[basis[i]];
        y.noalias() = binv.transpose() * cb;

        // Pricing.
        const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
        Eigen::Index entering = -1;
        double best = options.optimality_tol;
        for (Eigen::Index j = 0; j < ncols; ++j) {
            if (in_basis[static_cast<std::size_t>(j)]) continue;
            double d = lp.c[static_cast<std::size_t>(j)];
            for (Eigen::SparseMatrix<double>::InnerIterator it(lp.a, j); it; ++it) d -= y[it.row()] * it.value();
            if (d > best) {
                entering = j;
                if (bland) break;
                best = d;
            }
        }
        if (entering < 0) {
            if (since_refactor == 0) break;
            // Confirm optimality against a fresh factorisation.
            binv = basis_inverse(lp.a, basis);
            xb = binv * b;
            since_refactor = 0;
            --iter;
            continue;
        }
        if (iter >= options.max_iterations)
            throw ConvergenceError("simplex hit the iteration cap of " + std::to_string(options.max_iterations));

        w.setZero();
        for (Eigen::SparseMatrix<double>::InnerIterator it(lp.a, entering); it; ++it)
            w.noalias() += binv.col(it.row()) * it.value();

        // Ratio test; ties go to the largest pivot (or the lowest variable
        // index under Bland's rule).
        Eigen::Index leaving = -1;
        double theta = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (w[i] <= kPivotTol) continue;
            const double ratio = std::max(xb[i], 0.0) / w[i];
            bool take = ratio < theta - 1e-15;
            if (!take && leaving >= 0 && ratio <= theta + 1e-15)
                take = bland ? basis[i] < basis[leaving] : w[i] > w[leaving];
            if (take) {
                theta = std::min(theta, ratio);
                leaving = i;
            }
        }
        if (leaving < 0) throw InternalError("simplex: objective is unbounded along column " + std::to_string(entering));

        xb -= theta * w;
        xb[leaving] = theta;
        const double pivot = w[leaving];
        binv.row(leaving) /= pivot;
        for (Eigen::Index i = 0; i < m; ++i)
            if (i != leaving && w[i] != 0.0) binv.row(i) -= w[i] * binv.row(leaving);
        in_basis[basis[leaving]] = 0;
        basis[leaving] = static_cast<std::size_t>(entering);
        in_basis[static_cast<std::size_t>(entering)] = 1;

        degenerate_run = theta <= options.feasibility_tol ? degenerate_run + 1 : 0;
        if (++since_refactor >= options.refactor_every) {
            binv = basis_inverse(lp.a, basis);
            xb = binv * b;
            since_refactor = 0;
        }
    }

    SimplexResult res;
    res.iterations = iter;
    res.basis = basis;
    res.x.assign(static_cast<std::size_t>(ncols), 0.0);
    for (Eigen::Index i = 0; i < m; ++i) res.x[basis[i]] = std::max(xb[i], 0.0);
    res.duals.assign(y.data(), y.data() + m);
    for (Eigen::Index j = 0; j < ncols; ++j) res.objective += lp.c[j] * res.x[j];

    Eigen::VectorXd ax = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < ncols; ++j) {
        if (res.x[j] == 0.0) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(lp.a, j); it; ++it) ax[it.row()] += it.value() * res.x[j];
    }
    res.primal_residual = (ax - b).cwiseAbs().maxCoeff();
    res.max_reduced_cost = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < ncols; ++j) {
        double d = lp.c[j];
        for (Eigen::SparseMatrix<double>::InnerIterator it(lp.a, j); it; ++it) d -= y[it.row()] * it.value();
        res.max_reduced_cost = std::max(res.max_reduced_cost, d);
    }
    return res;
}

}  // namespace riskeig
