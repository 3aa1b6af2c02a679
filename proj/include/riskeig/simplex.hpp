#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace riskeig {

/// maximize c^T x subject to A x = b, x >= 0.
struct EqualityLp {
    Eigen::SparseMatrix<double> a;  // column major, rows = constraints
    std::vector<double> b;
    std::vector<double> c;
};

struct SimplexOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-10;
    int max_iterations = 200000;
    int refactor_every = 64;
};

struct SimplexResult {
    std::vector<double> x;
    double objective = 0.0;
    std::vector<std::size_t> basis;
    std::vector<double> duals;  // y with A^T y >= c at optimality
    int iterations = 0;
    double primal_residual = 0.0;  // max |A x - b|
    double max_reduced_cost = 0.0; // max over columns of c_j - a_j^T y (<= optimality_tol)
};

/// Revised primal simplex with a dense basis inverse, started from a
/// caller-supplied feasible basis. Dantzig pricing, switching to Bland's rule
/// after a run of degenerate pivots. Throws ConvergenceError at the
/// iteration cap and InternalError for an infeasible start or an unbounded
/// ray.
SimplexResult solve_simplex(const EqualityLp& lp, std::span<const std::size_t> initial_basis,
                            const SimplexOptions& options = {});

}  // namespace riskeig
