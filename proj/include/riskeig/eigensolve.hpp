#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "riskeig/discretize.hpp"
#include "riskeig/model.hpp"

namespace riskeig {

struct SolverLimits {
    int max_iterations = 10000;  // inverse power steps per linear solve
    int max_sweeps = 100;        // policy iteration sweeps
};

/// Principal eigenpair over an active set. phi(center) == 1 exactly and
/// phi > 0 entrywise.
struct EigenPair {
    double value = 0.0;
    std::vector<double> phi;
    std::size_t center = 0;
    double residual = 0.0;
    int iterations = 0;

    double min_phi() const;
    double max_phi() const;
};

/// Perron root and vector of M = A + diag(c) by shifted inverse power
/// iteration. The first shift is max(c) + 1; it is lowered toward the upper
/// Collatz-Wielandt bound of the iterate, which keeps sI - M a nonsingular
/// M-matrix. `warm_start`, if non-empty and positive, replaces the constant
/// starting vector. Stops when rho moves by at most tol and the residual is
/// at most tol, or at the rounding floor 4 eps max_i sum_k |M_ik phi_k| when
/// that is larger.
EigenPair linear_principal_eigenpair(const CsrMatrix& a, std::span<const double> c, std::size_t center,
                                     double tol, const SolverLimits& limits = {},
                                     std::span<const double> warm_start = {});

EigenPair linear_principal_eigenpair(const GeneratorMatrix& a, std::span<const double> c, std::size_t center,
                                     double tol, const SolverLimits& limits = {});

/// Residual max|(A + diag c) phi - rho phi|.
double linear_residual(const CsrMatrix& a, std::span<const double> c, std::span<const double> phi, double rho);

struct SemilinearSolution {
    EigenPair pair;               // residual measured against G
    std::vector<int> policy;      // optimizer of G at the returned phi
    int sweeps = 0;
    std::vector<double> history;  // eigenvalue after each policy evaluation
};

/// Policy iteration from the all-zero policy: evaluate the current policy
/// with linear_principal_eigenpair, improve pointwise through
/// apply_semilinear, stop when the policy repeats or the eigenvalue moves by
/// at most tol * max(1, |rho|).
SemilinearSolution solve_semilinear(const Discretization& disc, double tol, const SolverLimits& limits = {},
                                    Exec exec = Exec::parallel);

SemilinearSolution solve_semilinear(const DiffusionModel& model, const Grid& grid, BoundaryCondition bc,
                                    double tol, const SolverLimits& limits = {}, Exec exec = Exec::parallel);

/// Semilinear residual max|G phi - rho phi|.
double semilinear_residual(const Discretization& disc, std::span<const double> phi, double rho,
                           Exec exec = Exec::parallel);

struct CollatzWielandt {
    double lower;
    double upper;
};

/// min and max over the active nodes of (G f)(x) / f(x).
CollatzWielandt collatz_wielandt_bounds(const Discretization& disc, std::span<const double> f,
                                        Exec exec = Exec::parallel);

struct SweepRow {
    double radius;
    BoundaryCondition bc;
    double value;
    double residual;
    std::size_t nodes;
};

struct SweepTable {
    std::vector<SweepRow> rows;  // radius-major, then in the order of the bc list
    double extrapolated_value = 0.0;
    bool extrapolated_from_dirichlet = false;

    std::vector<SweepRow> rows_for(BoundaryCondition bc) const;
};

/// Odd node count 2 * round(r * nodes_per_unit) + 1.
int nodes_for_radius(double radius, int nodes_per_unit);

/// One semilinear solve per (radius, bc). Independent solves run on parallel
/// workers; the table does not depend on the worker count.
SweepTable domain_sweep(const DiffusionModel& model, std::span<const double> radii,
                        std::span<const BoundaryCondition> bcs, int nodes_per_unit, double tol,
                        const SolverLimits& limits = {}, Exec exec = Exec::parallel);

/// CSV with header "radius,bc,value,residual,nodes".
void write_csv(std::ostream& os, const SweepTable& table);

}  // namespace riskeig
