#include "riskeig/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "riskeig/error.hpp"
#include "riskeig/kernels.hpp"

namespace riskeig {

namespace {
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}
}  // namespace

double EigenPair::min_phi() const { return *std::min_element(phi.begin(), phi.end()); }
double EigenPair::max_phi() const { return *std::max_element(phi.begin(), phi.end()); }

double linear_residual(const CsrMatrix& a, std::span<const double> c, std::span<const double> phi, double rho) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * phi[a.col[k]];
        r = std::max(r, std::abs(s + (c[i] - rho) * phi[i]));
    }
    return r;
}

EigenPair linear_principal_eigenpair(const CsrMatrix& a, std::span<const double> c, std::size_t center, double tol,
                                     const SolverLimits& limits, std::span<const double> warm_start) {
    const std::size_t n = a.rows;
    if (n == 0 || c.size() != n) throw InvalidArgument("eigen solve: reward length does not match the generator");
    if (center >= n) throw InvalidArgument("eigen solve: center index out of range");
    if (!(tol > 0.0)) throw InvalidArgument("eigen solve: tolerance must be positive");

    double shift = *std::max_element(c.begin(), c.end()) + 1.0;

    // B = sI - A - diag(c). For any s above the Perron root this is a
    // nonsingular M-matrix: positive diagonal, nonpositive off-diagonal.
    Eigen::SparseMatrix<double> b(static_cast<int>(n), static_cast<int>(n));
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::NaturalOrdering<int>> lu;
    lu.setPivotThreshold(0.0);  // M-matrix: eliminate on the diagonal
    auto factor = [&] {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(a.nnz());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
                const std::size_t j = a.col[k];
                double v = -a.val[k];
                if (j == i) v += shift - c[i];
                if ((j == i && !(v > 0.0)) || (j != i && v > 0.0))
                    throw InternalError("shifted operator is not an M-matrix at row " + std::to_string(i));
                trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
            }
        }
        b.setFromTriplets(trip.begin(), trip.end());
        b.makeCompressed();
        lu.compute(b);
        if (lu.info() != Eigen::Success) throw InternalError("LU factorisation of the shifted operator failed");
    };
    factor();

    Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    if (!warm_start.empty() && warm_start.size() == n &&
        std::all_of(warm_start.begin(), warm_start.end(), [](double x) { return x > 0.0; })) {
        for (std::size_t i = 0; i < n; ++i) v[Eigen::Index(i)] = warm_start[i] / warm_start[center];
    }

    const auto ci = static_cast<Eigen::Index>(center);
    double rho = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> phi(n), mphi(n);
    for (int it = 1; it <= limits.max_iterations; ++it) {
        Eigen::VectorXd w = lu.solve(v);
        const double growth = w[ci];
        if (!(growth > 0.0)) throw InternalError("inverse iteration lost positivity at the center node");
        v = w / growth;
        v[ci] = 1.0;
        const double next = shift - 1.0 / growth;
        for (std::size_t i = 0; i < n; ++i) phi[i] = v[Eigen::Index(i)];
        const double residual = linear_residual(a, c, phi, next);
        // A tolerance below the rounding floor of the matrix-vector product
        // cannot be met when Phi spans several decades; accept the floor.
        double row_mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = std::abs((c[i] - next) * phi[i]);
            for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) m += std::abs(a.val[k] * phi[a.col[k]]);
            row_mass = std::max(row_mass, m);
        }
        const double floor = 4.0 * std::numeric_limits<double>::epsilon() * row_mass;
        const bool settled = it > 1 && std::abs(next - rho) <= tol && residual <= std::max(tol, floor);
        rho = next;
        if (settled) {
            if (!std::all_of(phi.begin(), phi.end(), [](double x) { return x > 0.0; }))
                throw InternalError("principal eigenvector has a non-positive entry");
            return EigenPair{rho, std::move(phi), center, residual, it};
        }

        // Collatz-Wielandt bounds lo <= rho(M) <= hi of the current iterate.
        // Moving the shift down to hi + max(hi - lo, eps) keeps it above the
        // Perron root and speeds up convergence when the spectral gap is
        // small relative to s - rho.
        if (!std::all_of(phi.begin(), phi.end(), [](double x) { return x > 0.0; })) continue;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            double s = c[i] * phi[i];
            for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.val[k] * phi[a.col[k]];
            mphi[i] = s / phi[i];
            lo = std::min(lo, mphi[i]);
            hi = std::max(hi, mphi[i]);
        }
        const double candidate = hi + std::max(hi - lo, 1e-6 * std::max(1.0, std::abs(hi)));
        if (candidate < shift && shift - candidate > 0.5 * (shift - hi)) {
            shift = candidate;
            factor();
        }
    }
    throw ConvergenceError("inverse power iteration did not reach tol " + fmt(tol) + " in " +
                               std::to_string(limits.max_iterations) + " iterations (last eigenvalue " +
                               fmt(rho) + ")",
                           phi);
}

EigenPair linear_principal_eigenpair(const GeneratorMatrix& a, std::span<const double> c, std::size_t center,
                                     double tol, const SolverLimits& limits) {
    return linear_principal_eigenpair(a.matrix, c, center, tol, limits);
}

double semilinear_residual(const Discretization& disc, std::span<const double> phi, double rho, Exec exec) {
    const SemilinearResult g = apply_semilinear(disc, phi, exec);
    double r = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) r = std::max(r, std::abs(g.value[i] - rho * phi[i]));
    return r;
}

SemilinearSolution solve_semilinear(const Discretization& disc, double tol, const SolverLimits& limits, Exec exec) {
    std::vector<int> policy(disc.size(), 0);
    std::vector<std::vector<int>> recent;
    SemilinearSolution out;
    std::vector<double> warm;
    for (int sweep = 1; sweep <= limits.max_sweeps; ++sweep) {
        const CsrMatrix a = policy_generator(disc, policy);
        const std::vector<double> c = policy_reward(disc, policy);
        EigenPair pair;
        try {
            pair = linear_principal_eigenpair(a, c, disc.active.center, tol, limits, warm);
        } catch (Error& e) {
            e.add_context("policy sweep " + std::to_string(sweep));
            throw;
        }
        const SemilinearResult g = apply_semilinear(disc, pair.phi, exec);
        const bool same_policy = g.policy == policy;
        const bool flat = !out.history.empty() &&
                          std::abs(pair.value - out.history.back()) <= tol * std::max(1.0, std::abs(pair.value));
        out.history.push_back(pair.value);
        if (same_policy || flat) {
            double r = 0.0;
            for (std::size_t i = 0; i < pair.phi.size(); ++i)
                r = std::max(r, std::abs(g.value[i] - pair.value * pair.phi[i]));
            pair.residual = r;
            out.pair = std::move(pair);
            out.policy = g.policy;
            out.sweeps = sweep;
            return out;
        }
        recent.push_back(policy);
        if (recent.size() > 4) recent.erase(recent.begin());
        policy = g.policy;
        warm = std::move(pair.phi);
    }
    throw ConvergenceError("policy iteration did not settle after " + std::to_string(limits.max_sweeps) +
                               " sweeps; last policies attached",
                           warm, recent);
}

SemilinearSolution solve_semilinear(const DiffusionModel& model, const Grid& grid, BoundaryCondition bc, double tol,
                                    const SolverLimits& limits, Exec exec) {
    return solve_semilinear(discretize(model, grid, bc, exec), tol, limits, exec);
}

CollatzWielandt collatz_wielandt_bounds(const Discretization& disc, std::span<const double> f, Exec exec) {
    const SemilinearResult g = apply_semilinear(disc, f, exec);
    CollatzWielandt cw{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double q = g.value[i] / f[i];
        cw.lower = std::min(cw.lower, q);
        cw.upper = std::max(cw.upper, q);
    }
    return cw;
}

std::vector<SweepRow> SweepTable::rows_for(BoundaryCondition bc) const {
    std::vector<SweepRow> out;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(out), [bc](const SweepRow& r) { return r.bc == bc; });
    return out;
}

int nodes_for_radius(double radius, int nodes_per_unit) {
    return 2 * static_cast<int>(std::lround(radius * nodes_per_unit)) + 1;
}

SweepTable domain_sweep(const DiffusionModel& model, std::span<const double> radii,
                        std::span<const BoundaryCondition> bcs, int nodes_per_unit, double tol,
                        const SolverLimits& limits, Exec exec) {
    if (radii.empty()) throw InvalidArgument("domain sweep needs at least one radius");
    if (bcs.empty()) throw InvalidArgument("domain sweep needs at least one boundary condition");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw InvalidArgument("sweep radii must be strictly increasing");
    if (nodes_per_unit < 10) throw InvalidArgument("nodes_per_unit must be at least 10");

    SweepTable table;
    table.rows.resize(radii.size() * bcs.size());
    kernels::for_each_index(exec, table.rows.size(), [&](std::size_t job) {
        const double r = radii[job / bcs.size()];
        const BoundaryCondition bc = bcs[job % bcs.size()];
        try {
            const Grid grid(model.dimension, r, nodes_for_radius(r, nodes_per_unit));
            const Discretization disc = discretize(model, grid, bc, Exec::serial);
            const SemilinearSolution s = solve_semilinear(disc, tol, limits, Exec::serial);
            table.rows[job] = SweepRow{r, bc, s.pair.value, s.pair.residual, disc.size()};
        } catch (Error& e) {
            char label[96];
            std::snprintf(label, sizeof label, "sweep radius %g, %s", r, to_string(bc));
            e.add_context(label);
            throw;
        }
    });

    const auto dirichlet = table.rows_for(BoundaryCondition::dirichlet);
    const auto neumann = table.rows_for(BoundaryCondition::neumann);
    if (dirichlet.size() >= 3) {
        const std::size_t k = dirichlet.size() - 1;
        const double d1 = dirichlet[k - 1].value - dirichlet[k - 2].value;
        const double d2 = dirichlet[k].value - dirichlet[k - 1].value;
        if (d1 > 0.0 && d2 > 0.0 && d2 < d1) {
            const double q = d2 / d1;
            table.extrapolated_value = dirichlet[k].value + d2 * q / (1.0 - q);
            table.extrapolated_from_dirichlet = true;
            return table;
        }
    }
    table.extrapolated_value = neumann.empty() ? table.rows.back().value : neumann.back().value;
    return table;
}

void write_csv(std::ostream& os, const SweepTable& table) {
    os << "radius,bc,value,residual,nodes\n";
    char buf[160];
    for (const auto& r : table.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%zu\n", r.radius, to_string(r.bc), r.value, r.residual,
                      r.nodes);
        os << buf;
    }
}

}  // namespace riskeig
