#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "riskeig/discretize.hpp"
#include "riskeig/twist.hpp"

namespace riskeig {

/// Symmetric odd-count grid of velocities y per axis; the velocity set is
/// its tensor power.
struct VelocityGrid {
    int dimension = 1;
    std::vector<double> axis;

    static VelocityGrid uniform(int dimension, double range, int points);
    double range() const { return axis.back(); }
    double step() const { return axis.size() > 1 ? axis[1] - axis[0] : 0.0; }
    std::size_t size() const;
    Vec2 velocity(std::size_t k) const;
    std::size_t zero_index() const;
};

/// One generator per (control, velocity) pair with drift b(x, u) + a(x) y,
/// pair index k = control * velocities + velocity.
struct ExtendedGeneratorSet {
    Grid grid;
    ActiveSet active;
    VelocityGrid ygrid;
    std::size_t controls = 0;
    std::vector<CsrMatrix> matrices;

    std::size_t pairs() const { return matrices.size(); }
    std::size_t velocities() const { return ygrid.size(); }
    std::size_t nodes() const { return active.size(); }
};

/// R(x, u, y) = c(x, u) - 1/2 |sigma(x)^T y|^2, stored [pair][node], plus the
/// entropy part 1/2 |sigma^T y|^2 on its own.
struct RewardTable {
    std::vector<std::vector<double>> value;
    std::vector<std::vector<double>> entropy;
};

struct ExtendedProblem {
    ExtendedGeneratorSet generators;
    RewardTable reward;
};

ExtendedProblem build_extended(const DiffusionModel& model, const Grid& grid, const VelocityGrid& ygrid,
                               BoundaryCondition bc, Exec exec = Exec::parallel);

/// Weights mu(x, u, y) stored [pair][node].
struct OccupationMeasure {
    std::vector<std::vector<double>> weight;
    double mass = 0.0;
    double stationarity_residual = 0.0;  // max_x |sum_z mu(z) A_z(z, x)|
    double objective = 0.0;              // sum mu R
    double entropy_mass = 0.0;           // sum mu 1/2 |sigma^T y|^2
    int iterations = 0;
};

/// Fills mass, stationarity residual, objective and entropy mass.
void evaluate_measure(const ExtendedProblem& problem, OccupationMeasure& mu);

struct LpOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-10;
    int max_iterations = 200000;
};

/// maximize sum mu R over probability measures annihilating every grid
/// basis function under the extended generators. Neumann only.
OccupationMeasure solve_occupation_lp(const ExtendedProblem& problem, const LpOptions& options = {});

/// eta (x) delta_{policy(x)} (x) delta_{nearest y to grad phi(x)}.
OccupationMeasure candidate_measure(const ExtendedProblem& problem, const Discretization& disc,
                                    const TwistedChain& chain, std::span<const double> eta,
                                    std::span<const int> policy);

struct TestFunction {
    std::string label;
    std::vector<double> values;  // over the active nodes
};

/// Polynomials up to degree 4 (both signs, scaled by the radius), Gaussians
/// at widths r/4, r/2, r (both signs), the zero function and, when given,
/// the gauge log phi.
std::vector<TestFunction> test_function_family(const Grid& grid, const ActiveSet& active,
                                               std::span<const double> gauge = {});

struct SaddleReport {
    std::vector<std::string> function_labels;
    std::vector<std::vector<double>> f;  // F(g, mu) as [g][mu]
    std::vector<double> sup_over_measures;  // max_z (A g + R)(z) per g
    double sup_inf = 0.0;  // max over listed mu of min over g of F
    double inf_sup = 0.0;  // min over g of max_z (A g + R)(z)
    std::string inf_sup_argmin;
};

SaddleReport verify_saddle(const ExtendedProblem& problem, std::span<const TestFunction> functions,
                           std::span<const OccupationMeasure> measures);

/// The LP in CPLEX LP text format (maximize, one balance row per node but
/// the last, a mass row, implicit nonnegativity).
void write_lp_format(std::ostream& os, const ExtendedProblem& problem, const std::string& comment = {});

}  // namespace riskeig
