#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "riskeig/grid.hpp"
#include "riskeig/model.hpp"
#include "riskeig/sparse.hpp"
#include "riskeig/types.hpp"

namespace riskeig {

/// Nodes that carry unknowns: all nodes under Neumann, interior nodes under
/// Dirichlet (the boundary is eliminated).
struct ActiveSet {
    std::vector<std::size_t> grid_index;     // active -> grid node
    std::vector<std::ptrdiff_t> active_index; // grid node -> active, -1 if eliminated
    std::size_t center = 0;                  // active index of the grid center

    std::size_t size() const { return grid_index.size(); }
};

ActiveSet make_active_set(const Grid& grid, BoundaryCondition bc);

/// Monotone finite-difference generator of one control over the active set.
struct GeneratorMatrix {
    CsrMatrix matrix;
    BoundaryCondition bc = BoundaryCondition::neumann;
    std::size_t control_index = 0;
};

/// Model fields tabulated on every grid node.
struct FieldTables {
    std::size_t nodes = 0;
    std::size_t controls = 0;
    std::vector<Vec2> drift;     // [control * nodes + node]
    std::vector<double> reward;  // [control * nodes + node]
    std::vector<Mat2> sigma;     // [node]
    std::vector<Mat2> diffusion; // [node], a = sigma sigma^T

    const Vec2& b(std::size_t control, std::size_t node) const { return drift[control * nodes + node]; }
    double c(std::size_t control, std::size_t node) const { return reward[control * nodes + node]; }
};

/// Throws EvaluationError naming the first node with a non-finite value.
FieldTables tabulate_fields(const DiffusionModel& model, const Grid& grid);

/// Upwind drift, central diffusion, monotone 7-point cross terms in 2D.
/// Neumann folds ghost nodes by even reflection; Dirichlet drops the
/// coupling to boundary nodes.
CsrMatrix assemble_generator(const Grid& grid, const ActiveSet& active, std::span<const Mat2> diffusion,
                             std::span<const Vec2> drift, BoundaryCondition bc);

GeneratorMatrix build_generator(const DiffusionModel& model, const Grid& grid, std::size_t control_index,
                                BoundaryCondition bc);

/// Everything the eigen solvers need: the grid, its active set, one
/// generator per control and the rewards restricted to the active set.
struct Discretization {
    Grid grid;
    BoundaryCondition bc;
    Direction direction;
    ActiveSet active;
    FieldTables fields;
    std::vector<GeneratorMatrix> generators;
    std::vector<std::vector<double>> reward;  // [control][active node]

    std::size_t size() const { return active.size(); }
    std::size_t control_count() const { return generators.size(); }
    const Point& point(std::size_t active_node) const { return grid.node(active.grid_index[active_node]); }
};

Discretization discretize(const DiffusionModel& model, const Grid& grid, BoundaryCondition bc,
                          Exec exec = Exec::parallel);

/// Generator and reward of a stationary Markov policy (one control index per
/// active node): row x is taken from the generator of policy[x].
CsrMatrix policy_generator(const Discretization& disc, std::span<const int> policy);
std::vector<double> policy_reward(const Discretization& disc, std::span<const int> policy);

struct SemilinearResult {
    std::vector<double> value;  // (G V)(x)
    std::vector<int> policy;    // optimizing control, lowest index on ties
};

/// (G V)(x) = opt_u [ (A_u V)(x) + c(x, u) V(x) ], opt = max or min per the
/// discretization's direction. V must be strictly positive.
SemilinearResult apply_semilinear(const Discretization& disc, std::span<const double> v,
                                  Exec exec = Exec::parallel);

/// Text triplet dump "row col value" of a generator, one entry per line.
std::string to_triplets(const CsrMatrix& m);

}  // namespace riskeig
