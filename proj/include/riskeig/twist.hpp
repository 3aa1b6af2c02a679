#pragma once

#include <span>
#include <vector>

#include "riskeig/discretize.hpp"
#include "riskeig/eigensolve.hpp"

namespace riskeig {

/// Ground-state (Doob) transform of a policy generator through its principal
/// eigenvector.
struct TwistedChain {
    CsrMatrix rates;            // off-diagonal A_xy phi(y) / phi(x), diagonal A_xx + c(x) - rho
    std::vector<double> gauge;  // log phi
    EigenPair pair;             // source eigenpair
    bool residual_warning = false;  // source residual above 1e-6
};

TwistedChain doob_transform(const CsrMatrix& a, std::span<const double> c, const EigenPair& pair);

/// Max |row sum| of the twisted rates.
double max_row_sum(const TwistedChain& chain);

/// eta^T Q = 0, sum eta = 1, eta > 0. Throws NotIrreducible when the rate
/// graph is not strongly connected or the solution is not positive.
std::vector<double> stationary_distribution(const CsrMatrix& q);
std::vector<double> stationary_distribution(const TwistedChain& chain);

/// max_y |(eta^T Q)_y|.
double balance_residual(const CsrMatrix& q, std::span<const double> eta);

struct EntropyReport {
    std::vector<double> discrete_entropy;    // H_d = (Q phi) + c - rho
    std::vector<double> continuum_entropy;   // 1/2 |sigma^T grad phi|^2, central differences
    double identity_residual = 0.0;          // |rho - sum eta (c - H_d)|
    double field_mismatch = 0.0;             // max |H_d - H| on nodes with |x|_inf <= 0.8 r
    double entropy_mass = 0.0;               // sum eta H_d
};

EntropyReport entropy_report(const TwistedChain& chain, std::span<const double> eta, const Discretization& disc,
                             std::span<const double> c);

/// Max |(Q phi^{-1})(x) - (c(x) - rho) phi^{-1}(x)| over the nodes.
double lyapunov_defect(const TwistedChain& chain, std::span<const double> c);

/// Per-axis central-difference gradient of a field over the active nodes
/// (one-sided where a neighbor is not active).
std::vector<Vec2> gradient(const Discretization& disc, std::span<const double> field);

struct RatioProfile {
    std::vector<double> ratio;  // per active node
    double max_ratio = 0.0;
    Point location{};
};

/// |grad phi| / phi divided by 1 + sup over the node and its stencil
/// neighbours of max_u (|b| + sqrt|c|).
RatioProfile gradient_bound_diagnostic(const EigenPair& pair, const Discretization& disc);

/// Least-squares slope of |log phi| against log(1 + |x|) over the nodes
/// with |x|_inf >= r / 2.
double growth_diagnostic(const EigenPair& pair, const Discretization& disc);

}  // namespace riskeig
