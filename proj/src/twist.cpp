#include "riskeig/twist.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "riskeig/error.hpp"
#include "fit.hpp"

namespace riskeig {

TwistedChain doob_transform(const CsrMatrix& a, std::span<const double> c, const EigenPair& pair) {
    const std::size_t n = a.rows;
    if (pair.phi.size() != n || c.size() != n) throw InvalidArgument("doob_transform: size mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (!(pair.phi[i] > 0.0))
            throw InvalidArgument("doob_transform needs a strictly positive eigenvector (entry " + std::to_string(i) +
                                  ")");
    TwistedChain chain;
    chain.rates = a;
    chain.gauge.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
        chain.gauge[x] = std::log(pair.phi[x]);
        bool has_diagonal = false;
        for (std::size_t k = a.row_ptr[x]; k < a.row_ptr[x + 1]; ++k) {
            const std::size_t y = a.col[k];
            if (y == x) {
                chain.rates.val[k] = a.val[k] + c[x] - pair.value;
                has_diagonal = true;
            } else {
                chain.rates.val[k] = a.val[k] * pair.phi[y] / pair.phi[x];
            }
        }
        if (!has_diagonal) throw InternalError("generator row " + std::to_string(x) + " stores no diagonal");
    }
    chain.pair = pair;
    chain.residual_warning = pair.residual > 1e-6;
    return chain;
}

double max_row_sum(const TwistedChain& chain) {
    double m = 0.0;
    for (std::size_t i = 0; i < chain.rates.rows; ++i) m = std::max(m, std::abs(chain.rates.row_sum(i)));
    return m;
}

namespace {

// Reachability over positive off-diagonal rates, forwards or backwards.
std::vector<char> reachable(const CsrMatrix& q, std::size_t start, bool backwards) {
    const std::size_t n = q.rows;
    std::vector<std::vector<std::size_t>> in;
    if (backwards) {
        in.resize(n);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t k = q.row_ptr[x]; k < q.row_ptr[x + 1]; ++k)
                if (q.col[k] != x && q.val[k] > 0.0) in[q.col[k]].push_back(x);
    }
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
        const std::size_t x = stack.back();
        stack.pop_back();
        auto visit = [&](std::size_t y) {
            if (!seen[y]) {
                seen[y] = 1;
                stack.push_back(y);
            }
        };
        if (backwards) {
            for (std::size_t y : in[x]) visit(y);
        } else {
            for (std::size_t k = q.row_ptr[x]; k < q.row_ptr[x + 1]; ++k)
                if (q.col[k] != x && q.val[k] > 0.0) visit(q.col[k]);
        }
    }
    return seen;
}

}  // namespace

std::vector<double> stationary_distribution(const CsrMatrix& q) {
    const std::size_t n = q.rows;
    if (n == 0 || q.cols != n) throw InvalidArgument("stationary_distribution needs a nonempty square matrix");
    if (n == 1) return {1.0};

    // The pinned node is the middle index, which is the grid center for the
    // symmetric active sets used here.
    const std::size_t pin = n / 2;
    for (bool backwards : {false, true}) {
        const auto seen = reachable(q, pin, backwards);
        const auto miss = std::find(seen.begin(), seen.end(), 0);
        if (miss != seen.end())
            throw NotIrreducible("rate matrix is not irreducible: node " +
                                 std::to_string(static_cast<std::size_t>(miss - seen.begin())) +
                                 (backwards ? " cannot reach" : " is unreachable from") + " node " +
                                 std::to_string(pin));
    }

    // With eta(pin) = 1 the remaining balance equations read
    // (-Q_KK)^T eta_K = Q_{pin,K}^T, a nonsingular M-matrix system. This is
    // the balance system with the pinned column replaced by the
    // normalization, rescaled afterwards.
    auto reduced = [pin](std::size_t i) { return static_cast<int>(i < pin ? i : i - 1); };
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n - 1));
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t k = q.row_ptr[x]; k < q.row_ptr[x + 1]; ++k) {
            const std::size_t y = q.col[k];
            if (y == pin) continue;
            if (x == pin)
                rhs[reduced(y)] += q.val[k];
            else
                trip.emplace_back(reduced(y), reduced(x), -q.val[k]);
        }
    }
    Eigen::SparseMatrix<double> b(static_cast<int>(n - 1), static_cast<int>(n - 1));
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::NaturalOrdering<int>> lu;
    lu.setPivotThreshold(0.0);
    lu.compute(b);
    if (lu.info() != Eigen::Success) throw NotIrreducible("balance system is singular beyond the normalization");
    const Eigen::VectorXd sol = lu.solve(rhs);

    std::vector<double> eta(n);
    eta[pin] = 1.0;
    for (std::size_t y = 0; y < n; ++y)
        if (y != pin) eta[y] = sol[reduced(y)];
    double total = 0.0;
    for (double v : eta) total += v;
    for (std::size_t y = 0; y < n; ++y) {
        eta[y] /= total;
        if (!(eta[y] > 0.0) || !std::isfinite(eta[y]))
            throw NotIrreducible("stationary weight at node " + std::to_string(y) + " is not positive");
    }
    return eta;
}

std::vector<double> stationary_distribution(const TwistedChain& chain) { return stationary_distribution(chain.rates); }

double balance_residual(const CsrMatrix& q, std::span<const double> eta) {
    std::vector<double> flow(q.cols, 0.0);
    for (std::size_t x = 0; x < q.rows; ++x)
        for (std::size_t k = q.row_ptr[x]; k < q.row_ptr[x + 1]; ++k) flow[q.col[k]] += eta[x] * q.val[k];
    double m = 0.0;
    for (double f : flow) m = std::max(m, std::abs(f));
    return m;
}

std::vector<Vec2> gradient(const Discretization& disc, std::span<const double> field) {
    const Grid& grid = disc.grid;
    const int d = grid.dimension();
    const double h = grid.spacing();
    const int n = grid.nodes_per_axis();
    std::vector<Vec2> g(disc.size(), Vec2{0.0, 0.0});
    for (std::size_t p = 0; p < disc.size(); ++p) {
        const auto idx = grid.multi_index(disc.active.grid_index[p]);
        for (int k = 0; k < d; ++k) {
            auto neighbour = [&](int shift) -> std::ptrdiff_t {
                auto m = idx;
                m[k] += shift;
                if (m[k] < 0 || m[k] > n - 1) return -1;
                return disc.active.active_index[grid.flat_index(m[0], m[1])];
            };
            const std::ptrdiff_t up = neighbour(1), down = neighbour(-1);
            if (up >= 0 && down >= 0)
                g[p][k] = (field[up] - field[down]) / (2.0 * h);
            else if (up >= 0)
                g[p][k] = (field[up] - field[p]) / h;
            else if (down >= 0)
                g[p][k] = (field[p] - field[down]) / h;
        }
    }
    return g;
}

EntropyReport entropy_report(const TwistedChain& chain, std::span<const double> eta, const Discretization& disc,
                             std::span<const double> c) {
    const std::size_t n = chain.rates.rows;
    if (eta.size() != n || c.size() != n || disc.size() != n) throw InvalidArgument("entropy_report: size mismatch");
    const double rho = chain.pair.value;
    EntropyReport rep;
    rep.discrete_entropy = chain.rates.multiply(chain.gauge);
    double average = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        rep.discrete_entropy[x] += c[x] - rho;
        average += eta[x] * (c[x] - rep.discrete_entropy[x]);
        rep.entropy_mass += eta[x] * rep.discrete_entropy[x];
    }
    rep.identity_residual = std::abs(rho - average);

    const auto grad = gradient(disc, chain.gauge);
    const int d = disc.grid.dimension();
    const double inner = 0.8 * disc.grid.radius() * (1.0 + 1e-12);
    rep.continuum_entropy.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
        const Mat2& s = disc.fields.sigma[disc.active.grid_index[x]];
        const double v0 = s[0] * grad[x][0] + (d == 2 ? s[2] * grad[x][1] : 0.0);
        const double v1 = d == 2 ? s[1] * grad[x][0] + s[3] * grad[x][1] : 0.0;
        rep.continuum_entropy[x] = 0.5 * (v0 * v0 + v1 * v1);
        if (sup_norm(disc.point(x), d) <= inner)
            rep.field_mismatch =
                std::max(rep.field_mismatch, std::abs(rep.discrete_entropy[x] - rep.continuum_entropy[x]));
    }
    return rep;
}

double lyapunov_defect(const TwistedChain& chain, std::span<const double> c) {
    const std::size_t n = chain.rates.rows;
    std::vector<double> inv(n);
    for (std::size_t x = 0; x < n; ++x) inv[x] = 1.0 / chain.pair.phi[x];
    const auto q_inv = chain.rates.multiply(inv);
    double m = 0.0;
    for (std::size_t x = 0; x < n; ++x) m = std::max(m, std::abs(q_inv[x] - (c[x] - chain.pair.value) * inv[x]));
    return m;
}

RatioProfile gradient_bound_diagnostic(const EigenPair& pair, const Discretization& disc) {
    const Grid& grid = disc.grid;
    const int d = grid.dimension();
    const int n = grid.nodes_per_axis();
    const FieldTables& t = disc.fields;

    std::vector<double> scale(grid.size(), 0.0);  // max_u |b| + sqrt|c| per grid node
    for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t u = 0; u < t.controls; ++u) {
            const Vec2& b = t.b(u, g);
            scale[g] = std::max(scale[g], std::hypot(b[0], b[1]) + std::sqrt(std::abs(t.c(u, g))));
        }

    const auto grad = gradient(disc, pair.phi);
    RatioProfile prof;
    prof.ratio.resize(disc.size());
    for (std::size_t p = 0; p < disc.size(); ++p) {
        const auto idx = grid.multi_index(disc.active.grid_index[p]);
        double local = 0.0;
        const int reach_j = d == 2 ? 1 : 0;
        for (int di = -1; di <= 1; ++di)
            for (int dj = -reach_j; dj <= reach_j; ++dj) {
                const int i = idx[0] + di, j = idx[1] + dj;
                if (i < 0 || i > n - 1 || j < 0 || (d == 2 && j > n - 1)) continue;
                local = std::max(local, scale[grid.flat_index(i, j)]);
            }
        const double g = std::hypot(grad[p][0], grad[p][1]) / pair.phi[p];
        prof.ratio[p] = g / (1.0 + local);
        if (prof.ratio[p] > prof.max_ratio) {
            prof.max_ratio = prof.ratio[p];
            prof.location = disc.point(p);
        }
    }
    return prof;
}

double growth_diagnostic(const EigenPair& pair, const Discretization& disc) {
    const int d = disc.grid.dimension();
    const double half = 0.5 * disc.grid.radius() * (1.0 - 1e-12);
    std::vector<double> lx, ly;
    for (std::size_t p = 0; p < disc.size(); ++p) {
        const Point& x = disc.point(p);
        if (sup_norm(x, d) < half) continue;
        lx.push_back(std::log1p(norm(x, d)));
        ly.push_back(std::abs(std::log(pair.phi[p])));
    }
    return detail::least_squares_slope(lx, ly);
}

}  // namespace riskeig
