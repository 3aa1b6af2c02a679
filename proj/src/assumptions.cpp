#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "riskeig/discretize.hpp"
#include "riskeig/eigensolve.hpp"
#include "riskeig/error.hpp"
#include "riskeig/grid.hpp"
#include "riskeig/model.hpp"
#include "fit.hpp"

namespace riskeig {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shell fractions of the radius for the tail proxies.
constexpr double kShells[] = {0.5, 0.7, 0.9};

std::pair<double, double> eigenvalues(const Mat2& a, int d) {
    if (d == 1) return {a[0], a[0]};
    const double m = 0.5 * (a[0] + a[3]);
    const double q = std::hypot(0.5 * (a[0] - a[3]), 0.5 * (a[1] + a[2]));
    return {m - q, m + q};
}

bool in_shell(const Grid& grid, std::size_t g, double s) {
    return sup_norm(grid.node(g), grid.dimension()) >= s - 1e-12 * grid.radius();
}

// Central differences of a grid field, one-sided on the box faces.
std::vector<Vec2> grid_gradient(const Grid& grid, const std::vector<double>& f) {
    const int n = grid.nodes_per_axis();
    const double h = grid.spacing();
    std::vector<Vec2> g(grid.size(), Vec2{0.0, 0.0});
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto idx = grid.multi_index(p);
        for (int k = 0; k < grid.dimension(); ++k) {
            auto at = [&](int shift) {
                auto m = idx;
                m[k] += shift;
                return f[grid.flat_index(m[0], m[1])];
            };
            if (idx[k] == 0)
                g[p][k] = (at(1) - at(0)) / h;
            else if (idx[k] == n - 1)
                g[p][k] = (at(0) - at(-1)) / h;
            else
                g[p][k] = (at(1) - at(-1)) / (2.0 * h);
        }
    }
    return g;
}

std::vector<double> neumann_gauge(const DiffusionModel& model, const Grid& grid) {
    const Discretization disc = discretize(model, grid, BoundaryCondition::neumann, Exec::serial);
    const SemilinearSolution s = solve_semilinear(disc, 1e-10, {}, Exec::serial);
    std::vector<double> phi(grid.size());
    for (std::size_t p = 0; p < disc.size(); ++p) phi[disc.active.grid_index[p]] = std::log(s.pair.phi[p]);
    return phi;
}

}  // namespace

AssumptionReport check_assumptions(const DiffusionModel& model, const Grid& grid, double rho_hat,
                                   std::span<const double> log_phi) {
    if (grid.size() == 0) throw InvalidArgument("check_assumptions needs a nonempty grid");
    const FieldTables t = tabulate_fields(model, grid);
    const int d = grid.dimension();
    const double r = grid.radius();
    const std::size_t m = t.controls;

    AssumptionReport rep;
    rep.ellipticity_floor = kInf;
    rep.ellipticity_ceiling = -kInf;
    rep.reward_max = -kInf;

    std::vector<double> cmax(t.nodes, -kInf), cmin(t.nodes, kInf), cabs_max(t.nodes, 0.0), cabs_min(t.nodes, kInf),
        bmax(t.nodes, 0.0), inward(t.nodes, 0.0);
    for (std::size_t g = 0; g < t.nodes; ++g) {
        const Point& x = grid.node(g);
        const auto [lo, hi] = eigenvalues(t.diffusion[g], d);
        rep.ellipticity_floor = std::min(rep.ellipticity_floor, lo);
        rep.ellipticity_ceiling = std::max(rep.ellipticity_ceiling, hi);
        const Mat2& s = t.sigma[g];
        const double sig2 = d == 1 ? s[0] * s[0] : s[0] * s[0] + s[1] * s[1] + s[2] * s[2] + s[3] * s[3];
        const double x2 = x[0] * x[0] + x[1] * x[1];
        for (std::size_t u = 0; u < m; ++u) {
            const Vec2& b = t.b(u, g);
            const double c = t.c(u, g);
            const double b2 = b[0] * b[0] + b[1] * b[1];
            rep.growth_constant = std::max(rep.growth_constant, (b2 + sig2) / (1.0 + x2));
            cmax[g] = std::max(cmax[g], c);
            cmin[g] = std::min(cmin[g], c);
            cabs_max[g] = std::max(cabs_max[g], std::abs(c));
            cabs_min[g] = std::min(cabs_min[g], std::abs(c));
            bmax[g] = std::max(bmax[g], std::sqrt(b2));
            if (x2 > 0.0) inward[g] = std::max(inward[g], std::max(-(b[0] * x[0] + b[1] * x[1]), 0.0) / x2);
        }
        rep.reward_max = std::max(rep.reward_max, cmax[g]);
    }
    if (!(rep.ellipticity_floor > 0.0))
        throw EllipticityError("diffusion matrix is not positive definite on the grid (smallest eigenvalue " +
                               std::to_string(rep.ellipticity_floor) + ")");
    rep.reward_bound_respected = rep.reward_max <= model.reward_upper_bound;

    // Growth fits over the outer half.
    std::vector<double> lx, lc, lb;
    for (std::size_t g = 0; g < t.nodes; ++g) {
        if (!in_shell(grid, g, 0.5 * r)) continue;
        lx.push_back(std::log(norm(grid.node(g), d)));
        lc.push_back(std::log1p(cabs_max[g]));
        lb.push_back(std::log1p(bmax[g]));
    }
    rep.reward_growth_exponent = detail::least_squares_slope(lx, lc);

    rep.shell_radius = 0.9 * r;
    rep.shell_reward_max = -kInf;
    for (std::size_t g = 0; g < t.nodes; ++g)
        if (in_shell(grid, g, rep.shell_radius)) rep.shell_reward_max = std::max(rep.shell_reward_max, cmax[g]);
    rep.near_monotone_margin = rho_hat - rep.shell_reward_max;

    // Tail statistics on the three shells.
    rep.case_shell_radii.clear();
    double tail_cmax[3], tail_cmin[3], tail_inward[3];
    for (int s = 0; s < 3; ++s) {
        const double radius = kShells[s] * r;
        rep.case_shell_radii.push_back(radius);
        tail_cmax[s] = -kInf;
        tail_cmin[s] = kInf;
        tail_inward[s] = 0.0;
        for (std::size_t g = 0; g < t.nodes; ++g) {
            if (!in_shell(grid, g, radius)) continue;
            tail_cmax[s] = std::max(tail_cmax[s], cmax[g]);
            tail_cmin[s] = std::min(tail_cmin[s], cmin[g]);
            tail_inward[s] = std::max(tail_inward[s], inward[g]);
        }
    }

    // (a) -c inf-compact: the tail supremum of max_u c strictly decreases.
    // (b) the tail supremum of <b, x>^- / |x|^2 decays.
    // (c) H / ((1 + |phi|)(1 + |c|)) on the outer shell stays below its
    //     inner maximum.
    if (tail_cmax[0] > tail_cmax[1] && tail_cmax[1] > tail_cmax[2]) {
        rep.a42_case = DriftCase::inf_compact_c;
    } else if (tail_inward[2] == 0.0 || (tail_inward[2] <= 0.9 * tail_inward[0] && tail_inward[2] < tail_inward[1])) {
        rep.a42_case = DriftCase::subquadratic_inward_drift;
    } else {
        std::vector<double> phi;
        if (!log_phi.empty()) {
            if (log_phi.size() != grid.size()) throw InvalidArgument("log_phi must cover every grid node");
            phi.assign(log_phi.begin(), log_phi.end());
        } else {
            phi = neumann_gauge(model, grid);
        }
        const auto grad = grid_gradient(grid, phi);
        double inner = 0.0, outer = 0.0;
        for (std::size_t g = 0; g < t.nodes; ++g) {
            const Mat2& s = t.sigma[g];
            // sigma^T grad
            const double v0 = s[0] * grad[g][0] + (d == 2 ? s[2] * grad[g][1] : 0.0);
            const double v1 = d == 2 ? s[1] * grad[g][0] + s[3] * grad[g][1] : 0.0;
            const double h = 0.5 * (v0 * v0 + v1 * v1);
            const double ratio = h / ((1.0 + std::abs(phi[g])) * (1.0 + cabs_min[g]));
            double& slot = in_shell(grid, g, rep.shell_radius) ? outer : inner;
            slot = std::max(slot, ratio);
        }
        rep.a42_case = outer <= inner + 1e-12 ? DriftCase::bounded_ratio : DriftCase::none;
    }

    if (model.direction == Direction::minimize) {
        rep.a51_theta = detail::least_squares_slope(lx, lb);
        rep.shell_reward_min = tail_cmin[2];
        rep.coercive = tail_cmin[0] < tail_cmin[1] && tail_cmin[1] < tail_cmin[2];
    }
    return rep;
}

}  // namespace riskeig
