#include "riskeig/occupation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "riskeig/error.hpp"
#include "riskeig/kernels.hpp"
#include "riskeig/simplex.hpp"

namespace riskeig {

VelocityGrid VelocityGrid::uniform(int dimension, double range, int points) {
    if (dimension != 1 && dimension != 2) throw InvalidArgument("velocity grid dimension must be 1 or 2");
    if (points < 1 || points % 2 == 0) throw InvalidArgument("velocity grid needs an odd number of points");
    if (points > 1 && !(range > 0.0)) throw InvalidArgument("velocity grid range must be positive");
    VelocityGrid v;
    v.dimension = dimension;
    const int m = (points - 1) / 2;
    v.axis.resize(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) v.axis[static_cast<std::size_t>(i)] = m == 0 ? 0.0 : range * (i - m) / m;
    return v;
}

std::size_t VelocityGrid::size() const { return dimension == 1 ? axis.size() : axis.size() * axis.size(); }

Vec2 VelocityGrid::velocity(std::size_t k) const {
    if (dimension == 1) return {axis[k], 0.0};
    return {axis[k % axis.size()], axis[k / axis.size()]};
}

std::size_t VelocityGrid::zero_index() const {
    const std::size_t m = axis.size() / 2;
    return dimension == 1 ? m : m + m * axis.size();
}

namespace {

Vec2 sigma_t_times(const Mat2& s, const Vec2& y, int d) {
    if (d == 1) return {s[0] * y[0], 0.0};
    return {s[0] * y[0] + s[2] * y[1], s[1] * y[0] + s[3] * y[1]};
}

Vec2 a_times(const Mat2& a, const Vec2& y, int d) {
    if (d == 1) return {a[0] * y[0], 0.0};
    return {a[0] * y[0] + a[1] * y[1], a[2] * y[0] + a[3] * y[1]};
}

}  // namespace

ExtendedProblem build_extended(const DiffusionModel& model, const Grid& grid, const VelocityGrid& ygrid,
                               BoundaryCondition bc, Exec exec) {
    if (ygrid.dimension != grid.dimension()) throw InvalidArgument("velocity grid and state grid dimensions differ");
    const FieldTables t = tabulate_fields(model, grid);
    const int d = grid.dimension();
    ExtendedProblem prob{ExtendedGeneratorSet{grid, make_active_set(grid, bc), ygrid, t.controls, {}}, {}};
    ExtendedGeneratorSet& ext = prob.generators;
    const std::size_t nv = ygrid.size();
    const std::size_t pairs = t.controls * nv;
    ext.matrices.resize(pairs);
    kernels::for_each_index(exec, pairs, [&](std::size_t k) {
        const std::size_t u = k / nv;
        const Vec2 y = ygrid.velocity(k % nv);
        std::vector<Vec2> drift(t.nodes);
        for (std::size_t g = 0; g < t.nodes; ++g) {
            const Vec2 ay = a_times(t.diffusion[g], y, d);
            drift[g] = {t.b(u, g)[0] + ay[0], t.b(u, g)[1] + ay[1]};
        }
        ext.matrices[k] = assemble_generator(ext.grid, ext.active, t.diffusion, drift, bc);
    });

    const std::size_t n = ext.active.size();
    prob.reward.value.assign(pairs, std::vector<double>(n));
    prob.reward.entropy.assign(pairs, std::vector<double>(n));
    for (std::size_t k = 0; k < pairs; ++k) {
        const std::size_t u = k / nv;
        const Vec2 y = ygrid.velocity(k % nv);
        for (std::size_t p = 0; p < n; ++p) {
            const std::size_t g = ext.active.grid_index[p];
            const Vec2 sy = sigma_t_times(t.sigma[g], y, d);
            const double e = 0.5 * (sy[0] * sy[0] + sy[1] * sy[1]);
            prob.reward.entropy[k][p] = e;
            prob.reward.value[k][p] = t.c(u, g) - e;
        }
    }
    return prob;
}

void evaluate_measure(const ExtendedProblem& problem, OccupationMeasure& mu) {
    const auto& ext = problem.generators;
    const std::size_t n = ext.nodes();
    std::vector<double> flow(n, 0.0);
    mu.mass = mu.objective = mu.entropy_mass = 0.0;
    for (std::size_t k = 0; k < ext.pairs(); ++k) {
        const CsrMatrix& a = ext.matrices[k];
        for (std::size_t x = 0; x < n; ++x) {
            const double w = mu.weight[k][x];
            if (w == 0.0) continue;
            mu.mass += w;
            mu.objective += w * problem.reward.value[k][x];
            mu.entropy_mass += w * problem.reward.entropy[k][x];
            for (std::size_t j = a.row_ptr[x]; j < a.row_ptr[x + 1]; ++j) flow[a.col[j]] += w * a.val[j];
        }
    }
    mu.stationarity_residual = 0.0;
    for (double f : flow) mu.stationarity_residual = std::max(mu.stationarity_residual, std::abs(f));
}

OccupationMeasure solve_occupation_lp(const ExtendedProblem& problem, const LpOptions& options) {
    const auto& ext = problem.generators;
    const std::size_t n = ext.nodes();
    if (n != ext.grid.size()) throw InvalidArgument("the occupation LP needs a Neumann discretization");
    const std::size_t pairs = ext.pairs();

    // Rows 0..n-2: balance at node x; row n-1: total mass.
    EqualityLp lp;
    lp.a.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pairs * n));
    std::vector<Eigen::Triplet<double>> trip;
    lp.c.resize(pairs * n);
    for (std::size_t k = 0; k < pairs; ++k) {
        const CsrMatrix& a = ext.matrices[k];
        for (std::size_t x = 0; x < n; ++x) {
            const auto col = static_cast<int>(k * n + x);
            for (std::size_t j = a.row_ptr[x]; j < a.row_ptr[x + 1]; ++j)
                if (a.col[j] != n - 1) trip.emplace_back(static_cast<int>(a.col[j]), col, a.val[j]);
            trip.emplace_back(static_cast<int>(n - 1), col, 1.0);
            lp.c[k * n + x] = problem.reward.value[k][x];
        }
    }
    lp.a.setFromTriplets(trip.begin(), trip.end());
    lp.a.makeCompressed();
    lp.b.assign(n, 0.0);
    lp.b[n - 1] = 1.0;

    // Start from the stationary law of the chain with control 0 and y = 0.
    const std::size_t k0 = ext.ygrid.zero_index();
    std::vector<std::size_t> basis(n);
    for (std::size_t x = 0; x < n; ++x) basis[x] = k0 * n + x;

    SimplexOptions so;
    so.feasibility_tol = options.feasibility_tol;
    so.optimality_tol = options.optimality_tol;
    so.max_iterations = options.max_iterations;
    const SimplexResult res = solve_simplex(lp, basis, so);

    OccupationMeasure mu;
    mu.weight.assign(pairs, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < pairs; ++k)
        for (std::size_t x = 0; x < n; ++x) mu.weight[k][x] = res.x[k * n + x];
    mu.iterations = res.iterations;
    evaluate_measure(problem, mu);
    return mu;
}

OccupationMeasure candidate_measure(const ExtendedProblem& problem, const Discretization& disc,
                                    const TwistedChain& chain, std::span<const double> eta,
                                    std::span<const int> policy) {
    const auto& ext = problem.generators;
    const std::size_t n = ext.nodes();
    if (disc.size() != n || eta.size() != n || policy.size() != n || chain.gauge.size() != n)
        throw InvalidArgument("candidate_measure: discretization, chain and LP sizes differ");
    const VelocityGrid& yg = ext.ygrid;
    const std::size_t p = yg.axis.size();
    const double range = yg.range();
    const double step = yg.step();
    const auto grad = gradient(disc, chain.gauge);

    OccupationMeasure mu;
    mu.weight.assign(ext.pairs(), std::vector<double>(n, 0.0));
    for (std::size_t x = 0; x < n; ++x) {
        std::size_t idx[2] = {0, 0};
        for (int k = 0; k < yg.dimension; ++k) {
            const double g = grad[x][k];
            if (std::abs(g) > range + 0.5 * step && eta[x] > 1e-8) {
                char msg[200];
                std::snprintf(msg, sizeof msg,
                              "grad log phi = %.4g at x = %.4g exceeds the velocity range %.4g; use a larger Y", g,
                              disc.point(x)[k], range);
                throw RangeError(msg);
            }
            const double pos = step > 0.0 ? std::round((g + range) / step) : 0.0;
            idx[k] = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(p - 1)));
        }
        const std::size_t v = yg.dimension == 1 ? idx[0] : idx[0] + idx[1] * p;
        mu.weight[static_cast<std::size_t>(policy[x]) * yg.size() + v][x] = eta[x];
    }
    evaluate_measure(problem, mu);
    return mu;
}

std::vector<TestFunction> test_function_family(const Grid& grid, const ActiveSet& active,
                                               std::span<const double> gauge) {
    const int d = grid.dimension();
    const double r = grid.radius();
    const std::size_t n = active.size();
    std::vector<TestFunction> fam;
    fam.push_back({"zero", std::vector<double>(n, 0.0)});

    auto add_signed = [&](const std::string& label, auto&& fn) {
        TestFunction plus{"+" + label, std::vector<double>(n)};
        for (std::size_t p = 0; p < n; ++p) plus.values[p] = fn(grid.node(active.grid_index[p]));
        TestFunction minus{"-" + label, plus.values};
        for (double& v : minus.values) v = -v;
        fam.push_back(std::move(plus));
        fam.push_back(std::move(minus));
    };

    for (int deg = 1; deg <= 4; ++deg) {
        for (int i = deg; i >= 0; --i) {
            const int j = deg - i;
            if (d == 1 && j > 0) continue;
            std::string label = "x^" + std::to_string(i);
            if (d == 2) label += " y^" + std::to_string(j);
            add_signed(label, [=](const Point& x) { return std::pow(x[0] / r, i) * std::pow(x[1] / r, j); });
        }
    }
    const std::pair<const char*, double> widths[] = {{"r/4", r / 4}, {"r/2", r / 2}, {"r", r}};
    for (const auto& [name, w] : widths)
        add_signed(std::string("gauss ") + name, [=](const Point& x) {
            return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * w * w));
        });
    if (!gauge.empty()) {
        if (gauge.size() != n) throw InvalidArgument("gauge does not match the active set");
        fam.push_back({"log phi", std::vector<double>(gauge.begin(), gauge.end())});
    }
    return fam;
}

SaddleReport verify_saddle(const ExtendedProblem& problem, std::span<const TestFunction> functions,
                           std::span<const OccupationMeasure> measures) {
    const auto& ext = problem.generators;
    const std::size_t n = ext.nodes();
    SaddleReport rep;
    rep.inf_sup = std::numeric_limits<double>::infinity();
    rep.f.assign(functions.size(), std::vector<double>(measures.size(), 0.0));
    for (std::size_t gi = 0; gi < functions.size(); ++gi) {
        const auto& g = functions[gi].values;
        if (g.size() != n) throw InvalidArgument("test function " + functions[gi].label + " has the wrong length");
        rep.function_labels.push_back(functions[gi].label);
        double sup = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < ext.pairs(); ++k) {
            const auto ag = ext.matrices[k].multiply(g);
            for (std::size_t x = 0; x < n; ++x) {
                const double v = ag[x] + problem.reward.value[k][x];
                sup = std::max(sup, v);
                for (std::size_t mi = 0; mi < measures.size(); ++mi) rep.f[gi][mi] += measures[mi].weight[k][x] * v;
            }
        }
        rep.sup_over_measures.push_back(sup);
        if (sup < rep.inf_sup) {
            rep.inf_sup = sup;
            rep.inf_sup_argmin = functions[gi].label;
        }
    }
    rep.sup_inf = -std::numeric_limits<double>::infinity();
    for (std::size_t mi = 0; mi < measures.size(); ++mi) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t gi = 0; gi < functions.size(); ++gi) lo = std::min(lo, rep.f[gi][mi]);
        rep.sup_inf = std::max(rep.sup_inf, lo);
    }
    return rep;
}

void write_lp_format(std::ostream& os, const ExtendedProblem& problem, const std::string& comment) {
    const auto& ext = problem.generators;
    const std::size_t n = ext.nodes();
    const std::size_t pairs = ext.pairs();
    char buf[96];
    auto term = [&](double coef, std::size_t k, std::size_t x) {
        std::snprintf(buf, sizeof buf, " %c %.17g m_%zu_%zu", coef < 0 ? '-' : '+', std::abs(coef), k, x);
        return std::string(buf);
    };
    auto emit = [&](const std::vector<std::string>& terms) {
        for (std::size_t i = 0; i < terms.size(); ++i) {
            os << terms[i];
            if (i % 6 == 5 && i + 1 < terms.size()) os << "\n  ";
        }
    };

    if (!comment.empty()) os << "\\ " << comment << "\n";
    os << "\\ variable m_k_x: pair k = control * " << ext.velocities() << " + velocity, node x\n";
    os << "Maximize\n obj:";
    std::vector<std::string> terms;
    for (std::size_t k = 0; k < pairs; ++k)
        for (std::size_t x = 0; x < n; ++x) terms.push_back(term(problem.reward.value[k][x], k, x));
    emit(terms);
    os << "\nSubject To\n";

    std::vector<std::vector<std::string>> rows(n);
    for (std::size_t k = 0; k < pairs; ++k) {
        const CsrMatrix& a = ext.matrices[k];
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t j = a.row_ptr[x]; j < a.row_ptr[x + 1]; ++j)
                if (a.val[j] != 0.0) rows[a.col[j]].push_back(term(a.val[j], k, x));
    }
    for (std::size_t y = 0; y + 1 < n; ++y) {
        os << " bal_" << y << ":";
        emit(rows[y]);
        os << " = 0\n";
    }
    os << " mass:";
    terms.clear();
    for (std::size_t k = 0; k < pairs; ++k)
        for (std::size_t x = 0; x < n; ++x) terms.push_back(term(1.0, k, x));
    emit(terms);
    os << " = 1\nEnd\n";
}

}  // namespace riskeig
