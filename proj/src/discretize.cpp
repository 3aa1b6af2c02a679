#include "riskeig/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "riskeig/error.hpp"
#include "riskeig/kernels.hpp"

namespace riskeig {

namespace {

std::string describe(const Point& x, int dimension) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << x[0];
    if (dimension == 2) os << ", " << x[1];
    os << ")";
    return os.str();
}

bool finite(const Vec2& v) { return std::isfinite(v[0]) && std::isfinite(v[1]); }
bool finite(const Mat2& m) { return std::all_of(m.begin(), m.end(), [](double v) { return std::isfinite(v); }); }

}  // namespace

ActiveSet make_active_set(const Grid& grid, BoundaryCondition bc) {
    ActiveSet s;
    s.active_index.assign(grid.size(), -1);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (bc == BoundaryCondition::dirichlet && grid.on_boundary(g)) continue;
        s.active_index[g] = static_cast<std::ptrdiff_t>(s.grid_index.size());
        s.grid_index.push_back(g);
    }
    s.center = static_cast<std::size_t>(s.active_index[grid.center_index()]);
    return s;
}

FieldTables tabulate_fields(const DiffusionModel& model, const Grid& grid) {
    model.validate();
    if (model.dimension != grid.dimension())
        throw InvalidArgument("model dimension " + std::to_string(model.dimension) + " does not match grid dimension " +
                              std::to_string(grid.dimension()));
    FieldTables t;
    t.nodes = grid.size();
    t.controls = model.control_count();
    t.drift.resize(t.nodes * t.controls);
    t.reward.resize(t.nodes * t.controls);
    t.sigma.resize(t.nodes);
    t.diffusion.resize(t.nodes);
    for (std::size_t g = 0; g < t.nodes; ++g) {
        const Point& x = grid.node(g);
        t.sigma[g] = model.sigma(x);
        t.diffusion[g] = model.diffusion(x);
        if (!finite(t.sigma[g]) || !finite(t.diffusion[g]))
            throw EvaluationError("non-finite sigma at node " + std::to_string(g) + " " + describe(x, grid.dimension()));
        for (std::size_t u = 0; u < t.controls; ++u) {
            const Vec2 b = model.drift(x, model.controls[u]);
            const double c = model.reward(x, model.controls[u]);
            if (!finite(b) || !std::isfinite(c))
                throw EvaluationError("non-finite drift or reward at node " + std::to_string(g) + " " +
                                      describe(x, grid.dimension()) + ", control " + std::to_string(u));
            t.drift[u * t.nodes + g] = b;
            t.reward[u * t.nodes + g] = c;
        }
    }
    return t;
}

CsrMatrix assemble_generator(const Grid& grid, const ActiveSet& active, std::span<const Mat2> diffusion,
                             std::span<const Vec2> drift, BoundaryCondition bc) {
    const int d = grid.dimension();
    const int n = grid.nodes_per_axis();
    const double h = grid.spacing();
    const double h2 = h * h;
    const bool neumann = bc == BoundaryCondition::neumann;

    auto reflect = [n](int i) {
        if (i < 0) return -i;
        if (i > n - 1) return 2 * (n - 1) - i;
        return i;
    };

    CsrBuilder builder(active.size(), active.size());
    for (std::size_t p = 0; p < active.size(); ++p) {
        const std::size_t g = active.grid_index[p];
        const auto [i, j] = grid.multi_index(g);
        const Mat2& a = diffusion[g];
        const Vec2& b = drift[g];

        const double a12 = d == 2 ? a[1] : 0.0;
        for (int k = 0; k < d; ++k) {
            const double akk = a[3 * k];
            if (!(akk > 0.0))
                throw EllipticityError("zero diffusion on axis " + std::to_string(k) + " at node " +
                                       describe(grid.node(g), d));
        }
        if (d == 2 && std::abs(a12) > std::min(a[0], a[3]))
            throw NonMonotoneScheme("|a12| = " + std::to_string(std::abs(a12)) + " exceeds min(a11, a22) at node " +
                                    describe(grid.node(g), d));

        double diagonal = 0.0;
        auto couple = [&](int ti, int tj, double w) {
            if (w == 0.0) return;
            diagonal -= w;
            if (neumann) {
                ti = reflect(ti);
                tj = d == 2 ? reflect(tj) : 0;
            } else if (ti <= 0 || ti >= n - 1 || (d == 2 && (tj <= 0 || tj >= n - 1))) {
                return;  // absorbed at the eliminated boundary
            }
            builder.add(static_cast<std::size_t>(active.active_index[grid.flat_index(ti, tj)]), w);
        };

        for (int k = 0; k < d; ++k) {
            const double axial = (a[3 * k] - std::abs(a12)) / (2.0 * h2);
            const double up = axial + std::max(b[k], 0.0) / h;
            const double down = axial + std::max(-b[k], 0.0) / h;
            if (k == 0) {
                couple(i + 1, j, up);
                couple(i - 1, j, down);
            } else {
                couple(i, j + 1, up);
                couple(i, j - 1, down);
            }
        }
        if (d == 2 && a12 != 0.0) {
            const double w = std::abs(a12) / (2.0 * h2);
            if (a12 > 0.0) {
                couple(i + 1, j + 1, w);
                couple(i - 1, j - 1, w);
            } else {
                couple(i + 1, j - 1, w);
                couple(i - 1, j + 1, w);
            }
        }
        builder.add(p, diagonal);
        builder.finish_row();
    }
    return std::move(builder).build();
}

namespace {

GeneratorMatrix generator_from_tables(const Grid& grid, const ActiveSet& active, const FieldTables& t,
                                      std::size_t u, BoundaryCondition bc) {
    GeneratorMatrix gm;
    gm.bc = bc;
    gm.control_index = u;
    gm.matrix = assemble_generator(grid, active, t.diffusion,
                                   std::span<const Vec2>(t.drift).subspan(u * t.nodes, t.nodes), bc);
    return gm;
}

}  // namespace

GeneratorMatrix build_generator(const DiffusionModel& model, const Grid& grid, std::size_t control_index,
                                BoundaryCondition bc) {
    if (control_index >= model.control_count())
        throw InvalidArgument("control index " + std::to_string(control_index) + " out of range");
    const FieldTables t = tabulate_fields(model, grid);
    return generator_from_tables(grid, make_active_set(grid, bc), t, control_index, bc);
}

Discretization discretize(const DiffusionModel& model, const Grid& grid, BoundaryCondition bc, Exec exec) {
    Discretization disc{grid, bc, model.direction, make_active_set(grid, bc), tabulate_fields(model, grid), {}, {}};
    const std::size_t m = model.control_count();
    disc.generators.resize(m);
    kernels::for_each_index(exec, m, [&](std::size_t u) {
        disc.generators[u] = generator_from_tables(disc.grid, disc.active, disc.fields, u, bc);
    });
    disc.reward.assign(m, std::vector<double>(disc.active.size()));
    for (std::size_t u = 0; u < m; ++u)
        for (std::size_t p = 0; p < disc.active.size(); ++p)
            disc.reward[u][p] = disc.fields.c(u, disc.active.grid_index[p]);
    return disc;
}

CsrMatrix policy_generator(const Discretization& disc, std::span<const int> policy) {
    if (policy.size() != disc.size()) throw InvalidArgument("policy length does not match the active set");
    CsrMatrix out;
    out.rows = out.cols = disc.size();
    out.row_ptr.assign(1, 0);
    for (std::size_t x = 0; x < disc.size(); ++x) {
        const auto u = static_cast<std::size_t>(policy[x]);
        if (u >= disc.control_count()) throw InvalidArgument("policy control index out of range");
        const CsrMatrix& a = disc.generators[u].matrix;
        for (std::size_t k = a.row_ptr[x]; k < a.row_ptr[x + 1]; ++k) {
            out.col.push_back(a.col[k]);
            out.val.push_back(a.val[k]);
        }
        out.row_ptr.push_back(out.col.size());
    }
    return out;
}

std::vector<double> policy_reward(const Discretization& disc, std::span<const int> policy) {
    if (policy.size() != disc.size()) throw InvalidArgument("policy length does not match the active set");
    std::vector<double> c(disc.size());
    for (std::size_t x = 0; x < disc.size(); ++x) c[x] = disc.reward[static_cast<std::size_t>(policy[x])][x];
    return c;
}

SemilinearResult apply_semilinear(const Discretization& disc, std::span<const double> v, Exec exec) {
    if (v.size() != disc.size()) throw InvalidArgument("vector length does not match the active set");
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!(v[i] > 0.0))
            throw InvalidArgument("apply_semilinear needs a strictly positive vector (entry " + std::to_string(i) + ")");
    std::vector<kernels::CsrView> views;
    std::vector<const double*> rewards;
    for (std::size_t u = 0; u < disc.control_count(); ++u) {
        views.push_back(kernels::CsrView::of(disc.generators[u].matrix));
        rewards.push_back(disc.reward[u].data());
    }
    SemilinearResult r{std::vector<double>(v.size()), std::vector<int>(v.size())};
    kernels::semilinear(exec, {views, rewards, v, disc.direction, r.value, r.policy});
    return r;
}

std::string to_triplets(const CsrMatrix& m) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) os << i << ' ' << m.col[k] << ' ' << m.val[k] << '\n';
    return os.str();
}

}  // namespace riskeig
