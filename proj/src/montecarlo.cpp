#include "riskeig/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "riskeig/error.hpp"
#include "riskeig/kernels.hpp"
#include "riskeig/twist.hpp"

namespace riskeig {

Philox4x32::Block Philox4x32::generate(Block ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint64_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += w0;
            key[1] += w1;
        }
        const std::uint64_t p0 = m0 * ctr[0];
        const std::uint64_t p1 = m1 * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

PathNormals::PathNormals(std::uint64_t seed, std::uint64_t path)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, path_(path) {}

void PathNormals::refill() {
    const auto w = Philox4x32::generate({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                         static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)},
                                        key_);
    ++block_;
    auto uniform = [](std::uint32_t v) { return (static_cast<double>(v) + 0.5) * 0x1p-32; };
    for (int i = 0; i < 2; ++i) {
        const double r = std::sqrt(-2.0 * std::log(uniform(w[2 * i])));
        const double t = 2.0 * std::numbers::pi * uniform(w[2 * i + 1]);
        cache_[2 * i] = r * std::cos(t);
        cache_[2 * i + 1] = r * std::sin(t);
    }
    cached_ = 4;
}

double PathNormals::next() {
    if (cached_ == 0) refill();
    return cache_[4 - cached_--];
}

int SimConfig::steps() const { return static_cast<int>(std::lround(horizon / dt)); }

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("sim.dt must be positive");
    if (!(horizon >= 10.0 * dt) || !std::isfinite(horizon)) throw InvalidArgument("sim.horizon must be at least 10 dt");
    if (paths < 100) throw InvalidArgument("sim.paths must be at least 100");
    if (boundary_radius && !(*boundary_radius > 0.0)) throw InvalidArgument("sim.boundary_radius must be positive");
}

const char* to_string(Estimator e) { return e == Estimator::direct ? "direct" : "twisted"; }

PolicyField make_policy_field(const Discretization& disc, std::span<const int> policy) {
    if (policy.size() != disc.size()) throw InvalidArgument("policy length does not match the active set");
    const Grid& grid = disc.grid;
    const int n = grid.nodes_per_axis();
    PolicyField f{&grid, std::vector<int>(grid.size())};
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::ptrdiff_t p = disc.active.active_index[g];
        if (p < 0) {
            auto idx = grid.multi_index(g);
            for (int k = 0; k < grid.dimension(); ++k) idx[k] = std::clamp(idx[k], 1, n - 2);
            p = disc.active.active_index[grid.flat_index(idx[0], idx[1])];
        }
        f.control[g] = policy[static_cast<std::size_t>(p)];
    }
    return f;
}

namespace {

struct Dynamics {
    const DiffusionModel& model;
    const PolicyField& policy;
    const GaugeField* twist = nullptr;  // adds a grad log phi to the drift

    // One Euler-Maruyama step; returns c(x, u) at the left endpoint.
    double step(Point& x, double dt, double sqdt, PathNormals& z) const {
        const Control& u = model.controls[static_cast<std::size_t>(policy.at(x))];
        const double c = model.reward(x, u);
        Vec2 b = model.drift(x, u);
        const Mat2 s = model.sigma(x);
        if (twist) {
            const Vec2 g = twist->grad(x);
            const Mat2 a = model.diffusion(x);
            if (model.dimension == 1) {
                b[0] += a[0] * g[0];
            } else {
                b[0] += a[0] * g[0] + a[1] * g[1];
                b[1] += a[2] * g[0] + a[3] * g[1];
            }
        }
        if (model.dimension == 1) {
            x[0] += b[0] * dt + s[0] * sqdt * z.next();
        } else {
            const double z0 = z.next(), z1 = z.next();
            x[0] += b[0] * dt + sqdt * (s[0] * z0 + s[1] * z1);
            x[1] += b[1] * dt + sqdt * (s[2] * z0 + s[3] * z1);
        }
        return c;
    }
};

void reflect(Point& x, int d, double radius) {
    for (int k = 0; k < d; ++k) {
        if (x[k] > radius) x[k] = 2.0 * radius - x[k];
        if (x[k] < -radius) x[k] = -2.0 * radius - x[k];
        x[k] = std::clamp(x[k], -radius, radius);
    }
}

void check_path(const Point& x, int d, std::size_t path) {
    const double m = sup_norm(x, d);
    if (!(m <= 1e6)) throw DivergenceError("path " + std::to_string(path) + " diverged (|X| > 1e6)");
}

// Log-mean-exp estimate with a delta-method standard error.
PathEstimate summarize(std::span<const double> log_w, double shift, double horizon, Estimator kind) {
    const auto n = static_cast<double>(log_w.size());
    const double top = *std::max_element(log_w.begin(), log_w.end());
    double s1 = 0.0, s2 = 0.0;
    for (double l : log_w) {
        const double w = std::exp(l - top);
        s1 += w;
        s2 += w * w;
    }
    const double mean = s1 / n;
    const double var = std::max(s2 / n - mean * mean, 0.0) * n / (n - 1.0);
    PathEstimate e;
    e.estimator = kind;
    e.paths = log_w.size();
    e.value = shift + (top + std::log(mean)) / horizon;
    e.standard_error = std::sqrt(var / n) / mean / horizon;
    e.effective_sample_size = s1 * s1 / s2;
    return e;
}

}  // namespace

PathEstimate simulate_value(const DiffusionModel& model, const PolicyField& policy, const SimConfig& cfg,
                            PathTrace* trace) {
    cfg.validate();
    const int d = model.dimension;
    const int steps = cfg.steps();
    const double sqdt = std::sqrt(cfg.dt);
    const Dynamics dyn{model, policy};
    std::vector<double> log_w(cfg.paths);
    std::vector<Point> final_state(cfg.paths);
    kernels::for_each_index(cfg.exec, cfg.paths, [&](std::size_t p) {
        PathNormals z(cfg.seed, p);
        Point x = cfg.x0;
        double integral = 0.0;
        for (int k = 0; k < steps; ++k) {
            integral += dyn.step(x, cfg.dt, sqdt, z);
            if (cfg.boundary_radius) reflect(x, d, *cfg.boundary_radius);
            check_path(x, d, p);
        }
        log_w[p] = integral * cfg.dt;
        final_state[p] = x;
    });
    if (trace) *trace = PathTrace{final_state, log_w};
    return summarize(log_w, 0.0, cfg.effective_horizon(), Estimator::direct);
}

GaugeField::GaugeField(const Discretization& disc, const EigenPair& pair) : grid_(&disc.grid) {
    if (disc.size() != disc.grid.size())
        throw InvalidArgument("the gauge field needs an eigenpair on every grid node (Neumann discretization)");
    if (pair.phi.size() != disc.size()) throw InvalidArgument("eigenvector does not match the discretization");
    gauge_.resize(disc.size());
    for (std::size_t p = 0; p < disc.size(); ++p) gauge_[disc.active.grid_index[p]] = std::log(pair.phi[p]);
    const auto g = gradient(disc, gauge_);
    grad_.resize(g.size());
    for (std::size_t p = 0; p < disc.size(); ++p) grad_[disc.active.grid_index[p]] = g[p];
}

bool GaugeField::covers(const Point& x) const {
    const double r = grid_->radius() * (1.0 + 1e-12);
    return std::abs(x[0]) <= r && (grid_->dimension() == 1 || std::abs(x[1]) <= r);
}

namespace {
Vec2 operator*(double s, const Vec2& v) { return {s * v[0], s * v[1]}; }
Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
}  // namespace

template <class Table>
auto GaugeField::interpolate(const Table& t, const Point& x) const {
    const int n = grid_->nodes_per_axis();
    const double h = grid_->spacing();
    const double r = grid_->radius();
    auto locate = [&](double v, int& i, double& f) {
        const double s = std::clamp((v + r) / h, 0.0, static_cast<double>(n - 1));
        i = std::min(static_cast<int>(s), n - 2);
        f = s - i;
    };
    int i, j = 0;
    double fx, fy = 0.0;
    locate(x[0], i, fx);
    if (grid_->dimension() == 1) {
        return (1.0 - fx) * t[grid_->flat_index(i)] + fx * t[grid_->flat_index(i + 1)];
    }
    locate(x[1], j, fy);
    return (1.0 - fx) * (1.0 - fy) * t[grid_->flat_index(i, j)] + fx * (1.0 - fy) * t[grid_->flat_index(i + 1, j)] +
           (1.0 - fx) * fy * t[grid_->flat_index(i, j + 1)] + fx * fy * t[grid_->flat_index(i + 1, j + 1)];
}

double GaugeField::log_phi(const Point& x) const { return interpolate(gauge_, x); }
Vec2 GaugeField::grad(const Point& x) const { return interpolate(grad_, x); }

namespace {

void check_hull(const GaugeField& gauge, const Point& x, int d, std::size_t path, double radius) {
    if (!gauge.covers(x)) {
        char msg[200];
        std::snprintf(msg, sizeof msg, "path %zu reached |x| = %.4g outside the grid hull of radius %.4g; enlarge the grid",
                      path, sup_norm(x, d), radius);
        throw ExtrapolationError(msg);
    }
}

}  // namespace

PathEstimate twisted_value(const DiffusionModel& model, const PolicyField& policy, const Discretization& disc,
                           const EigenPair& pair, const SimConfig& cfg, PathTrace* trace) {
    cfg.validate();
    const GaugeField gauge(disc, pair);
    const int d = model.dimension;
    const int steps = cfg.steps();
    const double sqdt = std::sqrt(cfg.dt);
    const Dynamics dyn{model, policy, &gauge};
    check_hull(gauge, cfg.x0, d, 0, disc.grid.radius());
    std::vector<double> log_w(cfg.paths);
    std::vector<Point> final_state(cfg.paths);
    kernels::for_each_index(cfg.exec, cfg.paths, [&](std::size_t p) {
        PathNormals z(cfg.seed, p);
        Point x = cfg.x0;
        for (int k = 0; k < steps; ++k) {
            dyn.step(x, cfg.dt, sqdt, z);
            if (cfg.boundary_radius) reflect(x, d, *cfg.boundary_radius);
            check_path(x, d, p);
            check_hull(gauge, x, d, p, disc.grid.radius());
        }
        log_w[p] = -gauge.log_phi(x);
        final_state[p] = x;
    });
    if (trace) *trace = PathTrace{final_state, log_w};
    const double horizon = cfg.effective_horizon();
    PathEstimate e = summarize(log_w, pair.value, horizon, Estimator::twisted);
    e.value += gauge.log_phi(cfg.x0) / horizon;
    return e;
}

OptimalityReport optimality_gap(const DiffusionModel& model, const Discretization& disc,
                                std::span<const PolicyCandidate> policies, std::size_t argmax_index,
                                const SimConfig& cfg, double tol, double bias_allowance) {
    if (policies.size() < 2) throw InvalidArgument("optimality_gap needs at least two policies");
    if (argmax_index >= policies.size()) throw InvalidArgument("argmax_index out of range");
    OptimalityReport rep;
    rep.argmax_index = argmax_index;
    rep.bias_allowance = bias_allowance;
    for (const auto& cand : policies) {
        try {
            const CsrMatrix a = policy_generator(disc, cand.policy);
            const std::vector<double> c = policy_reward(disc, cand.policy);
            const EigenPair pair = linear_principal_eigenpair(a, c, disc.active.center, tol);
            const PolicyField field = make_policy_field(disc, cand.policy);
            rep.scores.push_back({cand.label, pair.value, twisted_value(model, field, disc, pair, cfg)});
        } catch (Error& e) {
            e.add_context("policy " + cand.label);
            throw;
        }
    }
    const PathEstimate& best = rep.scores[argmax_index].estimate;
    rep.argmax_is_best = true;
    rep.strictly_dominates = true;
    for (std::size_t i = 0; i < rep.scores.size(); ++i) {
        const PathEstimate& e = rep.scores[i].estimate;
        const double margin = best.value - e.value;
        const double budget = 2.0 * (best.standard_error + e.standard_error);
        rep.margins.push_back(margin);
        rep.error_budgets.push_back(budget);
        if (i == argmax_index) continue;
        if (e.value > best.value + budget + bias_allowance) rep.argmax_is_best = false;
        if (!(margin > budget)) rep.strictly_dominates = false;
    }
    return rep;
}

std::vector<MartingalePoint> martingale_check(const DiffusionModel& model, const PolicyField& policy,
                                              const Discretization& disc, const EigenPair& pair,
                                              const SimConfig& cfg, std::span<const double> times) {
    cfg.validate();
    const GaugeField gauge(disc, pair);
    const int d = model.dimension;
    std::vector<int> marks;
    for (double t : times) {
        const int k = static_cast<int>(std::lround(t / cfg.dt));
        if (k <= 0) throw InvalidArgument("martingale_check times must be positive");
        marks.push_back(k);
    }
    if (!std::is_sorted(marks.begin(), marks.end())) throw InvalidArgument("martingale_check times must increase");
    const int steps = marks.empty() ? 0 : marks.back();
    const double sqdt = std::sqrt(cfg.dt);
    const Dynamics dyn{model, policy};
    const double phi0 = gauge.log_phi(cfg.x0);
    std::vector<std::vector<double>> value(marks.size(), std::vector<double>(cfg.paths));
    kernels::for_each_index(cfg.exec, cfg.paths, [&](std::size_t p) {
        PathNormals z(cfg.seed, p);
        Point x = cfg.x0;
        double integral = 0.0;
        std::size_t next = 0;
        for (int k = 1; k <= steps; ++k) {
            integral += dyn.step(x, cfg.dt, sqdt, z) - pair.value;
            if (cfg.boundary_radius) reflect(x, d, *cfg.boundary_radius);
            check_path(x, d, p);
            check_hull(gauge, x, d, p, disc.grid.radius());
            while (next < marks.size() && marks[next] == k)
                value[next++][p] = std::exp(integral * cfg.dt + gauge.log_phi(x) - phi0);
        }
    });
    std::vector<MartingalePoint> out;
    const auto n = static_cast<double>(cfg.paths);
    for (std::size_t m = 0; m < marks.size(); ++m) {
        double s1 = 0.0, s2 = 0.0;
        for (double v : value[m]) {
            s1 += v;
            s2 += v * v;
        }
        const double mean = s1 / n;
        const double var = std::max(s2 / n - mean * mean, 0.0) * n / (n - 1.0);
        out.push_back({marks[m] * cfg.dt, mean, std::sqrt(var / n)});
    }
    return out;
}

void write_trace_csv(std::ostream& os, const PathTrace& trace) {
    os << "path,x,y,log_weight\n";
    char buf[128];
    for (std::size_t p = 0; p < trace.log_weight.size(); ++p) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", p, trace.final_state[p][0], trace.final_state[p][1],
                      trace.log_weight[p]);
        os << buf;
    }
}

}  // namespace riskeig
