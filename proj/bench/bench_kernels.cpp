// Serial reference kernels against their OpenMP versions.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "riskeig/discretize.hpp"
#include "riskeig/eigensolve.hpp"
#include "riskeig/kernels.hpp"
#include "riskeig/montecarlo.hpp"

using namespace riskeig;

namespace {

// 2D controlled OU with three drift targets; large enough grids to show
// threading effects.
DiffusionModel plane_model() {
    DiffusionModel m;
    m.name = "bench-2d";
    m.dimension = 2;
    m.controls = {{-1.0}, {0.0}, {1.0}};
    m.drift = [](const Point& x, const Control& u) { return Vec2{u[0] - x[0], -x[1]}; };
    m.sigma = [](const Point&) { return Mat2{std::sqrt(2.0), 0.0, 0.0, 1.0}; };
    m.reward = [](const Point& x, const Control& u) { return -(x[0] - 1.0) * (x[0] - 1.0) - x[1] * x[1] - 0.1 * u[0] * u[0]; };
    m.reward_upper_bound = 0.0;
    return m;
}

const Discretization& plane(int n) {
    static std::vector<std::pair<int, Discretization>> cache;
    for (auto& [k, d] : cache)
        if (k == n) return d;
    cache.emplace_back(n, discretize(plane_model(), Grid(2, 4.0, n), BoundaryCondition::neumann, Exec::serial));
    return cache.back().second;
}

void semilinear(benchmark::State& state, Exec exec) {
    const Discretization& disc = plane(static_cast<int>(state.range(0)));
    const std::vector<double> v(disc.size(), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(apply_semilinear(disc, v, exec));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(disc.size()));
}

void spmv(benchmark::State& state, Exec exec) {
    const Discretization& disc = plane(static_cast<int>(state.range(0)));
    const auto view = kernels::CsrView::of(disc.generators[0].matrix);
    const std::vector<double> x(disc.size(), 1.0);
    std::vector<double> y(disc.size());
    for (auto _ : state) {
        kernels::spmv(exec, view, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(disc.size()));
}

void paths(benchmark::State& state, Exec exec) {
    const DiffusionModel model = builtin_instance("ctrl-1d");
    const Discretization disc = discretize(model, Grid(1, 4.0, 161), BoundaryCondition::neumann, Exec::serial);
    const PolicyField field = make_policy_field(disc, std::vector<int>(disc.size(), 1));
    SimConfig cfg;
    cfg.horizon = 5.0;
    cfg.dt = 1e-2;
    cfg.paths = static_cast<std::size_t>(state.range(0));
    cfg.exec = exec;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_value(model, field, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(semilinear, serial, Exec::serial)->Arg(101)->Arg(301);
BENCHMARK_CAPTURE(semilinear, omp, Exec::parallel)->Arg(101)->Arg(301);
BENCHMARK_CAPTURE(spmv, serial, Exec::serial)->Arg(101)->Arg(301);
BENCHMARK_CAPTURE(spmv, omp, Exec::parallel)->Arg(101)->Arg(301);
BENCHMARK_CAPTURE(paths, serial, Exec::serial)->Arg(1000);
BENCHMARK_CAPTURE(paths, omp, Exec::parallel)->Arg(1000);

BENCHMARK_MAIN();
