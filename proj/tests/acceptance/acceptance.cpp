// Acceptance suite. `acceptance N` runs criterion N (1-8), `acceptance all`
// runs every criterion. Each sub-check prints one PASS/FAIL line; the
// process exits nonzero if any check failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include "fixtures.hpp"
#include "oracle_values.hpp"
#include "riskeig/commands.hpp"
#include "riskeig/eigensolve.hpp"
#include "riskeig/montecarlo.hpp"
#include "riskeig/occupation.hpp"
#include "riskeig/twist.hpp"

using namespace riskeig;
namespace fs = std::filesystem;
using fixture::dirichlet;
using fixture::neumann;

namespace {

class Criterion {
public:
    explicit Criterion(std::string id) : id_(std::move(id)), start_(std::chrono::steady_clock::now()) {}

    void check(const std::string& what, bool pass, const char* detail_fmt = "", ...) __attribute__((format(printf, 4, 5)));

    void runtime(double budget_seconds) {
        const double s = elapsed();
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.1f s, budget %.0f s", s, budget_seconds);
        report("runtime", s < budget_seconds, buf);
    }

    bool passed() const { return ok_; }

private:
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    void report(const std::string& what, bool pass, const std::string& detail) {
        std::printf("%-5s %s  %s  (%s)\n", id_.c_str(), pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
        std::fflush(stdout);
        ok_ = ok_ && pass;
    }

    std::string id_;
    std::chrono::steady_clock::time_point start_;
    bool ok_ = true;
};

void Criterion::check(const std::string& what, bool pass, const char* detail_fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, detail_fmt);
    std::vsnprintf(buf, sizeof buf, detail_fmt, args);
    va_end(args);
    report(what, pass, buf);
}

SimConfig sim(double horizon, double dt, std::size_t paths, std::uint64_t seed, std::optional<double> barrier = {}) {
    SimConfig c;
    c.horizon = horizon;
    c.dt = dt;
    c.paths = paths;
    c.seed = seed;
    c.boundary_radius = barrier;
    return c;
}

struct Chain {
    TwistedChain chain;
    std::vector<double> eta;
    std::vector<double> c;
};

Chain twist_of(const Discretization& d, const SemilinearSolution& s) {
    const auto a = policy_generator(d, s.policy);
    auto c = policy_reward(d, s.policy);
    auto chain = doob_transform(a, c, s.pair);
    auto eta = stationary_distribution(chain);
    return {std::move(chain), std::move(eta), std::move(c)};
}

// ---------------------------------------------------------------------------

bool constant_reward() {
    Criterion ac("AC1");
    const auto d = fixture::disc("const", 3.0, 61);
    const auto s = solve_semilinear(d, 1e-12);
    ac.check("rho = 0.5 within 1e-10", std::abs(s.pair.value - 0.5) <= 1e-10, "rho = %.17g", s.pair.value);
    double dev = 0.0;
    for (double v : s.pair.phi) dev = std::max(dev, std::abs(v - 1.0));
    ac.check("phi = 1 within 1e-10", dev <= 1e-10, "max |phi - 1| = %.3g", dev);

    const auto prob = build_extended(builtin_instance("const"), Grid(1, 3.0, 21), VelocityGrid::uniform(1, 1.0, 5), neumann);
    const auto mu = solve_occupation_lp(prob);
    ac.check("LP value 0.5 within 1e-6", std::abs(mu.objective - 0.5) <= 1e-6, "LP = %.17g", mu.objective);

    const auto field = make_policy_field(d, s.policy);
    const auto e = simulate_value(builtin_instance("const"), field, sim(10.0, 0.01, 1000, 1));
    ac.check("Monte Carlo value exactly 0.5", e.value == 0.5 && e.standard_error == 0.0, "value = %.17g, se = %g",
             e.value, e.standard_error);
    ac.runtime(5.0);
    return ac.passed();
}

bool ou_quadratic() {
    Criterion ac("AC2");
    const auto model = builtin_instance("ou-quad");

    const auto d601 = fixture::disc("ou-quad", 6.0, 601);
    const auto s601 = solve_semilinear(d601, 1e-11);
    ac.check("Neumann r=6 n=601 within 5e-3 of -1", std::abs(s601.pair.value + 1.0) <= 5e-3, "rho = %.12f",
             s601.pair.value);

    const std::vector<double> radii{1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0};
    const std::vector<BoundaryCondition> only_d{dirichlet};
    const auto sweep = domain_sweep(model, radii, only_d, 50, 1e-11);
    bool increasing = true;
    double min_step = INFINITY;
    for (std::size_t k = 1; k < sweep.rows.size(); ++k) {
        const double step = sweep.rows[k].value - sweep.rows[k - 1].value;
        increasing = increasing && step > 0.0;
        min_step = std::min(min_step, step);
    }
    ac.check("Dirichlet sweep strictly increasing (r = 1 .. 6)", increasing, "smallest increment %.3g", min_step);
    const double last = sweep.rows.back().value;
    ac.check("Dirichlet value at r=6 within 5e-3 of -1", std::abs(last + 1.0) <= 5e-3, "lambda_D(6) = %.12f", last);

    const auto t601 = twist_of(d601, s601);
    const auto ent601 = entropy_report(t601.chain, t601.eta, d601, t601.c);
    ac.check("entropy identity residual <= 1e-8", ent601.identity_residual <= 1e-8, "residual %.3g",
             ent601.identity_residual);

    const auto d1201 = fixture::disc("ou-quad", 6.0, 1201);
    const auto s1201 = solve_semilinear(d1201, 1e-11);
    const auto t1201 = twist_of(d1201, s1201);
    const auto ent1201 = entropy_report(t1201.chain, t1201.eta, d1201, t1201.c);
    const double factor = ent601.field_mismatch / ent1201.field_mismatch;
    ac.check("H field mismatch factor in [1.6, 2.6] under n -> 2n", factor >= 1.6 && factor <= 2.6,
             "%.4g / %.4g = %.3f", ent601.field_mismatch, ent1201.field_mismatch, factor);

    const Grid g81(1, 5.0, 81);
    const auto lp21 = solve_occupation_lp(build_extended(model, g81, VelocityGrid::uniform(1, 5.0, 21), neumann));
    const auto lp41 = solve_occupation_lp(build_extended(model, g81, VelocityGrid::uniform(1, 5.0, 41), neumann));
    ac.check("LP value within 0.08 of -1 (n=81, 21 y-points)", std::abs(lp21.objective + 1.0) <= 0.08,
             "LP = %.10f, |LP + 1| = %.4f", lp21.objective, std::abs(lp21.objective + 1.0));
    ac.check("LP error shrinks under y-refinement (21 -> 41)",
             std::abs(lp41.objective + 1.0) < std::abs(lp21.objective + 1.0), "|LP + 1|: %.4f -> %.4f",
             std::abs(lp21.objective + 1.0), std::abs(lp41.objective + 1.0));

    const auto field = make_policy_field(d601, s601.policy);
    const auto cfg = sim(20.0, 0.01, 10000, 2024);
    const auto tw = twisted_value(model, field, d601, s601.pair, cfg);
    auto bounded = cfg;
    bounded.boundary_radius = 6.0;
    const auto direct = simulate_value(model, field, bounded);
    ac.check("twisted Monte Carlo within 0.02 of -1", std::abs(tw.value + 1.0) <= 0.02, "estimate %.5f +- %.2g",
             tw.value, tw.standard_error);
    const double ratio = direct.standard_error / tw.standard_error;
    ac.check("variance reduction >= 5 (and standard error ratio >= 5)", ratio * ratio >= 5.0 && ratio >= 5.0,
             "se direct %.3g, se twisted %.3g, variance ratio %.0f", direct.standard_error, tw.standard_error,
             ratio * ratio);
    ac.runtime(180.0);
    return ac.passed();
}

bool collatz_wielandt() {
    Criterion ac("AC3");
    struct Case {
        const char* name;
        double r;
        int n;
    };
    const Case cases[] = {{"const", 3.0, 61}, {"ou-quad", 3.0, 151}, {"ctrl-1d", 4.0, 161}, {"min-1d", 3.0, 21}};
    fixture::Gen gen(31);
    for (const auto& c : cases) {
        const auto d = fixture::disc(c.name, c.r, c.n);
        const auto s = solve_semilinear(d, 1e-12);
        const double rho = s.pair.value;
        int held = 0;
        double worst = -INFINITY;
        for (int k = 0; k < 20; ++k) {
            const double a = gen.uniform(-1.0, 0.3), b = gen.uniform(-1.0, 1.0);
            const double amp = gen.uniform(0.0, 0.9), w = gen.uniform(0.5, 4.0);
            std::vector<double> f(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) {
                const double x = d.point(i)[0];
                f[i] = std::exp(a * x * x / (c.r * c.r) * 4.0 + b * x) * (1.0 + amp * std::sin(w * x));
                if (k % 4 == 3) f[i] = s.pair.phi[i] * (1.0 + amp * std::sin(w * x));  // near the optimum
            }
            const auto cw = collatz_wielandt_bounds(d, f);
            const bool ok = cw.lower <= rho + 1e-9 && rho <= cw.upper + 1e-9;
            held += ok;
            worst = std::max({worst, cw.lower - rho, rho - cw.upper});
        }
        ac.check(std::string(c.name) + ": lower <= rho <= upper for 20 test functions", held == 20,
                 "%d/20 hold, worst violation %.3g", held, worst);
        const auto at = collatz_wielandt_bounds(d, s.pair.phi);
        ac.check(std::string(c.name) + ": sandwich width at phi* <= 1e-8", at.upper - at.lower <= 1e-8,
                 "width %.3g", at.upper - at.lower);
    }
    ac.runtime(30.0);
    return ac.passed();
}

bool domain_ordering() {
    Criterion ac("AC4");
    const double tol = 1e-10;
    struct Case {
        const char* name;
        std::vector<double> radii;
    };
    const Case cases[] = {{"ou-quad", {1.0, 1.5, 2.0, 2.5, 3.0}}, {"ctrl-1d", {1.0, 2.0, 3.0, 4.0}}};
    const std::vector<BoundaryCondition> bcs{dirichlet, neumann};
    for (const auto& c : cases) {
        const auto t = domain_sweep(builtin_instance(c.name), c.radii, bcs, 50, tol);
        const auto dr = t.rows_for(dirichlet), nr = t.rows_for(neumann);
        double min_inc = INFINITY, min_gap = INFINITY;
        for (std::size_t k = 0; k < dr.size(); ++k) {
            if (k > 0) min_inc = std::min(min_inc, dr[k].value - dr[k - 1].value);
            min_gap = std::min(min_gap, nr[k].value - dr[k].value);
        }
        ac.check(std::string(c.name) + ": Dirichlet values increase in r by >= 10 tol", min_inc >= 10.0 * tol,
                 "smallest increment %.3g", min_inc);
        ac.check(std::string(c.name) + ": Dirichlet below Neumann at matched r by >= 10 tol", min_gap >= 10.0 * tol,
                 "smallest gap %.3g", min_gap);
    }
    ac.runtime(120.0);
    return ac.passed();
}

bool shift_and_monotonicity() {
    Criterion ac("AC5");
    fixture::Gen gen(55);
    const Grid grid(1, 3.0, 61);
    for (const char* name : {"const", "ou-quad", "ctrl-1d", "min-1d"}) {
        const auto base = solve_semilinear(builtin_instance(name), grid, neumann, 1e-12);
        double worst_shift = 0.0;
        int same_policy = 0;
        for (int t = 0; t < 50; ++t) {
            const double k = gen.uniform(-5.0, 5.0);
            const auto s = solve_semilinear(with_reward_offset(builtin_instance(name), [k](const Point&) { return k; }),
                                            grid, neumann, 1e-12);
            worst_shift = std::max(worst_shift, std::abs(s.pair.value - base.pair.value - k));
            same_policy += s.policy == base.policy;
        }
        ac.check(std::string(name) + ": c + k shifts rho by k within 1e-9 (50 shifts)", worst_shift <= 1e-9,
                 "worst deviation %.3g", worst_shift);
        ac.check(std::string(name) + ": policy unchanged under shifts", same_policy == 50, "%d/50", same_policy);

        double worst_drop = -INFINITY;
        for (int t = 0; t < 50; ++t) {
            const double h = gen.uniform(0.0, 3.0), c = gen.uniform(-3.0, 3.0), w = gen.uniform(0.1, 3.0);
            const bool flat = gen.coin();
            const double lift = gen.uniform(0.0, 0.5);
            const auto m = with_reward_offset(builtin_instance(name), [=](const Point& x) {
                return (flat ? lift : 0.0) + h * std::exp(-(x[0] - c) * (x[0] - c) / (w * w));
            });
            const double rho = solve_semilinear(m, grid, neumann, 1e-12).pair.value;
            worst_drop = std::max(worst_drop, base.pair.value - rho);
        }
        ac.check(std::string(name) + ": c' >= c never lowers rho (50 bumps)", worst_drop <= 1e-10,
                 "largest drop %.3g", worst_drop);
    }
    ac.runtime(120.0);
    return ac.passed();
}

bool optimality() {
    Criterion ac("AC6");
    const auto model = builtin_instance("ctrl-1d");
    const double r = 4.0;
    const auto d = fixture::disc("ctrl-1d", r, 161);
    const auto s = solve_semilinear(d, 1e-10);
    ac.check("argmax eigenvalue matches the oracle", std::abs(s.pair.value - oracle::ctrl_r4_n161) <= 1e-8,
             "rho = %.12f", s.pair.value);

    std::vector<PolicyCandidate> cands{{"argmax", s.policy}};
    const char* labels[] = {"constant u=-1", "constant u=0", "constant u=+1"};
    for (int k = 0; k < 3; ++k) cands.push_back({labels[k], std::vector<int>(d.size(), k)});
    // Reflect at the grid edge: the Neumann eigenpair belongs to the reflected process.
    const auto rep = optimality_gap(model, d, cands, 0, sim(20.0, 0.02, 100000, 6, r), 1e-10);
    const auto& best = rep.scores[0];
    std::printf("      argmax: eigenvalue %.6f, estimate %.6f +- %.2g\n", best.eigenvalue, best.estimate.value,
                best.estimate.standard_error);
    for (std::size_t k = 1; k < rep.scores.size(); ++k) {
        const auto& sc = rep.scores[k];
        const double oracle_margin = oracle::ctrl_r4_n161 - oracle::ctrl_r4_n161_constant[k - 1];
        ac.check("argmax beats " + sc.label + " by more than 2 sigma", rep.margins[k] > rep.error_budgets[k],
                 "margin %.4f, budget %.2g, eigenvalue margin %.4f", rep.margins[k], rep.error_budgets[k],
                 oracle_margin);
    }
    ac.runtime(300.0);
    return ac.passed();
}

bool minimization() {
    Criterion ac("AC7");
    const auto model = builtin_instance("min-1d");
    const Grid grid(1, 3.0, 21);
    const auto d = discretize(model, grid, neumann);
    const auto s = solve_semilinear(d, 1e-12);
    ac.check("E* > 0", s.pair.value > 0.0, "E* = %.12f", s.pair.value);
    ac.check("min phi > 0", s.pair.min_phi() > 0.0, "min phi = %.6g", s.pair.min_phi());

    // Reflection x -> -x maps control u to -u, i.e. index k to m - 1 - k.
    const auto g = apply_semilinear(d, s.pair.phi);
    const int m = static_cast<int>(d.control_count());
    const std::size_t n = d.size();
    int asymmetric = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int mirrored = m - 1 - s.policy[n - 1 - i];
        if (mirrored == s.policy[i]) continue;
        // accept a tie: both controls attain the optimum at node i
        const auto& ai = d.generators[static_cast<std::size_t>(mirrored)].matrix;
        double v = d.reward[static_cast<std::size_t>(mirrored)][i] * s.pair.phi[i];
        for (std::size_t k = ai.row_ptr[i]; k < ai.row_ptr[i + 1]; ++k) v += ai.val[k] * s.pair.phi[ai.col[k]];
        if (std::abs(v - g.value[i]) > 1e-9 * std::max(1.0, std::abs(v))) ++asymmetric;
    }
    ac.check("policy symmetric about x = 0 up to ties", asymmetric == 0, "%d asymmetric nodes", asymmetric);
    ac.check("matches the exhaustive oracle at n=21 within 1e-8", std::abs(s.pair.value - oracle::min_r3_n21) <= 1e-8,
             "E* = %.15f, oracle %.15f", s.pair.value, oracle::min_r3_n21);
    const auto rep = check_assumptions(model, grid, s.pair.value);
    ac.check("cost coercive on the grid", rep.coercive.value_or(false), "shell minimum %.3g",
             rep.shell_reward_min.value_or(NAN));
    ac.runtime(60.0);
    return ac.passed();
}

bool determinism() {
    Criterion ac("AC8");
    const fs::path configs = RISKEIG_CONFIG_DIR;
    struct Run {
        const char* command;
        const char* config;
    };
    const Run runs[] = {{"solve", "ctrl-1d.json"},
                        {"sweep", "ctrl-1d.json"},
                        {"lp", "ou-quad-lp.json"},
                        {"verify", "ctrl-1d.json"},
                        {"minimize", "min-1d.json"}};
    for (const auto& run : runs) {
        const std::string tag = std::string("ac8_") + run.command;
        const auto a = fixture::temp_dir(tag + "_a"), b = fixture::temp_dir(tag + "_b");
        CommandOptions oa, ob;
        oa.out_dir = a.string();
        ob.out_dir = b.string();
        oa.trace = ob.trace = std::string(run.command) == "verify";
        if (std::string(run.command) == "lp") {
            oa.export_lp = (a / "model.lp").string();
            ob.export_lp = (b / "model.lp").string();
        }
        const int ca = run_command(run.command, (configs / run.config).string(), oa);
        const int cb = run_command(run.command, (configs / run.config).string(), ob);
        int files = 0, identical = 0;
        for (const auto& entry : fs::directory_iterator(a)) {
            ++files;
            const auto other = b / entry.path().filename();
            identical += fs::exists(other) && fixture::slurp(entry.path()) == fixture::slurp(other);
        }
        ac.check(std::string(run.command) + " re-run is byte-identical",
                 ca == 0 && cb == 0 && files > 0 && identical == files, "exit %d/%d, %d/%d files identical", ca, cb,
                 identical, files);
    }

    const auto model = builtin_instance("ou-quad");
    const auto d = fixture::disc("ou-quad", 6.0, 601);
    const auto s = solve_semilinear(d, 1e-10);
    const auto field = make_policy_field(d, s.policy);
    auto cfg = sim(5.0, 0.01, 4000, 77, 6.0);
    cfg.exec = Exec::serial;
    const auto ref_d = simulate_value(model, field, cfg);
    const auto ref_t = twisted_value(model, field, d, s.pair, cfg);
    cfg.exec = Exec::parallel;
    bool same = true;
    for (int threads : {1, 2, 3, 8}) {
        omp_set_num_threads(threads);
        const auto pd = simulate_value(model, field, cfg);
        const auto pt = twisted_value(model, field, d, s.pair, cfg);
        same = same && pd.value == ref_d.value && pd.standard_error == ref_d.standard_error &&
               pt.value == ref_t.value && pt.standard_error == ref_t.standard_error;
    }
    ac.check("Monte Carlo invariant to worker count (serial, 1, 2, 3, 8 threads)", same, "direct %.17g, twisted %.17g",
             ref_d.value, ref_t.value);
    ac.runtime(60.0);
    return ac.passed();
}

}  // namespace

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    const std::map<std::string, std::function<bool()>> criteria{
        {"1", constant_reward}, {"2", ou_quadratic}, {"3", collatz_wielandt},       {"4", domain_ordering},
        {"5", shift_and_monotonicity}, {"6", optimality}, {"7", minimization}, {"8", determinism}};
    std::vector<std::string> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(argv[i]);
    if (selected.empty() || selected.front() == "all") {
        selected.clear();
        for (const auto& [id, fn] : criteria) selected.push_back(id);
    }
    bool ok = true;
    for (const auto& id : selected) {
        const auto it = criteria.find(id);
        if (it == criteria.end()) {
            std::fprintf(stderr, "unknown criterion %s (expected 1-8 or all)\n", id.c_str());
            return 2;
        }
        bool pass = false;
        try {
            pass = it->second();
        } catch (const std::exception& e) {
            std::printf("AC%-2s FAIL  raised: %s\n", id.c_str(), e.what());
        }
        std::printf("AC%s %s\n", id.c_str(), pass ? "PASS" : "FAIL");
        ok = ok && pass;
    }
    return ok ? 0 : 1;
}
