#include "riskeig/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "riskeig/error.hpp"
#include "riskeig/twist.hpp"

namespace riskeig {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Output {
    fs::path dir;
    const RunConfig& cfg;

    json header() const { return json{{"config", cfg.resolved}, {"seed", cfg.seed}}; }

    void text(const std::string& name, const std::string& body) const {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw ConfigError("cannot write " + (dir / name).string());
        os << body;
    }
    void report(const std::string& name, json body) const {
        json doc = header();
        doc.update(body);
        text(name, doc.dump(2) + "\n");
    }
    // CSV files carry the resolved config as a leading comment line.
    std::string csv_preamble() const { return "# config=" + header().dump() + "\n"; }
};

Output open_output(const RunConfig& cfg, const CommandOptions& opts) {
    const fs::path dir = opts.out_dir.value_or(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("output directory " + dir.string() + " is not writable");
    return Output{dir, cfg};
}

// Runs one library operation and labels any error with its name.
template <class Fn>
auto stage(const char* op, Fn&& fn) {
    try {
        return fn();
    } catch (Error& e) {
        e.add_context(op);
        throw;
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Grid make_grid(const RunConfig& cfg) {
    return stage("build_grid", [&] { return Grid(cfg.model.dimension, cfg.grid.radius, cfg.grid.resolve_nodes()); });
}

std::string phi_csv(const Output& out, const Discretization& disc, std::span<const double> phi) {
    std::ostringstream os;
    os << out.csv_preamble() << (disc.grid.dimension() == 1 ? "x,phi\n" : "x,y,phi\n");
    for (std::size_t p = 0; p < disc.size(); ++p) {
        const Point& x = disc.point(p);
        os << fmt(x[0]) << ',';
        if (disc.grid.dimension() == 2) os << fmt(x[1]) << ',';
        os << fmt(phi[p]) << '\n';
    }
    return os.str();
}

std::string policy_csv(const Output& out, const Discretization& disc, const DiffusionModel& model,
                       std::span<const int> policy) {
    std::ostringstream os;
    os << out.csv_preamble() << (disc.grid.dimension() == 1 ? "x,control_index,control\n" : "x,y,control_index,control\n");
    for (std::size_t p = 0; p < disc.size(); ++p) {
        const Point& x = disc.point(p);
        os << fmt(x[0]) << ',';
        if (disc.grid.dimension() == 2) os << fmt(x[1]) << ',';
        os << policy[p] << ',';
        const Control& u = model.controls[static_cast<std::size_t>(policy[p])];
        for (std::size_t j = 0; j < u.size(); ++j) os << (j ? " " : "") << fmt(u[j]);
        os << '\n';
    }
    return os.str();
}

json eigen_json(const SemilinearSolution& s) {
    return json{{"value", s.pair.value},
                {"residual", s.pair.residual},
                {"iterations", s.pair.iterations},
                {"sweeps", s.sweeps},
                {"history", s.history},
                {"min_phi", s.pair.min_phi()},
                {"max_phi", s.pair.max_phi()},
                {"policy", s.policy}};
}

json estimate_json(const PathEstimate& e) {
    return json{{"value", e.value},
                {"standard_error", e.standard_error},
                {"effective_sample_size", e.effective_sample_size},
                {"estimator", to_string(e.estimator)},
                {"paths", e.paths}};
}

json measure_json(const OccupationMeasure& mu) {
    return json{{"objective", mu.objective},
                {"mass", mu.mass},
                {"stationarity_residual", mu.stationarity_residual},
                {"entropy_mass", mu.entropy_mass},
                {"iterations", mu.iterations}};
}

json assumptions_json(const AssumptionReport& a) {
    json j{{"ellipticity_floor", a.ellipticity_floor},
           {"ellipticity_ceiling", a.ellipticity_ceiling},
           {"growth_constant", a.growth_constant},
           {"reward_max", a.reward_max},
           {"reward_bound_respected", a.reward_bound_respected},
           {"reward_growth_exponent", a.reward_growth_exponent},
           {"shell_radius", a.shell_radius},
           {"shell_reward_max", a.shell_reward_max},
           {"near_monotone_margin", a.near_monotone_margin},
           {"a42_case", to_string(a.a42_case)},
           {"case_shell_radii", a.case_shell_radii}};
    if (a.a51_theta) j["a51_theta"] = *a.a51_theta;
    if (a.coercive) j["coercive"] = *a.coercive;
    if (a.shell_reward_min) j["shell_reward_min"] = *a.shell_reward_min;
    return j;
}

std::vector<double> grid_gauge(const Discretization& disc, const EigenPair& pair) {
    std::vector<double> g(disc.grid.size(), 0.0);
    for (std::size_t p = 0; p < disc.size(); ++p) g[disc.active.grid_index[p]] = std::log(pair.phi[p]);
    return g;
}

void require_neumann(const RunConfig& cfg, const char* command) {
    if (cfg.grid.bc != BoundaryCondition::neumann)
        throw ConfigError(std::string(command) + " needs grid.bc = \"neumann\"");
}

}  // namespace

int cmd_solve(const RunConfig& cfg, const CommandOptions& opts) {
    const Output out = open_output(cfg, opts);
    const Grid grid = make_grid(cfg);
    const Discretization disc = stage("discretize", [&] { return discretize(cfg.model, grid, cfg.grid.bc, cfg.exec); });
    const SemilinearSolution sol =
        stage("solve_semilinear", [&] { return solve_semilinear(disc, cfg.tol, cfg.limits, cfg.exec); });
    json body = eigen_json(sol);
    body["direction"] = to_string(cfg.model.direction);
    body["bc"] = to_string(cfg.grid.bc);
    body["nodes"] = disc.size();
    out.report("eigenpair.json", json{{"eigenpair", body}});
    out.text("phi.csv", phi_csv(out, disc, sol.pair.phi));
    if (cfg.export_triplets)
        for (std::size_t u = 0; u < disc.control_count(); ++u)
            out.text("generator_" + std::to_string(u) + ".txt", to_triplets(disc.generators[u].matrix));
    return exit_code::success;
}

int cmd_sweep(const RunConfig& cfg, const CommandOptions& opts) {
    if (cfg.sweep.radii.empty()) throw ConfigError("sweep.radii is required for the sweep command");
    const Output out = open_output(cfg, opts);
    const SweepTable table = stage("domain_sweep", [&] {
        return domain_sweep(cfg.model, cfg.sweep.radii, cfg.sweep.bcs, cfg.sweep.nodes_per_unit, cfg.tol, cfg.limits,
                            cfg.exec);
    });
    std::ostringstream csv;
    csv << out.csv_preamble();
    write_csv(csv, table);
    out.text("sweep.csv", csv.str());
    out.report("sweep.json", json{{"extrapolated_value", table.extrapolated_value},
                                  {"extrapolated_from_dirichlet", table.extrapolated_from_dirichlet},
                                  {"rows", table.rows.size()}});
    return exit_code::success;
}

int cmd_lp(const RunConfig& cfg, const CommandOptions& opts) {
    require_neumann(cfg, "lp");
    const Output out = open_output(cfg, opts);
    const Grid grid = make_grid(cfg);
    const Discretization disc = stage("discretize", [&] { return discretize(cfg.model, grid, cfg.grid.bc, cfg.exec); });
    const SemilinearSolution sol =
        stage("solve_semilinear", [&] { return solve_semilinear(disc, cfg.tol, cfg.limits, cfg.exec); });

    std::vector<double> gauge(disc.size());
    for (std::size_t p = 0; p < disc.size(); ++p) gauge[p] = std::log(sol.pair.phi[p]);
    double range = 0.0;
    if (cfg.ygrid.range) {
        range = *cfg.ygrid.range;
    } else {
        for (const Vec2& g : gradient(disc, gauge)) range = std::max({range, std::abs(g[0]), std::abs(g[1])});
        range = range > 0.0 ? 1.5 * range : 1.0;
    }
    const VelocityGrid ygrid = stage("build_extended", [&] {
        return VelocityGrid::uniform(cfg.model.dimension, range, cfg.ygrid.points);
    });
    const ExtendedProblem prob =
        stage("build_extended", [&] { return build_extended(cfg.model, grid, ygrid, cfg.grid.bc, cfg.exec); });
    if (opts.export_lp) {
        std::ostringstream os;
        write_lp_format(os, prob, "config=" + out.header().dump());
        std::ofstream f(*opts.export_lp, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + *opts.export_lp);
        f << os.str();
    }
    const OccupationMeasure mu = stage("solve_occupation_lp", [&] { return solve_occupation_lp(prob, cfg.lp); });

    const CsrMatrix a = policy_generator(disc, sol.policy);
    const std::vector<double> c = policy_reward(disc, sol.policy);
    const TwistedChain chain = stage("doob_transform", [&] { return doob_transform(a, c, sol.pair); });
    const std::vector<double> eta = stage("stationary_distribution", [&] { return stationary_distribution(chain); });
    const OccupationMeasure cand =
        stage("candidate_measure", [&] { return candidate_measure(prob, disc, chain, eta, sol.policy); });
    const auto family = test_function_family(grid, prob.generators.active, gauge);
    const std::vector<OccupationMeasure> measures{mu, cand};
    const SaddleReport saddle = verify_saddle(prob, family, measures);

    out.report("lp_report.json",
               json{{"eigenvalue", sol.pair.value},
                    {"lp", measure_json(mu)},
                    {"gap", sol.pair.value - mu.objective},
                    {"candidate", measure_json(cand)},
                    {"ygrid", {{"points", ygrid.axis.size()}, {"range", ygrid.range()}}},
                    {"saddle",
                     {{"functions", saddle.function_labels},
                      {"measures", {"lp", "candidate"}},
                      {"F", saddle.f},
                      {"sup_over_measures", saddle.sup_over_measures},
                      {"sup_inf", saddle.sup_inf},
                      {"inf_sup", saddle.inf_sup},
                      {"inf_sup_argmin", saddle.inf_sup_argmin}}}});
    return exit_code::success;
}

int cmd_verify(const RunConfig& cfg, const CommandOptions& opts) {
    require_neumann(cfg, "verify");
    const Output out = open_output(cfg, opts);
    const Grid grid = make_grid(cfg);
    const Discretization disc = stage("discretize", [&] { return discretize(cfg.model, grid, cfg.grid.bc, cfg.exec); });
    const SemilinearSolution sol =
        stage("solve_semilinear", [&] { return solve_semilinear(disc, cfg.tol, cfg.limits, cfg.exec); });
    const EigenPair& pair = sol.pair;
    const double rho = pair.value;

    json checks = json::array();
    bool all_pass = true;
    auto check = [&](const char* name, double value, double bound, bool pass) {
        checks.push_back({{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
        all_pass = all_pass && pass;
    };

    check("phi_positive", pair.min_phi(), 0.0, pair.min_phi() > 0.0);
    check("eigen_residual", pair.residual, cfg.tol, pair.residual <= cfg.tol);

    const CollatzWielandt cw = collatz_wielandt_bounds(disc, pair.phi, cfg.exec);
    const double width_bound = 2.0 * pair.residual / pair.min_phi() * pair.max_phi() + 1e-12;
    check("collatz_wielandt_sandwich", rho, 1e-9, cw.lower <= rho + 1e-9 && rho <= cw.upper + 1e-9);
    check("collatz_wielandt_width", cw.upper - cw.lower, width_bound, cw.upper - cw.lower <= width_bound);

    const CsrMatrix a = policy_generator(disc, sol.policy);
    const std::vector<double> c = policy_reward(disc, sol.policy);
    const TwistedChain chain = stage("doob_transform", [&] { return doob_transform(a, c, pair); });
    const double row_bound = pair.residual / pair.min_phi() * (1.0 + pair.max_phi()) + 1e-12;
    check("twisted_row_sums", max_row_sum(chain), row_bound, max_row_sum(chain) <= row_bound);
    const std::vector<double> eta = stage("stationary_distribution", [&] { return stationary_distribution(chain); });
    const double balance = balance_residual(chain.rates, eta);
    check("stationary_balance", balance, 1e-10, balance <= 1e-10);
    const EntropyReport ent = stage("entropy_report", [&] { return entropy_report(chain, eta, disc, c); });
    check("entropy_identity", ent.identity_residual, 1e-8, ent.identity_residual <= 1e-8);

    // The Lyapunov identity is exact up to the eigen residual and the
    // rounding of Q phi^{-1}.
    double inv_max = 0.0, rounding = 0.0;
    for (std::size_t x = 0; x < disc.size(); ++x) {
        inv_max = std::max(inv_max, 1.0 / pair.phi[x]);
        double s = 0.0;
        for (std::size_t k = chain.rates.row_ptr[x]; k < chain.rates.row_ptr[x + 1]; ++k)
            s += std::abs(chain.rates.val[k]) / pair.phi[chain.rates.col[k]];
        rounding = std::max(rounding, s);
    }
    const double lyap = lyapunov_defect(chain, c);
    const double lyap_bound = 10.0 * pair.residual * inv_max + 1e-12 * rounding;
    check("lyapunov_identity", lyap, lyap_bound, lyap <= lyap_bound);

    const auto gauge = grid_gauge(disc, pair);
    const AssumptionReport assumptions =
        stage("check_assumptions", [&] { return check_assumptions(cfg.model, grid, rho, gauge); });
    check("ellipticity", assumptions.ellipticity_floor, 0.0, assumptions.ellipticity_floor > 0.0);
    check("reward_upper_bound", assumptions.reward_max, cfg.model.reward_upper_bound,
          assumptions.reward_bound_respected);

    const RatioProfile ratio = gradient_bound_diagnostic(pair, disc);
    const double growth = growth_diagnostic(pair, disc);

    const SimConfig sim = make_sim_config(cfg);
    const PolicyField field = make_policy_field(disc, sol.policy);
    PathTrace direct_trace, twisted_trace;
    PathTrace* dt = opts.trace ? &direct_trace : nullptr;
    PathTrace* tt = opts.trace ? &twisted_trace : nullptr;
    const PathEstimate direct = stage("simulate_value", [&] { return simulate_value(cfg.model, field, sim, dt); });
    const PathEstimate twisted =
        stage("twisted_value", [&] { return twisted_value(cfg.model, field, disc, pair, sim, tt); });
    const double joint = std::hypot(direct.standard_error, twisted.standard_error);
    const double bias = cfg.sim.bias_allowance;
    check("mc_direct_vs_twisted", std::abs(direct.value - twisted.value), 3.0 * joint + bias,
          std::abs(direct.value - twisted.value) <= 3.0 * joint + bias);
    check("mc_twisted_vs_eigenvalue", std::abs(twisted.value - rho), 3.0 * twisted.standard_error + bias,
          std::abs(twisted.value - rho) <= 3.0 * twisted.standard_error + bias);

    json diagnostics{{"gradient_ratio_max", ratio.max_ratio},
                     {"gradient_ratio_location", std::vector<double>(ratio.location.begin(),
                                                                    ratio.location.begin() + grid.dimension())},
                     {"growth_slope", growth},
                     {"entropy",
                      {{"identity_residual", ent.identity_residual},
                       {"field_mismatch", ent.field_mismatch},
                       {"entropy_mass", ent.entropy_mass}}},
                     {"collatz_wielandt", {{"lower", cw.lower}, {"upper", cw.upper}}},
                     {"residual_warning", chain.residual_warning}};

    json body{{"eigenpair", eigen_json(sol)},
              {"assumptions", assumptions_json(assumptions)},
              {"monte_carlo", {{"direct", estimate_json(direct)}, {"twisted", estimate_json(twisted)}}},
              {"diagnostics", diagnostics}};

    if (!cfg.constant_policies.empty()) {
        std::vector<PolicyCandidate> cands{{"argmax", sol.policy}};
        for (int u : cfg.constant_policies)
            cands.push_back({"constant " + std::to_string(u), std::vector<int>(disc.size(), u)});
        const OptimalityReport gap = stage("optimality_gap", [&] {
            return optimality_gap(cfg.model, disc, cands, 0, sim, cfg.tol, bias);
        });
        json scores = json::array();
        for (std::size_t i = 0; i < gap.scores.size(); ++i)
            scores.push_back({{"label", gap.scores[i].label},
                              {"eigenvalue", gap.scores[i].eigenvalue},
                              {"estimate", estimate_json(gap.scores[i].estimate)},
                              {"margin", gap.margins[i]},
                              {"error_budget", gap.error_budgets[i]}});
        body["optimality"] = {{"scores", scores},
                              {"argmax_is_best", gap.argmax_is_best},
                              {"strictly_dominates", gap.strictly_dominates}};
        check("argmax_policy_is_best", 0.0, 0.0, gap.argmax_is_best);
    }
    body["checks"] = checks;
    body["all_pass"] = all_pass;
    out.report("verify.json", body);
    if (opts.trace) {
        std::ostringstream d, t;
        d << out.csv_preamble();
        write_trace_csv(d, direct_trace);
        t << out.csv_preamble();
        write_trace_csv(t, twisted_trace);
        out.text("trace_direct.csv", d.str());
        out.text("trace_twisted.csv", t.str());
    }
    if (!all_pass) {
        std::cerr << "verify: some checks failed, see " << (out.dir / "verify.json").string() << "\n";
        return exit_code::numerical_error;
    }
    return exit_code::success;
}

int cmd_minimize(const RunConfig& cfg, const CommandOptions& opts) {
    if (cfg.model.direction != Direction::minimize)
        throw ConfigError("minimize needs a model with direction \"minimize\"");
    const Output out = open_output(cfg, opts);
    const Grid grid = make_grid(cfg);
    const Discretization disc = stage("discretize", [&] { return discretize(cfg.model, grid, cfg.grid.bc, cfg.exec); });
    const SemilinearSolution sol =
        stage("solve_semilinear", [&] { return solve_semilinear(disc, cfg.tol, cfg.limits, cfg.exec); });
    const std::vector<double> gauge = cfg.grid.bc == BoundaryCondition::neumann ? grid_gauge(disc, sol.pair)
                                                                                : std::vector<double>{};
    const AssumptionReport rep =
        stage("check_assumptions", [&] { return check_assumptions(cfg.model, grid, sol.pair.value, gauge); });
    const bool coercive = rep.coercive.value_or(false);
    const bool positive = sol.pair.min_phi() > 0.0;
    out.report("minimize.json", json{{"eigenpair", eigen_json(sol)},
                                     {"assumptions", assumptions_json(rep)},
                                     {"coercive", coercive},
                                     {"inf_phi_positive", positive}});
    out.text("policy.csv", policy_csv(out, disc, cfg.model, sol.policy));
    out.text("phi.csv", phi_csv(out, disc, sol.pair.phi));
    if (!coercive) {
        std::cerr << "minimize: check_assumptions: the cost is not coercive on the grid (shell minima do not increase)\n";
        return exit_code::numerical_error;
    }
    if (!positive) {
        std::cerr << "minimize: the eigenvector is not bounded away from zero\n";
        return exit_code::numerical_error;
    }
    return exit_code::success;
}

int run_command(const std::string& command, const std::string& config_path, const CommandOptions& opts) {
    try {
        RunConfig cfg = load_config(config_path);
        if (opts.seed) {
            cfg.seed = *opts.seed;
            cfg.resolved["seed"] = *opts.seed;
        }
        if (command == "solve") return cmd_solve(cfg, opts);
        if (command == "sweep") return cmd_sweep(cfg, opts);
        if (command == "lp") return cmd_lp(cfg, opts);
        if (command == "verify") return cmd_verify(cfg, opts);
        if (command == "minimize") return cmd_minimize(cfg, opts);
        std::cerr << "unknown command " << command << "\n";
        return exit_code::config_error;
    } catch (const Error& e) {
        std::cerr << command << ": " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::config:
            case ErrorKind::invalid_argument:
            case ErrorKind::not_found:
                return exit_code::config_error;
            default:
                return exit_code::numerical_error;
        }
    } catch (const fs::filesystem_error& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return exit_code::config_error;
    } catch (const std::exception& e) {
        std::cerr << command << ": internal error: " << e.what() << "\n";
        return exit_code::numerical_error;
    }
}

}  // namespace riskeig
