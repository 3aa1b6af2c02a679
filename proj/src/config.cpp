#include "riskeig/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "riskeig/error.hpp"

namespace riskeig {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

double number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key + " must be finite");
    return d;
}

long long integer(const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ConfigError(key + " must be an integer");
    return v.get<long long>();
}

BoundaryCondition parse_bc(const json& v, const std::string& key) {
    if (v == "neumann") return BoundaryCondition::neumann;
    if (v == "dirichlet") return BoundaryCondition::dirichlet;
    throw ConfigError(key + " must be \"neumann\" or \"dirichlet\"");
}

struct Term {
    double coef = 0.0;
    std::array<int, 2> x{0, 0};
    std::vector<int> u;
};
using Poly = std::vector<Term>;

Poly parse_poly(const json& v, const std::string& key, int dimension, std::size_t control_dim, bool allow_u) {
    if (!v.is_array()) throw ConfigError(key + " must be a list of terms");
    Poly p;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string where = key + "[" + std::to_string(i) + "]";
        check_keys(v[i], {"c", "x", "u"}, where);
        Term t;
        if (!v[i].contains("c")) throw ConfigError(where + ".c is required");
        t.coef = number(v[i]["c"], where + ".c");
        if (v[i].contains("x")) {
            const json& xs = v[i]["x"];
            if (!xs.is_array() || static_cast<int>(xs.size()) != dimension)
                throw ConfigError(where + ".x must list one power per state coordinate");
            for (int k = 0; k < dimension; ++k) {
                const auto e = integer(xs[static_cast<std::size_t>(k)], where + ".x");
                if (e < 0) throw ConfigError(where + ".x powers must be nonnegative");
                t.x[static_cast<std::size_t>(k)] = static_cast<int>(e);
            }
        }
        if (v[i].contains("u")) {
            if (!allow_u) throw ConfigError(where + ": sigma may not depend on the control");
            const json& us = v[i]["u"];
            if (!us.is_array() || us.size() != control_dim)
                throw ConfigError(where + ".u must list one power per control coordinate");
            for (const auto& e : us) {
                const auto q = integer(e, where + ".u");
                if (q < 0) throw ConfigError(where + ".u powers must be nonnegative");
                t.u.push_back(static_cast<int>(q));
            }
        }
        p.push_back(std::move(t));
    }
    return p;
}

double eval(const Poly& p, const Point& x, const Control* u) {
    double s = 0.0;
    for (const Term& t : p) {
        double v = t.coef * std::pow(x[0], t.x[0]) * std::pow(x[1], t.x[1]);
        for (std::size_t j = 0; j < t.u.size(); ++j) v *= std::pow((*u)[j], t.u[j]);
        s += v;
    }
    return s;
}

}  // namespace

DiffusionModel polynomial_model(const json& spec) {
    check_keys(spec, {"name", "dimension", "controls", "drift", "sigma", "reward", "reward_upper_bound", "direction"},
               "model");
    DiffusionModel m;
    m.name = spec.value("name", std::string("polynomial"));
    if (!spec.contains("dimension")) throw ConfigError("model.dimension is required");
    m.dimension = static_cast<int>(integer(spec["dimension"], "model.dimension"));
    if (m.dimension != 1 && m.dimension != 2) throw ConfigError("model.dimension must be 1 or 2");
    const std::size_t d = static_cast<std::size_t>(m.dimension);

    if (!spec.contains("controls") || !spec["controls"].is_array() || spec["controls"].empty())
        throw ConfigError("model.controls must be a nonempty list");
    for (const auto& c : spec["controls"]) {
        Control u;
        if (c.is_number()) {
            u.push_back(number(c, "model.controls"));
        } else if (c.is_array() && !c.empty()) {
            for (const auto& v : c) u.push_back(number(v, "model.controls"));
        } else {
            throw ConfigError("model.controls entries must be numbers or nonempty lists");
        }
        if (!m.controls.empty() && u.size() != m.controls.front().size())
            throw ConfigError("model.controls entries must share one length");
        m.controls.push_back(std::move(u));
    }
    const std::size_t cd = m.controls.front().size();

    for (const char* key : {"drift", "sigma", "reward"})
        if (!spec.contains(key)) throw ConfigError(std::string("model.") + key + " is required");
    if (!spec["drift"].is_array() || spec["drift"].size() != d)
        throw ConfigError("model.drift must hold one term list per state coordinate");
    if (!spec["sigma"].is_array() || spec["sigma"].size() != d * d)
        throw ConfigError("model.sigma must hold d*d term lists (row major)");

    std::vector<Poly> drift, sigma;
    for (std::size_t k = 0; k < d; ++k)
        drift.push_back(parse_poly(spec["drift"][k], "model.drift[" + std::to_string(k) + "]", m.dimension, cd, true));
    for (std::size_t k = 0; k < d * d; ++k)
        sigma.push_back(parse_poly(spec["sigma"][k], "model.sigma[" + std::to_string(k) + "]", m.dimension, cd, false));
    const Poly reward = parse_poly(spec["reward"], "model.reward", m.dimension, cd, true);

    m.drift = [drift](const Point& x, const Control& u) {
        Vec2 b{0.0, 0.0};
        for (std::size_t k = 0; k < drift.size(); ++k) b[k] = eval(drift[k], x, &u);
        return b;
    };
    m.sigma = [sigma, d](const Point& x) {
        Mat2 s{0.0, 0.0, 0.0, 0.0};
        if (d == 1)
            s[0] = eval(sigma[0], x, nullptr);
        else
            for (std::size_t k = 0; k < 4; ++k) s[k] = eval(sigma[k], x, nullptr);
        return s;
    };
    m.reward = [reward](const Point& x, const Control& u) { return eval(reward, x, &u); };

    m.reward_upper_bound = std::numeric_limits<double>::infinity();
    if (spec.contains("reward_upper_bound") && !spec["reward_upper_bound"].is_null())
        m.reward_upper_bound = number(spec["reward_upper_bound"], "model.reward_upper_bound");
    const std::string dir = spec.value("direction", std::string("maximize"));
    if (dir == "maximize")
        m.direction = Direction::maximize;
    else if (dir == "minimize")
        m.direction = Direction::minimize;
    else
        throw ConfigError("model.direction must be \"maximize\" or \"minimize\"");
    return m;
}

int GridSpec::resolve_nodes() const {
    if (nodes_per_axis) return *nodes_per_axis;
    return nodes_for_radius(radius, nodes_per_unit.value_or(50));
}

RunConfig parse_config(const json& doc) {
    check_keys(doc, {"model", "grid", "solver", "sweep", "ygrid", "lp", "sim", "seed", "out", "policies"}, "config");
    RunConfig cfg;
    json& out = cfg.resolved;

    // model
    if (!doc.contains("model")) throw ConfigError("config.model is required");
    const json& mj = doc["model"];
    try {
        if (mj.is_string()) {
            cfg.model = builtin_instance(mj.get<std::string>());
            out["model"] = mj;
        } else if (mj.is_object() && mj.contains("builtin")) {
            check_keys(mj, {"builtin"}, "model");
            cfg.model = builtin_instance(mj["builtin"].get<std::string>());
            out["model"] = mj["builtin"];
        } else {
            cfg.model = polynomial_model(mj);
            out["model"] = mj;
        }
    } catch (const NotFound& e) {
        throw ConfigError(e.what());
    }

    // grid
    const json gj = doc.value("grid", json::object());
    check_keys(gj, {"radius", "nodes_per_axis", "nodes_per_unit", "bc"}, "grid");
    if (gj.contains("radius")) cfg.grid.radius = number(gj["radius"], "grid.radius");
    if (!(cfg.grid.radius > 0.0)) throw ConfigError("grid.radius must be positive");
    if (gj.contains("nodes_per_axis") && gj.contains("nodes_per_unit"))
        throw ConfigError("grid: give nodes_per_axis or nodes_per_unit, not both");
    if (gj.contains("nodes_per_axis")) {
        const auto n = integer(gj["nodes_per_axis"], "grid.nodes_per_axis");
        if (n < 3 || n % 2 == 0) throw ConfigError("grid.nodes_per_axis must be odd and at least 3");
        cfg.grid.nodes_per_axis = static_cast<int>(n);
    } else {
        const auto npu = gj.contains("nodes_per_unit") ? integer(gj["nodes_per_unit"], "grid.nodes_per_unit") : 50;
        if (npu < 2) throw ConfigError("grid.nodes_per_unit must be at least 2");
        cfg.grid.nodes_per_unit = static_cast<int>(npu);
    }
    if (gj.contains("bc")) cfg.grid.bc = parse_bc(gj["bc"], "grid.bc");
    out["grid"] = {{"radius", cfg.grid.radius}, {"nodes_per_axis", cfg.grid.resolve_nodes()}, {"bc", to_string(cfg.grid.bc)}};
    if (cfg.grid.resolve_nodes() < 3) throw ConfigError("grid resolves to fewer than 3 nodes per axis");

    // solver
    const json sj = doc.value("solver", json::object());
    check_keys(sj, {"tol", "max_iterations", "max_sweeps", "parallel", "export_triplets"}, "solver");
    if (sj.contains("tol")) cfg.tol = number(sj["tol"], "solver.tol");
    if (!(cfg.tol > 0.0)) throw ConfigError("solver.tol must be positive");
    if (sj.contains("max_iterations"))
        cfg.limits.max_iterations = static_cast<int>(integer(sj["max_iterations"], "solver.max_iterations"));
    if (sj.contains("max_sweeps")) cfg.limits.max_sweeps = static_cast<int>(integer(sj["max_sweeps"], "solver.max_sweeps"));
    if (cfg.limits.max_iterations < 1 || cfg.limits.max_sweeps < 1)
        throw ConfigError("solver iteration limits must be positive");
    bool parallel = true;
    if (sj.contains("parallel")) {
        if (!sj["parallel"].is_boolean()) throw ConfigError("solver.parallel must be a boolean");
        parallel = sj["parallel"].get<bool>();
    }
    cfg.exec = parallel ? Exec::parallel : Exec::serial;
    if (sj.contains("export_triplets")) {
        if (!sj["export_triplets"].is_boolean()) throw ConfigError("solver.export_triplets must be a boolean");
        cfg.export_triplets = sj["export_triplets"].get<bool>();
    }
    out["solver"] = {{"tol", cfg.tol},
                     {"max_iterations", cfg.limits.max_iterations},
                     {"max_sweeps", cfg.limits.max_sweeps},
                     {"parallel", parallel},
                     {"export_triplets", cfg.export_triplets}};

    // sweep
    const json wj = doc.value("sweep", json::object());
    check_keys(wj, {"radii", "bcs", "nodes_per_unit"}, "sweep");
    if (wj.contains("radii")) {
        if (!wj["radii"].is_array()) throw ConfigError("sweep.radii must be a list");
        for (const auto& r : wj["radii"]) cfg.sweep.radii.push_back(number(r, "sweep.radii"));
        for (std::size_t i = 0; i < cfg.sweep.radii.size(); ++i)
            if (!(cfg.sweep.radii[i] > 0.0) || (i > 0 && !(cfg.sweep.radii[i] > cfg.sweep.radii[i - 1])))
                throw ConfigError("sweep.radii must be positive and strictly increasing");
    }
    if (wj.contains("bcs")) {
        if (!wj["bcs"].is_array() || wj["bcs"].empty()) throw ConfigError("sweep.bcs must be a nonempty list");
        cfg.sweep.bcs.clear();
        for (const auto& b : wj["bcs"]) cfg.sweep.bcs.push_back(parse_bc(b, "sweep.bcs"));
    }
    if (wj.contains("nodes_per_unit"))
        cfg.sweep.nodes_per_unit = static_cast<int>(integer(wj["nodes_per_unit"], "sweep.nodes_per_unit"));
    if (cfg.sweep.nodes_per_unit < 10) throw ConfigError("sweep.nodes_per_unit must be at least 10");
    json bcs = json::array();
    for (auto b : cfg.sweep.bcs) bcs.push_back(to_string(b));
    out["sweep"] = {{"radii", cfg.sweep.radii}, {"bcs", bcs}, {"nodes_per_unit", cfg.sweep.nodes_per_unit}};

    // ygrid
    const json yj = doc.value("ygrid", json::object());
    check_keys(yj, {"points", "range"}, "ygrid");
    if (yj.contains("points")) cfg.ygrid.points = static_cast<int>(integer(yj["points"], "ygrid.points"));
    if (cfg.ygrid.points < 1 || cfg.ygrid.points % 2 == 0) throw ConfigError("ygrid.points must be odd and positive");
    if (yj.contains("range") && !yj["range"].is_null()) {
        cfg.ygrid.range = number(yj["range"], "ygrid.range");
        if (!(*cfg.ygrid.range > 0.0)) throw ConfigError("ygrid.range must be positive");
    }
    out["ygrid"] = {{"points", cfg.ygrid.points}, {"range", cfg.ygrid.range ? json(*cfg.ygrid.range) : json(nullptr)}};

    // lp
    const json lj = doc.value("lp", json::object());
    check_keys(lj, {"feasibility_tol", "optimality_tol", "max_iterations"}, "lp");
    if (lj.contains("feasibility_tol")) cfg.lp.feasibility_tol = number(lj["feasibility_tol"], "lp.feasibility_tol");
    if (lj.contains("optimality_tol")) cfg.lp.optimality_tol = number(lj["optimality_tol"], "lp.optimality_tol");
    if (lj.contains("max_iterations"))
        cfg.lp.max_iterations = static_cast<int>(integer(lj["max_iterations"], "lp.max_iterations"));
    if (!(cfg.lp.feasibility_tol > 0.0) || !(cfg.lp.optimality_tol > 0.0) || cfg.lp.max_iterations < 1)
        throw ConfigError("lp tolerances and iteration cap must be positive");
    out["lp"] = {{"feasibility_tol", cfg.lp.feasibility_tol},
                 {"optimality_tol", cfg.lp.optimality_tol},
                 {"max_iterations", cfg.lp.max_iterations}};

    // sim
    const json mcj = doc.value("sim", json::object());
    check_keys(mcj, {"horizon", "dt", "paths", "x0", "boundary_radius", "bias_allowance"}, "sim");
    if (mcj.contains("horizon")) cfg.sim.horizon = number(mcj["horizon"], "sim.horizon");
    if (mcj.contains("dt")) cfg.sim.dt = number(mcj["dt"], "sim.dt");
    if (mcj.contains("paths")) {
        const auto n = integer(mcj["paths"], "sim.paths");
        if (n < 100) throw ConfigError("sim.paths must be at least 100");
        cfg.sim.paths = static_cast<std::size_t>(n);
    }
    if (!(cfg.sim.dt > 0.0)) throw ConfigError("sim.dt must be positive");
    if (!(cfg.sim.horizon >= 10.0 * cfg.sim.dt)) throw ConfigError("sim.horizon must be at least 10 sim.dt");
    if (mcj.contains("x0")) {
        const json& x0 = mcj["x0"];
        if (x0.is_number() && cfg.model.dimension == 1) {
            cfg.sim.x0 = {number(x0, "sim.x0"), 0.0};
        } else if (x0.is_array() && static_cast<int>(x0.size()) == cfg.model.dimension) {
            for (std::size_t k = 0; k < x0.size(); ++k) cfg.sim.x0[k] = number(x0[k], "sim.x0");
        } else {
            throw ConfigError("sim.x0 must have one coordinate per state dimension");
        }
    }
    if (mcj.contains("boundary_radius") && !mcj["boundary_radius"].is_null()) {
        cfg.sim.boundary_radius = number(mcj["boundary_radius"], "sim.boundary_radius");
        if (!(*cfg.sim.boundary_radius > 0.0)) throw ConfigError("sim.boundary_radius must be positive");
    }
    if (mcj.contains("bias_allowance")) cfg.sim.bias_allowance = number(mcj["bias_allowance"], "sim.bias_allowance");
    json x0 = json::array();
    for (int k = 0; k < cfg.model.dimension; ++k) x0.push_back(cfg.sim.x0[static_cast<std::size_t>(k)]);
    out["sim"] = {{"horizon", cfg.sim.horizon},
                  {"dt", cfg.sim.dt},
                  {"paths", cfg.sim.paths},
                  {"x0", x0},
                  {"boundary_radius", cfg.sim.boundary_radius ? json(*cfg.sim.boundary_radius) : json(nullptr)},
                  {"bias_allowance", cfg.sim.bias_allowance}};

    // seed, output, comparison policies
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    out["seed"] = cfg.seed;
    if (doc.contains("out")) {
        if (!doc["out"].is_string()) throw ConfigError("out must be a string");
        cfg.out_dir = doc["out"].get<std::string>();
    }
    if (doc.contains("policies")) {
        if (!doc["policies"].is_array()) throw ConfigError("policies must be a list of control indices");
        for (const auto& p : doc["policies"]) {
            const auto u = integer(p, "policies");
            if (u < 0 || static_cast<std::size_t>(u) >= cfg.model.control_count())
                throw ConfigError("policies: control index " + std::to_string(u) + " out of range");
            cfg.constant_policies.push_back(static_cast<int>(u));
        }
    }
    out["policies"] = cfg.constant_policies;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

SimConfig make_sim_config(const RunConfig& cfg) {
    SimConfig s;
    s.horizon = cfg.sim.horizon;
    s.dt = cfg.sim.dt;
    s.paths = cfg.sim.paths;
    s.seed = cfg.seed;
    s.x0 = cfg.sim.x0;
    s.boundary_radius = cfg.sim.boundary_radius;
    s.exec = cfg.exec;
    return s;
}

}  // namespace riskeig
