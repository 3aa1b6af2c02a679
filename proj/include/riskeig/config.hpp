#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskeig/eigensolve.hpp"
#include "riskeig/model.hpp"
#include "riskeig/montecarlo.hpp"
#include "riskeig/occupation.hpp"

namespace riskeig {

struct GridSpec {
    double radius = 6.0;
    std::optional<int> nodes_per_axis;
    std::optional<int> nodes_per_unit;
    BoundaryCondition bc = BoundaryCondition::neumann;

    int resolve_nodes() const;
};

struct SweepSpec {
    std::vector<double> radii;
    std::vector<BoundaryCondition> bcs{BoundaryCondition::dirichlet, BoundaryCondition::neumann};
    int nodes_per_unit = 50;
};

struct YGridSpec {
    int points = 21;
    std::optional<double> range;  // default 1.5 max |grad log phi| from a prior solve
};

struct SimSpec {
    double horizon = 10.0;
    double dt = 1e-2;
    std::size_t paths = 10000;
    Point x0{0.0, 0.0};
    std::optional<double> boundary_radius;
    double bias_allowance = 0.05;
};

struct RunConfig {
    nlohmann::json resolved;  // the full config with defaults filled in
    DiffusionModel model;
    GridSpec grid;
    double tol = 1e-10;
    SolverLimits limits;
    SweepSpec sweep;
    YGridSpec ygrid;
    LpOptions lp;
    SimSpec sim;
    std::uint64_t seed = 1;
    Exec exec = Exec::parallel;
    std::vector<int> constant_policies;  // controls of the fixed comparison policies in verify
    bool export_triplets = false;
    std::string out_dir = ".";
};

/// Polynomial model from coefficient tables (see README for the schema).
DiffusionModel polynomial_model(const nlohmann::json& spec);

/// Throws ConfigError with a message naming the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

SimConfig make_sim_config(const RunConfig& cfg);

}  // namespace riskeig
