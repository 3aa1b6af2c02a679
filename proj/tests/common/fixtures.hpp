#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskeig/config.hpp"
#include "riskeig/discretize.hpp"
#include "riskeig/eigensolve.hpp"
#include "riskeig/model.hpp"

namespace fixture {

using namespace riskeig;
using nlohmann::json;

inline constexpr auto neumann = BoundaryCondition::neumann;
inline constexpr auto dirichlet = BoundaryCondition::dirichlet;

inline Discretization disc(const std::string& model, double radius, int n, BoundaryCondition bc = neumann) {
    return discretize(builtin_instance(model), Grid(1, radius, n), bc);
}

inline SemilinearSolution solve(const std::string& model, double radius, int n, BoundaryCondition bc = neumann,
                                double tol = 1e-10) {
    return solve_semilinear(builtin_instance(model), Grid(1, radius, n), bc, tol);
}

/// Small deterministic generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    bool coin() { return integer(0, 1) == 1; }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

inline json term(double c, std::vector<int> x, std::vector<int> u = {}) {
    json t{{"c", c}, {"x", x}};
    if (!u.empty()) t["u"] = u;
    return t;
}

/// Random confining polynomial model: drift pulls inward, constant
/// non-degenerate sigma, reward concave at infinity. In 2D the off-diagonal
/// of a stays below the diagonal so that the scheme is monotone.
inline json random_polynomial_spec(Gen& g, int dimension) {
    const int m = g.integer(1, 3);
    json controls = json::array();
    for (int k = 0; k < m; ++k) controls.push_back(g.uniform(-1.0, 1.0));
    json drift = json::array(), sigma = json::array();
    if (dimension == 1) {
        drift.push_back(json::array({term(g.uniform(-0.5, 0.5), {0}), term(-g.uniform(0.5, 2.0), {1}),
                                     term(g.uniform(-1.0, 1.0), {0}, {1})}));
        sigma.push_back(json::array({term(g.uniform(0.7, 1.5), {0})}));
    } else {
        for (int k = 0; k < 2; ++k) {
            std::vector<int> e{k == 0 ? 1 : 0, k == 1 ? 1 : 0};
            drift.push_back(json::array({term(-g.uniform(0.5, 2.0), e), term(g.uniform(-1.0, 1.0), {0, 0}, {1})}));
        }
        const double s0 = g.uniform(0.8, 1.4), s1 = g.uniform(0.8, 1.4);
        const double off = g.uniform(-0.2, 0.2) * std::min(s0, s1);
        sigma = json::array({json::array({term(s0, {0, 0})}), json::array({term(off, {0, 0})}), json::array(),
                             json::array({term(s1, {0, 0})})});
    }
    json reward = json::array();
    if (dimension == 1) {
        reward.push_back(term(-g.uniform(0.2, 2.0), {2}));
        reward.push_back(term(g.uniform(-1.0, 1.0), {1}));
        reward.push_back(term(g.uniform(-1.0, 1.0), {0}));
        reward.push_back(term(-g.uniform(0.0, 0.5), {0}, {2}));
    } else {
        reward.push_back(term(-g.uniform(0.2, 2.0), {2, 0}));
        reward.push_back(term(-g.uniform(0.2, 2.0), {0, 2}));
        reward.push_back(term(g.uniform(-0.5, 0.5), {1, 1}));
        reward.push_back(term(g.uniform(-1.0, 1.0), {0, 0}, {1}));
    }
    return json{{"name", "random"}, {"dimension", dimension}, {"controls", controls}, {"drift", drift},
                {"sigma", sigma},    {"reward", reward}};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("riskeig_test_" + tag);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream(path) << doc.dump(2);
    return path.string();
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace fixture
