#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskeig/discretize.hpp"
#include "riskeig/eigensolve.hpp"

namespace riskeig {

/// Philox4x32-10 counter-based generator. Each (key, counter) block yields
/// four independent 32-bit words.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    static Block generate(Block counter, std::array<std::uint32_t, 2> key);
};

/// Standard normal stream for one Monte Carlo path, keyed by (seed, path).
class PathNormals {
public:
    PathNormals(std::uint64_t seed, std::uint64_t path);
    double next();

private:
    void refill();
    std::array<std::uint32_t, 2> key_;
    std::uint64_t path_;
    std::uint64_t block_ = 0;
    double cache_[4] = {0.0, 0.0, 0.0, 0.0};
    int cached_ = 0;
};

struct SimConfig {
    double horizon = 10.0;
    double dt = 1e-2;
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    Point x0{0.0, 0.0};
    std::optional<double> boundary_radius;
    Exec exec = Exec::parallel;

    int steps() const;
    double effective_horizon() const { return steps() * dt; }
    void validate() const;
};

/// Control index per grid node, looked up at the nearest node.
struct PolicyField {
    const Grid* grid = nullptr;
    std::vector<int> control;  // per grid node

    int at(const Point& x) const { return control[grid->nearest(x)]; }
};

/// Extends a policy over the active set to all grid nodes (eliminated
/// Dirichlet boundary nodes copy their nearest active neighbour).
PolicyField make_policy_field(const Discretization& disc, std::span<const int> policy);

enum class Estimator { direct, twisted };
const char* to_string(Estimator e);

struct PathEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    double effective_sample_size = 0.0;
    Estimator estimator = Estimator::direct;
    std::size_t paths = 0;
};

/// Per-path outputs kept for optional trace dumps.
struct PathTrace {
    std::vector<Point> final_state;
    std::vector<double> log_weight;
};

/// (1/T) log mean exp(int_0^T c dt) under Euler-Maruyama with the policy.
PathEstimate simulate_value(const DiffusionModel& model, const PolicyField& policy, const SimConfig& cfg,
                            PathTrace* trace = nullptr);

/// Grid-interpolated gauge log phi and its gradient (piecewise linear).
class GaugeField {
public:
    GaugeField(const Discretization& disc, const EigenPair& pair);
    double log_phi(const Point& x) const;
    Vec2 grad(const Point& x) const;
    bool covers(const Point& x) const;

private:
    template <class Table>
    auto interpolate(const Table& t, const Point& x) const;
    const Grid* grid_;
    std::vector<double> gauge_;  // per grid node
    std::vector<Vec2> grad_;     // per grid node
};

/// rho + (1/T) log(phi(x0) mean[1/phi(X_T)]) with X following the twisted
/// drift b_v + a grad log phi.
PathEstimate twisted_value(const DiffusionModel& model, const PolicyField& policy, const Discretization& disc,
                           const EigenPair& pair, const SimConfig& cfg, PathTrace* trace = nullptr);

struct PolicyCandidate {
    std::string label;
    std::vector<int> policy;  // over the active nodes
};

struct PolicyScore {
    std::string label;
    double eigenvalue = 0.0;  // linear principal eigenvalue of the policy
    PathEstimate estimate;
};

struct OptimalityReport {
    std::vector<PolicyScore> scores;
    std::size_t argmax_index = 0;
    double bias_allowance = 0.0;
    bool argmax_is_best = false;         // within the 2-sigma budget + bias allowance
    bool strictly_dominates = false;     // beats every other by more than 2 sigma
    std::vector<double> margins;         // argmax estimate minus each estimate
    std::vector<double> error_budgets;   // 2 (se_argmax + se_other)
};

/// Monte Carlo risk-sensitive value of every candidate through its own
/// ground-state importance sampler.
OptimalityReport optimality_gap(const DiffusionModel& model, const Discretization& disc,
                                std::span<const PolicyCandidate> policies, std::size_t argmax_index,
                                const SimConfig& cfg, double tol, double bias_allowance = 0.05);

struct MartingalePoint {
    double time;
    double mean;
    double standard_error;
};

/// Sample mean of exp(int_0^t (c - rho) ds) phi(X_t) / phi(x0) under the
/// original dynamics at each requested time.
std::vector<MartingalePoint> martingale_check(const DiffusionModel& model, const PolicyField& policy,
                                              const Discretization& disc, const EigenPair& pair,
                                              const SimConfig& cfg, std::span<const double> times);

/// CSV "path,x,y,log_weight".
void write_trace_csv(std::ostream& os, const PathTrace& trace);

}  // namespace riskeig
