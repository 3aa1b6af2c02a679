#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskeig/types.hpp"

namespace riskeig {

class Grid;

using Control = std::vector<double>;

/// A controlled diffusion dX = b(X, u) dt + sigma(X) dW with running
/// reward c(X, u) over a finite control set.
struct DiffusionModel {
    std::string name;
    int dimension = 1;
    std::vector<Control> controls;
    std::function<Vec2(const Point&, const Control&)> drift;
    std::function<Mat2(const Point&)> sigma;
    std::function<double(const Point&, const Control&)> reward;
    double reward_upper_bound = 0.0;
    Direction direction = Direction::maximize;

    std::size_t control_count() const { return controls.size(); }

    /// a(x) = sigma(x) sigma(x)^T.
    Mat2 diffusion(const Point& x) const;

    /// Throws InvalidArgument if the model is structurally incomplete.
    void validate() const;
};

/// Names accepted by builtin_instance().
std::span<const char* const> builtin_names();

/// Benchmark fixtures: "const", "ou-quad", "ctrl-1d", "min-1d".
DiffusionModel builtin_instance(const std::string& name);

/// Returns a copy of `model` whose reward is c(x, u) + bump(x).
DiffusionModel with_reward_offset(DiffusionModel model, std::function<double(const Point&)> bump);

enum class DriftCase { inf_compact_c, subquadratic_inward_drift, bounded_ratio, none };
const char* to_string(DriftCase c);

/// Finite-grid proxies for the standing structural assumptions. Every
/// shell-based quantity records the shell it was measured on.
struct AssumptionReport {
    double ellipticity_floor = 0.0;    // min eigenvalue of a over the grid
    double ellipticity_ceiling = 0.0;  // max eigenvalue of a over the grid
    double growth_constant = 0.0;      // least C0 with |b|^2 + |sigma|^2 <= C0 (1 + |x|^2)
    double reward_max = 0.0;
    bool reward_bound_respected = true;  // max c <= reward_upper_bound on the grid
    double reward_growth_exponent = 0.0; // slope of log(1 + max|c|) vs log|x|, outer half

    double shell_radius = 0.0;  // nodes with sup-norm >= shell_radius form the outer shell
    double shell_reward_max = 0.0;
    double near_monotone_margin = 0.0;  // rho_hat - shell_reward_max

    DriftCase a42_case = DriftCase::none;
    std::vector<double> case_shell_radii;  // shells used by the case proxies

    std::optional<double> a51_theta;    // minimize direction only
    std::optional<bool> coercive;       // minimize direction only
    std::optional<double> shell_reward_min;
};

/// Samples every grid node and control. `log_phi`, when given, is the
/// principal gauge on the grid nodes (used by the bounded-ratio case);
/// without it the gauge is computed from a Neumann eigen solve on `grid`.
AssumptionReport check_assumptions(const DiffusionModel& model, const Grid& grid, double rho_hat,
                                   std::span<const double> log_phi = {});

}  // namespace riskeig
