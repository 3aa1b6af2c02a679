#include "riskeig/model.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "riskeig/error.hpp"

namespace riskeig {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::not_found: return "NotFound";
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::evaluation: return "EvaluationError";
    case ErrorKind::ellipticity: return "EllipticityError";
    case ErrorKind::non_monotone_scheme: return "NonMonotoneScheme";
    case ErrorKind::convergence: return "ConvergenceError";
    case ErrorKind::not_irreducible: return "NotIrreducible";
    case ErrorKind::range: return "RangeError";
    case ErrorKind::divergence: return "DivergenceError";
    case ErrorKind::extrapolation: return "ExtrapolationError";
    case ErrorKind::config: return "ConfigError";
    case ErrorKind::internal: return "InternalError";
    }
    return "Error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind), full_(std::string(to_string(kind)) + ": " + message) {}

void Error::add_context(const std::string& context) {
    full_ = std::string(to_string(kind_)) + ": " + context + ": " + full_.substr(full_.find(": ") + 2);
}

const char* to_string(Direction d) { return d == Direction::maximize ? "maximize" : "minimize"; }
const char* to_string(BoundaryCondition bc) { return bc == BoundaryCondition::neumann ? "neumann" : "dirichlet"; }

Mat2 DiffusionModel::diffusion(const Point& x) const {
    const Mat2 s = sigma(x);
    if (dimension == 1) return {s[0] * s[0], 0.0, 0.0, 0.0};
    return {s[0] * s[0] + s[1] * s[1], s[0] * s[2] + s[1] * s[3], s[2] * s[0] + s[3] * s[1],
            s[2] * s[2] + s[3] * s[3]};
}

void DiffusionModel::validate() const {
    if (dimension != 1 && dimension != 2)
        throw InvalidArgument("model '" + name + "': dimension must be 1 or 2");
    if (controls.empty()) throw InvalidArgument("model '" + name + "': control set is empty");
    if (!drift || !sigma || !reward) throw InvalidArgument("model '" + name + "': missing field function");
}

namespace {

constexpr std::array<const char*, 4> kBuiltins{"const", "ou-quad", "ctrl-1d", "min-1d"};

DiffusionModel one_dimensional(std::string name, std::vector<Control> controls) {
    DiffusionModel m;
    m.name = std::move(name);
    m.dimension = 1;
    m.controls = std::move(controls);
    m.sigma = [](const Point&) { return Mat2{std::sqrt(2.0), 0.0, 0.0, 0.0}; };
    return m;
}

}  // namespace

std::span<const char* const> builtin_names() { return kBuiltins; }

DiffusionModel builtin_instance(const std::string& name) {
    if (name == "const") {
        auto m = one_dimensional(name, {{0.0}});
        m.drift = [](const Point& x, const Control&) { return Vec2{-x[0], 0.0}; };
        m.reward = [](const Point&, const Control&) { return 0.5; };
        m.reward_upper_bound = 0.5;
        return m;
    }
    if (name == "ou-quad") {
        constexpr double alpha = 1.0;
        constexpr double kappa = 2.0;
        auto m = one_dimensional(name, {{0.0}});
        m.drift = [](const Point& x, const Control&) { return Vec2{-alpha * x[0], 0.0}; };
        m.reward = [](const Point& x, const Control&) { return -kappa * x[0] * x[0]; };
        m.reward_upper_bound = 0.0;
        return m;
    }
    if (name == "ctrl-1d") {
        auto m = one_dimensional(name, {{-1.0}, {0.0}, {1.0}});
        m.drift = [](const Point& x, const Control& u) { return Vec2{u[0] - x[0], 0.0}; };
        m.reward = [](const Point& x, const Control& u) {
            const double d = x[0] - 1.0;
            return -d * d - 0.1 * u[0] * u[0];
        };
        m.reward_upper_bound = 0.0;
        return m;
    }
    if (name == "min-1d") {
        auto m = one_dimensional(name, {{-1.0}, {0.0}, {1.0}});
        m.drift = [](const Point&, const Control& u) { return Vec2{u[0], 0.0}; };
        m.reward = [](const Point& x, const Control& u) { return x[0] * x[0] + u[0] * u[0]; };
        m.reward_upper_bound = std::numeric_limits<double>::infinity();
        m.direction = Direction::minimize;
        return m;
    }
    std::string valid;
    for (const char* n : kBuiltins) valid += std::string(valid.empty() ? "" : ", ") + n;
    throw NotFound("unknown model '" + name + "'; valid names: " + valid);
}

DiffusionModel with_reward_offset(DiffusionModel model, std::function<double(const Point&)> bump) {
    auto base = model.reward;
    model.reward = [base, bump](const Point& x, const Control& u) { return base(x, u) + bump(x); };
    model.name += "+offset";
    return model;
}

const char* to_string(DriftCase c) {
    switch (c) {
    case DriftCase::inf_compact_c: return "inf_compact_c";
    case DriftCase::subquadratic_inward_drift: return "subquadratic_inward_drift";
    case DriftCase::bounded_ratio: return "bounded_ratio";
    case DriftCase::none: return "none";
    }
    return "none";
}

}  // namespace riskeig
