#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace riskeig {

enum class ErrorKind {
    not_found,
    invalid_argument,
    evaluation,
    ellipticity,
    non_monotone_scheme,
    convergence,
    not_irreducible,
    range,
    divergence,
    extrapolation,
    config,
    internal,
};

const char* to_string(ErrorKind kind);

// Base of every error the library throws. Callers that wrap a failing
// sub-computation prepend context with add_context() and rethrow the same
// object, so the dynamic type survives.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const char* what() const noexcept override { return full_.c_str(); }
    void add_context(const std::string& context);

private:
    ErrorKind kind_;
    std::string full_;
};

#define RISKEIG_DEFINE_ERROR(Name, Kind)                                     \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& message) : Error(Kind, message) {}  \
    };

RISKEIG_DEFINE_ERROR(NotFound, ErrorKind::not_found)
RISKEIG_DEFINE_ERROR(InvalidArgument, ErrorKind::invalid_argument)
RISKEIG_DEFINE_ERROR(EvaluationError, ErrorKind::evaluation)
RISKEIG_DEFINE_ERROR(EllipticityError, ErrorKind::ellipticity)
RISKEIG_DEFINE_ERROR(NonMonotoneScheme, ErrorKind::non_monotone_scheme)
RISKEIG_DEFINE_ERROR(NotIrreducible, ErrorKind::not_irreducible)
RISKEIG_DEFINE_ERROR(RangeError, ErrorKind::range)
RISKEIG_DEFINE_ERROR(DivergenceError, ErrorKind::divergence)
RISKEIG_DEFINE_ERROR(ExtrapolationError, ErrorKind::extrapolation)
RISKEIG_DEFINE_ERROR(ConfigError, ErrorKind::config)
RISKEIG_DEFINE_ERROR(InternalError, ErrorKind::internal)

#undef RISKEIG_DEFINE_ERROR

/// Iterative method gave up. Carries whatever the method had when it
/// stopped (last iterate for eigen solves, the policy cycle for policy
/// iteration).
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& message, std::vector<double> last_iterate = {},
                     std::vector<std::vector<int>> policy_cycle = {})
        : Error(ErrorKind::convergence, message),
          last_iterate_(std::move(last_iterate)),
          policy_cycle_(std::move(policy_cycle)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    const std::vector<std::vector<int>>& policy_cycle() const noexcept { return policy_cycle_; }

private:
    std::vector<double> last_iterate_;
    std::vector<std::vector<int>> policy_cycle_;
};

}  // namespace riskeig
