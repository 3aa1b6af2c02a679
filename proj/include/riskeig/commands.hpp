#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "riskeig/config.hpp"

namespace riskeig {

struct CommandOptions {
    std::optional<std::string> out_dir;  // overrides the config
    std::optional<std::uint64_t> seed;
    std::optional<std::string> export_lp;
    bool trace = false;
};

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int config_error = 1;
inline constexpr int numerical_error = 2;
}  // namespace exit_code

int cmd_solve(const RunConfig& cfg, const CommandOptions& opts);
int cmd_sweep(const RunConfig& cfg, const CommandOptions& opts);
int cmd_lp(const RunConfig& cfg, const CommandOptions& opts);
int cmd_verify(const RunConfig& cfg, const CommandOptions& opts);
int cmd_minimize(const RunConfig& cfg, const CommandOptions& opts);

/// Loads the config, applies --seed, dispatches and maps errors to exit
/// codes. Messages go to stderr.
int run_command(const std::string& command, const std::string& config_path, const CommandOptions& opts);

}  // namespace riskeig
