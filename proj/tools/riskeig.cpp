// Command-line driver: riskeig <solve|sweep|lp|verify|minimize> --config FILE [options]

#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "riskeig/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Principal eigenvalues of controlled diffusions: solve, sweep, occupation LP, verification"};
    app.require_subcommand(1);

    std::string config;
    riskeig::CommandOptions opts;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string export_lp;

    const char* commands[][2] = {
        {"solve", "semilinear eigenpair on one grid; writes eigenpair.json and phi.csv"},
        {"sweep", "eigenvalues over growing radii; writes sweep.csv"},
        {"lp", "occupation-measure linear program and saddle check; writes lp_report.json"},
        {"verify", "solve, twist, entropy, diagnostics and Monte Carlo; writes verify.json"},
        {"minimize", "cost-minimisation pipeline; writes minimize.json and policy.csv"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        if (std::string(name) == "lp") sub->add_option("--export-lp", export_lp, "write the LP in CPLEX LP format");
        if (std::string(name) == "verify") sub->add_flag("--trace", opts.trace, "dump per-path Monte Carlo traces");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : riskeig::exit_code::config_error;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--out")) opts.out_dir = out_dir;
    if (sub->count("--seed")) opts.seed = seed;
    if (!export_lp.empty()) opts.export_lp = export_lp;
    return riskeig::run_command(sub->get_name(), config, opts);
}
