#include <doctest.h>

#include <filesystem>
#include <string>

#include "fixtures.hpp"
#include "riskeig/commands.hpp"
#include "riskeig/config.hpp"
#include "riskeig/error.hpp"

using namespace riskeig;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = RISKEIG_CONFIG_DIR;

std::string config_error(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

json first_line_config(const std::string& csv) {
    REQUIRE(csv.rfind("# config=", 0) == 0);
    return json::parse(csv.substr(9, csv.find('\n') - 9));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults are filled in and echoed") {
    const auto cfg = parse_config(json{{"model", "ou-quad"}});
    CHECK(cfg.grid.radius == 6.0);
    CHECK(cfg.grid.resolve_nodes() == 601);
    CHECK(cfg.grid.bc == BoundaryCondition::neumann);
    CHECK(cfg.tol == 1e-10);
    CHECK(cfg.seed == 1);
    CHECK(cfg.resolved["model"] == "ou-quad");
    CHECK(cfg.resolved["grid"]["nodes_per_axis"] == 601);
    CHECK(cfg.resolved["sim"]["paths"] == 10000);
    CHECK(cfg.resolved.contains("solver"));
    CHECK_FALSE(cfg.resolved.contains("out"));
}

TEST_CASE("config errors name the key") {
    CHECK(config_error({{"model", "const"}, {"grid", {{"radius", 0.0}}}}) == "ConfigError: grid.radius must be positive");
    CHECK(config_error({{"model", "const"}, {"grid", {{"radius", -2.0}}}}).find("grid.radius") != std::string::npos);
    CHECK(config_error({{"model", "const"}, {"grdi", json::object()}}).find("grdi") != std::string::npos);
    CHECK(config_error({{"model", "const"}, {"grid", {{"nodes_per_axis", 20}}}}).find("odd") != std::string::npos);
    CHECK(config_error({{"model", "const"}, {"grid", {{"nodes_per_axis", 21}, {"nodes_per_unit", 5}}}}) != "");
    CHECK(config_error({{"model", "const"}, {"sim", {{"dt", 0.0}}}}).find("sim.dt") != std::string::npos);
    CHECK(config_error({{"model", "const"}, {"sim", {{"paths", 10}}}}).find("sim.paths") != std::string::npos);
    CHECK(config_error({{"model", "const"}, {"sweep", {{"radii", {2.0, 1.0}}}}}).find("sweep.radii") != std::string::npos);
    CHECK(config_error({{"model", "ctrl-1d"}, {"policies", {5}}}).find("policies") != std::string::npos);
    CHECK(config_error({{"model", "const"}, {"seed", -1}}).find("seed") != std::string::npos);
    CHECK(config_error(json::object()).find("model") != std::string::npos);

    const std::string unknown = config_error({{"model", "bogus"}});
    CHECK(unknown.find("bogus") != std::string::npos);
    CHECK(unknown.find("ou-quad") != std::string::npos);
}

TEST_CASE("polynomial models reproduce the builtins") {
    const json spec{{"name", "ou-poly"},
                    {"dimension", 1},
                    {"controls", {0.0}},
                    {"drift", {{fixture::term(-1.0, {1})}}},
                    {"sigma", {{fixture::term(std::sqrt(2.0), {0})}}},
                    {"reward", {fixture::term(-2.0, {2})}},
                    {"reward_upper_bound", 0.0}};
    const auto poly = polynomial_model(spec);
    const auto ref = builtin_instance("ou-quad");
    const Grid grid(1, 3.0, 61);
    const auto a = solve_semilinear(poly, grid, fixture::neumann, 1e-11);
    const auto b = solve_semilinear(ref, grid, fixture::neumann, 1e-11);
    CHECK(a.pair.value == doctest::Approx(b.pair.value).epsilon(1e-12));
    CHECK(poly.reward_upper_bound == 0.0);

    json bad = spec;
    bad["sigma"] = json::array({json::array({fixture::term(1.0, {0}, {1})})});
    CHECK_THROWS_AS(polynomial_model(bad), ConfigError);
    bad = spec;
    bad["drift"] = json::array();
    CHECK_THROWS_AS(polynomial_model(bad), ConfigError);
    bad = spec;
    bad["reward"][0]["z"] = 1;
    CHECK_THROWS_AS(polynomial_model(bad), ConfigError);
}

TEST_CASE("example configs parse") {
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().filename() == "bad-radius.json") continue;
        INFO(entry.path().string());
        CHECK_NOTHROW(load_config(entry.path().string()));
    }
    CHECK_THROWS_AS(load_config((kConfigs / "bad-radius.json").string()), ConfigError);
    CHECK_THROWS_AS(load_config((kConfigs / "missing.json").string()), ConfigError);
}

TEST_CASE("solve writes the eigenpair with the config") {
    const auto dir = fixture::temp_dir("solve");
    CommandOptions opts;
    opts.out_dir = dir.string();
    REQUIRE(run_command("solve", (kConfigs / "const.json").string(), opts) == exit_code::success);
    const auto doc = json::parse(fixture::slurp(dir / "eigenpair.json"));
    CHECK(std::abs(doc["eigenpair"]["value"].get<double>() - 0.5) <= 1e-10);
    CHECK(doc["config"]["model"] == "const");
    CHECK(doc["seed"] == 1);
    const std::string csv = fixture::slurp(dir / "phi.csv");
    CHECK(first_line_config(csv)["config"]["grid"]["nodes_per_axis"] == 61);
    CHECK(csv.find("\nx,phi") != std::string::npos);
}

TEST_CASE("seed override is recorded") {
    const auto dir = fixture::temp_dir("seed");
    CommandOptions opts;
    opts.out_dir = dir.string();
    opts.seed = 42;
    REQUIRE(run_command("solve", (kConfigs / "const.json").string(), opts) == exit_code::success);
    const auto doc = json::parse(fixture::slurp(dir / "eigenpair.json"));
    CHECK(doc["seed"] == 42);
    CHECK(doc["config"]["seed"] == 42);
}

TEST_CASE("exit codes") {
    const auto dir = fixture::temp_dir("exit");
    CommandOptions opts;
    opts.out_dir = dir.string();
    CHECK(run_command("solve", (kConfigs / "bad-radius.json").string(), opts) == exit_code::config_error);
    CHECK(run_command("solve", (dir / "nope.json").string(), opts) == exit_code::config_error);
    CHECK(run_command("frobnicate", (kConfigs / "const.json").string(), opts) == exit_code::config_error);
    CHECK(run_command("minimize", (kConfigs / "const.json").string(), opts) == exit_code::config_error);
    CHECK(run_command("minimize", (kConfigs / "min-flat.json").string(), opts) == exit_code::numerical_error);

    std::ofstream(dir / "broken.json") << "{\"model\": \"const\", ";
    CHECK(run_command("solve", (dir / "broken.json").string(), opts) == exit_code::config_error);

    // a sweep without radii
    CHECK(run_command("sweep", (kConfigs / "const.json").string(), opts) == exit_code::config_error);

    // numerical failure: iteration cap
    const json tight{{"model", "ou-quad"},
                     {"grid", {{"radius", 6.0}, {"nodes_per_axis", 201}}},
                     {"solver", {{"tol", 1e-14}, {"max_iterations", 1}}}};
    CHECK(run_command("solve", fixture::write_json(dir / "tight.json", tight), opts) == exit_code::numerical_error);
}

TEST_CASE("verify on const passes every check") {
    const auto dir = fixture::temp_dir("verify");
    CommandOptions opts;
    opts.out_dir = dir.string();
    opts.trace = true;
    REQUIRE(run_command("verify", (kConfigs / "const.json").string(), opts) == exit_code::success);
    const auto doc = json::parse(fixture::slurp(dir / "verify.json"));
    CHECK(doc["all_pass"] == true);
    CHECK(doc["checks"].size() >= 12);
    CHECK(fs::exists(dir / "trace_direct.csv"));
    const std::string trace = fixture::slurp(dir / "trace_twisted.csv");
    CHECK(trace.find("\npath,x,y,log_weight\n") != std::string::npos);
}

TEST_CASE("lp export and report") {
    const auto dir = fixture::temp_dir("lp");
    CommandOptions opts;
    opts.out_dir = dir.string();
    opts.export_lp = (dir / "model.lp").string();
    REQUIRE(run_command("lp", (kConfigs / "const.json").string(), opts) == exit_code::success);
    const auto doc = json::parse(fixture::slurp(dir / "lp_report.json"));
    CHECK(std::abs(doc["lp"]["objective"].get<double>() - 0.5) <= 1e-6);
    const std::string lp = fixture::slurp(dir / "model.lp");
    CHECK(lp.rfind("\\ config=", 0) == 0);
    CHECK(lp.find("Subject To") != std::string::npos);
}

TEST_CASE("minimize writes a policy table") {
    const auto dir = fixture::temp_dir("minimize");
    CommandOptions opts;
    opts.out_dir = dir.string();
    REQUIRE(run_command("minimize", (kConfigs / "min-1d.json").string(), opts) == exit_code::success);
    const auto doc = json::parse(fixture::slurp(dir / "minimize.json"));
    CHECK(doc["coercive"] == true);
    CHECK(doc["eigenpair"]["value"].get<double>() == doctest::Approx(5.880211278579268).epsilon(1e-9));
    const std::string csv = fixture::slurp(dir / "policy.csv");
    CHECK(csv.find("\nx,control_index,control\n") != std::string::npos);
}

TEST_CASE("outputs do not depend on the output directory") {
    const auto a = fixture::temp_dir("outdir_a"), b = fixture::temp_dir("outdir_b");
    CommandOptions oa, ob;
    oa.out_dir = a.string();
    ob.out_dir = b.string();
    REQUIRE(run_command("solve", (kConfigs / "min-1d.json").string(), oa) == exit_code::success);
    REQUIRE(run_command("solve", (kConfigs / "min-1d.json").string(), ob) == exit_code::success);
    CHECK(fixture::slurp(a / "eigenpair.json") == fixture::slurp(b / "eigenpair.json"));
    CHECK(fixture::slurp(a / "phi.csv") == fixture::slurp(b / "phi.csv"));
}

}  // TEST_SUITE
