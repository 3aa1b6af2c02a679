#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "fixtures.hpp"
#include "riskeig/error.hpp"
#include "riskeig/grid.hpp"
#include "riskeig/model.hpp"

using namespace riskeig;

TEST_SUITE("model") {

TEST_CASE("builtin fixtures") {
    const auto c = builtin_instance("const");
    CHECK(c.dimension == 1);
    CHECK(c.control_count() == 1);
    CHECK(c.reward({2.0, 0.0}, c.controls[0]) == 0.5);
    CHECK(c.drift({2.0, 0.0}, c.controls[0])[0] == -2.0);
    CHECK(c.diffusion({0.3, 0.0})[0] == doctest::Approx(2.0).epsilon(1e-15));

    const auto ou = builtin_instance("ou-quad");
    CHECK(ou.reward({3.0, 0.0}, ou.controls[0]) == -18.0);
    CHECK(ou.drift({3.0, 0.0}, ou.controls[0])[0] == -3.0);

    const auto ctrl = builtin_instance("ctrl-1d");
    REQUIRE(ctrl.control_count() == 3);
    CHECK(ctrl.drift({0.5, 0.0}, ctrl.controls[2])[0] == 0.5);
    CHECK(ctrl.direction == Direction::maximize);

    const auto mn = builtin_instance("min-1d");
    CHECK(mn.direction == Direction::minimize);
    CHECK(mn.reward({2.0, 0.0}, mn.controls[0]) == 5.0);
    CHECK(std::isinf(mn.reward_upper_bound));

    CHECK(builtin_names().size() == 4);
}

TEST_CASE("unknown builtin lists the valid names") {
    try {
        builtin_instance("bogus");
        FAIL("expected NotFound");
    } catch (const NotFound& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bogus") != std::string::npos);
        for (const char* name : builtin_names()) CHECK(msg.find(name) != std::string::npos);
    }
}

TEST_CASE("validate rejects incomplete models") {
    DiffusionModel m = builtin_instance("const");
    m.controls.clear();
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    m = builtin_instance("const");
    m.reward = nullptr;
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
}

TEST_CASE("reward offset adds the bump") {
    const auto m = with_reward_offset(builtin_instance("ou-quad"), [](const Point& x) { return 1.0 + x[0]; });
    CHECK(m.reward({2.0, 0.0}, m.controls[0]) == -8.0 + 3.0);
}

TEST_CASE("assumption report on the maximize fixtures") {
    const Grid grid(1, 6.0, 121);
    const auto ou = check_assumptions(builtin_instance("ou-quad"), grid, -1.0);
    CHECK(ou.ellipticity_floor == doctest::Approx(2.0));
    CHECK(ou.ellipticity_ceiling == doctest::Approx(2.0));
    CHECK(ou.reward_bound_respected);
    CHECK(ou.reward_max == 0.0);
    CHECK(ou.a42_case == DriftCase::inf_compact_c);
    CHECK(ou.reward_growth_exponent == doctest::Approx(2.0).epsilon(0.15));
    CHECK(ou.near_monotone_margin > 0.0);
    CHECK(ou.shell_radius == doctest::Approx(0.9 * 6.0));
    CHECK(!ou.a51_theta.has_value());
    CHECK(!ou.coercive.has_value());
    // |b|^2 + |sigma|^2 = x^2 + 2 <= 2 (1 + x^2)
    CHECK(ou.growth_constant <= 2.0 + 1e-12);

    const auto cst = check_assumptions(builtin_instance("const"), Grid(1, 3.0, 61), 0.5);
    CHECK(cst.near_monotone_margin == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cst.reward_bound_respected);
    CHECK(cst.a42_case != DriftCase::inf_compact_c);

    const auto ctrl = check_assumptions(builtin_instance("ctrl-1d"), Grid(1, 4.0, 81), -0.55);
    CHECK(ctrl.near_monotone_margin > 0.0);
    CHECK(ctrl.a42_case == DriftCase::inf_compact_c);
}

TEST_CASE("assumption report on the minimize fixture") {
    const auto mn = check_assumptions(builtin_instance("min-1d"), Grid(1, 3.0, 61), 5.88);
    REQUIRE(mn.a51_theta.has_value());
    REQUIRE(mn.coercive.has_value());
    CHECK(*mn.a51_theta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(*mn.coercive);
    CHECK(*mn.shell_reward_min > 0.0);

    DiffusionModel flat = builtin_instance("min-1d");
    flat.reward = [](const Point& x, const Control&) { return -x[0] * x[0]; };
    const auto nf = check_assumptions(flat, Grid(1, 3.0, 61), 0.0);
    CHECK_FALSE(*nf.coercive);
}

TEST_CASE("violated reward bound is reported") {
    DiffusionModel m = builtin_instance("ou-quad");
    m.reward_upper_bound = -1.0;
    CHECK_FALSE(check_assumptions(m, Grid(1, 2.0, 21), -1.0).reward_bound_respected);
}

TEST_CASE("non-finite field names the node") {
    DiffusionModel m = builtin_instance("ou-quad");
    m.reward = [](const Point& x, const Control&) {
        return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : -x[0] * x[0];
    };
    try {
        check_assumptions(m, Grid(1, 1.0, 5), -1.0);
        FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
}

}  // TEST_SUITE
