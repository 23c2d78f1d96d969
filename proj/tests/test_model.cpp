#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>

#include "model.hpp"

using namespace seriesinv;

namespace {

std::string scenario_dir() {
    const char* env = std::getenv("SERIESINV_SCENARIOS");
    return env ? env : "scenarios";
}

const char* kToyConfig = R"(
[system]
name = "toy"
n = 2
labels = ["pos", "vel"]

[parameters]
k = 3.5

[dynamics]
g = ["1", "k*x1"]
F = "-2*x2 - k*x1^2"
)";

} // namespace

TEST_CASE("polynomial parsing") {
    std::map<std::string, double> params{{"k1", 50.0}, {"k3", 10.0}};

    auto p = parse_polynomial("-k1*x1 - k3*x1^2", 2, params);
    CHECK(p.evaluate({1.0, 0.0}) == doctest::Approx(-60.0));
    CHECK(p.evaluate({2.0, 5.0}) == doctest::Approx(-100.0 - 40.0));
    CHECK(p.max_variable() == 1);

    SUBCASE("implicit multiplication and powers") {
        auto q = parse_polynomial("2x1^2x2 + x2", 2, {});
        CHECK(q.evaluate({3.0, 4.0}) == doctest::Approx(2 * 9 * 4 + 4));
    }
    SUBCASE("whitespace is insignificant") {
        auto a = parse_polynomial("  - 50 * x1-10*x1 ^ 2 ", 1, {});
        CHECK(a.evaluate({1.0}) == doctest::Approx(-60.0));
    }
    SUBCASE("parameter powers and products") {
        auto a = parse_polynomial("k1^2*k3*x1", 1, params);
        CHECK(a.evaluate({1.0}) == doctest::Approx(25000.0));
    }
    SUBCASE("constant polynomial") {
        auto a = parse_polynomial("4.25", 3, {});
        CHECK(a.is_constant());
        CHECK(a.constant_value() == doctest::Approx(4.25));
    }
    SUBCASE("errors") {
        CHECK_THROWS_WITH_AS((void)parse_polynomial("x1 + unknown", 1, {}),
                             doctest::Contains("unknown identifier"), ToolkitError);
        CHECK_THROWS_AS((void)parse_polynomial("x1 +", 1, {}), ToolkitError);
        CHECK_THROWS_AS((void)parse_polynomial("", 1, {}), ToolkitError);
        CHECK_THROWS_AS((void)parse_polynomial("x1^-1", 1, {}), ToolkitError);
        CHECK_THROWS_AS((void)parse_polynomial("x3", 2, {}), ToolkitError);
        CHECK_THROWS_AS((void)parse_polynomial("x0", 2, {}), ToolkitError);
    }
}

TEST_CASE("parse_system on a small nonlinear config") {
    auto sys = parse_system(kToyConfig);
    CHECK(sys.n == 2);
    CHECK(sys.name == "toy");
    CHECK(sys.state_label(0) == "pos");
    CHECK(sys.g[1].evaluate({2.0, 0.0}) == doctest::Approx(7.0));
    CHECK(sys.F.evaluate({1.0, 1.0}) == doctest::Approx(-2.0 - 3.5));
    CHECK_FALSE(as_linear(sys).has_value());
}

TEST_CASE("shipped configs parse and classify") {
    auto buck = parse_system_file(scenario_dir() + "/buck.toml");
    CHECK(buck.n == 2);
    auto lf = as_linear(buck);
    REQUIRE(lf.has_value());
    CHECK(lf->g[0] == doctest::Approx(9780.0));
    CHECK(lf->g[1] == doctest::Approx(516.32));
    CHECK(lf->q[0] == doctest::Approx(0.0));
    CHECK(lf->q[1] == doctest::Approx(-0.006));

    auto vdv = parse_system_file(scenario_dir() + "/vanvusse.toml");
    CHECK(vdv.n == 2);
    CHECK_FALSE(as_linear(vdv).has_value());
    // frozen observer form: g1 = -x1, g2 = 500 - x2, F as derived
    CHECK(vdv.g[0].evaluate({2.0, 0.0}) == doctest::Approx(-2.0));
    CHECK(vdv.g[1].evaluate({0.0, 30.0}) == doctest::Approx(470.0));
    CHECK(vdv.F.evaluate({1.0, 1.0}) ==
          doctest::Approx(-5000.0 - 150.0 - 2000.0 - 40.0 - 0.2));
}

TEST_CASE("variable scope enforcement") {
    const char* bad = R"(
[system]
n = 2
[dynamics]
g = ["x2", "0"]
F = "-x1"
)";
    CHECK_THROWS_WITH_AS((void)parse_system(bad), doctest::Contains("g1"), ToolkitError);

    const char* bad_f = R"(
[system]
n = 1
[dynamics]
g = ["1"]
F = "-x2"
)";
    CHECK_THROWS_AS((void)parse_system(bad_f), ToolkitError);
}

TEST_CASE("schema errors") {
    CHECK_THROWS_WITH_AS((void)parse_system("[dynamics]\ng = [\"1\"]\nF = \"0\"\n"),
                         doctest::Contains("[system]"), ToolkitError);
    CHECK_THROWS_AS((void)parse_system("[system]\nn = 0\n[dynamics]\ng = []\nF = \"0\"\n"),
                    ToolkitError);
    CHECK_THROWS_AS(
        (void)parse_system("[system]\nn = 2\n[dynamics]\ng = [\"1\"]\nF = \"0\"\n"),
        ToolkitError); // wrong g count
    CHECK_THROWS_AS((void)parse_system("[system]\nn = 1\n[dynamics]\nF = \"0\"\n"),
                    ToolkitError); // missing g
}

TEST_CASE("as_linear classification") {
    // x1' = x2 + u, x2' = -2 x2: constants g, homogeneous linear F
    LinearForm lf{{1.0, 0.0}, {0.0, -2.0}};
    auto sys = observer_from_linear(lf);
    auto back = as_linear(sys);
    REQUIRE(back.has_value());
    CHECK(back->g == lf.g);
    CHECK(back->q == lf.q);

    // state-dependent g1 is not linear
    auto nonlin = sys;
    nonlin.g[0] = MultiPoly::variable(0, 2);
    CHECK_FALSE(as_linear(nonlin).has_value());

    // affine F (constant term) is not linear either
    auto affine = sys;
    affine.F.add_term({0, 0}, 1.0);
    CHECK_FALSE(as_linear(affine).has_value());
}

TEST_CASE("serialize round-trip") {
    auto sys = parse_system(kToyConfig);
    auto again = parse_system(serialize_system(sys));
    CHECK(again == sys);

    auto vdv = parse_system_file(scenario_dir() + "/vanvusse.toml");
    CHECK(parse_system(serialize_system(vdv)) == vdv);
}
