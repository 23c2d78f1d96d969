#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "seriesinv.h"

namespace {

std::string scenario_path(const char* name) {
    const char* env = std::getenv("SERIESINV_SCENARIOS");
    return std::string(env ? env : "scenarios") + "/" + name;
}

struct System {
    si_system* ptr = nullptr;
    ~System() { si_system_free(ptr); }
};

} // namespace

TEST_CASE("version and error text") {
    CHECK(std::string(si_version()).find("seriesinv") != std::string::npos);
    CHECK(si_system_parse(nullptr, nullptr) == SI_ERR_USAGE);
    CHECK(std::string(si_last_error()).size() > 0);
}

TEST_CASE("system lifecycle and classification") {
    System sys;
    REQUIRE(si_system_parse_file(scenario_path("buck.toml").c_str(), &sys.ptr) == SI_OK);

    size_t n = 0;
    CHECK(si_system_order(sys.ptr, &n) == SI_OK);
    CHECK(n == 2);

    char name[32];
    CHECK(si_system_name(sys.ptr, name, sizeof name) == SI_OK);
    CHECK(std::string(name) == "buck");

    int linear = 0;
    CHECK(si_system_is_linear(sys.ptr, &linear) == SI_OK);
    CHECK(linear == 1);

    double g[2], q[2];
    CHECK(si_system_linear_coeffs(sys.ptr, g, q) == SI_OK);
    CHECK(g[0] == doctest::Approx(9780.0));
    CHECK(q[1] == doctest::Approx(-0.006));
}

TEST_CASE("error statuses surface through the C interface") {
    si_system* out = nullptr;
    CHECK(si_system_parse("[system]\nn = 2\n[dynamics]\ng = [\"x2\", \"0\"]\nF = \"0\"\n",
                          &out) == SI_ERR_SCOPE);
    CHECK(si_system_parse("[system]\nn = 1\n", &out) == SI_ERR_SCHEMA);
    CHECK(si_system_parse("[system\nn = 1\n", &out) == SI_ERR_PARSE);
    CHECK(si_system_parse_file("/does/not/exist.toml", &out) == SI_ERR_IO);

    System vdv;
    REQUIRE(si_system_parse_file(scenario_path("vanvusse.toml").c_str(), &vdv.ptr) == SI_OK);
    double g[2], q[2];
    CHECK(si_system_linear_coeffs(vdv.ptr, g, q) == SI_ERR_NOT_LINEAR);

    System unc;
    REQUIRE(si_system_parse_file(scenario_path("uncontrollable.toml").c_str(), &unc.ptr) == SI_OK);
    const double x0[2] = {1.0, 0.5};
    si_inverse* model = nullptr;
    CHECK(si_linear_invert(unc.ptr, SI_BASIS_POWER, 1.0, 3, 3, x0, 0.0, &model) ==
          SI_ERR_RANK_DEFICIENT);
    CHECK(std::string(si_last_error()).find("rank") != std::string::npos);
}

TEST_CASE("linear inversion through the shared library") {
    System sys;
    REQUIRE(si_system_parse_file(scenario_path("buck.toml").c_str(), &sys.ptr) == SI_OK);

    si_inverse* model = nullptr;
    REQUIRE(si_linear_invert(sys.ptr, SI_BASIS_POWER, 1.0, 3, 3, nullptr, 0.0, &model) == SI_OK);

    size_t free_count = 0, params = 0;
    CHECK(si_inverse_counts(model, &free_count, &params) == SI_OK);
    CHECK(free_count == 4);
    CHECK(params == 5);

    std::vector<double> row(params);
    CHECK(si_inverse_beta_row(model, 0, row.data()) == SI_OK);
    CHECK(row[1] == doctest::Approx(1.0434782608695652e-5).epsilon(1e-9));
    CHECK(row[2] == doctest::Approx(3.123296786389414e-3).epsilon(1e-9));
    CHECK(row[3] == doctest::Approx(-0.15936961341333114).epsilon(1e-9));

    char pname[16];
    CHECK(si_inverse_param_name(model, 1, pname, sizeof pname) == SI_OK);
    CHECK(std::string(pname) == "a1");

    std::vector<int> alpha_roles(4), beta_roles(4);
    CHECK(si_inverse_roles(model, alpha_roles.data(), beta_roles.data()) == SI_OK);
    CHECK(beta_roles[0] == SI_ROLE_RESIDUAL);
    CHECK(alpha_roles[0] == SI_ROLE_FREE);

    double alpha[4], beta[4];
    const double free_alpha[4] = {0.0, 1.0, 0.0, 0.0}; // a1 = 1
    CHECK(si_inverse_instantiate(model, free_alpha, 4, alpha, beta) == SI_OK);
    CHECK(beta[0] == doctest::Approx(1.0434782608695652e-5).epsilon(1e-9));

    double x_at0[2];
    CHECK(si_inverse_states_at(model, free_alpha, 4, 0.0, x_at0) == SI_OK);
    CHECK(x_at0[0] == doctest::Approx(alpha[0]).epsilon(1e-12)); // x1 = y
    si_inverse_free(model);
}

TEST_CASE("interpolation, steady state, nonlinear inversion and simulation") {
    System sys;
    REQUIRE(si_system_parse_file(scenario_path("vanvusse.toml").c_str(), &sys.ptr) == SI_OK);

    const si_boundary_condition conds[4] = {
        {0.0, 0, 0.9}, {0.0, 1, 0.0}, {1.0, 0, 1.1}, {1.0, 1, 0.0}};
    double alpha[4];
    REQUIRE(si_interpolate(SI_BASIS_POWER, 1.0, 3, 0.0, 1.0, conds, 4, alpha, nullptr) == SI_OK);
    CHECK(alpha[2] == doctest::Approx(0.6).epsilon(1e-10));
    CHECK(alpha[3] == doctest::Approx(-0.4).epsilon(1e-10));

    double x0[2], u_ss = 0.0;
    int multiple = 0;
    REQUIRE(si_steady_state(sys.ptr, 0.9, nullptr, 0.0, x0, &u_ss, &multiple) == SI_OK);
    CHECK(x0[0] == doctest::Approx(0.9));
    CHECK(u_ss == doctest::Approx(19.6301).epsilon(1e-3));
    CHECK(multiple == 1);

    si_nl_config cfg;
    si_nl_config_default(&cfg, 3);
    si_nlinverse* inv = nullptr;
    REQUIRE(si_nonlinear_invert(sys.ptr, alpha, 4, x0, 2, 0.0, &cfg, &inv) == SI_OK);

    double beta[4];
    CHECK(si_nlinverse_beta(inv, beta, 4) == SI_OK);
    CHECK(beta[0] == doctest::Approx(u_ss).epsilon(1e-6));

    size_t used = 0;
    double matched = 0.0, tail = 0.0, scale = 1.0;
    int fallback = 0;
    CHECK(si_nlinverse_info(inv, &used, &matched, &tail, &scale, &fallback) == SI_OK);
    CHECK(used == 3);
    CHECK(matched <= 1e-10); // relative measure
    CHECK(fallback == 0);

    size_t rows = 0, cols = 0;
    CHECK(si_nlinverse_degree_table(inv, nullptr, &rows, &cols) == SI_OK);
    CHECK(rows == 3);
    CHECK(cols == 4);
    std::vector<int> table(rows * cols);
    CHECK(si_nlinverse_degree_table(inv, table.data(), &rows, &cols) == SI_OK);
    CHECK(table[0 * cols + 1] == 1); // staircase entry

    double alpha_out[4];
    CHECK(si_nlinverse_alpha(inv, alpha_out, 4) == SI_OK);

    si_sim* sim = nullptr;
    REQUIRE(si_simulate(sys.ptr, SI_BASIS_POWER, 1.0, beta, 4, alpha_out, 4, x0, 2, 0.0, 0.02,
                        1e-4, SI_METHOD_EULER, &sim) == SI_OK);
    size_t samples = 0;
    CHECK(si_sim_length(sim, &samples) == SI_OK);
    CHECK(samples == 201);

    double E = 0.0, max_err = 0.0;
    CHECK(si_sim_error(sim, SI_QUAD_TRAPEZOID, &E, &max_err) == SI_OK);
    CHECK(E > 0.0);
    CHECK(E <= 0.02 * max_err + 1e-12);

    double t, yr, ys, xs[2], u;
    CHECK(si_sim_sample(sim, 0, &t, &yr, &ys, xs, &u) == SI_OK);
    CHECK(t == 0.0);
    CHECK(yr == doctest::Approx(0.9));
    CHECK(ys == doctest::Approx(0.9));
    CHECK(u == doctest::Approx(beta[0]));

    const char* csv = "capi_trace.csv";
    CHECK(si_sim_write_csv(sim, csv, 6) == SI_OK);
    std::remove(csv);

    si_nlinverse_free(inv);
    si_sim_free(sim);

    // singular initial condition: y(0) = 0 makes the input pin impossible
    double alpha_bad[4] = {0.0, 0.5, 0.1, 0.0};
    double x0_bad[2] = {0.0, 1.0};
    si_nlinverse* bad = nullptr;
    CHECK(si_nonlinear_invert(sys.ptr, alpha_bad, 4, x0_bad, 2, 0.0, &cfg, &bad) ==
          SI_ERR_SINGULAR_IC);
}
