#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "model.hpp"
#include "param.hpp"

using namespace seriesinv;

namespace {

std::string scenario_dir() {
    const char* env = std::getenv("SERIESINV_SCENARIOS");
    return env ? env : "scenarios";
}

ObserverForm uncontrollable() {
    return observer_from_linear(LinearForm{{1.0, 0.0}, {0.0, -2.0}});
}

/// k_y, k_u of the input-output equation of a linear observer form,
/// assembled directly from the recursion x_{i+1} = x_i' - g_i u:
/// residual = y^(n) - sum_j g_j u^(n-j) - sum_i q_i x_i - g_n u.
struct IoCoefficients {
    std::vector<double> ky; // multiplies y^(i), i = 0..n
    std::vector<double> ku; // multiplies u^(i), i = 0..n-1
};

IoCoefficients io_coefficients(const LinearForm& lf) {
    const std::size_t n = lf.g.size();
    IoCoefficients k;
    k.ky.assign(n + 1, 0.0);
    k.ku.assign(n, 0.0);
    k.ky[n] = 1.0;
    for (std::size_t j = 1; j <= n - 1; ++j) k.ku[n - j] += lf.g[j - 1];
    k.ku[0] += lf.g[n - 1];
    // x_i = y^(i-1) - sum_{j=1}^{i-1} g_j u^(i-1-j); the -q_i x_i term then
    // contributes +q_i g_j u^(i-1-j) to the residual, i.e. -q_i g_j to ku.
    for (std::size_t i = 1; i <= n; ++i) {
        k.ky[i - 1] -= lf.q[i - 1];
        for (std::size_t j = 1; j <= i - 1; ++j) k.ku[i - 1 - j] -= lf.q[i - 1] * lf.g[j - 1];
    }
    return k;
}

double eval_io(const IoCoefficients& k, const TruncatedSeries& y, const TruncatedSeries& u,
               double t) {
    double acc = 0.0;
    TruncatedSeries dy = y;
    for (std::size_t i = 0; i < k.ky.size(); ++i) {
        acc += k.ky[i] * series_eval(dy, t);
        dy = series_diff(dy);
    }
    TruncatedSeries du = u;
    for (std::size_t i = 0; i < k.ku.size(); ++i) {
        acc -= k.ku[i] * series_eval(du, t);
        du = series_diff(du);
    }
    return acc;
}

} // namespace

TEST_CASE("elimination on the uncontrollable system with u = 0") {
    auto sys = uncontrollable();
    TruncatedSeries y(Basis::power(), {0.5, -1.0, 2.0, 0.25});
    TruncatedSeries u(Basis::power(), {0.0});

    auto par = eliminate_states(sys, y, u, 5);
    REQUIRE(par.states.size() == 2);
    // x1 = y, x2 = y'
    for (std::size_t i = 0; i <= 3; ++i)
        CHECK(par.states[0].coeffs[i] == doctest::Approx(y.coeffs[i]));
    auto dy = series_diff(y.resized(5));
    for (std::size_t i = 0; i <= 5; ++i)
        CHECK(par.states[1].coeffs[i] == doctest::Approx(dy.coeffs[i]));
    // residual = y'' + 2 y'
    auto expect = series_linear_comb({{1.0, series_diff(dy)}, {2.0, dy}});
    for (std::size_t i = 0; i <= 5; ++i)
        CHECK(par.residual.coeffs[i] == doctest::Approx(expect.coeffs[i]).epsilon(1e-12));
}

TEST_CASE("Van de Vusse state elimination identity") {
    auto sys = parse_system_file(scenario_dir() + "/vanvusse.toml");
    TruncatedSeries y(Basis::power(), {0.9, 0.0, 0.6, -0.4});
    TruncatedSeries u(Basis::power(), {19.6, -3.0, 1.5, 0.2});

    const std::size_t trunc = 8;
    auto par = eliminate_states(sys, y, u, trunc);
    // x2 = y' + y*u  (equivalently: reactant = (x2 + 100*y)/50 = y'/50 + 2y + y*u/50)
    auto expect = series_linear_comb(
        {{1.0, series_diff(y.resized(trunc))}, {1.0, series_mul(y, u, trunc)}});
    for (std::size_t i = 0; i <= trunc; ++i)
        CHECK(par.states[1].coeffs[i] == doctest::Approx(expect.coeffs[i]).epsilon(1e-12));
}

TEST_CASE("origin equilibrium gives identically zero states and residual") {
    auto sys = parse_system_file(scenario_dir() + "/vanvusse.toml");
    TruncatedSeries zero(Basis::power(), {0.0, 0.0, 0.0});
    auto par = eliminate_states(sys, zero, zero, 6);
    for (const auto& s : par.states)
        CHECK(s.max_abs_coeff() == 0.0);
    CHECK(par.residual.max_abs_coeff() == 0.0);
}

TEST_CASE("elimination rejects mixed bases") {
    auto sys = uncontrollable();
    TruncatedSeries y(Basis::power(), {1.0});
    TruncatedSeries u(Basis::exponential(), {1.0});
    CHECK_THROWS_AS((void)eliminate_states(sys, y, u, 3), ToolkitError);
}

TEST_CASE("residual probe rows for the buck converter") {
    auto sys = parse_system_file(scenario_dir() + "/buck.toml");
    auto map = io_residual_probe(sys, Basis::power(), 3, 3);

    // residual = y'' + 0.006 y' - 575 u - 9780 u'; row of t^2:
    //   0.018 a3 - 575 b2 - 29340 b3
    CHECK(map.Ma(2, 3) == doctest::Approx(0.018).epsilon(1e-12));
    CHECK(map.Mb(2, 2) == doctest::Approx(-575.0).epsilon(1e-12));
    CHECK(map.Mb(2, 3) == doctest::Approx(-29340.0).epsilon(1e-12));
    // implied solution with b3 = 0: b2 = 0.018/575 * a3
    CHECK(-map.Ma(2, 3) / map.Mb(2, 2) == doctest::Approx(0.018 / 575.0).epsilon(1e-12));

    // zero probe: homogeneous system, offset vanishes
    for (double c : map.c) CHECK(c == 0.0);

    // rows beyond the reachable degree are identically zero
    for (std::size_t j = 0; j <= 3; ++j) {
        CHECK(map.Ma(5, j) == 0.0);
        CHECK(map.Mb(5, j) == 0.0);
    }
}

TEST_CASE("residual probe on the exponential basis is diagonal") {
    auto sys = uncontrollable();
    auto map = io_residual_probe(sys, Basis::exponential(1.0), 3, 3);
    // residual = y'' + 2y' - u' - 2u; on exp(-i t): (i^2 - 2i) a_i + (i - 2) b_i
    for (std::size_t i = 0; i <= 3; ++i) {
        const double di = static_cast<double>(i);
        CHECK(map.Ma(i, i) == doctest::Approx(di * di - 2.0 * di).epsilon(1e-12));
        CHECK(map.Mb(i, i) == doctest::Approx(di - 2.0).epsilon(1e-12));
        for (std::size_t j = 0; j <= 3; ++j) {
            if (j == i) continue;
            CHECK(map.Ma(i, j) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
            CHECK(map.Mb(i, j) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("probe rejects nonlinear systems") {
    auto sys = parse_system_file(scenario_dir() + "/vanvusse.toml");
    CHECK_THROWS_AS((void)io_residual_probe(sys, Basis::power(), 3, 3), ToolkitError);
}

TEST_CASE("affine map reproduces the elimination residual") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);

    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 1 + trial % 3;
        LinearForm lf;
        for (std::size_t i = 0; i < n; ++i) {
            lf.g.push_back(dist(rng));
            lf.q.push_back(dist(rng));
        }
        auto sys = observer_from_linear(lf);
        const Basis basis = (trial % 2 == 0) ? Basis::power() : Basis::exponential(1.0);
        auto map = io_residual_probe(sys, basis, 3, 3);

        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> alpha(4), beta(4);
            for (auto& v : alpha) v = dist(rng);
            for (auto& v : beta) v = dist(rng);

            auto par = eliminate_states(sys, TruncatedSeries(basis, alpha),
                                        TruncatedSeries(basis, beta), working_order(3, 3, n));
            double scale = std::max(1.0, par.residual.max_abs_coeff());
            for (std::size_t r = 0; r < map.c.size(); ++r) {
                double predicted = map.c[r];
                for (std::size_t j = 0; j <= 3; ++j)
                    predicted += map.Ma(r, j) * alpha[j] + map.Mb(r, j) * beta[j];
                CHECK(std::abs(predicted - par.residual.coeffs[r]) <= 1e-9 * scale);
            }
        }
    }
}

TEST_CASE("residual agrees with the direct input-output evaluation") {
    std::mt19937 rng(555);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    std::uniform_real_distribution<double> tdist(-0.8, 0.8);

    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 1 + trial % 3;
        LinearForm lf;
        for (std::size_t i = 0; i < n; ++i) {
            lf.g.push_back(dist(rng));
            lf.q.push_back(dist(rng));
        }
        auto sys = observer_from_linear(lf);
        const auto k = io_coefficients(lf);

        std::vector<double> alpha(4), beta(4);
        for (auto& v : alpha) v = dist(rng);
        for (auto& v : beta) v = dist(rng);
        TruncatedSeries y(Basis::power(), alpha), u(Basis::power(), beta);

        auto par = eliminate_states(sys, y, u, working_order(3, 3, n));
        for (int p = 0; p < 20; ++p) {
            const double t = tdist(rng);
            const double direct = eval_io(k, y, u, t);
            const double via_series = series_eval(par.residual, t);
            CHECK(via_series == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("probe is deterministic") {
    auto sys = parse_system_file(scenario_dir() + "/buck.toml");
    auto a = io_residual_probe(sys, Basis::power(), 3, 3);
    auto b = io_residual_probe(sys, Basis::power(), 3, 3);
    for (std::size_t r = 0; r < a.c.size(); ++r) {
        CHECK(a.c[r] == b.c[r]);
        for (std::size_t j = 0; j <= 3; ++j) {
            CHECK(a.Ma(r, j) == b.Ma(r, j));
            CHECK(a.Mb(r, j) == b.Mb(r, j));
        }
    }
}

TEST_CASE("re-embedded linear form gives the same residual") {
    auto sys = parse_system_file(scenario_dir() + "/buck.toml");
    auto lf = as_linear(sys);
    REQUIRE(lf.has_value());
    auto re = observer_from_linear(*lf);

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> alpha(4), beta(4);
    for (auto& v : alpha) v = dist(rng);
    for (auto& v : beta) v = dist(rng);
    TruncatedSeries y(Basis::power(), alpha), u(Basis::power(), beta);

    auto a = eliminate_states(sys, y, u, 5).residual;
    auto b = eliminate_states(re, y, u, 5).residual;
    const double scale = std::max(1.0, a.max_abs_coeff());
    for (std::size_t i = 0; i <= 5; ++i)
        CHECK(std::abs(a.coeffs[i] - b.coeffs[i]) <= 1e-12 * scale);
}
