#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "series.hpp"

using namespace seriesinv;

namespace {

TruncatedSeries ps(std::vector<double> c) { return TruncatedSeries(Basis::power(), std::move(c)); }
TruncatedSeries es(std::vector<double> c, double rate = 1.0) {
    return TruncatedSeries(Basis::exponential(rate), std::move(c));
}

bool coeffs_close(const TruncatedSeries& s, const std::vector<double>& expect, double tol = 1e-12) {
    if (s.coeffs.size() != expect.size()) return false;
    double scale = 1.0;
    for (double v : expect) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < expect.size(); ++i)
        if (std::abs(s.coeffs[i] - expect[i]) > tol * scale) return false;
    return true;
}

TruncatedSeries random_series(std::mt19937& rng, const Basis& basis, std::size_t order) {
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<double> c(order + 1);
    for (auto& v : c) v = dist(rng);
    return TruncatedSeries(basis, std::move(c));
}

} // namespace

TEST_CASE("linear combination") {
    CHECK(coeffs_close(series_linear_comb({{1.0, ps({1, 2})}, {1.0, ps({0, 0})}}), {1, 2}));
    CHECK(coeffs_close(series_linear_comb({{2.0, ps({1, 0, 3})}, {-1.0, ps({0, 1, 1})}}),
                       {2, -1, 5}));
    // 0.006 * d/dt of a cubic: the damping term of a second-order system
    auto ydot = series_diff(ps({0.9, 0.0, 0.6, -0.4}));
    auto scaled = series_linear_comb({{0.006, ydot}});
    CHECK(coeffs_close(scaled, {0.0, 0.0072, -0.0072, 0.0}));

    CHECK_THROWS_AS((void)series_linear_comb({{1.0, ps({1})}, {1.0, es({1})}}), ToolkitError);
}

TEST_CASE("differentiation") {
    CHECK(coeffs_close(series_diff(ps({1, 1, 1, 1})), {1, 2, 3, 0}));
    CHECK(coeffs_close(series_diff(es({1, 1, 1, 1})), {0, -1, -2, -3}));
    CHECK(coeffs_close(series_diff(ps({5})), {0}));
    // rate scales the diagonal
    CHECK(coeffs_close(series_diff(es({1, 1}, 2.5)), {0, -2.5}));
}

TEST_CASE("multiplication") {
    CHECK(coeffs_close(series_mul(ps({1, 1}), ps({1, -1}), 2), {1, 0, -1}));
    CHECK(coeffs_close(series_mul(ps({0, 1}), ps({0, 1}), 1), {0, 0}));
    CHECK(coeffs_close(series_mul(es({1, 1}), es({1, 1}), 2), {1, 2, 1}));
    CHECK_THROWS_AS((void)series_mul(ps({1}), es({1}), 1), ToolkitError);
}

TEST_CASE("evaluation") {
    auto interp = ps({0.9, 0.0, 0.6, -0.4});
    CHECK(series_eval(interp, 1.0) == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(series_eval(interp, 0.0) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(series_eval(es({1, 1}), 0.0) == doctest::Approx(2.0).epsilon(1e-12));
    // exp(-t) + exp(-2t) at t = 1
    CHECK(series_eval(es({0, 1, 1}), 1.0) ==
          doctest::Approx(std::exp(-1.0) + std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("polynomial composition") {
    // p = x^2 applied to t
    MultiPoly sq = MultiPoly::variable(0, 1);
    MultiPoly p;
    p.var_count = 1;
    p.add_term({2}, 1.0);
    CHECK(coeffs_close(poly_on_series(p, {ps({0, 1})}, 2), {0, 0, 1}));

    MultiPoly c = MultiPoly::constant(7.5, 2);
    CHECK(coeffs_close(poly_on_series(c, {ps({0, 1}), ps({1, 1})}, 1), {7.5, 0}));

    // -k1*x1 - k3*x1^2 with k1=50, k3=10 at the constant series 1
    MultiPoly f;
    f.var_count = 1;
    f.add_term({1}, -50.0);
    f.add_term({2}, -10.0);
    CHECK(coeffs_close(poly_on_series(f, {ps({1, 0})}, 3), {-60, 0, 0, 0}));

    MultiPoly cross;
    cross.var_count = 2;
    cross.add_term({1, 1}, 1.0);
    CHECK_THROWS_AS((void)poly_on_series(cross, {ps({1}), es({1})}, 1), ToolkitError);
    CHECK_THROWS_AS((void)poly_on_series(sq, {}, 1), ToolkitError);
}

TEST_CASE("product rule") {
    std::mt19937 rng(12345);
    for (int trial = 0; trial < 50; ++trial) {
        const Basis basis = (trial % 2 == 0) ? Basis::power() : Basis::exponential(1.0);
        auto a = random_series(rng, basis, 3);
        auto b = random_series(rng, basis, 4);
        const std::size_t T = 9;

        auto lhs = series_diff(series_mul(a, b, T));
        auto rhs = series_linear_comb(
            {{1.0, series_mul(series_diff(a), b, T)}, {1.0, series_mul(a, series_diff(b), T)}});

        const std::size_t upto = T - std::max(a.order(), b.order());
        double scale = std::max({1.0, lhs.max_abs_coeff(), rhs.max_abs_coeff()});
        for (std::size_t i = 0; i <= upto; ++i)
            CHECK(std::abs(lhs.coeffs[i] - rhs.coeffs[i]) <= 1e-12 * scale);
    }
}

TEST_CASE("evaluation homomorphism") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> tdist(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Basis basis = (trial % 2 == 0) ? Basis::power() : Basis::exponential(0.7);
        auto a = random_series(rng, basis, 3);
        auto b = random_series(rng, basis, 3);
        auto prod = series_mul(a, b, 6); // order(a) + order(b) <= trunc: exact
        const double t = tdist(rng);
        CHECK(series_eval(prod, t) ==
              doctest::Approx(series_eval(a, t) * series_eval(b, t)).epsilon(1e-9));
    }
}

TEST_CASE("derivative matches central differences") {
    std::mt19937 rng(99);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const Basis basis = (trial % 2 == 0) ? Basis::power() : Basis::exponential(1.0);
        auto s = random_series(rng, basis, 4);
        auto ds = series_diff(s);
        for (double t : {-0.5, 0.0, 0.3, 1.0}) {
            const double fd = (series_eval(s, t + h) - series_eval(s, t - h)) / (2.0 * h);
            CHECK(series_eval(ds, t) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("diff and composition are linear operators") {
    std::mt19937 rng(4242);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_series(rng, Basis::power(), 4);
        auto b = random_series(rng, Basis::power(), 4);
        const double wa = 1.25, wb = -0.75;

        auto combined = series_diff(series_linear_comb({{wa, a}, {wb, b}}));
        auto separate =
            series_linear_comb({{wa, series_diff(a)}, {wb, series_diff(b)}});
        CHECK(coeffs_close(combined, separate.coeffs, 1e-12));

        MultiPoly lin;
        lin.var_count = 1;
        lin.add_term({1}, 3.0);
        auto c1 = poly_on_series(lin, {series_linear_comb({{wa, a}, {wb, b}})}, 4);
        auto c2 = series_linear_comb(
            {{wa, poly_on_series(lin, {a}, 4)}, {wb, poly_on_series(lin, {b}, 4)}});
        CHECK(coeffs_close(c1, c2.coeffs, 1e-12));
    }
}

TEST_CASE("recentering a power series") {
    // 1 + 2t + 3t^2 around t0 = 0.5
    auto s = ps({1, 2, 3});
    auto q = series_recenter(s, 0.5);
    // value/derivative checks: q_0 = s(0.5), q_1 = s'(0.5), q_2 = s''(0.5)/2
    CHECK(q.coeffs[0] == doctest::Approx(series_eval(s, 0.5)).epsilon(1e-12));
    CHECK(q.coeffs[1] == doctest::Approx(series_eval(series_diff(s), 0.5)).epsilon(1e-12));
    CHECK(q.coeffs[2] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)series_recenter(es({1, 1}), 0.5), ToolkitError);
}

TEST_CASE("multipoly basics") {
    MultiPoly p;
    p.var_count = 2;
    p.add_term({1, 0}, 2.0);
    p.add_term({1, 0}, -2.0); // cancels out
    p.add_term({0, 2}, 1.5);
    CHECK(p.terms.size() == 1);
    CHECK(p.evaluate({3.0, 2.0}) == doctest::Approx(6.0));
    CHECK(p.max_variable() == 2);
    CHECK_FALSE(p.is_constant());
    CHECK_FALSE(p.is_homogeneous_linear());

    MultiPoly lin;
    lin.var_count = 2;
    lin.add_term({1, 0}, 4.0);
    lin.add_term({0, 1}, -1.0);
    CHECK(lin.is_homogeneous_linear());
    CHECK(lin.linear_coeff(0) == 4.0);
    CHECK(lin.linear_coeff(1) == -1.0);
}
