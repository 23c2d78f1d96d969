#include "traj.hpp"

#include <algorithm>
#include <cmath>

#include "linalg.hpp"

namespace seriesinv {

namespace {

constexpr double kPivotTol = 1e-10;

/// Row of d-th derivatives of the basis functions at time t.
std::vector<double> derivative_row(const Basis& basis, std::size_t N, unsigned d, double t) {
    std::vector<double> row(N + 1, 0.0);
    if (basis.kind == Basis::Kind::Power) {
        for (std::size_t j = d; j <= N; ++j) {
            double f = 1.0;
            for (unsigned k = 0; k < d; ++k) f *= static_cast<double>(j - k);
            row[j] = f * std::pow(t, static_cast<double>(j - d));
        }
    } else {
        for (std::size_t j = 0; j <= N; ++j) {
            const double lambda = -static_cast<double>(j) * basis.rate;
            row[j] = std::pow(lambda, static_cast<double>(d)) * std::exp(lambda * t);
        }
    }
    return row;
}

} // namespace

InterpolationResult interpolate(const BoundarySpec& spec, const Basis& basis, std::size_t N) {
    const std::size_t m = spec.conditions.size();
    if (m > N + 1)
        fail(ErrorCode::RankDeficient, "more boundary conditions (" + std::to_string(m) +
                                           ") than series coefficients (" + std::to_string(N + 1) +
                                           ")");
    for (const auto& c : spec.conditions) {
        const double lo = std::min(spec.t0, spec.tf), hi = std::max(spec.t0, spec.tf);
        if (c.time < lo || c.time > hi)
            fail(ErrorCode::Dimension, "boundary condition time lies outside the horizon");
    }

    Matrix A(m, N + 1);
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = derivative_row(basis, N, spec.conditions[i].derivative,
                                        spec.conditions[i].time);
        for (std::size_t j = 0; j <= N; ++j) A(i, j) = row[j];
        rhs[i] = spec.conditions[i].value;
    }

    InterpolationResult out;
    out.alpha.assign(N + 1, 0.0);
    out.is_free.assign(N + 1, false);

    if (m == N + 1) {
        Matrix b(m, 1);
        for (std::size_t i = 0; i < m; ++i) b(i, 0) = rhs[i];
        LuFailure failure{};
        auto solved = lu_solve(A, b, kPivotTol, &failure);
        if (!solved)
            fail(ErrorCode::RankDeficient,
                 "boundary conditions are linearly dependent (rank " +
                     std::to_string(failure.rank) + " of " + std::to_string(m) + ")");
        for (std::size_t j = 0; j <= N; ++j) out.alpha[j] = solved->x(j, 0);
        return out;
    }

    // Underdetermined: column-pivoted elimination; columns that never pivot
    // stay free (value 0).
    Matrix work = A;
    std::vector<double> r = rhs;
    std::vector<std::size_t> pivot_col_of_row(m);
    std::vector<bool> col_used(N + 1, false);
    const double scale = std::max(work.max_abs(), 1e-300);
    std::size_t row = 0;
    for (std::size_t col = 0; col <= N && row < m; ++col) {
        std::size_t best = row;
        for (std::size_t rr = row + 1; rr < m; ++rr)
            if (std::abs(work(rr, col)) > std::abs(work(best, col))) best = rr;
        if (std::abs(work(best, col)) <= kPivotTol * scale) continue;
        if (best != row) {
            for (std::size_t c = 0; c <= N; ++c) std::swap(work(row, c), work(best, c));
            std::swap(r[row], r[best]);
        }
        for (std::size_t rr = row + 1; rr < m; ++rr) {
            const double f = work(rr, col) / work(row, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c <= N; ++c) work(rr, c) -= f * work(row, c);
            r[rr] -= f * r[row];
        }
        pivot_col_of_row[row] = col;
        col_used[col] = true;
        ++row;
    }
    if (row < m)
        fail(ErrorCode::RankDeficient,
             "boundary conditions are linearly dependent (rank " + std::to_string(row) + " of " +
                 std::to_string(m) + ")");

    for (std::size_t j = 0; j <= N; ++j) out.is_free[j] = !col_used[j];
    for (std::size_t i = m; i-- > 0;) {
        const std::size_t col = pivot_col_of_row[i];
        double v = r[i];
        for (std::size_t c = col + 1; c <= N; ++c) v -= work(i, c) * out.alpha[c];
        out.alpha[col] = v / work(i, col);
    }
    return out;
}

std::vector<double> dynamics_rhs(const ObserverForm& sys, const std::vector<double>& x, double u) {
    std::vector<double> dx(sys.n, 0.0);
    for (std::size_t i = 0; i + 1 < sys.n; ++i) dx[i] = x[i + 1] + sys.g[i].evaluate(x) * u;
    dx[sys.n - 1] = sys.F.evaluate(x) + sys.g[sys.n - 1].evaluate(x) * u;
    return dx;
}

namespace {

/// Newton on {xdot = 0, x1 = y_ss} over unknowns (x2..xn, u).
std::optional<std::vector<double>> newton_equilibrium(const ObserverForm& sys, double y_ss,
                                                      std::vector<double> unknowns, double tol,
                                                      int max_iter) {
    const std::size_t n = sys.n;
    const std::size_t m = n; // equations: xdot_i = 0

    auto residual = [&](const std::vector<double>& v) {
        std::vector<double> x(n);
        x[0] = y_ss;
        for (std::size_t i = 1; i < n; ++i) x[i] = v[i - 1];
        return dynamics_rhs(sys, x, v[n - 1]);
    };

    auto norm_inf = [](const std::vector<double>& v) {
        double m0 = 0.0;
        for (double e : v) m0 = std::max(m0, std::abs(e));
        return m0;
    };

    std::vector<double> res = residual(unknowns);
    for (int iter = 0; iter < max_iter; ++iter) {
        if (norm_inf(res) <= tol) return unknowns;

        Matrix J(m, m);
        for (std::size_t j = 0; j < m; ++j) {
            const double h = 1e-7 * (1.0 + std::abs(unknowns[j]));
            auto probe = unknowns;
            probe[j] += h;
            const auto rp = residual(probe);
            for (std::size_t i = 0; i < m; ++i) J(i, j) = (rp[i] - res[i]) / h;
        }
        Matrix b(m, 1);
        for (std::size_t i = 0; i < m; ++i) b(i, 0) = -res[i];
        auto step = lu_solve(J, b, 1e-14);
        if (!step) return std::nullopt;

        double damping = 1.0;
        const double base = norm_inf(res);
        std::vector<double> next;
        std::vector<double> next_res;
        for (int halving = 0; halving < 40; ++halving) {
            next = unknowns;
            for (std::size_t i = 0; i < m; ++i) next[i] += damping * step->x(i, 0);
            next_res = residual(next);
            if (norm_inf(next_res) < base || base <= tol) break;
            damping *= 0.5;
        }
        unknowns = next;
        res = next_res;
    }
    return norm_inf(res) <= tol ? std::optional<std::vector<double>>(unknowns) : std::nullopt;
}

} // namespace

SteadyState steady_state(const ObserverForm& sys, double y_ss, const SteadyStateOptions& options) {
    sys.validate();
    const std::size_t n = sys.n;

    // Gauge the residual scale so the convergence tolerance tracks the
    // magnitude of the dynamics coefficients.
    double scale = 1.0;
    {
        std::vector<double> x(n, std::abs(y_ss) + 1.0);
        scale = std::max(scale, std::abs(sys.F.evaluate(x)));
        for (const auto& gi : sys.g) scale = std::max(scale, std::abs(gi.evaluate(x)));
    }
    const double tol = options.tol * scale;

    std::vector<double> seed(n, 0.0);
    if (options.x_seed) {
        if (options.x_seed->size() != n)
            fail(ErrorCode::Dimension, "steady-state seed must have n entries");
        for (std::size_t i = 1; i < n; ++i) seed[i - 1] = (*options.x_seed)[i];
    } else if (options.u_seed != 0.0) {
        // A nonzero input seed selects an equilibrium branch; propagate it
        // through the chain equations x_{i+1} = -g_i(x) u so the state seed
        // lands near that branch.
        std::vector<double> x(n, 0.0);
        x[0] = y_ss;
        for (std::size_t i = 0; i + 1 < n; ++i) x[i + 1] = -sys.g[i].evaluate(x) * options.u_seed;
        for (std::size_t i = 1; i < n; ++i) seed[i - 1] = x[i];
    } else {
        for (std::size_t i = 0; i + 1 < n; ++i) seed[i] = y_ss;
    }
    seed[n - 1] = options.u_seed;

    auto primary = newton_equilibrium(sys, y_ss, seed, tol, options.max_iter);
    if (!primary)
        fail(ErrorCode::NoConvergence,
             "steady-state Newton iteration did not converge for y_ss = " + std::to_string(y_ss));

    SteadyState out;
    out.x.assign(n, 0.0);
    out.x[0] = y_ss;
    for (std::size_t i = 1; i < n; ++i) out.x[i] = (*primary)[i - 1];
    out.u = (*primary)[n - 1];

    // Coarse scan for additional equilibria; a second distinct root is
    // reported, not an error. Seeds satisfy the chain equations
    // x_{i+1} = -g_i(x) u0 exactly, leaving Newton only the last equation.
    const double grid[] = {-1000.0, -100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0, 1000.0};
    for (double u0 : grid) {
        std::vector<double> x(n, 0.0);
        x[0] = y_ss;
        for (std::size_t i = 0; i + 1 < n; ++i) x[i + 1] = -sys.g[i].evaluate(x) * u0;
        std::vector<double> alt_seed(n);
        for (std::size_t i = 1; i < n; ++i) alt_seed[i - 1] = x[i];
        alt_seed[n - 1] = u0;
        auto alt = newton_equilibrium(sys, y_ss, alt_seed, tol, options.max_iter);
        if (!alt) continue;
        const double du = std::abs((*alt)[n - 1] - out.u);
        if (du > 1e-6 * (1.0 + std::abs(out.u))) {
            out.multiple_roots = true;
            break;
        }
    }
    return out;
}

} // namespace seriesinv
