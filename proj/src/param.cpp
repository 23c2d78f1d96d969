#include "param.hpp"

namespace seriesinv {

StateParameterization eliminate_states(const ObserverForm& sys, const TruncatedSeries& y,
                                       const TruncatedSeries& u, std::size_t trunc) {
    sys.validate();
    if (y.basis != u.basis)
        fail(ErrorCode::BasisMismatch, "eliminate_states: y and u must share a basis");
    if (trunc < std::max(y.order(), u.order()))
        fail(ErrorCode::Dimension, "eliminate_states: trunc below the input series orders");

    const Basis basis = y.basis;
    const TruncatedSeries u_w = u.resized(trunc);
    const TruncatedSeries zero(basis, std::vector<double>(trunc + 1, 0.0));

    StateParameterization out;
    out.states.reserve(sys.n);
    out.states.push_back(y.resized(trunc));

    // args holds x_1..x_i computed so far; later slots stay zero, which the
    // variable-scope invariant makes unreachable.
    std::vector<TruncatedSeries> args(sys.n, zero);
    args[0] = out.states[0];

    for (std::size_t i = 0; i + 1 < sys.n; ++i) {
        TruncatedSeries gi_u = series_mul(poly_on_series(sys.g[i], args, trunc), u_w, trunc);
        TruncatedSeries next = series_linear_comb({{1.0, series_diff(out.states[i])}, {-1.0, gi_u}});
        out.states.push_back(next.resized(trunc));
        args[i + 1] = out.states[i + 1];
    }

    TruncatedSeries gn_u = series_mul(poly_on_series(sys.g[sys.n - 1], args, trunc), u_w, trunc);
    TruncatedSeries f = poly_on_series(sys.F, args, trunc);
    out.residual = series_linear_comb(
        {{1.0, series_diff(out.states[sys.n - 1])}, {-1.0, f}, {-1.0, gn_u}});
    out.residual = out.residual.resized(trunc);
    return out;
}

AffineResidualMap io_residual_probe(const ObserverForm& sys, const Basis& basis, std::size_t N,
                                    std::size_t Nprime) {
    if (!as_linear(sys))
        fail(ErrorCode::NotLinear, "io_residual_probe requires a linear system");

    const std::size_t trunc = working_order(N, Nprime, sys.n);
    const std::size_t rows = trunc + 1;

    auto residual_for = [&](const std::vector<double>& alpha, const std::vector<double>& beta) {
        TruncatedSeries y(basis, alpha);
        TruncatedSeries u(basis, beta);
        return eliminate_states(sys, y, u, trunc).residual.coeffs;
    };

    const std::vector<double> alpha0(N + 1, 0.0), beta0(Nprime + 1, 0.0);
    AffineResidualMap map;
    map.c = residual_for(alpha0, beta0);

    map.Ma = Matrix(rows, N + 1);
    for (std::size_t j = 0; j <= N; ++j) {
        auto alpha = alpha0;
        alpha[j] = 1.0;
        const auto r = residual_for(alpha, beta0);
        for (std::size_t i = 0; i < rows; ++i) map.Ma(i, j) = r[i] - map.c[i];
    }

    map.Mb = Matrix(rows, Nprime + 1);
    for (std::size_t j = 0; j <= Nprime; ++j) {
        auto beta = beta0;
        beta[j] = 1.0;
        const auto r = residual_for(alpha0, beta);
        for (std::size_t i = 0; i < rows; ++i) map.Mb(i, j) = r[i] - map.c[i];
    }

    return map;
}

} // namespace seriesinv
