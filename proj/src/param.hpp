#pragma once

#include "linalg.hpp"
#include "model.hpp"
#include "series.hpp"

namespace seriesinv {

/// States x_1..x_n expressed as series in the output/input series, plus the
/// defect of the last canonical equation. The residual is identically zero
/// exactly when (y, u) satisfy the system up to the truncation order.
struct StateParameterization {
    std::vector<TruncatedSeries> states;
    TruncatedSeries residual;
};

/// Working truncation order used throughout: n differentiations can move
/// coefficient information, so keep head-room above the series orders.
inline std::size_t working_order(std::size_t N, std::size_t Nprime, std::size_t n) {
    return std::max(N, Nprime) + n;
}

/// Successive elimination:
///   x_1 = y
///   x_{i+1} = d/dt x_i - g_i(x_1..x_i) * u
///   residual = d/dt x_n - F(x) - g_n(x) * u
StateParameterization eliminate_states(const ObserverForm& sys, const TruncatedSeries& y,
                                       const TruncatedSeries& u, std::size_t trunc);

/// residual-coefficients = Ma * alpha + Mb * beta + c, valid for linear
/// systems (row count = working order + 1).
struct AffineResidualMap {
    Matrix Ma; // rows x (N+1)
    Matrix Mb; // rows x (Nprime+1)
    std::vector<double> c;
};

/// Builds the affine map by probing eliminate_states with unit coefficient
/// vectors. Throws NotLinear for systems where probing would be invalid.
AffineResidualMap io_residual_probe(const ObserverForm& sys, const Basis& basis, std::size_t N,
                                    std::size_t Nprime);

} // namespace seriesinv
