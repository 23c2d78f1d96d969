#pragma once

#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "model.hpp"
#include "param.hpp"

namespace seriesinv {

enum class CoefficientRole { Free, SolvedFromResidual, SolvedFromIC };

/// Explicit designation of which coefficients are solved for; the default
/// (no spec) is automatic selection: all beta, then alpha indices ascending
/// until the coefficient-matching system is square, swapping alpha choices
/// when a square selection turns out singular.
struct RoleSpec {
    std::vector<std::size_t> alpha_unknowns;
    std::vector<std::size_t> beta_unknowns;
};

/// Exact inverse model of a linear system. Every coefficient of the output,
/// input and state series is an affine function of the parameter vector
///   p = [alpha_free..., x0_1..x0_n, 1]        (x0 block present when an
/// initial condition was supplied). Rows are stored in that layout.
class InverseModel {
public:
    Basis basis;
    std::size_t N = 0;
    std::size_t Nprime = 0;
    std::size_t n = 0;
    std::optional<InitialCondition> ic;

    std::vector<std::size_t> free_alpha; // ascending indices of free alpha coefficients
    Matrix alpha_rows;                   // (N+1) x param_count()
    Matrix beta_rows;                    // (Nprime+1) x param_count()
    std::vector<Matrix> state_rows;      // n matrices, (working order + 1) x param_count()

    std::vector<CoefficientRole> alpha_roles; // length N+1
    std::vector<CoefficientRole> beta_roles;  // length Nprime+1

    std::size_t param_count() const { return free_alpha.size() + (ic ? n : 0) + 1; }
    std::string param_name(std::size_t j) const;

    /// Row applied to a concrete parameter vector.
    double apply_row(const Matrix& rows, std::size_t i, const std::vector<double>& params) const;
    std::vector<double> param_vector(const std::vector<double>& free_values) const;
};

struct Instantiation {
    std::vector<TruncatedSeries> states;
    TruncatedSeries u;
    TruncatedSeries y; // alias of states.front() at series order N
    std::vector<double> alpha;
    std::vector<double> beta;
};

/// Solves the stacked system {residual coefficients = 0} + {x_i(t0) = x0_i}
/// for the designated unknowns by dense LU with partial pivoting, keeping the
/// free alpha values and the initial-condition entries symbolic.
///
/// Without an initial condition only the residual equations are used and all
/// alpha stay free (the pure coefficient-matching stage).
InverseModel solve_linear_inverse(const ObserverForm& sys, const Basis& basis, std::size_t N,
                                  std::size_t Nprime,
                                  const std::optional<InitialCondition>& ic,
                                  const std::optional<RoleSpec>& roles = std::nullopt);

Instantiation instantiate(const InverseModel& model, const std::vector<double>& free_alpha);

/// psi_k(t) for k = 0..order.
std::vector<double> basis_values(const Basis& basis, std::size_t order, double t);

} // namespace seriesinv
