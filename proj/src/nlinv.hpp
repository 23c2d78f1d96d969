#pragma once

#include <map>
#include <vector>

#include "model.hpp"
#include "param.hpp"
#include "series.hpp"

namespace seriesinv {

struct NonlinearSolveConfig {
    std::size_t Nprime = 3;
    int max_newton_iter = 50;
    double newton_tol = 1e-12; // scaled by the residual magnitude
    double pivot_tol = 1e-10;  // scaled; below this an unknown does not "appear"
};

/// Numeric inverse model for a polynomial-nonlinear system: the input-output
/// residual has its leading Taylor coefficients at t0 eliminated.
struct NonlinearInverse {
    std::vector<double> alpha;
    std::vector<double> beta;
    double t0 = 0.0;

    /// degree_table[r][k] = polynomial degree of beta_k in the r-th consumed
    /// residual equation, probed at the final coefficient values.
    std::vector<std::vector<int>> degree_table;
    std::vector<std::size_t> equations_used; // residual coefficient indices consumed
    std::vector<double> equation_scales;     // operand magnitude per consumed equation

    double residual_scale = 1.0;   // overall residual magnitude before solving
    double matched_residual = 0.0; // max over consumed equations of |r_i| / operand scale
    double residual_tail = 0.0;    // max |r_i| beyond the consumed equations
    bool newton_fallback = false;  // sequential elimination stalled and was refined

    std::size_t solved_from_residual() const { return equations_used.size(); }
};

using BetaAssignment = std::map<std::size_t, double>;

struct IcFixResult {
    std::vector<double> alpha;
    BetaAssignment beta_fixed;
};

/// Enforces x_1(t0) = x0_1 by setting alpha_0, then walks the remaining
/// state equations x_{i+1}(t0) = x0_{i+1} solving each for the lowest input
/// coefficient it involves. Power basis, t0 = 0.
IcFixResult fix_initial_conditions(const ObserverForm& sys, const std::vector<double>& alpha,
                                   const InitialCondition& ic, const Basis& basis);

/// Successive elimination of the residual Taylor coefficients at t0: equation
/// i is solved for the lowest-index unsolved beta appearing in it (closed
/// form when it enters linearly, safeguarded scalar Newton otherwise). Falls
/// back to newton_refine when an equation stalls.
NonlinearInverse sequential_eliminate(const ObserverForm& sys, const std::vector<double>& alpha,
                                      const BetaAssignment& beta_fixed,
                                      const NonlinearSolveConfig& cfg);

/// Damped Newton on the stacked system {first R residual Taylor coefficients
/// = 0} over the betas not held fixed; Jacobian by forward differences.
NonlinearInverse newton_refine(const ObserverForm& sys, const std::vector<double>& alpha,
                               const BetaAssignment& beta_fixed,
                               const std::vector<double>& beta_seed,
                               const NonlinearSolveConfig& cfg);

/// Residual series of (alpha, beta) at the nonlinear working order,
/// recentered so that coefficient i equals f^(i)(t0) / i!.
TruncatedSeries nonlinear_residual(const ObserverForm& sys, const std::vector<double>& alpha,
                                   const std::vector<double>& beta, double t0);

} // namespace seriesinv
