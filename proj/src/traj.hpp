#pragma once

#include <optional>
#include <vector>

#include "model.hpp"
#include "series.hpp"

namespace seriesinv {

/// Boundary conditions pinning the output trajectory: each entry demands
/// (d-th derivative of the series) at t equal value, with t one of the
/// horizon endpoints.
struct BoundarySpec {
    struct Condition {
        double time = 0.0;
        unsigned derivative = 0;
        double value = 0.0;
    };

    double t0 = 0.0;
    double tf = 1.0;
    std::vector<Condition> conditions;
};

struct InterpolationResult {
    std::vector<double> alpha;
    std::vector<bool> is_free; // true where the condition set left a slot open
};

/// Solves the square (or underdetermined) linear system of boundary
/// conditions for the series coefficients by LU. Underdetermined slots are
/// reported in `is_free` and set to zero.
InterpolationResult interpolate(const BoundarySpec& spec, const Basis& basis, std::size_t N);

struct SteadyState {
    std::vector<double> x; // full state vector, x[0] == y_ss
    double u = 0.0;
    bool multiple_roots = false; // a second equilibrium was found on the scan grid
};

struct SteadyStateOptions {
    std::optional<std::vector<double>> x_seed; // defaults to y_ss * (1,..,1)
    double u_seed = 0.0;
    double tol = 1e-12;
    int max_iter = 100;
};

/// Solves {xdot_i = 0, x_1 = y_ss} for (x_2..x_n, u) with a damped Newton
/// iteration; scans a coarse seed grid afterwards to flag other equilibria.
SteadyState steady_state(const ObserverForm& sys, double y_ss,
                         const SteadyStateOptions& options = {});

/// Right-hand side of the observer-form dynamics at a state/input point.
std::vector<double> dynamics_rhs(const ObserverForm& sys, const std::vector<double>& x, double u);

} // namespace seriesinv
