#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "series.hpp"

namespace seriesinv {

/// SISO system in observer canonical form:
///   xdot_i = x_{i+1} + g_i(x_1..x_i) u        for i < n
///   xdot_n = F(x_1..x_n) + g_n(x_1..x_n) u
///   y      = x_1
///
/// g and F are multivariate polynomials over the full state tuple; the
/// variable-scope invariant (g[i] touches x_1..x_{i+1} only, 0-based i)
/// is validated at construction/parse time.
struct ObserverForm {
    std::size_t n = 0;
    std::vector<MultiPoly> g; // length n, g[i] == g_{i+1} of the canonical form
    MultiPoly F;
    std::string name;
    std::vector<std::string> labels; // optional state names, length n when present

    void validate() const; // throws SchemaError / VariableScopeError

    std::string state_label(std::size_t i) const;

    bool operator==(const ObserverForm& other) const;
};

/// Specialization when every g_i is a constant and F(x) = q^T x.
struct LinearForm {
    std::vector<double> g;
    std::vector<double> q;
};

struct InitialCondition {
    double t0 = 0.0;
    std::vector<double> x0;
};

/// Parses a polynomial written as a sum of monomials, e.g.
/// "-50*x1 - 10*x1^2" or "CA0*k1 - x2". `^1` and `*` around bare variables
/// are optional, whitespace is insignificant. Identifiers that are not
/// x<i> are looked up in `params`.
MultiPoly parse_polynomial(const std::string& text, std::size_t var_count,
                           const std::map<std::string, double>& params);

ObserverForm parse_system(const std::string& config_text);
ObserverForm parse_system_file(const std::string& path);

std::string serialize_system(const ObserverForm& sys);

/// LinearForm when the system qualifies, nullopt otherwise.
std::optional<LinearForm> as_linear(const ObserverForm& sys);

/// Re-embeds a LinearForm as an ObserverForm (constant g's, F = q^T x).
ObserverForm observer_from_linear(const LinearForm& lf);

} // namespace seriesinv
