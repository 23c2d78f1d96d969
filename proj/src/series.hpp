#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace seriesinv {

/// Family of basis functions psi_i(t) the series coefficients refer to.
///
/// Power:       psi_i(t) = t^i
/// Exponential: psi_i(t) = exp(-i * rate * t)
///
/// Both families are closed under multiplication (psi_i * psi_j = psi_{i+j})
/// and differentiation acts linearly on the coefficient vector, which is all
/// the rest of the toolkit relies on.
struct Basis {
    enum class Kind { Power, Exponential };

    Kind kind = Kind::Power;
    double rate = 1.0; // Exponential only

    static Basis power() { return Basis{Kind::Power, 1.0}; }
    static Basis exponential(double rate = 1.0) { return Basis{Kind::Exponential, rate}; }

    bool operator==(const Basis& other) const {
        if (kind != other.kind) return false;
        return kind == Kind::Power || rate == other.rate;
    }
    bool operator!=(const Basis& other) const { return !(*this == other); }

    std::string describe() const;
};

/// Finite series sum_i coeffs[i] * psi_i(t). order() == coeffs.size() - 1.
struct TruncatedSeries {
    Basis basis;
    std::vector<double> coeffs;

    TruncatedSeries() : basis(Basis::power()), coeffs{0.0} {}
    TruncatedSeries(Basis b, std::vector<double> c);

    std::size_t order() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }

    /// Same coefficients, padded with zeros (or cut) to the given order.
    TruncatedSeries resized(std::size_t order) const;

    double max_abs_coeff() const;
    bool all_finite() const;
};

/// Sparse multivariate polynomial over variables x1..xk (k = var_count).
/// Terms with zero coefficient are dropped; exponent tuples are unique.
struct MultiPoly {
    struct Term {
        std::vector<unsigned> exponents; // length == var_count
        double coeff = 0.0;
    };

    std::size_t var_count = 0;
    std::vector<Term> terms;

    static MultiPoly constant(double value, std::size_t var_count);
    static MultiPoly variable(std::size_t index, std::size_t var_count); // x_{index+1}

    void add_term(const std::vector<unsigned>& exponents, double coeff);

    bool is_constant() const;
    /// True when the polynomial is a sum of degree-1 monomials (no constant).
    bool is_homogeneous_linear() const;
    double constant_value() const;
    /// Coefficient of the plain variable x_{index+1} (degree-1 monomial).
    double linear_coeff(std::size_t index) const;
    /// Highest variable index referenced (0 when constant). 1-based.
    std::size_t max_variable() const;
    double total_degree() const;

    double evaluate(const std::vector<double>& point) const;

    std::string to_string() const;
};

// --- series operations ------------------------------------------------------

/// Coefficient-wise weighted sum; inputs zero-padded to the longest order.
TruncatedSeries series_linear_comb(const std::vector<std::pair<double, TruncatedSeries>>& terms);

/// Applies the basis differentiation operator. The output keeps the input
/// order (Power drops information into index order-1 and zero-fills the top).
TruncatedSeries series_diff(const TruncatedSeries& s);

/// Cauchy product on indices, truncated to index `trunc`.
TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b, std::size_t trunc);

double series_eval(const TruncatedSeries& s, double t);

/// Substitutes one series per polynomial variable and expands, truncating
/// every intermediate product at index `trunc`.
TruncatedSeries poly_on_series(const MultiPoly& p, const std::vector<TruncatedSeries>& args,
                               std::size_t trunc);

/// Rewrites a Power series around a new origin: returns q with
/// sum q_i (t - t0)^i == sum coeffs_i t^i. Power basis only.
TruncatedSeries series_recenter(const TruncatedSeries& s, double t0);

} // namespace seriesinv
