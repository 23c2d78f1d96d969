#include "series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace seriesinv {

namespace {

void require_same_basis(const Basis& a, const Basis& b, const char* op) {
    if (a != b) {
        fail(ErrorCode::BasisMismatch,
             std::string(op) + ": operands use different bases (" + a.describe() + " vs " +
                 b.describe() + ")");
    }
}

} // namespace

std::string Basis::describe() const {
    if (kind == Kind::Power) return "power";
    std::ostringstream os;
    os << "exponential(rate=" << rate << ")";
    return os.str();
}

TruncatedSeries::TruncatedSeries(Basis b, std::vector<double> c) : basis(b), coeffs(std::move(c)) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    for (double v : coeffs) {
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "series coefficient is not finite");
    }
}

TruncatedSeries TruncatedSeries::resized(std::size_t order) const {
    TruncatedSeries out = *this;
    out.coeffs.resize(order + 1, 0.0);
    return out;
}

double TruncatedSeries::max_abs_coeff() const {
    double m = 0.0;
    for (double v : coeffs) m = std::max(m, std::abs(v));
    return m;
}

bool TruncatedSeries::all_finite() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](double v) { return std::isfinite(v); });
}

MultiPoly MultiPoly::constant(double value, std::size_t var_count) {
    MultiPoly p;
    p.var_count = var_count;
    if (value != 0.0) p.terms.push_back({std::vector<unsigned>(var_count, 0), value});
    return p;
}

MultiPoly MultiPoly::variable(std::size_t index, std::size_t var_count) {
    MultiPoly p;
    p.var_count = var_count;
    std::vector<unsigned> e(var_count, 0);
    e.at(index) = 1;
    p.terms.push_back({std::move(e), 1.0});
    return p;
}

void MultiPoly::add_term(const std::vector<unsigned>& exponents, double coeff) {
    if (exponents.size() != var_count)
        fail(ErrorCode::Dimension, "monomial exponent tuple has wrong length");
    for (auto& t : terms) {
        if (t.exponents == exponents) {
            t.coeff += coeff;
            if (t.coeff == 0.0) {
                std::swap(t, terms.back());
                terms.pop_back();
            }
            return;
        }
    }
    if (coeff != 0.0) terms.push_back({exponents, coeff});
}

bool MultiPoly::is_constant() const {
    for (const auto& t : terms)
        for (unsigned e : t.exponents)
            if (e != 0) return false;
    return true;
}

bool MultiPoly::is_homogeneous_linear() const {
    for (const auto& t : terms) {
        unsigned degree = 0;
        for (unsigned e : t.exponents) degree += e;
        if (degree != 1) return false;
    }
    return true;
}

double MultiPoly::constant_value() const {
    for (const auto& t : terms) {
        bool all_zero = std::all_of(t.exponents.begin(), t.exponents.end(),
                                    [](unsigned e) { return e == 0; });
        if (all_zero) return t.coeff;
    }
    return 0.0;
}

double MultiPoly::linear_coeff(std::size_t index) const {
    for (const auto& t : terms) {
        bool match = true;
        for (std::size_t i = 0; i < t.exponents.size(); ++i) {
            unsigned want = (i == index) ? 1u : 0u;
            if (t.exponents[i] != want) { match = false; break; }
        }
        if (match) return t.coeff;
    }
    return 0.0;
}

std::size_t MultiPoly::max_variable() const {
    std::size_t hi = 0;
    for (const auto& t : terms)
        for (std::size_t i = 0; i < t.exponents.size(); ++i)
            if (t.exponents[i] != 0) hi = std::max(hi, i + 1);
    return hi;
}

double MultiPoly::total_degree() const {
    unsigned deg = 0;
    for (const auto& t : terms) {
        unsigned d = 0;
        for (unsigned e : t.exponents) d += e;
        deg = std::max(deg, d);
    }
    return deg;
}

double MultiPoly::evaluate(const std::vector<double>& point) const {
    if (point.size() != var_count) fail(ErrorCode::Dimension, "polynomial evaluated at wrong arity");
    double sum = 0.0;
    for (const auto& t : terms) {
        double v = t.coeff;
        for (std::size_t i = 0; i < var_count; ++i) {
            for (unsigned k = 0; k < t.exponents[i]; ++k) v *= point[i];
        }
        sum += v;
    }
    return sum;
}

std::string MultiPoly::to_string() const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    os.precision(17); // exact double round-trip through serialize/parse
    bool first = true;
    for (const auto& t : terms) {
        double c = t.coeff;
        if (!first) {
            os << (c < 0 ? " - " : " + ");
            c = std::abs(c);
        } else if (c < 0) {
            os << "-";
            c = std::abs(c);
        }
        first = false;
        bool has_var = std::any_of(t.exponents.begin(), t.exponents.end(),
                                   [](unsigned e) { return e != 0; });
        bool wrote = false;
        if (c != 1.0 || !has_var) {
            os << c;
            wrote = true;
        }
        for (std::size_t i = 0; i < t.exponents.size(); ++i) {
            if (t.exponents[i] == 0) continue;
            if (wrote) os << "*";
            os << "x" << (i + 1);
            if (t.exponents[i] > 1) os << "^" << t.exponents[i];
            wrote = true;
        }
    }
    return os.str();
}

TruncatedSeries series_linear_comb(const std::vector<std::pair<double, TruncatedSeries>>& terms) {
    if (terms.empty()) return TruncatedSeries{};
    const Basis basis = terms.front().second.basis;
    std::size_t order = 0;
    for (const auto& [w, s] : terms) {
        (void)w;
        require_same_basis(basis, s.basis, "series_linear_comb");
        order = std::max(order, s.order());
    }
    std::vector<double> out(order + 1, 0.0);
    for (const auto& [w, s] : terms)
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) out[i] += w * s.coeffs[i];
    return TruncatedSeries(basis, std::move(out));
}

TruncatedSeries series_diff(const TruncatedSeries& s) {
    std::vector<double> out(s.coeffs.size(), 0.0);
    if (s.basis.kind == Basis::Kind::Power) {
        for (std::size_t i = 1; i < s.coeffs.size(); ++i)
            out[i - 1] = static_cast<double>(i) * s.coeffs[i];
    } else {
        for (std::size_t i = 0; i < s.coeffs.size(); ++i)
            out[i] = -static_cast<double>(i) * s.basis.rate * s.coeffs[i];
    }
    return TruncatedSeries(s.basis, std::move(out));
}

TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b, std::size_t trunc) {
    require_same_basis(a.basis, b.basis, "series_mul");
    std::vector<double> out(trunc + 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs.size() && i <= trunc; ++i) {
        if (a.coeffs[i] == 0.0) continue;
        const std::size_t jmax = std::min(b.coeffs.size(), trunc - i + 1);
        for (std::size_t j = 0; j < jmax; ++j) out[i + j] += a.coeffs[i] * b.coeffs[j];
    }
    return TruncatedSeries(a.basis, std::move(out));
}

double series_eval(const TruncatedSeries& s, double t) {
    if (s.basis.kind == Basis::Kind::Power) {
        double acc = 0.0;
        for (std::size_t i = s.coeffs.size(); i-- > 0;) acc = acc * t + s.coeffs[i];
        return acc;
    }
    // Horner in w = exp(-rate*t): sum c_i w^i.
    const double w = std::exp(-s.basis.rate * t);
    double acc = 0.0;
    for (std::size_t i = s.coeffs.size(); i-- > 0;) acc = acc * w + s.coeffs[i];
    return acc;
}

TruncatedSeries poly_on_series(const MultiPoly& p, const std::vector<TruncatedSeries>& args,
                               std::size_t trunc) {
    if (args.size() != p.var_count)
        fail(ErrorCode::Dimension, "poly_on_series: argument count does not match polynomial arity");
    Basis basis = args.empty() ? Basis::power() : args.front().basis;
    for (const auto& s : args) require_same_basis(basis, s.basis, "poly_on_series");

    TruncatedSeries acc(basis, std::vector<double>(trunc + 1, 0.0));
    for (const auto& term : p.terms) {
        TruncatedSeries prod(basis, std::vector<double>{term.coeff});
        for (std::size_t i = 0; i < p.var_count; ++i)
            for (unsigned k = 0; k < term.exponents[i]; ++k) prod = series_mul(prod, args[i], trunc);
        acc = series_linear_comb({{1.0, acc}, {1.0, prod}});
    }
    return acc.resized(trunc);
}

TruncatedSeries series_recenter(const TruncatedSeries& s, double t0) {
    if (s.basis.kind != Basis::Kind::Power)
        fail(ErrorCode::BasisMismatch, "series_recenter supports the power basis only");
    // q_i = sum_{j>=i} C(j,i) c_j t0^(j-i), from t^j = ((t-t0)+t0)^j.
    const std::size_t n = s.coeffs.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> t0pow(j + 1, 1.0);
        for (std::size_t k = 1; k <= j; ++k) t0pow[k] = t0pow[k - 1] * t0;
        double binom = 1.0; // C(j, i), walking i = j down to 0
        for (std::size_t i = j + 1; i-- > 0;) {
            out[i] += binom * s.coeffs[j] * t0pow[j - i];
            if (i > 0) binom = binom * static_cast<double>(i) / static_cast<double>(j - i + 1);
        }
    }
    return TruncatedSeries(s.basis, std::move(out));
}

} // namespace seriesinv
