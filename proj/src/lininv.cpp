#include "lininv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace seriesinv {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kRowDropTol = 1e-12;

struct EquationLabel {
    enum class Kind { Residual, InitialCondition } kind;
    std::size_t index;

    std::string describe() const {
        std::ostringstream os;
        if (kind == Kind::Residual)
            os << "residual coefficient " << index;
        else
            os << "x" << (index + 1) << "(t0) initial condition";
        return os.str();
    }
};

/// Affine description of every series the elimination produces, obtained by
/// probing eliminate_states with unit coefficient vectors.
struct LinearProbe {
    // residual: rows x (N+1), rows x (Np+1), const
    Matrix res_a, res_b;
    std::vector<double> res_c;
    // per state: rows x (N+1), rows x (Np+1), const
    std::vector<Matrix> state_a, state_b;
    std::vector<std::vector<double>> state_c;
    std::size_t rows = 0;
};

LinearProbe probe_linear(const ObserverForm& sys, const Basis& basis, std::size_t N,
                         std::size_t Nprime) {
    const std::size_t trunc = working_order(N, Nprime, sys.n);
    const std::size_t rows = trunc + 1;

    auto run = [&](const std::vector<double>& alpha, const std::vector<double>& beta) {
        return eliminate_states(sys, TruncatedSeries(basis, alpha), TruncatedSeries(basis, beta),
                                trunc);
    };

    LinearProbe p;
    p.rows = rows;
    p.res_a = Matrix(rows, N + 1);
    p.res_b = Matrix(rows, Nprime + 1);
    p.state_a.assign(sys.n, Matrix(rows, N + 1));
    p.state_b.assign(sys.n, Matrix(rows, Nprime + 1));

    const std::vector<double> a0(N + 1, 0.0), b0(Nprime + 1, 0.0);
    const auto base = run(a0, b0);
    p.res_c = base.residual.coeffs;
    for (std::size_t s = 0; s < sys.n; ++s) p.state_c.push_back(base.states[s].coeffs);

    for (std::size_t j = 0; j <= N; ++j) {
        auto a = a0;
        a[j] = 1.0;
        const auto r = run(a, b0);
        for (std::size_t i = 0; i < rows; ++i) {
            p.res_a(i, j) = r.residual.coeffs[i] - p.res_c[i];
            for (std::size_t s = 0; s < sys.n; ++s)
                p.state_a[s](i, j) = r.states[s].coeffs[i] - p.state_c[s][i];
        }
    }
    for (std::size_t j = 0; j <= Nprime; ++j) {
        auto b = b0;
        b[j] = 1.0;
        const auto r = run(a0, b);
        for (std::size_t i = 0; i < rows; ++i) {
            p.res_b(i, j) = r.residual.coeffs[i] - p.res_c[i];
            for (std::size_t s = 0; s < sys.n; ++s)
                p.state_b[s](i, j) = r.states[s].coeffs[i] - p.state_c[s][i];
        }
    }
    return p;
}

/// One stacked equation: eq_a . alpha + eq_b . beta + eq_x . x0 + eq_c = 0.
struct Equations {
    Matrix a, b, x;            // m x (N+1), m x (Np+1), m x n
    std::vector<double> c;     // m
    std::vector<EquationLabel> labels;
};

std::vector<std::size_t> k_subset_first(std::size_t k) {
    std::vector<std::size_t> s(k);
    for (std::size_t i = 0; i < k; ++i) s[i] = i;
    return s;
}

bool k_subset_next(std::vector<std::size_t>& s, std::size_t limit) {
    if (s.empty()) return false;
    std::size_t i = s.size();
    while (i-- > 0) {
        if (s[i] + (s.size() - i) < limit + 1) {
            ++s[i];
            for (std::size_t j = i + 1; j < s.size(); ++j) s[j] = s[j - 1] + 1;
            return true;
        }
        if (i == 0) break;
    }
    return false;
}

} // namespace

std::vector<double> basis_values(const Basis& basis, std::size_t order, double t) {
    std::vector<double> v(order + 1, 1.0);
    if (basis.kind == Basis::Kind::Power) {
        for (std::size_t k = 1; k <= order; ++k) v[k] = v[k - 1] * t;
    } else {
        const double w = std::exp(-basis.rate * t);
        for (std::size_t k = 1; k <= order; ++k) v[k] = v[k - 1] * w;
    }
    return v;
}

std::string InverseModel::param_name(std::size_t j) const {
    if (j < free_alpha.size()) return "a" + std::to_string(free_alpha[j]);
    if (ic && j < free_alpha.size() + n)
        return "x" + std::to_string(j - free_alpha.size() + 1) + "(t0)";
    return "1";
}

double InverseModel::apply_row(const Matrix& rows, std::size_t i,
                               const std::vector<double>& params) const {
    double v = 0.0;
    for (std::size_t j = 0; j < rows.cols(); ++j) v += rows(i, j) * params[j];
    return v;
}

std::vector<double> InverseModel::param_vector(const std::vector<double>& free_values) const {
    if (free_values.size() != free_alpha.size())
        fail(ErrorCode::Dimension, "expected " + std::to_string(free_alpha.size()) +
                                       " free coefficients, got " +
                                       std::to_string(free_values.size()));
    std::vector<double> p = free_values;
    if (ic) p.insert(p.end(), ic->x0.begin(), ic->x0.end());
    p.push_back(1.0);
    return p;
}

InverseModel solve_linear_inverse(const ObserverForm& sys, const Basis& basis, std::size_t N,
                                  std::size_t Nprime,
                                  const std::optional<InitialCondition>& ic,
                                  const std::optional<RoleSpec>& roles) {
    if (!as_linear(sys))
        fail(ErrorCode::NotLinear, "solve_linear_inverse requires a linear system");
    if (ic && ic->x0.size() != sys.n)
        fail(ErrorCode::Dimension, "initial condition must provide all n states");

    const std::size_t n = sys.n;
    const std::size_t trunc = working_order(N, Nprime, n);
    const LinearProbe probe = probe_linear(sys, basis, N, Nprime);

    // Stack the equations.
    Equations eq;
    const std::size_t m_res = probe.rows;
    const std::size_t m_all = m_res + (ic ? n : 0);
    eq.a = Matrix(m_all, N + 1);
    eq.b = Matrix(m_all, Nprime + 1);
    eq.x = Matrix(m_all, n);
    eq.c.assign(m_all, 0.0);
    for (std::size_t r = 0; r < m_res; ++r) {
        for (std::size_t j = 0; j <= N; ++j) eq.a(r, j) = probe.res_a(r, j);
        for (std::size_t j = 0; j <= Nprime; ++j) eq.b(r, j) = probe.res_b(r, j);
        eq.c[r] = probe.res_c[r];
        eq.labels.push_back({EquationLabel::Kind::Residual, r});
    }
    if (ic) {
        const auto e = basis_values(basis, trunc, ic->t0);
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t r = m_res + s;
            for (std::size_t j = 0; j <= N; ++j) {
                double v = 0.0;
                for (std::size_t k = 0; k < probe.rows; ++k) v += e[k] * probe.state_a[s](k, j);
                eq.a(r, j) = v;
            }
            for (std::size_t j = 0; j <= Nprime; ++j) {
                double v = 0.0;
                for (std::size_t k = 0; k < probe.rows; ++k) v += e[k] * probe.state_b[s](k, j);
                eq.b(r, j) = v;
            }
            double v = 0.0;
            for (std::size_t k = 0; k < probe.rows; ++k) v += e[k] * probe.state_c[s][k];
            eq.c[r] = v;
            eq.x(r, s) = -1.0; // ... - x0_s = 0
            eq.labels.push_back({EquationLabel::Kind::InitialCondition, s});
        }
    }

    // Global scale and effective (not identically zero) equations.
    double global_max = std::max({eq.a.max_abs(), eq.b.max_abs(), eq.x.max_abs()});
    for (double v : eq.c) global_max = std::max(global_max, std::abs(v));
    const double drop = kRowDropTol * std::max(global_max, 1e-300);

    std::vector<std::size_t> rows_eff;
    for (std::size_t r = 0; r < m_all; ++r) {
        double m = std::abs(eq.c[r]);
        for (std::size_t j = 0; j <= N; ++j) m = std::max(m, std::abs(eq.a(r, j)));
        for (std::size_t j = 0; j <= Nprime; ++j) m = std::max(m, std::abs(eq.b(r, j)));
        for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs(eq.x(r, j)));
        if (m > drop) rows_eff.push_back(r);
    }
    const std::size_t m_eff = rows_eff.size();

    // Candidate unknown sets.
    std::vector<std::size_t> beta_unknowns;
    std::vector<std::vector<std::size_t>> alpha_candidates;
    if (roles) {
        beta_unknowns = roles->beta_unknowns;
        alpha_candidates.push_back(roles->alpha_unknowns);
        if (beta_unknowns.size() + roles->alpha_unknowns.size() != m_eff)
            fail(ErrorCode::RankDeficient,
                 "explicit roles designate " +
                     std::to_string(beta_unknowns.size() + roles->alpha_unknowns.size()) +
                     " unknowns but the system has " + std::to_string(m_eff) +
                     " effective equations");
    } else {
        for (std::size_t j = 0; j <= Nprime; ++j) beta_unknowns.push_back(j);
        // A beta whose column vanishes in every effective equation is
        // unconstrained; leave it free (set to zero).
        std::erase_if(beta_unknowns, [&](std::size_t j) {
            for (std::size_t r : rows_eff)
                if (std::abs(eq.b(r, j)) > drop) return false;
            return true;
        });
        if (m_eff < beta_unknowns.size())
            fail(ErrorCode::RankDeficient,
                 "underdetermined coefficient matching: " + std::to_string(m_eff) +
                     " equations for " + std::to_string(beta_unknowns.size()) +
                     " input coefficients");
        const std::size_t k = m_eff - beta_unknowns.size();
        if (k > N + 1)
            fail(ErrorCode::RankDeficient,
                 "overdetermined coefficient matching: " + std::to_string(m_eff) +
                     " equations cannot be covered by the available coefficients");
        auto subset = k_subset_first(k);
        do {
            alpha_candidates.push_back(subset);
        } while (k_subset_next(subset, N));
    }

    LuFailure best_failure{};
    bool have_failure = false;

    for (const auto& alpha_unknowns : alpha_candidates) {
        if (beta_unknowns.size() + alpha_unknowns.size() != m_eff) continue;
        const std::size_t m = m_eff;

        // Unknown columns: the alpha subset first, then the unknown betas.
        // With partial pivoting this attributes alpha unknowns to the
        // initial-condition rows whenever those rows carry them.
        Matrix W(m, m);
        for (std::size_t r = 0; r < m; ++r) {
            std::size_t col = 0;
            for (std::size_t j : alpha_unknowns) W(r, col++) = eq.a(rows_eff[r], j);
            for (std::size_t j : beta_unknowns) W(r, col++) = eq.b(rows_eff[r], j);
        }

        std::vector<std::size_t> free_alpha;
        for (std::size_t j = 0; j <= N; ++j)
            if (std::find(alpha_unknowns.begin(), alpha_unknowns.end(), j) == alpha_unknowns.end())
                free_alpha.push_back(j);

        const std::size_t P = free_alpha.size() + (ic ? n : 0) + 1;
        Matrix B(m, P); // W u = B p  with p = [alpha_free, x0, 1]
        for (std::size_t r = 0; r < m; ++r) {
            const std::size_t er = rows_eff[r];
            std::size_t col = 0;
            for (std::size_t j : free_alpha) B(r, col++) = -eq.a(er, j);
            if (ic)
                for (std::size_t j = 0; j < n; ++j) B(r, col++) = -eq.x(er, j);
            B(r, col) = -eq.c[er];
        }

        // Row/column equilibration: coefficient magnitudes differ by many
        // orders for physically scaled systems, and the pivot-zero rule is
        // only meaningful on a balanced matrix.
        std::vector<double> row_scale(m, 1.0), col_scale(m, 1.0);
        for (std::size_t r = 0; r < m; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c) s = std::max(s, std::abs(W(r, c)));
            if (s > 0.0) {
                row_scale[r] = 1.0 / s;
                for (std::size_t c = 0; c < m; ++c) W(r, c) *= row_scale[r];
                for (std::size_t c = 0; c < P; ++c) B(r, c) *= row_scale[r];
            }
        }
        for (std::size_t c = 0; c < m; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < m; ++r) s = std::max(s, std::abs(W(r, c)));
            if (s > 0.0) {
                col_scale[c] = 1.0 / s;
                for (std::size_t r = 0; r < m; ++r) W(r, c) *= col_scale[c];
            }
        }

        LuFailure failure{};
        auto solved = lu_solve(W, B, kPivotTol, &failure);
        if (!solved) {
            if (!have_failure || failure.rank > best_failure.rank) best_failure = failure;
            have_failure = true;
            continue;
        }
        for (std::size_t u = 0; u < m; ++u)
            for (std::size_t p = 0; p < P; ++p) solved->x(u, p) *= col_scale[u];

        InverseModel model;
        model.basis = basis;
        model.N = N;
        model.Nprime = Nprime;
        model.n = n;
        model.ic = ic;
        model.free_alpha = free_alpha;
        model.alpha_roles.assign(N + 1, CoefficientRole::Free);
        model.beta_roles.assign(Nprime + 1, CoefficientRole::Free);

        auto role_from_pivot = [&](std::size_t unknown_col) {
            const std::size_t eq_index = rows_eff[solved->pivot_rows[unknown_col]];
            return eq.labels[eq_index].kind == EquationLabel::Kind::Residual
                       ? CoefficientRole::SolvedFromResidual
                       : CoefficientRole::SolvedFromIC;
        };

        model.alpha_rows = Matrix(N + 1, P);
        model.beta_rows = Matrix(Nprime + 1, P);
        for (std::size_t i = 0; i < free_alpha.size(); ++i)
            model.alpha_rows(free_alpha[i], i) = 1.0;
        std::size_t col = 0;
        for (std::size_t j : alpha_unknowns) {
            for (std::size_t p = 0; p < P; ++p) model.alpha_rows(j, p) = solved->x(col, p);
            model.alpha_roles[j] = role_from_pivot(col);
            ++col;
        }
        for (std::size_t j : beta_unknowns) {
            for (std::size_t p = 0; p < P; ++p) model.beta_rows(j, p) = solved->x(col, p);
            model.beta_roles[j] = role_from_pivot(col);
            ++col;
        }

        // States: compose the probe maps with the solved alpha/beta rows.
        model.state_rows.reserve(n);
        for (std::size_t s = 0; s < n; ++s) {
            Matrix rows = matmul(probe.state_a[s], model.alpha_rows);
            Matrix mb = matmul(probe.state_b[s], model.beta_rows);
            for (std::size_t r = 0; r < rows.rows(); ++r) {
                for (std::size_t p = 0; p < P; ++p) rows(r, p) += mb(r, p);
                rows(r, P - 1) += probe.state_c[s][r];
            }
            model.state_rows.push_back(std::move(rows));
        }
        return model;
    }

    std::ostringstream msg;
    msg << "coefficient-matching system is rank deficient";
    if (have_failure) {
        msg << " (elimination broke down after " << best_failure.rank << " of " << m_eff
            << " pivots";
        const std::size_t origin = rows_eff.empty() ? 0 : rows_eff[best_failure.dependent_row_origin];
        if (origin < eq.labels.size())
            msg << "; dependent equation: " << eq.labels[origin].describe();
        msg << ")";
    }
    msg << "; the basis may be unable to represent this system's inverse, "
           "a different basis family can remove the cancellation";
    fail(ErrorCode::RankDeficient, msg.str());
}

Instantiation instantiate(const InverseModel& model, const std::vector<double>& free_alpha) {
    const auto p = model.param_vector(free_alpha);

    Instantiation out;
    out.alpha.resize(model.N + 1);
    for (std::size_t i = 0; i <= model.N; ++i) out.alpha[i] = model.apply_row(model.alpha_rows, i, p);
    out.beta.resize(model.Nprime + 1);
    for (std::size_t i = 0; i <= model.Nprime; ++i)
        out.beta[i] = model.apply_row(model.beta_rows, i, p);

    out.y = TruncatedSeries(model.basis, out.alpha);
    out.u = TruncatedSeries(model.basis, out.beta);
    for (const auto& rows : model.state_rows) {
        std::vector<double> coeffs(rows.rows());
        for (std::size_t i = 0; i < rows.rows(); ++i) coeffs[i] = model.apply_row(rows, i, p);
        out.states.emplace_back(model.basis, std::move(coeffs));
    }
    return out;
}

} // namespace seriesinv
