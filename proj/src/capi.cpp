#include "seriesinv.h"

#include <cstring>
#include <exception>
#include <string>

#include "lininv.hpp"
#include "model.hpp"
#include "nlinv.hpp"
#include "param.hpp"
#include "traj.hpp"
#include "verify.hpp"

using namespace seriesinv;

namespace {

thread_local std::string g_last_error;

si_status_t status_from(ErrorCode code) {
    switch (code) {
        case ErrorCode::BasisMismatch: return SI_ERR_BASIS_MISMATCH;
        case ErrorCode::SchemaError: return SI_ERR_SCHEMA;
        case ErrorCode::VariableScopeError: return SI_ERR_SCOPE;
        case ErrorCode::ParseError: return SI_ERR_PARSE;
        case ErrorCode::NotLinear: return SI_ERR_NOT_LINEAR;
        case ErrorCode::RankDeficient: return SI_ERR_RANK_DEFICIENT;
        case ErrorCode::SingularIC: return SI_ERR_SINGULAR_IC;
        case ErrorCode::SequentialStall: return SI_ERR_NO_CONVERGENCE;
        case ErrorCode::NoConvergence: return SI_ERR_NO_CONVERGENCE;
        case ErrorCode::NonFinite: return SI_ERR_NONFINITE;
        case ErrorCode::Dimension: return SI_ERR_DIMENSION;
        case ErrorCode::Io: return SI_ERR_IO;
    }
    return SI_ERR_INTERNAL;
}

template <typename Fn>
si_status_t guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ToolkitError& e) {
        g_last_error = e.what();
        return status_from(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SI_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return SI_ERR_INTERNAL;
    }
}

si_status_t usage_error(const char* message) {
    g_last_error = message;
    return SI_ERR_USAGE;
}

Basis make_basis(si_basis_kind kind, double rate) {
    return kind == SI_BASIS_POWER ? Basis::power() : Basis::exponential(rate);
}

si_status_t copy_string(const std::string& s, char* buf, size_t len) {
    if (!buf || len == 0) return usage_error("output buffer is null or empty");
    std::strncpy(buf, s.c_str(), len - 1);
    buf[len - 1] = '\0';
    return SI_OK;
}

} // namespace

struct si_system {
    ObserverForm sys;
};

struct si_inverse {
    InverseModel model;
};

struct si_nlinverse {
    NonlinearInverse model;
};

struct si_sim {
    SimResult result;
    TruncatedSeries u;
};

extern "C" {

const char* si_version(void) { return "seriesinv 1.0.0"; }

const char* si_last_error(void) { return g_last_error.c_str(); }

si_status_t si_system_parse(const char* config_text, si_system** out) {
    if (!config_text || !out) return usage_error("si_system_parse: null argument");
    return guarded([&] {
        auto holder = new si_system{parse_system(config_text)};
        *out = holder;
        return SI_OK;
    });
}

si_status_t si_system_parse_file(const char* path, si_system** out) {
    if (!path || !out) return usage_error("si_system_parse_file: null argument");
    return guarded([&] {
        auto holder = new si_system{parse_system_file(path)};
        *out = holder;
        return SI_OK;
    });
}

void si_system_free(si_system* sys) { delete sys; }

si_status_t si_system_order(const si_system* sys, size_t* n) {
    if (!sys || !n) return usage_error("si_system_order: null argument");
    *n = sys->sys.n;
    return SI_OK;
}

si_status_t si_system_name(const si_system* sys, char* buf, size_t len) {
    if (!sys) return usage_error("si_system_name: null argument");
    return copy_string(sys->sys.name, buf, len);
}

si_status_t si_system_is_linear(const si_system* sys, int* linear) {
    if (!sys || !linear) return usage_error("si_system_is_linear: null argument");
    *linear = as_linear(sys->sys) ? 1 : 0;
    return SI_OK;
}

si_status_t si_system_linear_coeffs(const si_system* sys, double* g, double* q) {
    if (!sys || !g || !q) return usage_error("si_system_linear_coeffs: null argument");
    return guarded([&] {
        auto lf = as_linear(sys->sys);
        if (!lf) fail(ErrorCode::NotLinear, "system is not linear");
        for (std::size_t i = 0; i < sys->sys.n; ++i) {
            g[i] = lf->g[i];
            q[i] = lf->q[i];
        }
        return SI_OK;
    });
}

si_status_t si_interpolate(si_basis_kind kind, double rate, size_t N, double t0, double tf,
                         const si_boundary_condition* conditions, size_t count, double* alpha,
                         int* is_free) {
    if ((!conditions && count > 0) || !alpha) return usage_error("si_interpolate: null argument");
    return guarded([&] {
        BoundarySpec spec;
        spec.t0 = t0;
        spec.tf = tf;
        for (size_t i = 0; i < count; ++i)
            spec.conditions.push_back(
                {conditions[i].time, conditions[i].derivative, conditions[i].value});
        const auto res = interpolate(spec, make_basis(kind, rate), N);
        for (size_t i = 0; i <= N; ++i) {
            alpha[i] = res.alpha[i];
            if (is_free) is_free[i] = res.is_free[i] ? 1 : 0;
        }
        return SI_OK;
    });
}

si_status_t si_steady_state(const si_system* sys, double y_ss, const double* x_seed, double u_seed,
                          double* x, double* u, int* multiple_roots) {
    if (!sys || !x || !u) return usage_error("si_steady_state: null argument");
    return guarded([&] {
        SteadyStateOptions options;
        options.u_seed = u_seed;
        if (x_seed)
            options.x_seed = std::vector<double>(x_seed, x_seed + sys->sys.n);
        const auto ss = steady_state(sys->sys, y_ss, options);
        for (std::size_t i = 0; i < sys->sys.n; ++i) x[i] = ss.x[i];
        *u = ss.u;
        if (multiple_roots) *multiple_roots = ss.multiple_roots ? 1 : 0;
        return SI_OK;
    });
}

si_status_t si_linear_invert(const si_system* sys, si_basis_kind kind, double rate, size_t N,
                           size_t Nprime, const double* x0, double t0, si_inverse** out) {
    if (!sys || !out) return usage_error("si_linear_invert: null argument");
    return guarded([&] {
        std::optional<InitialCondition> ic;
        if (x0) ic = InitialCondition{t0, std::vector<double>(x0, x0 + sys->sys.n)};
        auto holder = new si_inverse{
            solve_linear_inverse(sys->sys, make_basis(kind, rate), N, Nprime, ic)};
        *out = holder;
        return SI_OK;
    });
}

void si_inverse_free(si_inverse* model) { delete model; }

si_status_t si_inverse_orders(const si_inverse* model, size_t* N, size_t* Nprime, size_t* n) {
    if (!model) return usage_error("si_inverse_orders: null argument");
    if (N) *N = model->model.N;
    if (Nprime) *Nprime = model->model.Nprime;
    if (n) *n = model->model.n;
    return SI_OK;
}

si_status_t si_inverse_counts(const si_inverse* model, size_t* free_count, size_t* param_count) {
    if (!model) return usage_error("si_inverse_counts: null argument");
    if (free_count) *free_count = model->model.free_alpha.size();
    if (param_count) *param_count = model->model.param_count();
    return SI_OK;
}

si_status_t si_inverse_free_alpha_index(const si_inverse* model, size_t i, size_t* alpha_index) {
    if (!model || !alpha_index) return usage_error("si_inverse_free_alpha_index: null argument");
    if (i >= model->model.free_alpha.size())
        return usage_error("si_inverse_free_alpha_index: index out of range");
    *alpha_index = model->model.free_alpha[i];
    return SI_OK;
}

si_status_t si_inverse_param_name(const si_inverse* model, size_t j, char* buf, size_t len) {
    if (!model) return usage_error("si_inverse_param_name: null argument");
    if (j >= model->model.param_count())
        return usage_error("si_inverse_param_name: index out of range");
    return copy_string(model->model.param_name(j), buf, len);
}

si_status_t si_inverse_alpha_row(const si_inverse* model, size_t i, double* row) {
    if (!model || !row) return usage_error("si_inverse_alpha_row: null argument");
    if (i > model->model.N) return usage_error("si_inverse_alpha_row: index out of range");
    for (std::size_t j = 0; j < model->model.param_count(); ++j)
        row[j] = model->model.alpha_rows(i, j);
    return SI_OK;
}

si_status_t si_inverse_beta_row(const si_inverse* model, size_t i, double* row) {
    if (!model || !row) return usage_error("si_inverse_beta_row: null argument");
    if (i > model->model.Nprime) return usage_error("si_inverse_beta_row: index out of range");
    for (std::size_t j = 0; j < model->model.param_count(); ++j)
        row[j] = model->model.beta_rows(i, j);
    return SI_OK;
}

si_status_t si_inverse_roles(const si_inverse* model, int* alpha_roles, int* beta_roles) {
    if (!model) return usage_error("si_inverse_roles: null argument");
    auto code = [](CoefficientRole r) {
        switch (r) {
            case CoefficientRole::Free: return SI_ROLE_FREE;
            case CoefficientRole::SolvedFromResidual: return SI_ROLE_RESIDUAL;
            case CoefficientRole::SolvedFromIC: return SI_ROLE_IC;
        }
        return SI_ROLE_FREE;
    };
    if (alpha_roles)
        for (std::size_t i = 0; i <= model->model.N; ++i)
            alpha_roles[i] = code(model->model.alpha_roles[i]);
    if (beta_roles)
        for (std::size_t i = 0; i <= model->model.Nprime; ++i)
            beta_roles[i] = code(model->model.beta_roles[i]);
    return SI_OK;
}

si_status_t si_inverse_instantiate(const si_inverse* model, const double* free_alpha,
                                 size_t free_count, double* alpha, double* beta) {
    if (!model || (!free_alpha && free_count > 0))
        return usage_error("si_inverse_instantiate: null argument");
    return guarded([&] {
        const auto inst = instantiate(
            model->model, std::vector<double>(free_alpha, free_alpha + free_count));
        if (alpha)
            for (std::size_t i = 0; i <= model->model.N; ++i) alpha[i] = inst.alpha[i];
        if (beta)
            for (std::size_t i = 0; i <= model->model.Nprime; ++i) beta[i] = inst.beta[i];
        return SI_OK;
    });
}

si_status_t si_inverse_states_at(const si_inverse* model, const double* free_alpha,
                                 size_t free_count, double t, double* x) {
    if (!model || (!free_alpha && free_count > 0) || !x)
        return usage_error("si_inverse_states_at: null argument");
    return guarded([&] {
        const auto inst = instantiate(
            model->model, std::vector<double>(free_alpha, free_alpha + free_count));
        for (std::size_t s = 0; s < inst.states.size(); ++s) x[s] = series_eval(inst.states[s], t);
        return SI_OK;
    });
}

void si_nl_config_default(si_nl_config* cfg, size_t nprime) {
    if (!cfg) return;
    cfg->nprime = nprime;
    cfg->max_newton_iter = 50;
    cfg->newton_tol = 1e-12;
    cfg->pivot_tol = 1e-10;
}

si_status_t si_nonlinear_invert(const si_system* sys, const double* alpha, size_t alpha_len,
                              const double* x0, size_t n, double t0, const si_nl_config* cfg,
                              si_nlinverse** out) {
    if (!sys || !alpha || alpha_len == 0 || !x0 || !cfg || !out)
        return usage_error("si_nonlinear_invert: null argument");
    return guarded([&] {
        if (n != sys->sys.n) fail(ErrorCode::Dimension, "x0 length must equal the system order");
        NonlinearSolveConfig config;
        config.Nprime = cfg->nprime;
        config.max_newton_iter = cfg->max_newton_iter;
        config.newton_tol = cfg->newton_tol;
        config.pivot_tol = cfg->pivot_tol;

        const InitialCondition ic{t0, std::vector<double>(x0, x0 + n)};
        const auto fixed = fix_initial_conditions(
            sys->sys, std::vector<double>(alpha, alpha + alpha_len), ic, Basis::power());
        auto holder =
            new si_nlinverse{sequential_eliminate(sys->sys, fixed.alpha, fixed.beta_fixed, config)};
        *out = holder;
        return SI_OK;
    });
}

void si_nlinverse_free(si_nlinverse* model) { delete model; }

si_status_t si_nlinverse_alpha(const si_nlinverse* model, double* alpha, size_t len) {
    if (!model || !alpha) return usage_error("si_nlinverse_alpha: null argument");
    if (len < model->model.alpha.size()) return usage_error("si_nlinverse_alpha: buffer too small");
    for (std::size_t i = 0; i < model->model.alpha.size(); ++i) alpha[i] = model->model.alpha[i];
    return SI_OK;
}

si_status_t si_nlinverse_beta(const si_nlinverse* model, double* beta, size_t len) {
    if (!model || !beta) return usage_error("si_nlinverse_beta: null argument");
    if (len < model->model.beta.size()) return usage_error("si_nlinverse_beta: buffer too small");
    for (std::size_t i = 0; i < model->model.beta.size(); ++i) beta[i] = model->model.beta[i];
    return SI_OK;
}

si_status_t si_nlinverse_info(const si_nlinverse* model, size_t* equations_used,
                            double* matched_residual, double* residual_tail,
                            double* residual_scale, int* newton_fallback) {
    if (!model) return usage_error("si_nlinverse_info: null argument");
    if (equations_used) *equations_used = model->model.solved_from_residual();
    if (matched_residual) *matched_residual = model->model.matched_residual;
    if (residual_tail) *residual_tail = model->model.residual_tail;
    if (residual_scale) *residual_scale = model->model.residual_scale;
    if (newton_fallback) *newton_fallback = model->model.newton_fallback ? 1 : 0;
    return SI_OK;
}

si_status_t si_nlinverse_degree_table(const si_nlinverse* model, int* table, size_t* rows,
                                    size_t* cols) {
    if (!model || !rows || !cols) return usage_error("si_nlinverse_degree_table: null argument");
    const auto& t = model->model.degree_table;
    *rows = t.size();
    *cols = t.empty() ? 0 : t.front().size();
    if (table) {
        for (std::size_t r = 0; r < t.size(); ++r)
            for (std::size_t c = 0; c < t[r].size(); ++c) table[r * t[r].size() + c] = t[r][c];
    }
    return SI_OK;
}

si_status_t si_simulate(const si_system* sys, si_basis_kind kind, double rate, const double* beta,
                      size_t beta_len, const double* alpha_ref, size_t alpha_len, const double* x0,
                      size_t n, double t0, double tf, double h, si_method method, si_sim** out) {
    if (!sys || !beta || beta_len == 0 || !alpha_ref || alpha_len == 0 || !x0 || !out)
        return usage_error("si_simulate: null argument");
    return guarded([&] {
        if (n != sys->sys.n) fail(ErrorCode::Dimension, "x0 length must equal the system order");
        const Basis basis = make_basis(kind, rate);
        TruncatedSeries u(basis, std::vector<double>(beta, beta + beta_len));
        TruncatedSeries y_ref(basis, std::vector<double>(alpha_ref, alpha_ref + alpha_len));
        const InitialCondition ic{t0, std::vector<double>(x0, x0 + n)};
        auto res = integrate_forward(sys->sys, u, y_ref, ic, tf, h,
                                     method == SI_METHOD_EULER ? IntegrationMethod::Euler
                                                               : IntegrationMethod::RK4);
        auto holder = new si_sim{std::move(res), std::move(u)};
        *out = holder;
        return SI_OK;
    });
}

void si_sim_free(si_sim* sim) { delete sim; }

si_status_t si_sim_length(const si_sim* sim, size_t* samples) {
    if (!sim || !samples) return usage_error("si_sim_length: null argument");
    *samples = sim->result.times.size();
    return SI_OK;
}

si_status_t si_sim_error(const si_sim* sim, si_quadrature quadrature, double* E,
                       double* max_abs_error) {
    if (!sim) return usage_error("si_sim_error: null argument");
    const auto report = error_metric(sim->result, quadrature == SI_QUAD_TRAPEZOID
                                                      ? Quadrature::Trapezoid
                                                      : Quadrature::LeftRiemann);
    if (E) *E = report.E;
    if (max_abs_error) *max_abs_error = report.max_abs_error;
    return SI_OK;
}

si_status_t si_sim_sample(const si_sim* sim, size_t index, double* t, double* y_ref, double* y_sim,
                        double* x, double* u) {
    if (!sim) return usage_error("si_sim_sample: null argument");
    if (index >= sim->result.times.size())
        return usage_error("si_sim_sample: index out of range");
    if (t) *t = sim->result.times[index];
    if (y_ref) *y_ref = sim->result.y_ref[index];
    if (y_sim) *y_sim = sim->result.y_sim[index];
    if (x)
        for (std::size_t i = 0; i < sim->result.states.size(); ++i)
            x[i] = sim->result.states[i][index];
    if (u) *u = series_eval(sim->u, sim->result.times[index]);
    return SI_OK;
}

si_status_t si_sim_write_csv(const si_sim* sim, const char* path, int significant_digits) {
    if (!sim || !path) return usage_error("si_sim_write_csv: null argument");
    return guarded([&] {
        write_csv(path, sim->result, sim->u, significant_digits);
        return SI_OK;
    });
}

} // extern "C"
