/*
 * seriesinv - algebraic inverse models for systems with series-defined outputs.
 *
 * C interface to the shared library. All functions return si_status_t; on
 * failure si_last_error() gives a thread-local description of what went
 * wrong. Objects returned through out-parameters are owned by the caller
 * and released with the matching *_free function.
 */
#ifndef SERIESINV_H
#define SERIESINV_H

#include <stddef.h>

#if defined(_WIN32)
#define SI_API __declspec(dllexport)
#else
#define SI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum si_status_t {
    SI_OK = 0,
    SI_ERR_USAGE = 1,          /* null pointer / malformed call */
    SI_ERR_PARSE = 2,          /* unreadable config or polynomial text */
    SI_ERR_SCHEMA = 3,         /* config misses required keys */
    SI_ERR_SCOPE = 4,          /* g_i references a state beyond x_{i+1} */
    SI_ERR_BASIS_MISMATCH = 5, /* operands use different basis families */
    SI_ERR_NOT_LINEAR = 6,     /* linear-only operation on a nonlinear system */
    SI_ERR_RANK_DEFICIENT = 7, /* coefficient matching has no unique solution */
    SI_ERR_SINGULAR_IC = 8,    /* initial-condition multiplier vanished */
    SI_ERR_NO_CONVERGENCE = 9, /* Newton / root search gave up */
    SI_ERR_NONFINITE = 10,     /* state blow-up during integration */
    SI_ERR_DIMENSION = 11,     /* array length mismatch */
    SI_ERR_IO = 12,            /* file could not be read or written */
    SI_ERR_INTERNAL = 13
} si_status_t;

typedef enum si_basis_kind {
    SI_BASIS_POWER = 0,       /* psi_i(t) = t^i */
    SI_BASIS_EXPONENTIAL = 1  /* psi_i(t) = exp(-i * rate * t) */
} si_basis_kind;

typedef enum si_method { SI_METHOD_EULER = 0, SI_METHOD_RK4 = 1 } si_method;

typedef enum si_quadrature {
    SI_QUAD_TRAPEZOID = 0,
    SI_QUAD_LEFT_RIEMANN = 1
} si_quadrature;

typedef enum si_role {
    SI_ROLE_FREE = 0,
    SI_ROLE_RESIDUAL = 1, /* solved from the coefficient-matching equations */
    SI_ROLE_IC = 2        /* solved from the initial conditions */
} si_role;

typedef struct si_system si_system;       /* observer-form system */
typedef struct si_inverse si_inverse;     /* exact linear inverse model */
typedef struct si_nlinverse si_nlinverse; /* numeric nonlinear inverse */
typedef struct si_sim si_sim;             /* forward-simulation trace */

SI_API const char* si_version(void);
SI_API const char* si_last_error(void);

/* --- systems ------------------------------------------------------------ */

SI_API si_status_t si_system_parse(const char* config_text, si_system** out);
SI_API si_status_t si_system_parse_file(const char* path, si_system** out);
SI_API void si_system_free(si_system* sys);

SI_API si_status_t si_system_order(const si_system* sys, size_t* n);
SI_API si_status_t si_system_name(const si_system* sys, char* buf, size_t len);
SI_API si_status_t si_system_is_linear(const si_system* sys, int* linear);
/* g and q must hold n entries each; fails with SI_ERR_NOT_LINEAR otherwise. */
SI_API si_status_t si_system_linear_coeffs(const si_system* sys, double* g, double* q);

/* --- trajectory helpers -------------------------------------------------- */

typedef struct si_boundary_condition {
    double time;         /* t0 or tf of the horizon */
    unsigned derivative; /* order d of the pinned derivative */
    double value;
} si_boundary_condition;

/* Solves the boundary-condition system for the N+1 series coefficients.
 * Underdetermined slots are zeroed and flagged in is_free (may be NULL). */
SI_API si_status_t si_interpolate(si_basis_kind kind, double rate, size_t N, double t0, double tf,
                                const si_boundary_condition* conditions, size_t count,
                                double* alpha, int* is_free);

/* Solves {xdot = 0, x1 = y_ss}. x must hold n entries; x_seed may be NULL. */
SI_API si_status_t si_steady_state(const si_system* sys, double y_ss, const double* x_seed,
                                 double u_seed, double* x, double* u, int* multiple_roots);

/* --- linear inversion ----------------------------------------------------- */

/* Solves the coefficient-matching equations (plus x(t0) = x0 when x0 is
 * non-NULL) for the input series and the constrained output coefficients.
 * Every resulting coefficient is affine in the parameter vector
 *   [free alpha values..., x0_1..x0_n (when supplied), 1]. */
SI_API si_status_t si_linear_invert(const si_system* sys, si_basis_kind kind, double rate, size_t N,
                                  size_t Nprime, const double* x0, double t0, si_inverse** out);
SI_API void si_inverse_free(si_inverse* model);

SI_API si_status_t si_inverse_orders(const si_inverse* model, size_t* N, size_t* Nprime, size_t* n);
SI_API si_status_t si_inverse_counts(const si_inverse* model, size_t* free_count, size_t* param_count);
SI_API si_status_t si_inverse_free_alpha_index(const si_inverse* model, size_t i, size_t* alpha_index);
SI_API si_status_t si_inverse_param_name(const si_inverse* model, size_t j, char* buf, size_t len);
SI_API si_status_t si_inverse_alpha_row(const si_inverse* model, size_t i, double* row);
SI_API si_status_t si_inverse_beta_row(const si_inverse* model, size_t i, double* row);
/* alpha_roles: N+1 entries, beta_roles: Nprime+1 entries (si_role values). */
SI_API si_status_t si_inverse_roles(const si_inverse* model, int* alpha_roles, int* beta_roles);
SI_API si_status_t si_inverse_instantiate(const si_inverse* model, const double* free_alpha,
                                        size_t free_count, double* alpha, double* beta);
/* Instantiated state vector evaluated at time t (x must hold n entries). */
SI_API si_status_t si_inverse_states_at(const si_inverse* model, const double* free_alpha,
                                        size_t free_count, double t, double* x);

/* --- nonlinear inversion -------------------------------------------------- */

typedef struct si_nl_config {
    size_t nprime;
    int max_newton_iter;
    double newton_tol; /* scaled by the residual magnitude */
    double pivot_tol;  /* scaled; below this a coefficient does not appear */
} si_nl_config;

SI_API void si_nl_config_default(si_nl_config* cfg, size_t nprime);

/* Full nonlinear pipeline: pins alpha_0 and the IC-determined input
 * coefficients from x(0) = x0 (t0 must be 0), then eliminates the residual
 * Taylor coefficients sequentially. Power basis. */
SI_API si_status_t si_nonlinear_invert(const si_system* sys, const double* alpha, size_t alpha_len,
                                     const double* x0, size_t n, double t0,
                                     const si_nl_config* cfg, si_nlinverse** out);
SI_API void si_nlinverse_free(si_nlinverse* model);

SI_API si_status_t si_nlinverse_alpha(const si_nlinverse* model, double* alpha, size_t len);
SI_API si_status_t si_nlinverse_beta(const si_nlinverse* model, double* beta, size_t len);
SI_API si_status_t si_nlinverse_info(const si_nlinverse* model, size_t* equations_used,
                                   double* matched_residual, double* residual_tail,
                                   double* residual_scale, int* newton_fallback);
/* table may be NULL to query sizes only; layout is rows x cols, row-major. */
SI_API si_status_t si_nlinverse_degree_table(const si_nlinverse* model, int* table, size_t* rows,
                                           size_t* cols);

/* --- verification --------------------------------------------------------- */

SI_API si_status_t si_simulate(const si_system* sys, si_basis_kind kind, double rate,
                             const double* beta, size_t beta_len, const double* alpha_ref,
                             size_t alpha_len, const double* x0, size_t n, double t0, double tf,
                             double h, si_method method, si_sim** out);
SI_API void si_sim_free(si_sim* sim);

SI_API si_status_t si_sim_length(const si_sim* sim, size_t* samples);
SI_API si_status_t si_sim_error(const si_sim* sim, si_quadrature quadrature, double* E,
                              double* max_abs_error);
SI_API si_status_t si_sim_sample(const si_sim* sim, size_t index, double* t, double* y_ref,
                               double* y_sim, double* x, double* u);
/* significant_digits <= 0 writes full precision. */
SI_API si_status_t si_sim_write_csv(const si_sim* sim, const char* path, int significant_digits);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SERIESINV_H */
