#include "nlinv.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "linalg.hpp"
#include "lininv.hpp"

namespace seriesinv {

namespace {

void require_power(const Basis& basis) {
    if (basis.kind != Basis::Kind::Power)
        fail(ErrorCode::BasisMismatch, "the nonlinear inversion path supports the power basis only");
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
}

/// Root of a scalar equation f(v) = 0 preferring the root closest to zero:
/// exact division when f is affine, otherwise Newton inside a bracket found
/// by expanding search from the origin. `scale_out`, when given, receives
/// the magnitude of the values met while solving (the operand scale of the
/// equation).
template <typename F>
double scalar_solve(F&& f, double tol, int max_iter, double* scale_out = nullptr) {
    const double f0 = f(0.0);
    if (std::abs(f0) <= tol) {
        if (scale_out) *scale_out = std::max(1.0, std::abs(f0));
        return 0.0;
    }

    const double delta = 1.0;
    const double f1 = f(delta);
    const double f2 = f(2.0 * delta);
    const double curvature = f2 - 2.0 * f1 + f0;
    const double slope = (f1 - f0) / delta;
    const double mag = std::max({std::abs(f0), std::abs(f1), std::abs(f2), 1.0});
    if (scale_out) *scale_out = mag;

    if (std::abs(curvature) <= 1e-9 * mag) {
        if (slope == 0.0)
            fail(ErrorCode::NoConvergence, "scalar equation has a vanishing linear coefficient");
        // The slope estimated from O(1)-spaced probes carries the rounding of
        // the (possibly huge) function values; once the root's magnitude is
        // known, re-estimate the slope at that scale and polish.
        double x = -f0 / slope;
        for (int it = 0; it < 4; ++it) {
            const double fx = f(x);
            const double d = std::max(1.0, std::abs(x));
            const double s = (f(x + d) - fx) / d;
            if (s == 0.0) break;
            const double step = -fx / s;
            x += step;
            if (std::abs(step) <= 1e-15 * std::abs(x)) break;
        }
        return x;
    }

    // Expanding search for a sign change, nearest the origin first.
    double lo = 0.0, hi = 0.0, flo = f0;
    bool bracketed = false;
    double span = delta;
    double prev_pos = 0.0, fprev_pos = f0;
    double prev_neg = 0.0, fprev_neg = f0;
    for (int k = 0; k < 60 && !bracketed; ++k) {
        for (double sgn : {+1.0, -1.0}) {
            const double v = sgn * span;
            const double fv = f(v);
            double& prev = (sgn > 0) ? prev_pos : prev_neg;
            double& fprev = (sgn > 0) ? fprev_pos : fprev_neg;
            if (std::abs(fv) <= tol) return v;
            if (fv * fprev < 0.0) {
                lo = std::min(prev, v);
                hi = std::max(prev, v);
                flo = (lo == prev) ? fprev : fv;
                bracketed = true;
                break;
            }
            prev = v;
            fprev = fv;
        }
        span *= 2.0;
    }
    if (!bracketed)
        fail(ErrorCode::NoConvergence, "no root bracket found for a scalar residual equation");

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        if (std::abs(fx) <= tol) return x;
        if (fx * flo < 0.0) hi = x;
        else { lo = x; flo = fx; }

        const double h = 1e-7 * (1.0 + std::abs(x));
        const double d = (f(x + h) - fx) / h;
        double next = (d != 0.0) ? x - fx / d : lo;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi); // bisection safeguard
        x = next;
    }
    const double fx = f(x);
    if (std::abs(fx) <= tol * 10.0) return x;
    fail(ErrorCode::NoConvergence, "scalar Newton did not converge on a residual equation");
}

std::vector<double> apply_assignment(std::size_t len, const BetaAssignment& fixed) {
    std::vector<double> beta(len, 0.0);
    for (const auto& [k, v] : fixed) {
        if (k >= len) fail(ErrorCode::Dimension, "fixed input coefficient index out of range");
        beta[k] = v;
    }
    return beta;
}

int probe_degree(const std::function<double(double)>& f, double around, double scale) {
    constexpr int kMaxDegree = 7;
    const double step = std::max(1.0, std::abs(around));
    std::vector<double> samples(kMaxDegree + 2);
    for (int j = 0; j < kMaxDegree + 2; ++j)
        samples[j] = f(around + static_cast<double>(j) * step);
    double mag = scale;
    for (double s : samples) mag = std::max(mag, std::abs(s));

    int degree = 0;
    std::vector<double> diff = samples;
    for (int d = 1; d <= kMaxDegree + 1; ++d) {
        for (std::size_t j = 0; j + 1 < diff.size(); ++j) diff[j] = diff[j + 1] - diff[j];
        diff.pop_back();
        double dmax = 0.0;
        for (double v : diff) dmax = std::max(dmax, std::abs(v));
        if (dmax > 1e-7 * mag) degree = d;
    }
    return degree;
}

} // namespace

TruncatedSeries nonlinear_residual(const ObserverForm& sys, const std::vector<double>& alpha,
                                   const std::vector<double>& beta, double t0) {
    const std::size_t N = alpha.empty() ? 0 : alpha.size() - 1;
    const std::size_t Np = beta.empty() ? 0 : beta.size() - 1;
    const std::size_t trunc = working_order(N, Np, sys.n);
    const Basis basis = Basis::power();
    auto r = eliminate_states(sys, TruncatedSeries(basis, alpha), TruncatedSeries(basis, beta),
                              trunc)
                 .residual;
    if (t0 != 0.0) r = series_recenter(r, t0);
    return r;
}

IcFixResult fix_initial_conditions(const ObserverForm& sys, const std::vector<double>& alpha,
                                   const InitialCondition& ic, const Basis& basis) {
    sys.validate();
    require_power(basis);
    if (ic.t0 != 0.0)
        fail(ErrorCode::Dimension, "nonlinear initial-condition fixing requires t0 = 0");
    if (ic.x0.size() != sys.n) fail(ErrorCode::Dimension, "initial state must have n entries");
    if (alpha.empty()) fail(ErrorCode::Dimension, "alpha must not be empty");

    IcFixResult out;
    out.alpha = alpha;
    out.alpha[0] = ic.x0[0]; // x1(0) = y(0) = alpha_0 in the power basis

    // Working input length: x_{i+1} involves u-derivatives up to order i-1,
    // so indices up to n-2 can be pinned here.
    const std::size_t blen = sys.n + 1;
    const std::size_t trunc = working_order(out.alpha.size() - 1, blen - 1, sys.n);

    auto state_at_zero = [&](std::size_t state_index, const std::vector<double>& beta) {
        auto par = eliminate_states(sys, TruncatedSeries(Basis::power(), out.alpha),
                                    TruncatedSeries(Basis::power(), beta), trunc);
        return par.states[state_index].coeffs[0];
    };

    for (std::size_t s = 1; s < sys.n; ++s) {
        auto eval = [&](std::size_t k, double v) {
            auto beta = apply_assignment(blen, out.beta_fixed);
            beta[k] = v;
            return state_at_zero(s, beta) - ic.x0[s];
        };

        const auto beta_now = apply_assignment(blen, out.beta_fixed);
        const double base = state_at_zero(s, beta_now) - ic.x0[s];
        const double scale = std::max({1.0, std::abs(base), std::abs(ic.x0[s])});

        std::size_t chosen = blen;
        for (std::size_t k = 0; k < blen; ++k) {
            if (out.beta_fixed.count(k)) continue;
            const double probe = eval(k, beta_now[k] + 1.0) - base;
            if (std::abs(probe) > 1e-10 * scale) { chosen = k; break; }
        }
        if (chosen == blen) {
            if (std::abs(base) <= 1e-9 * scale) continue; // already satisfied, nothing to pin
            fail(ErrorCode::SingularIC,
                 "initial condition on x" + std::to_string(s + 1) +
                     " does not involve any input coefficient (multiplier vanished)");
        }
        try {
            const double root =
                scalar_solve([&](double v) { return eval(chosen, v); }, 1e-13 * scale, 100);
            out.beta_fixed[chosen] = root;
        } catch (const ToolkitError& e) {
            if (e.code() == ErrorCode::NoConvergence)
                throw ToolkitError(ErrorCode::SingularIC,
                                   "initial condition on x" + std::to_string(s + 1) +
                                       " cannot be met: " + e.what());
            throw;
        }
    }
    return out;
}

NonlinearInverse sequential_eliminate(const ObserverForm& sys, const std::vector<double>& alpha,
                                      const BetaAssignment& beta_fixed,
                                      const NonlinearSolveConfig& cfg) {
    sys.validate();
    if (cfg.Nprime < 1) fail(ErrorCode::Dimension, "Nprime must be at least 1");
    const std::size_t blen = cfg.Nprime + 1;
    std::vector<double> beta = apply_assignment(blen, beta_fixed);

    std::vector<std::size_t> unsolved;
    for (std::size_t k = 0; k < blen; ++k)
        if (!beta_fixed.count(k)) unsolved.push_back(k);

    const std::size_t N = alpha.empty() ? 0 : alpha.size() - 1;
    const std::size_t trunc = working_order(N, cfg.Nprime, sys.n);

    auto residual = [&](const std::vector<double>& b) {
        return nonlinear_residual(sys, alpha, b, 0.0).coeffs;
    };

    NonlinearInverse out;
    out.alpha = alpha;
    out.t0 = 0.0;
    out.residual_scale = std::max(1.0, inf_norm(residual(beta)));

    std::size_t eq = 0;
    while (!unsolved.empty() && eq <= trunc) {
        const auto r_now = residual(beta);
        const double r_eq = r_now[eq];

        // Lowest-index unsolved beta this equation actually involves.
        std::size_t chosen = blen;
        for (std::size_t k : unsolved) {
            auto probe = beta;
            probe[k] += std::max(1.0, std::abs(beta[k]));
            const double shifted = residual(probe)[eq];
            if (std::abs(shifted - r_eq) > cfg.pivot_tol * out.residual_scale) {
                chosen = k;
                break;
            }
        }

        if (chosen == blen) {
            if (std::abs(r_eq) <= cfg.newton_tol * out.residual_scale * 1e2) {
                ++eq; // equation already satisfied, consume it (not counted in R)
                continue;
            }
            // Stalled: hand the remaining unknowns to the stacked Newton.
            BetaAssignment fixed_now = beta_fixed;
            for (std::size_t k = 0; k < blen; ++k)
                if (!std::count(unsolved.begin(), unsolved.end(), k)) fixed_now[k] = beta[k];
            auto refined = newton_refine(sys, alpha, fixed_now, beta, cfg);
            refined.newton_fallback = true;
            return refined;
        }

        auto f = [&](double v) {
            auto b = beta;
            b[chosen] = v;
            return residual(b)[eq];
        };
        double eq_scale = 1.0;
        beta[chosen] =
            scalar_solve(f, cfg.newton_tol * out.residual_scale, cfg.max_newton_iter, &eq_scale);
        unsolved.erase(std::find(unsolved.begin(), unsolved.end(), chosen));
        out.equations_used.push_back(eq);
        out.equation_scales.push_back(eq_scale);
        ++eq;
    }
    if (!unsolved.empty())
        fail(ErrorCode::NoConvergence,
             "ran out of residual equations with input coefficients still unassigned");

    out.beta = beta;

    const auto r_final = residual(beta);
    for (std::size_t k = 0; k < out.equations_used.size(); ++k)
        out.matched_residual = std::max(
            out.matched_residual, std::abs(r_final[out.equations_used[k]]) / out.equation_scales[k]);

    // The one-unknown-per-equation walk assumes each equation introduces a
    // single new coefficient. Systems where a later solve feeds back into an
    // earlier equation leave the head residual standing; hand those to the
    // stacked Newton instead.
    if (out.matched_residual > std::max(1e-9, cfg.newton_tol * 1e3)) {
        bool contiguous = true;
        for (std::size_t k = 0; k < out.equations_used.size(); ++k)
            contiguous &= out.equations_used[k] == k;
        if (contiguous) {
            auto refined = newton_refine(sys, alpha, beta_fixed, beta, cfg);
            refined.newton_fallback = true;
            return refined;
        }
        fail(ErrorCode::NoConvergence,
             "sequential elimination left coupled equations unresolved");
    }

    const std::size_t head_end =
        out.equations_used.empty() ? 0 : out.equations_used.back() + 1;
    for (std::size_t i = head_end; i < r_final.size(); ++i)
        out.residual_tail = std::max(out.residual_tail, std::abs(r_final[i]));

    // Degree diagnostics at the solved point.
    for (std::size_t i : out.equations_used) {
        std::vector<int> row(blen, 0);
        for (std::size_t k = 0; k < blen; ++k) {
            auto f = [&](double v) {
                auto b = beta;
                b[k] = v;
                return residual(b)[i];
            };
            row[k] = probe_degree(f, beta[k], out.residual_scale);
        }
        out.degree_table.push_back(std::move(row));
    }
    return out;
}

NonlinearInverse newton_refine(const ObserverForm& sys, const std::vector<double>& alpha,
                               const BetaAssignment& beta_fixed,
                               const std::vector<double>& beta_seed,
                               const NonlinearSolveConfig& cfg) {
    sys.validate();
    const std::size_t blen = cfg.Nprime + 1;
    if (beta_seed.size() != blen)
        fail(ErrorCode::Dimension, "seed must provide Nprime + 1 input coefficients");
    for (const auto& [k, v] : beta_fixed) {
        (void)v;
        if (k >= blen) fail(ErrorCode::Dimension, "fixed input coefficient index out of range");
    }

    std::vector<std::size_t> unsolved;
    for (std::size_t k = 0; k < blen; ++k)
        if (!beta_fixed.count(k)) unsolved.push_back(k);
    const std::size_t R = unsolved.size();

    std::vector<double> beta = beta_seed;
    for (const auto& [k, v] : beta_fixed) beta[k] = v;

    auto residual = [&](const std::vector<double>& b) {
        return nonlinear_residual(sys, alpha, b, 0.0).coeffs;
    };

    NonlinearInverse out;
    out.alpha = alpha;
    out.t0 = 0.0;
    {
        auto zeroed = apply_assignment(blen, beta_fixed);
        out.residual_scale = std::max(1.0, inf_norm(residual(zeroed)));
    }
    const double tol = cfg.newton_tol * out.residual_scale;

    if (R > 0) {
        auto head = [&](const std::vector<double>& b) {
            auto r = residual(b);
            return std::vector<double>(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(R));
        };

        auto F = head(beta);
        bool converged = inf_norm(F) <= tol;
        for (int it = 0; it < cfg.max_newton_iter && !converged; ++it) {
            Matrix J(R, R);
            for (std::size_t j = 0; j < R; ++j) {
                const double h = 1e-7 * (1.0 + std::abs(beta[unsolved[j]]));
                auto probe = beta;
                probe[unsolved[j]] += h;
                const auto Fp = head(probe);
                for (std::size_t i = 0; i < R; ++i) J(i, j) = (Fp[i] - F[i]) / h;
            }
            Matrix rhs(R, 1);
            for (std::size_t i = 0; i < R; ++i) rhs(i, 0) = -F[i];
            auto step = lu_solve(J, rhs, 1e-14);
            if (!step)
                fail(ErrorCode::NoConvergence, "singular Jacobian in the stacked Newton refinement");

            const double base = inf_norm(F);
            double damping = 1.0;
            std::vector<double> next = beta;
            std::vector<double> Fn = F;
            for (int halving = 0; halving < 40; ++halving) {
                next = beta;
                for (std::size_t i = 0; i < R; ++i)
                    next[unsolved[i]] = beta[unsolved[i]] + damping * step->x(i, 0);
                Fn = head(next);
                if (inf_norm(Fn) < base) break;
                damping *= 0.5;
            }
            beta = next;
            F = Fn;
            converged = inf_norm(F) <= tol;
        }
        if (!converged)
            fail(ErrorCode::NoConvergence, "stacked Newton refinement did not converge after " +
                                               std::to_string(cfg.max_newton_iter) + " iterations");
        for (std::size_t i = 0; i < R; ++i) out.equations_used.push_back(i);
    }

    out.beta = beta;
    const auto r_final = residual(beta);
    const auto r_zeroed = residual(apply_assignment(blen, beta_fixed));
    for (std::size_t i = 0; i < R; ++i) {
        const double eq_scale = std::max(1.0, std::abs(r_zeroed[i]));
        out.equation_scales.push_back(eq_scale);
        out.matched_residual = std::max(out.matched_residual, std::abs(r_final[i]) / eq_scale);
    }
    for (std::size_t i = R; i < r_final.size(); ++i)
        out.residual_tail = std::max(out.residual_tail, std::abs(r_final[i]));

    for (std::size_t i : out.equations_used) {
        std::vector<int> row(blen, 0);
        for (std::size_t k = 0; k < blen; ++k) {
            auto f = [&](double v) {
                auto b = beta;
                b[k] = v;
                return residual(b)[i];
            };
            row[k] = probe_degree(f, beta[k], out.residual_scale);
        }
        out.degree_table.push_back(std::move(row));
    }
    return out;
}

} // namespace seriesinv
