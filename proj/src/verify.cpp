#include "verify.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "traj.hpp"

namespace seriesinv {

SimResult integrate_forward(const ObserverForm& sys, const TruncatedSeries& u,
                            const TruncatedSeries& y_ref, const InitialCondition& ic, double tf,
                            double h, IntegrationMethod method) {
    sys.validate();
    if (h <= 0.0) fail(ErrorCode::Dimension, "integration step must be positive");
    if (tf <= ic.t0) fail(ErrorCode::Dimension, "tf must exceed t0");
    if (ic.x0.size() != sys.n) fail(ErrorCode::Dimension, "initial state must have n entries");

    const std::size_t steps = static_cast<std::size_t>(std::ceil((tf - ic.t0) / h - 1e-9));
    const std::size_t n = sys.n;

    SimResult res;
    res.method = method;
    res.h = h;
    res.times.reserve(steps + 1);
    res.states.assign(n, {});
    for (auto& s : res.states) s.reserve(steps + 1);
    res.y_sim.reserve(steps + 1);
    res.y_ref.reserve(steps + 1);

    std::vector<double> x = ic.x0;
    auto record = [&](double t) {
        res.times.push_back(t);
        for (std::size_t i = 0; i < n; ++i) res.states[i].push_back(x[i]);
        res.y_sim.push_back(x[0]);
        res.y_ref.push_back(series_eval(y_ref, t));
    };
    auto check_finite = [&](double t) {
        for (double v : x) {
            if (!std::isfinite(v))
                fail(ErrorCode::NonFinite,
                     "state became non-finite at t = " + std::to_string(t));
        }
    };

    record(ic.t0);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (std::size_t step = 0; step < steps; ++step) {
        const double t = ic.t0 + static_cast<double>(step) * h;
        const double hs = std::min(h, tf - t); // clip the final step onto tf

        if (method == IntegrationMethod::Euler) {
            k1 = dynamics_rhs(sys, x, series_eval(u, t));
            for (std::size_t i = 0; i < n; ++i) x[i] += hs * k1[i];
        } else {
            k1 = dynamics_rhs(sys, x, series_eval(u, t));
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * hs * k1[i];
            k2 = dynamics_rhs(sys, tmp, series_eval(u, t + 0.5 * hs));
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * hs * k2[i];
            k3 = dynamics_rhs(sys, tmp, series_eval(u, t + 0.5 * hs));
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + hs * k3[i];
            k4 = dynamics_rhs(sys, tmp, series_eval(u, t + hs));
            for (std::size_t i = 0; i < n; ++i)
                x[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_finite(t + hs);
        record(t + hs);
    }
    return res;
}

VerificationReport error_metric(const SimResult& res, Quadrature quadrature) {
    VerificationReport report;
    report.method = res.method;
    report.h = res.h;

    const std::size_t m = res.times.size();
    if (m < 2) return report;

    double E = 0.0, max_err = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double dt = res.times[i + 1] - res.times[i];
        const double e0 = std::abs(res.y_sim[i] - res.y_ref[i]);
        const double e1 = std::abs(res.y_sim[i + 1] - res.y_ref[i + 1]);
        E += (quadrature == Quadrature::Trapezoid) ? 0.5 * dt * (e0 + e1) : dt * e0;
        max_err = std::max({max_err, e0, e1});
    }
    report.E = E;
    report.max_abs_error = max_err;
    return report;
}

void write_csv(const std::string& path, const SimResult& res, const TruncatedSeries& u,
               int significant_digits) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");

    const int digits = significant_digits > 0 ? significant_digits : 17;
    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        out << buf;
    };

    out << "t,y_ref,y_sim";
    for (std::size_t i = 0; i < res.states.size(); ++i) out << ",x" << (i + 1);
    out << ",u\n";
    for (std::size_t k = 0; k < res.times.size(); ++k) {
        emit(res.times[k]);
        out << ',';
        emit(res.y_ref[k]);
        out << ',';
        emit(res.y_sim[k]);
        for (const auto& s : res.states) {
            out << ',';
            emit(s[k]);
        }
        out << ',';
        emit(series_eval(u, res.times[k]));
        out << '\n';
    }
}

std::string method_name(IntegrationMethod method) {
    return method == IntegrationMethod::Euler ? "euler" : "rk4";
}

} // namespace seriesinv
