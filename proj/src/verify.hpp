#pragma once

#include <string>
#include <vector>

#include "model.hpp"
#include "series.hpp"

namespace seriesinv {

enum class IntegrationMethod { Euler, RK4 };
enum class Quadrature { Trapezoid, LeftRiemann };

struct SimResult {
    std::vector<double> times;               // uniform grid t0..tf
    std::vector<std::vector<double>> states; // n trajectories, sampled on the grid
    std::vector<double> y_sim;               // x1 samples
    std::vector<double> y_ref;               // reference output samples
    IntegrationMethod method = IntegrationMethod::Euler;
    double h = 0.0;
};

struct VerificationReport {
    double E = 0.0;            // integral of |y_sim - y_ref| over the horizon
    double max_abs_error = 0.0;
    IntegrationMethod method = IntegrationMethod::Euler;
    double h = 0.0;
};

/// Fixed-step explicit integration of the observer-form dynamics under
/// u(t) = series_eval(u, t), sampling the reference series on the same grid.
/// Throws NonFinite (with the offending time) if the state blows up.
SimResult integrate_forward(const ObserverForm& sys, const TruncatedSeries& u,
                            const TruncatedSeries& y_ref, const InitialCondition& ic, double tf,
                            double h, IntegrationMethod method);

VerificationReport error_metric(const SimResult& res, Quadrature quadrature = Quadrature::Trapezoid);

/// CSV trace: t, y_ref, y_sim, x1..xn, u. `significant_digits` <= 0 selects
/// full (round-trip) precision.
void write_csv(const std::string& path, const SimResult& res, const TruncatedSeries& u,
               int significant_digits = 6);

std::string method_name(IntegrationMethod method);

} // namespace seriesinv
