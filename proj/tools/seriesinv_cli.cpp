// Command-line front end for the seriesinv shared library: loads a system
// plus scenario description, runs inversion and forward-simulation checks,
// and emits reports and CSV traces.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "seriesinv.h"
#include "tomlite.hpp"

namespace fs = std::filesystem;
using seriesinv::tomlite::Document;
using seriesinv::tomlite::Table;
using seriesinv::tomlite::Value;

namespace {

constexpr int kExitMathFailure = 2;

struct CliFailure {
    int code;
    std::string message;
};

[[noreturn]] void die(int code, const std::string& message) { throw CliFailure{code, message}; }

[[noreturn]] void die_status(si_status_t status, const std::string& context) {
    die(kExitMathFailure, context + ": " + si_last_error() + " [status " +
                              std::to_string(static_cast<int>(status)) + "]");
}

void check(si_status_t status, const std::string& context) {
    if (status != SI_OK) die_status(status, context);
}

struct SystemHandle {
    si_system* ptr = nullptr;
    ~SystemHandle() { si_system_free(ptr); }
};
struct InverseHandle {
    si_inverse* ptr = nullptr;
    ~InverseHandle() { si_inverse_free(ptr); }
};
struct NlHandle {
    si_nlinverse* ptr = nullptr;
    ~NlHandle() { si_nlinverse_free(ptr); }
};
struct SimHandle {
    si_sim* ptr = nullptr;
    ~SimHandle() { si_sim_free(ptr); }
};

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

struct Scenario {
    fs::path system_path;
    si_basis_kind basis = SI_BASIS_POWER;
    double rate = 1.0;
    size_t N = 3;
    size_t Nprime = 3;

    std::vector<si_boundary_condition> boundary;
    std::vector<double> alpha;
    bool has_alpha = false;

    std::vector<double> x0;
    bool has_x0 = false;
    double steady_state_y = 0.0;
    bool has_steady_state = false;
    double u_seed = 0.0; // selects the equilibrium branch for steady_state

    double t0 = 0.0;
    double tf = 1.0;

    si_method method = SI_METHOD_EULER;
    double step = 1e-4;
};

double require_number(const Table& table, const char* section, const char* key) {
    const Value* v = seriesinv::tomlite::find_key(table, key);
    if (!v || !v->is_number())
        die(kExitMathFailure, std::string("scenario: [") + section + "] must set numeric '" + key + "'");
    return v->num;
}

/// "y(t0) = 0.9", "y'(tf) = 0", "y''(t0) = 1.5" -> (time, derivative, value)
si_boundary_condition parse_boundary(const std::string& text, double t0, double tf) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;

    std::size_t pos = 0;
    if (pos >= s.size() || s[pos] != 'y')
        die(kExitMathFailure, "boundary condition must start with y: '" + text + "'");
    ++pos;
    unsigned derivative = 0;
    while (pos < s.size() && s[pos] == '\'') {
        ++derivative;
        ++pos;
    }
    if (pos >= s.size() || s[pos] != '(')
        die(kExitMathFailure, "expected '(' in boundary condition '" + text + "'");
    const std::size_t close = s.find(')', pos);
    if (close == std::string::npos)
        die(kExitMathFailure, "expected ')' in boundary condition '" + text + "'");
    const std::string at = s.substr(pos + 1, close - pos - 1);
    double time = 0.0;
    if (at == "t0") time = t0;
    else if (at == "tf") time = tf;
    else die(kExitMathFailure, "boundary time must be t0 or tf in '" + text + "'");
    pos = close + 1;
    if (pos >= s.size() || s[pos] != '=')
        die(kExitMathFailure, "expected '=' in boundary condition '" + text + "'");
    const std::string value_text = s.substr(pos + 1);
    char* end = nullptr;
    const double value = std::strtod(value_text.c_str(), &end);
    if (end == value_text.c_str() || *end != '\0')
        die(kExitMathFailure, "cannot parse value in boundary condition '" + text + "'");
    return si_boundary_condition{time, derivative, value};
}

Scenario load_scenario(const fs::path& path) {
    std::ifstream in(path);
    if (!in) die(kExitMathFailure, "cannot open scenario file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();

    Document doc;
    try {
        doc = seriesinv::tomlite::parse(buf.str());
    } catch (const seriesinv::ToolkitError& e) {
        die(kExitMathFailure, path.string() + ": " + e.what());
    }

    Scenario sc;
    const Table* system = seriesinv::tomlite::find_section(doc, "system");
    if (!system) die(kExitMathFailure, "scenario: missing [system] section");
    const Value* sys_path = seriesinv::tomlite::find_key(*system, "path");
    if (!sys_path || !sys_path->is_string())
        die(kExitMathFailure, "scenario: [system] must set path = \"...\"");
    sc.system_path = path.parent_path() / sys_path->str;

    if (const Table* series = seriesinv::tomlite::find_section(doc, "series")) {
        if (const Value* basis = seriesinv::tomlite::find_key(*series, "basis")) {
            if (!basis->is_string())
                die(kExitMathFailure, "scenario: basis must be a string");
            if (basis->str == "power") sc.basis = SI_BASIS_POWER;
            else if (basis->str == "exponential") sc.basis = SI_BASIS_EXPONENTIAL;
            else die(kExitMathFailure, "scenario: basis must be power or exponential");
        }
        if (const Value* rate = seriesinv::tomlite::find_key(*series, "rate"))
            sc.rate = rate->num;
        sc.N = static_cast<size_t>(require_number(*series, "series", "N"));
        if (const Value* np = seriesinv::tomlite::find_key(*series, "Nprime"))
            sc.Nprime = static_cast<size_t>(np->num);
        else
            sc.Nprime = sc.N; // input order defaults to the output order
        if (sc.Nprime < 1) die(kExitMathFailure, "scenario: Nprime must be at least 1");
    }

    if (const Table* horizon = seriesinv::tomlite::find_section(doc, "horizon")) {
        sc.t0 = require_number(*horizon, "horizon", "t0");
        sc.tf = require_number(*horizon, "horizon", "tf");
    }

    if (const Table* traj = seriesinv::tomlite::find_section(doc, "trajectory")) {
        if (const Value* bc = seriesinv::tomlite::find_key(*traj, "boundary")) {
            if (!bc->is_array())
                die(kExitMathFailure, "scenario: boundary must be an array of strings");
            for (const auto& item : bc->items) {
                if (!item.is_string())
                    die(kExitMathFailure, "scenario: boundary entries must be strings");
                sc.boundary.push_back(parse_boundary(item.str, sc.t0, sc.tf));
            }
        }
        if (const Value* alpha = seriesinv::tomlite::find_key(*traj, "alpha")) {
            if (!alpha->is_array())
                die(kExitMathFailure, "scenario: alpha must be an array of numbers");
            for (const auto& item : alpha->items) sc.alpha.push_back(item.num);
            sc.has_alpha = true;
        }
    }

    if (const Table* initial = seriesinv::tomlite::find_section(doc, "initial")) {
        if (const Value* x0 = seriesinv::tomlite::find_key(*initial, "x0")) {
            if (!x0->is_array())
                die(kExitMathFailure, "scenario: x0 must be an array of numbers");
            for (const auto& item : x0->items) sc.x0.push_back(item.num);
            sc.has_x0 = true;
        }
        if (const Value* ss = seriesinv::tomlite::find_key(*initial, "steady_state")) {
            sc.steady_state_y = ss->num;
            sc.has_steady_state = true;
        }
        if (const Value* us = seriesinv::tomlite::find_key(*initial, "u_seed"))
            sc.u_seed = us->num;
    }

    if (const Table* verify = seriesinv::tomlite::find_section(doc, "verify")) {
        if (const Value* method = seriesinv::tomlite::find_key(*verify, "method")) {
            if (method->str == "euler") sc.method = SI_METHOD_EULER;
            else if (method->str == "rk4") sc.method = SI_METHOD_RK4;
            else die(kExitMathFailure, "scenario: verify method must be euler or rk4");
        }
        if (const Value* step = seriesinv::tomlite::find_key(*verify, "step"))
            sc.step = step->num;
    }
    return sc;
}

std::vector<double> resolve_x0(const Scenario& sc, si_system* sys, size_t n, double* u_ss,
                               bool* have_uss) {
    if (sc.has_x0) {
        if (sc.x0.size() != n)
            die(kExitMathFailure, "scenario: x0 must list all " + std::to_string(n) + " states");
        return sc.x0;
    }
    if (!sc.has_steady_state)
        die(kExitMathFailure, "scenario: [initial] needs x0 = [...] or steady_state = <y_ss>");
    std::vector<double> x(n, 0.0);
    double u = 0.0;
    int multiple = 0;
    check(si_steady_state(sys, sc.steady_state_y, nullptr, sc.u_seed, x.data(), &u, &multiple),
          "steady_state");
    if (multiple)
        std::cout << "note: multiple equilibria found for y_ss = " << fmt(sc.steady_state_y)
                  << "; using the one nearest the seed (u = " << fmt(u) << ")\n";
    if (u_ss) *u_ss = u;
    if (have_uss) *have_uss = true;
    return x;
}

std::vector<double> resolve_alpha(const Scenario& sc) {
    if (sc.has_alpha) {
        if (sc.alpha.size() != sc.N + 1)
            die(kExitMathFailure, "scenario: alpha must list N + 1 coefficients");
        return sc.alpha;
    }
    if (sc.boundary.empty())
        die(kExitMathFailure, "scenario: [trajectory] needs boundary = [...] or alpha = [...]");
    std::vector<double> alpha(sc.N + 1, 0.0);
    std::vector<int> is_free(sc.N + 1, 0);
    check(si_interpolate(sc.basis, sc.rate, sc.N, sc.t0, sc.tf, sc.boundary.data(),
                         sc.boundary.size(), alpha.data(), is_free.data()),
          "interpolate");
    for (int f : is_free)
        if (f)
            std::cout << "note: boundary conditions leave free output coefficients "
                         "(kept at zero)\n";
    return alpha;
}

void print_affine_row(const std::string& lhs, const std::vector<double>& row,
                      const std::vector<std::string>& names, int digits) {
    double scale = 0.0;
    for (double v : row) scale = std::max(scale, std::abs(v));
    std::cout << "  " << lhs << " =";
    bool first = true;
    for (size_t j = 0; j < row.size(); ++j) {
        if (row[j] == 0.0 || std::abs(row[j]) <= 1e-12 * scale) continue;
        const double v = row[j];
        if (first) {
            std::cout << " ";
            if (v < 0) std::cout << "-";
            first = false;
        } else {
            std::cout << (v < 0 ? " - " : " + ");
        }
        const double mag = std::abs(v);
        if (names[j] == "1") std::cout << fmt(mag, digits);
        else if (mag == 1.0) std::cout << names[j];
        else std::cout << fmt(mag, digits) << "*" << names[j];
    }
    if (first) std::cout << " 0";
    std::cout << "\n";
}

std::string role_name(int role) {
    switch (role) {
        case SI_ROLE_RESIDUAL: return "residual";
        case SI_ROLE_IC: return "ic";
        default: return "free";
    }
}

struct LinearReport {
    std::vector<double> alpha;
    std::vector<double> beta;
};

LinearReport report_linear(si_system* sys, const Scenario& sc, bool instantiate_traj, int digits) {
    size_t n = 0;
    check(si_system_order(sys, &n), "system order");

    const double* x0 = nullptr;
    std::vector<double> x0_store;
    if (sc.has_x0 || sc.has_steady_state) {
        x0_store = resolve_x0(sc, sys, n, nullptr, nullptr);
        x0 = x0_store.data();
    }

    InverseHandle model;
    check(si_linear_invert(sys, sc.basis, sc.rate, sc.N, sc.Nprime, x0, sc.t0, &model.ptr),
          "invert");

    size_t free_count = 0, param_count = 0;
    check(si_inverse_counts(model.ptr, &free_count, &param_count), "model counts");

    std::vector<std::string> names(param_count);
    for (size_t j = 0; j < param_count; ++j) {
        char buf[32];
        check(si_inverse_param_name(model.ptr, j, buf, sizeof buf), "param name");
        names[j] = buf;
    }

    std::cout << "linear inverse model: N = " << sc.N << ", N' = " << sc.Nprime << "\n";
    std::cout << "free output coefficients:";
    if (free_count == 0) std::cout << " none";
    for (size_t i = 0; i < free_count; ++i) {
        size_t idx = 0;
        check(si_inverse_free_alpha_index(model.ptr, i, &idx), "free index");
        std::cout << " a" << idx;
    }
    std::cout << "\n";

    std::vector<int> alpha_roles(sc.N + 1), beta_roles(sc.Nprime + 1);
    check(si_inverse_roles(model.ptr, alpha_roles.data(), beta_roles.data()), "roles");

    std::cout << "output coefficients:\n";
    std::vector<double> row(param_count);
    for (size_t i = 0; i <= sc.N; ++i) {
        check(si_inverse_alpha_row(model.ptr, i, row.data()), "alpha row");
        print_affine_row("a" + std::to_string(i) + " [" + role_name(alpha_roles[i]) + "]", row,
                         names, digits);
    }
    std::cout << "input coefficients:\n";
    for (size_t i = 0; i <= sc.Nprime; ++i) {
        check(si_inverse_beta_row(model.ptr, i, row.data()), "beta row");
        print_affine_row("b" + std::to_string(i) + " [" + role_name(beta_roles[i]) + "]", row,
                         names, digits);
    }

    LinearReport out;
    if (!instantiate_traj) return out;

    std::vector<double> full_alpha;
    if (sc.has_alpha || !sc.boundary.empty()) {
        full_alpha = resolve_alpha(sc);
    } else {
        return out; // maps only
    }
    std::vector<double> free_values(free_count, 0.0);
    for (size_t i = 0; i < free_count; ++i) {
        size_t idx = 0;
        check(si_inverse_free_alpha_index(model.ptr, i, &idx), "free index");
        free_values[i] = full_alpha[idx];
    }
    out.alpha.resize(sc.N + 1);
    out.beta.resize(sc.Nprime + 1);
    check(si_inverse_instantiate(model.ptr, free_values.data(), free_values.size(),
                                 out.alpha.data(), out.beta.data()),
          "instantiate");
    std::cout << "instantiated trajectory:\n  alpha = [";
    for (size_t i = 0; i < out.alpha.size(); ++i)
        std::cout << (i ? ", " : "") << fmt(out.alpha[i], digits);
    std::cout << "]\n  beta  = [";
    for (size_t i = 0; i < out.beta.size(); ++i)
        std::cout << (i ? ", " : "") << fmt(out.beta[i], digits);
    std::cout << "]\n";
    return out;
}

struct NonlinearReport {
    std::vector<double> alpha;
    std::vector<double> beta;
};

NonlinearReport report_nonlinear(si_system* sys, const Scenario& sc, int digits) {
    size_t n = 0;
    check(si_system_order(sys, &n), "system order");

    double u_ss = 0.0;
    bool have_uss = false;
    const auto x0 = resolve_x0(sc, sys, n, &u_ss, &have_uss);
    const auto alpha = resolve_alpha(sc);

    si_nl_config cfg;
    si_nl_config_default(&cfg, sc.Nprime);

    NlHandle model;
    check(si_nonlinear_invert(sys, alpha.data(), alpha.size(), x0.data(), n, sc.t0, &cfg,
                              &model.ptr),
          "nonlinear invert");

    NonlinearReport out;
    out.alpha.resize(alpha.size());
    out.beta.resize(sc.Nprime + 1);
    check(si_nlinverse_alpha(model.ptr, out.alpha.data(), out.alpha.size()), "alpha");
    check(si_nlinverse_beta(model.ptr, out.beta.data(), out.beta.size()), "beta");

    size_t used = 0;
    double matched = 0.0, tail = 0.0, scale = 0.0;
    int fallback = 0;
    check(si_nlinverse_info(model.ptr, &used, &matched, &tail, &scale, &fallback), "info");

    std::cout << "nonlinear inverse model: N = " << sc.N << ", N' = " << sc.Nprime << "\n";
    if (sc.has_steady_state && have_uss)
        std::cout << "initial state from steady state at y_ss = " << fmt(sc.steady_state_y)
                  << " (u_ss = " << fmt(u_ss, digits) << ")\n";
    std::cout << "alpha = [";
    for (size_t i = 0; i < out.alpha.size(); ++i)
        std::cout << (i ? ", " : "") << fmt(out.alpha[i], digits);
    std::cout << "]\nbeta  = [";
    for (size_t i = 0; i < out.beta.size(); ++i)
        std::cout << (i ? ", " : "") << fmt(out.beta[i], digits);
    std::cout << "]\n";
    std::cout << "residual: coefficients 0.." << (used == 0 ? 0 : used - 1)
              << " matched to relative " << fmt(matched, 3) << " (magnitude " << fmt(scale, 3)
              << "), tail max " << fmt(tail, 3);
    if (fallback) std::cout << " [stacked-newton fallback]";
    std::cout << "\n";

    size_t rows = 0, cols = 0;
    check(si_nlinverse_degree_table(model.ptr, nullptr, &rows, &cols), "degree table size");
    std::vector<int> table(rows * cols, 0);
    check(si_nlinverse_degree_table(model.ptr, table.data(), &rows, &cols), "degree table");
    std::cout << "input-coefficient degrees per matched equation:\n";
    std::cout << "  eq\\b ";
    for (size_t c = 0; c < cols; ++c) std::cout << " b" << c;
    std::cout << "\n";
    for (size_t r = 0; r < rows; ++r) {
        std::cout << "  f^(" << r << ")";
        for (size_t c = 0; c < cols; ++c) std::cout << "  " << table[r * cols + c];
        std::cout << "\n";
    }
    return out;
}

/// Samples the instantiated y/u series on a uniform grid (no integration).
void emit_instantiated_csv(const fs::path& dir, const std::string& stem, const Scenario& sc,
                           const std::vector<double>& alpha, const std::vector<double>& beta,
                           int digits) {
    fs::create_directories(dir);
    const fs::path path = dir / (stem + "_trajectory.csv");
    std::ofstream out(path);
    if (!out) die(kExitMathFailure, "cannot write '" + path.string() + "'");

    auto eval = [&](const std::vector<double>& c, double t) {
        if (sc.basis == SI_BASIS_POWER) {
            double acc = 0.0;
            for (size_t i = c.size(); i-- > 0;) acc = acc * t + c[i];
            return acc;
        }
        const double w = std::exp(-sc.rate * t);
        double acc = 0.0;
        for (size_t i = c.size(); i-- > 0;) acc = acc * w + c[i];
        return acc;
    };

    out << "t,y,u\n";
    const int samples = 1000;
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        out << buf;
    };
    for (int k = 0; k <= samples; ++k) {
        const double t = sc.t0 + (sc.tf - sc.t0) * static_cast<double>(k) / samples;
        put(t);
        out << ',';
        put(eval(alpha, t));
        out << ',';
        put(eval(beta, t));
        out << '\n';
    }
    std::cout << "wrote " << path.string() << "\n";
}

int cmd_check(const std::string& system_file) {
    SystemHandle sys;
    check(si_system_parse_file(system_file.c_str(), &sys.ptr), "parse");

    size_t n = 0;
    check(si_system_order(sys.ptr, &n), "order");
    char name[128] = {0};
    si_system_name(sys.ptr, name, sizeof name);

    int linear = 0;
    check(si_system_is_linear(sys.ptr, &linear), "linearity");
    if (name[0]) std::cout << name << ": ";
    if (linear) {
        std::vector<double> g(n), q(n);
        check(si_system_linear_coeffs(sys.ptr, g.data(), q.data()), "linear coefficients");
        std::cout << "linear, n=" << n << ", g=(";
        for (size_t i = 0; i < n; ++i) std::cout << (i ? ", " : "") << fmt(g[i]);
        std::cout << "), q=(";
        for (size_t i = 0; i < n; ++i) std::cout << (i ? ", " : "") << fmt(q[i]);
        std::cout << ")\n";
    } else {
        std::cout << "nonlinear, n=" << n << "\n";
    }
    std::cout << "variable scopes OK\n";
    return 0;
}

int cmd_invert(const std::string& scenario_file, std::optional<size_t> nprime_override,
               const std::string& out_dir, bool full_precision) {
    Scenario sc = load_scenario(scenario_file);
    if (nprime_override) sc.Nprime = *nprime_override;
    const int digits = full_precision ? 17 : 6;

    SystemHandle sys;
    check(si_system_parse_file(sc.system_path.string().c_str(), &sys.ptr), "parse system");
    int linear = 0;
    check(si_system_is_linear(sys.ptr, &linear), "linearity");

    std::vector<double> alpha, beta;
    if (linear) {
        const auto rep = report_linear(sys.ptr, sc, true, digits);
        alpha = rep.alpha;
        beta = rep.beta;
    } else {
        const auto rep = report_nonlinear(sys.ptr, sc, digits);
        alpha = rep.alpha;
        beta = rep.beta;
    }
    if (!out_dir.empty() && !alpha.empty())
        emit_instantiated_csv(out_dir, fs::path(scenario_file).stem().string(), sc, alpha, beta,
                              digits);
    return 0;
}

int cmd_verify(const std::string& scenario_file, std::optional<size_t> nprime_override,
               const std::string& method_override, std::optional<double> step_override,
               const std::vector<size_t>& sweep, const std::string& out_dir,
               bool full_precision) {
    Scenario sc = load_scenario(scenario_file);
    if (nprime_override) sc.Nprime = *nprime_override;
    if (!method_override.empty()) {
        if (method_override == "euler") sc.method = SI_METHOD_EULER;
        else if (method_override == "rk4") sc.method = SI_METHOD_RK4;
        else die(1, "--method must be euler or rk4");
    }
    if (step_override) sc.step = *step_override;
    const int digits = full_precision ? 17 : 6;

    SystemHandle sys;
    check(si_system_parse_file(sc.system_path.string().c_str(), &sys.ptr), "parse system");
    size_t n = 0;
    check(si_system_order(sys.ptr, &n), "order");
    int linear = 0;
    check(si_system_is_linear(sys.ptr, &linear), "linearity");

    std::vector<size_t> orders = sweep;
    if (orders.empty()) orders.push_back(sc.Nprime);

    // Without an [initial] section a linear scenario is simulated from the
    // state the instantiated trajectory itself starts in.
    const bool has_initial = sc.has_x0 || sc.has_steady_state;
    std::vector<double> x0(n, 0.0);
    if (has_initial) x0 = resolve_x0(sc, sys.ptr, n, nullptr, nullptr);
    else if (!linear)
        die(kExitMathFailure, "scenario: nonlinear systems need an [initial] section");

    std::cout << "verification (" << (sc.method == SI_METHOD_EULER ? "euler" : "rk4")
              << ", h = " << fmt(sc.step) << ")\n";
    std::cout << "  N'        E            max|err|\n";

    for (size_t K : orders) {
        Scenario run = sc;
        run.Nprime = K;

        std::vector<double> alpha, beta;
        if (linear) {
            InverseHandle model;
            check(si_linear_invert(sys.ptr, run.basis, run.rate, run.N, run.Nprime,
                                   has_initial ? x0.data() : nullptr, run.t0, &model.ptr),
                  "invert");
            size_t free_count = 0;
            check(si_inverse_counts(model.ptr, &free_count, nullptr), "counts");
            const auto full_alpha = resolve_alpha(run);
            std::vector<double> free_values(free_count, 0.0);
            for (size_t i = 0; i < free_count; ++i) {
                size_t idx = 0;
                check(si_inverse_free_alpha_index(model.ptr, i, &idx), "free index");
                free_values[i] = full_alpha[idx];
            }
            alpha.resize(run.N + 1);
            beta.resize(run.Nprime + 1);
            check(si_inverse_instantiate(model.ptr, free_values.data(), free_values.size(),
                                         alpha.data(), beta.data()),
                  "instantiate");
            if (!has_initial)
                check(si_inverse_states_at(model.ptr, free_values.data(), free_values.size(),
                                           run.t0, x0.data()),
                      "states at t0");
        } else {
            const auto alpha_in = resolve_alpha(run);
            si_nl_config cfg;
            si_nl_config_default(&cfg, run.Nprime);
            NlHandle model;
            check(si_nonlinear_invert(sys.ptr, alpha_in.data(), alpha_in.size(), x0.data(), n,
                                      run.t0, &cfg, &model.ptr),
                  "nonlinear invert");
            alpha.resize(alpha_in.size());
            beta.resize(run.Nprime + 1);
            check(si_nlinverse_alpha(model.ptr, alpha.data(), alpha.size()), "alpha");
            check(si_nlinverse_beta(model.ptr, beta.data(), beta.size()), "beta");
        }

        SimHandle sim;
        check(si_simulate(sys.ptr, run.basis, run.rate, beta.data(), beta.size(), alpha.data(),
                          alpha.size(), x0.data(), n, run.t0, run.tf, run.step, run.method,
                          &sim.ptr),
              "simulate");
        double E = 0.0, max_err = 0.0;
        check(si_sim_error(sim.ptr, SI_QUAD_TRAPEZOID, &E, &max_err), "error metric");
        std::printf("  %-8zu  %-11s  %s\n", K, fmt(E, digits).c_str(), fmt(max_err, digits).c_str());

        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            const fs::path csv = fs::path(out_dir) /
                                 (fs::path(scenario_file).stem().string() + "_N" +
                                  std::to_string(K) + ".csv");
            check(si_sim_write_csv(sim.ptr, csv.string().c_str(), full_precision ? 0 : 6),
                  "write csv");
            std::cout << "  wrote " << csv.string() << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"inverse models for series-defined output trajectories"};
    app.require_subcommand(1);

    std::string system_file;
    auto* check_cmd = app.add_subcommand("check", "validate a system file");
    check_cmd->add_option("system", system_file, "observer-form system config")->required();

    std::string scenario_file, out_dir, method_override;
    std::string precision = "6";
    std::optional<size_t> nprime_override;
    std::optional<double> step_override;

    auto* invert_cmd = app.add_subcommand("invert", "compute an inverse model");
    invert_cmd->add_option("scenario", scenario_file, "scenario file")->required();
    invert_cmd->add_option("--nprime", nprime_override, "override the input series order");
    invert_cmd->add_option("--out", out_dir, "directory for CSV output");
    invert_cmd->add_option("--precision", precision, "6 (default) or full");

    std::vector<size_t> sweep;
    auto* verify_cmd = app.add_subcommand("verify", "invert, simulate forward and report E");
    verify_cmd->add_option("scenario", scenario_file, "scenario file")->required();
    verify_cmd->add_option("--nprime", nprime_override, "override the input series order");
    verify_cmd->add_option("--method", method_override, "euler or rk4");
    verify_cmd->add_option("--step", step_override, "integration step");
    verify_cmd->add_option("--sweep", sweep, "comma-separated input orders")->delimiter(',');
    verify_cmd->add_option("--out", out_dir, "directory for CSV output");
    verify_cmd->add_option("--precision", precision, "6 (default) or full for CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // contract: usage errors exit 1
    }

    const bool full_precision = (precision == "full");
    if (precision != "6" && precision != "full") {
        std::cerr << "error: --precision must be 6 or full\n";
        return 1;
    }

    try {
        if (check_cmd->parsed()) return cmd_check(system_file);
        if (invert_cmd->parsed())
            return cmd_invert(scenario_file, nprime_override, out_dir, full_precision);
        if (verify_cmd->parsed())
            return cmd_verify(scenario_file, nprime_override, method_override, step_override,
                              sweep, out_dir, full_precision);
    } catch (const CliFailure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMathFailure;
    }
    return 1;
}
