#include "model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tomlite.hpp"

namespace seriesinv {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// "x12" -> variable index 11; anything else -> nullopt.
std::optional<std::size_t> variable_index(const std::string& ident) {
    if (ident.size() < 2 || ident[0] != 'x') return std::nullopt;
    for (std::size_t i = 1; i < ident.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(ident[i]))) return std::nullopt;
    const long v = std::strtol(ident.c_str() + 1, nullptr, 10);
    if (v < 1) fail(ErrorCode::ParseError, "bad variable name '" + ident + "' (indices start at x1)");
    return static_cast<std::size_t>(v - 1);
}

struct PolyLexer {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    double read_number() {
        skip_ws();
        char* end = nullptr;
        const double v = std::strtod(text.c_str() + pos, &end);
        if (end == text.c_str() + pos)
            fail(ErrorCode::ParseError, "expected a number in '" + text + "' at offset " +
                                            std::to_string(pos));
        pos = static_cast<std::size_t>(end - text.c_str());
        return v;
    }

    std::string read_ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && is_ident_char(text[pos])) ++pos;
        return text.substr(start, pos - start);
    }

    unsigned read_exponent() {
        skip_ws();
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
            fail(ErrorCode::ParseError, "expected a nonnegative integer exponent in '" + text + "'");
        unsigned v = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
            v = v * 10 + static_cast<unsigned>(text[pos++] - '0');
        return v;
    }
};

} // namespace

MultiPoly parse_polynomial(const std::string& text, std::size_t var_count,
                           const std::map<std::string, double>& params) {
    MultiPoly poly;
    poly.var_count = var_count;

    PolyLexer lex{text};
    if (lex.eof()) fail(ErrorCode::ParseError, "empty polynomial expression");

    while (!lex.eof()) {
        double sign = 1.0;
        while (lex.peek() == '+' || lex.peek() == '-') {
            if (lex.peek() == '-') sign = -sign;
            ++lex.pos;
        }
        if (lex.eof()) fail(ErrorCode::ParseError, "dangling sign in '" + text + "'");

        double coeff = sign;
        std::vector<unsigned> exponents(var_count, 0);
        bool saw_factor = false;

        while (true) {
            char c = lex.peek();
            if (c == '*') {
                if (!saw_factor) fail(ErrorCode::ParseError, "'*' without left factor in '" + text + "'");
                ++lex.pos;
                c = lex.peek();
            } else if (saw_factor && !(std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                                       is_ident_start(c))) {
                break; // end of this monomial
            }

            unsigned exp = 1;
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                double v = lex.read_number();
                if (lex.peek() == '^') {
                    ++lex.pos;
                    exp = lex.read_exponent();
                    v = std::pow(v, static_cast<double>(exp));
                }
                coeff *= v;
            } else if (is_ident_start(c)) {
                const std::string ident = lex.read_ident();
                if (lex.peek() == '^') {
                    ++lex.pos;
                    exp = lex.read_exponent();
                }
                if (auto vi = variable_index(ident)) {
                    if (*vi >= var_count)
                        fail(ErrorCode::VariableScopeError,
                             "variable '" + ident + "' exceeds the declared state count " +
                                 std::to_string(var_count));
                    exponents[*vi] += exp;
                } else {
                    auto it = params.find(ident);
                    if (it == params.end())
                        fail(ErrorCode::ParseError, "unknown identifier '" + ident + "' in '" + text +
                                                        "' (not a variable, not a parameter)");
                    coeff *= std::pow(it->second, static_cast<double>(exp));
                }
            } else {
                fail(ErrorCode::ParseError,
                     "unexpected character '" + std::string(1, c) + "' in '" + text + "'");
            }
            saw_factor = true;

            char next = lex.peek();
            if (next == '\0' || next == '+' || next == '-') break;
            if (next != '*' && !(std::isdigit(static_cast<unsigned char>(next)) || next == '.' ||
                                 is_ident_start(next)))
                fail(ErrorCode::ParseError,
                     "unexpected character '" + std::string(1, next) + "' in '" + text + "'");
        }

        poly.add_term(exponents, coeff);
    }
    return poly;
}

void ObserverForm::validate() const {
    if (n < 1) fail(ErrorCode::SchemaError, "system order n must be at least 1");
    if (g.size() != n)
        fail(ErrorCode::SchemaError, "dynamics must declare exactly n = " + std::to_string(n) +
                                         " input polynomials g, got " + std::to_string(g.size()));
    for (std::size_t i = 0; i < n; ++i) {
        if (g[i].max_variable() > i + 1)
            fail(ErrorCode::VariableScopeError,
                 "g" + std::to_string(i + 1) + " may reference x1..x" + std::to_string(i + 1) +
                     " only, found x" + std::to_string(g[i].max_variable()));
    }
    if (F.max_variable() > n)
        fail(ErrorCode::VariableScopeError,
             "F may reference x1..x" + std::to_string(n) + " only, found x" +
                 std::to_string(F.max_variable()));
    if (!labels.empty() && labels.size() != n)
        fail(ErrorCode::SchemaError, "labels must name all n states");
}

std::string ObserverForm::state_label(std::size_t i) const {
    if (i < labels.size() && !labels[i].empty()) return labels[i];
    return "x" + std::to_string(i + 1);
}

namespace {

std::vector<MultiPoly::Term> sorted_terms(const MultiPoly& p) {
    auto t = p.terms;
    std::sort(t.begin(), t.end(), [](const MultiPoly::Term& a, const MultiPoly::Term& b) {
        return a.exponents < b.exponents;
    });
    return t;
}

bool poly_equal(const MultiPoly& a, const MultiPoly& b) {
    if (a.var_count != b.var_count) return false;
    auto ta = sorted_terms(a), tb = sorted_terms(b);
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i)
        if (ta[i].exponents != tb[i].exponents || ta[i].coeff != tb[i].coeff) return false;
    return true;
}

} // namespace

bool ObserverForm::operator==(const ObserverForm& other) const {
    if (n != other.n || name != other.name || labels != other.labels) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (!poly_equal(g[i], other.g[i])) return false;
    return poly_equal(F, other.F);
}

ObserverForm parse_system(const std::string& config_text) {
    const auto doc = tomlite::parse(config_text);

    const auto* system = tomlite::find_section(doc, "system");
    if (!system) fail(ErrorCode::SchemaError, "missing [system] section");
    const auto* dynamics = tomlite::find_section(doc, "dynamics");
    if (!dynamics) fail(ErrorCode::SchemaError, "missing [dynamics] section");

    ObserverForm sys;
    if (const auto* name = tomlite::find_key(*system, "name"); name && name->is_string())
        sys.name = name->str;

    const auto* nval = tomlite::find_key(*system, "n");
    if (!nval || !nval->is_number()) fail(ErrorCode::SchemaError, "[system] must declare n");
    const double nd = nval->num;
    if (nd < 1.0 || nd != std::floor(nd))
        fail(ErrorCode::SchemaError, "state count n must be a positive integer");
    sys.n = static_cast<std::size_t>(nd);

    if (const auto* labels = tomlite::find_key(*system, "labels")) {
        if (!labels->is_array()) fail(ErrorCode::SchemaError, "labels must be an array of strings");
        for (const auto& item : labels->items) {
            if (!item.is_string()) fail(ErrorCode::SchemaError, "labels must be strings");
            sys.labels.push_back(item.str);
        }
    }

    std::map<std::string, double> params;
    if (const auto* psec = tomlite::find_section(doc, "parameters")) {
        for (const auto& [key, value] : *psec) {
            if (!value.is_number())
                fail(ErrorCode::SchemaError, "parameter '" + key + "' must be a number");
            params[key] = value.num;
        }
    }

    const auto* gval = tomlite::find_key(*dynamics, "g");
    if (!gval || !gval->is_array()) fail(ErrorCode::SchemaError, "[dynamics] must declare g = [...]");
    for (const auto& item : gval->items) {
        if (!item.is_string()) fail(ErrorCode::SchemaError, "entries of g must be polynomial strings");
        sys.g.push_back(parse_polynomial(item.str, sys.n, params));
    }

    const auto* fval = tomlite::find_key(*dynamics, "F");
    if (!fval || !fval->is_string()) fail(ErrorCode::SchemaError, "[dynamics] must declare F");
    sys.F = parse_polynomial(fval->str, sys.n, params);

    sys.validate();
    return sys;
}

ObserverForm parse_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open system file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_system(buf.str());
    } catch (const ToolkitError& e) {
        throw ToolkitError(e.code(), path + ": " + e.what());
    }
}

std::string serialize_system(const ObserverForm& sys) {
    std::ostringstream os;
    os << "[system]\n";
    if (!sys.name.empty()) os << "name = \"" << sys.name << "\"\n";
    os << "n = " << sys.n << "\n";
    if (!sys.labels.empty()) {
        os << "labels = [";
        for (std::size_t i = 0; i < sys.labels.size(); ++i)
            os << (i ? ", " : "") << '"' << sys.labels[i] << '"';
        os << "]\n";
    }
    os << "\n[dynamics]\n";
    os << "g = [";
    for (std::size_t i = 0; i < sys.g.size(); ++i)
        os << (i ? ", " : "") << '"' << sys.g[i].to_string() << '"';
    os << "]\n";
    os << "F = \"" << sys.F.to_string() << "\"\n";
    return os.str();
}

std::optional<LinearForm> as_linear(const ObserverForm& sys) {
    LinearForm lf;
    lf.g.reserve(sys.n);
    for (const auto& gi : sys.g) {
        if (!gi.is_constant()) return std::nullopt;
        lf.g.push_back(gi.constant_value());
    }
    if (!sys.F.is_homogeneous_linear() && !sys.F.terms.empty()) return std::nullopt;
    lf.q.resize(sys.n, 0.0);
    for (std::size_t i = 0; i < sys.n; ++i) lf.q[i] = sys.F.linear_coeff(i);
    return lf;
}

ObserverForm observer_from_linear(const LinearForm& lf) {
    ObserverForm sys;
    sys.n = lf.g.size();
    for (double gi : lf.g) sys.g.push_back(MultiPoly::constant(gi, sys.n));
    MultiPoly F;
    F.var_count = sys.n;
    for (std::size_t i = 0; i < sys.n; ++i) {
        if (lf.q[i] == 0.0) continue;
        std::vector<unsigned> e(sys.n, 0);
        e[i] = 1;
        F.add_term(e, lf.q[i]);
    }
    sys.F = F;
    sys.validate();
    return sys;
}

} // namespace seriesinv
