#pragma once

// Minimal parser for the TOML subset the config and scenario files use:
// [section] headers, key = value lines, quoted strings, numbers, booleans
// and single- or multi-line arrays of those. '#' starts a comment.

#include <cctype>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"

namespace seriesinv::tomlite {

struct Value {
    enum class Type { String, Number, Array };
    Type type = Type::Number;
    std::string str;
    double num = 0.0;
    std::vector<Value> items;

    bool is_string() const { return type == Type::String; }
    bool is_number() const { return type == Type::Number; }
    bool is_array() const { return type == Type::Array; }
};

using Table = std::map<std::string, Value>;
using Document = std::map<std::string, Table>;

namespace detail {

inline void strip_comment(std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        else if (line[i] == '#' && !in_string) { line.erase(i); return; }
    }
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline Value parse_scalar(const std::string& text, int line_no) {
    std::string t = trim(text);
    if (t.empty()) fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty value");
    Value v;
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"')
            fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unterminated string");
        v.type = Value::Type::String;
        v.str = t.substr(1, t.size() - 2);
        return v;
    }
    if (t == "true" || t == "false") {
        v.type = Value::Type::Number;
        v.num = (t == "true") ? 1.0 : 0.0;
        return v;
    }
    char* end = nullptr;
    v.num = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0')
        fail(ErrorCode::ParseError,
             "line " + std::to_string(line_no) + ": cannot parse value '" + t + "'");
    v.type = Value::Type::Number;
    return v;
}

inline Value parse_array(const std::string& body, int line_no) {
    Value v;
    v.type = Value::Type::Array;
    std::string elem;
    bool in_string = false;
    for (char c : body) {
        if (c == '"') { in_string = !in_string; elem += c; continue; }
        if (c == ',' && !in_string) {
            if (!trim(elem).empty()) v.items.push_back(parse_scalar(elem, line_no));
            elem.clear();
            continue;
        }
        elem += c;
    }
    if (!trim(elem).empty()) v.items.push_back(parse_scalar(elem, line_no));
    return v;
}

} // namespace detail

inline Document parse(const std::string& text) {
    Document doc;
    std::string section;
    std::string pending_key;
    std::string pending_array; // accumulates a multi-line array body
    bool in_array = false;
    int array_start_line = 0;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;
        ++line_no;

        detail::strip_comment(line);
        std::string t = detail::trim(line);

        if (in_array) {
            pending_array += " " + t;
            std::size_t close = pending_array.find(']');
            if (close != std::string::npos) {
                doc[section][pending_key] =
                    detail::parse_array(pending_array.substr(0, close), array_start_line);
                in_array = false;
                pending_array.clear();
            }
            continue;
        }
        if (t.empty()) continue;

        if (t.front() == '[' && t.back() == ']') {
            section = detail::trim(t.substr(1, t.size() - 2));
            if (section.empty())
                fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty section name");
            doc[section]; // materialize even if empty
            continue;
        }

        std::size_t eq = std::string::npos;
        bool in_string = false;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] == '"') in_string = !in_string;
            else if (t[i] == '=' && !in_string) { eq = i; break; }
        }
        if (eq == std::string::npos)
            fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");

        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty())
            fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");

        if (!value.empty() && value.front() == '[') {
            std::string body = value.substr(1);
            std::size_t close_pos = std::string::npos;
            bool str = false;
            for (std::size_t i = 0; i < body.size(); ++i) {
                if (body[i] == '"') str = !str;
                else if (body[i] == ']' && !str) { close_pos = i; break; }
            }
            if (close_pos != std::string::npos) {
                doc[section][key] = detail::parse_array(body.substr(0, close_pos), line_no);
            } else {
                in_array = true;
                pending_key = key;
                pending_array = body;
                array_start_line = line_no;
            }
            continue;
        }

        doc[section][key] = detail::parse_scalar(value, line_no);
    }
    if (in_array)
        fail(ErrorCode::ParseError,
             "line " + std::to_string(array_start_line) + ": unterminated array");
    return doc;
}

inline const Table* find_section(const Document& doc, const std::string& name) {
    auto it = doc.find(name);
    return it == doc.end() ? nullptr : &it->second;
}

inline const Value* find_key(const Table& table, const std::string& key) {
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
}

} // namespace seriesinv::tomlite
