#pragma once

#include <cctype>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "dagforge/common/error.hpp"
#include "dagforge/common/value.hpp"

// Document layer shared by every serialized artifact (graphs, manifests,
// schemas, run records). Internally everything is an nlohmann::json tree;
// nlohmann keeps object keys sorted, which gives the canonical form its
// "keys sorted" property for free. YAML input goes through yaml-cpp and a
// scalar-inference pass; YAML output uses a deterministic block emitter so
// equal documents always produce equal bytes (content addressing depends on
// this).

namespace dagforge {

namespace detail {

inline bool looks_like_int(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

inline bool looks_like_float(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    bool digits = false, dot = false, exp = false, exp_digits = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            (exp ? exp_digits : digits) = true;
        } else if (c == '.' && !dot && !exp) {
            dot = true;
        } else if ((c == 'e' || c == 'E') && !exp && digits) {
            exp = true;
            if (i + 1 < s.size() && (s[i + 1] == '-' || s[i + 1] == '+')) ++i;
        } else {
            return false;
        }
    }
    if (!digits) return false;
    if (exp && !exp_digits) return false;
    return dot || exp;
}

}  // namespace detail

inline Json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined:
            return Json(nullptr);
        case YAML::NodeType::Scalar: {
            const std::string& s = n.Scalar();
            if (n.Tag() == "!") return Json(s);  // quoted: always a string
            if (s == "null" || s == "~" || s.empty()) return Json(nullptr);
            if (s == "true") return Json(true);
            if (s == "false") return Json(false);
            if (detail::looks_like_int(s)) {
                try {
                    return Json(static_cast<std::int64_t>(std::stoll(s)));
                } catch (...) {
                    return Json(s);
                }
            }
            if (detail::looks_like_float(s)) {
                try {
                    return Json(std::stod(s));
                } catch (...) {
                    return Json(s);
                }
            }
            return Json(s);
        }
        case YAML::NodeType::Sequence: {
            Json a = Json::array();
            for (const auto& e : n) a.push_back(yaml_to_json(e));
            return a;
        }
        case YAML::NodeType::Map: {
            Json o = Json::object();
            for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return o;
        }
    }
    return Json(nullptr);
}

/// Parse one document in the named format ("yaml" or "json") into the json
/// document model. Syntax errors carry the underlying parser's locus message.
inline Json parse_doc(const std::string& text, const std::string& format) {
    if (format == "json") {
        try {
            return Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw ValidationError(std::string("json syntax error: ") + e.what());
        }
    }
    if (format == "yaml") {
        try {
            return yaml_to_json(YAML::Load(text));
        } catch (const YAML::Exception& e) {
            throw ValidationError("yaml syntax error at line " + std::to_string(e.mark.line + 1) +
                                  ", column " + std::to_string(e.mark.column + 1) + ": " + e.msg);
        }
    }
    throw UsageError("unknown document format: " + format + " (expected yaml or json)");
}

/// Sniff json vs yaml from the first significant byte; JSON documents here
/// always open with '{' or '['.
inline std::string sniff_format(const std::string& text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return (c == '{' || c == '[') ? "json" : "yaml";
    }
    return "yaml";
}

namespace detail {

inline bool plain_safe(const std::string& s) {
    if (s.empty()) return false;
    // Keywords and anything number-shaped must be quoted to survive re-parsing.
    static const char* kw[] = {"true",  "false", "null", "~",   "yes", "no",
                               "on",    "off",   "True", "False", "Null",
                               "Yes",   "No",    "On",   "Off",  "TRUE", "FALSE",
                               "NULL",  "YES",   "NO",   "ON",   "OFF"};
    for (auto k : kw)
        if (s == k) return false;
    if (looks_like_int(s) || looks_like_float(s)) return false;
    char c0 = s[0];
    if (!(std::isalpha(static_cast<unsigned char>(c0)) || c0 == '_')) return false;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) continue;
        if (c == '_' || c == '-' || c == '.' || c == '/') continue;
        return false;
    }
    return true;
}

inline void emit_quoted(std::string& out, const std::string& s) {
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\x%02x", c);
                    out += buf;
                } else {
                    out.push_back(static_cast<char>(c));  // UTF-8 passes through
                }
        }
    }
    out.push_back('"');
}

inline void emit_scalar(std::string& out, const Json& j) {
    if (j.is_null()) {
        out += "null";
    } else if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (plain_safe(s))
            out += s;
        else
            emit_quoted(out, s);
    } else {
        out += j.dump();  // bool/int/float: nlohmann's shortest round-trip text
    }
}

inline void emit_yaml(std::string& out, const Json& j, int indent);

inline void emit_yaml_inline_or_block(std::string& out, const Json& j, int indent) {
    if (j.is_object() && !j.empty()) {
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out.append(static_cast<std::size_t>(indent), ' ');
            first = false;
            if (plain_safe(it.key()))
                out += it.key();
            else
                emit_quoted(out, it.key());
            out += ':';
            if (it.value().is_structured() && !it.value().empty()) {
                out += '\n';
                out.append(static_cast<std::size_t>(indent + (it.value().is_array() ? 0 : 2)), ' ');
                emit_yaml_inline_or_block(out, it.value(), indent + (it.value().is_array() ? 0 : 2));
            } else {
                out += ' ';
                if (it.value().is_array())
                    out += "[]";
                else if (it.value().is_object())
                    out += "{}";
                else
                    emit_scalar(out, it.value());
                out += '\n';
            }
        }
    } else if (j.is_array() && !j.empty()) {
        bool first = true;
        for (const auto& e : j) {
            if (!first) out.append(static_cast<std::size_t>(indent), ' ');
            first = false;
            out += "- ";
            if (e.is_structured() && !e.empty()) {
                emit_yaml_inline_or_block(out, e, indent + 2);
            } else {
                if (e.is_array())
                    out += "[]";
                else if (e.is_object())
                    out += "{}";
                else
                    emit_scalar(out, e);
                out += '\n';
            }
        }
    } else {
        if (j.is_array())
            out += "[]";
        else if (j.is_object())
            out += "{}";
        else
            emit_scalar(out, j);
        out += '\n';
    }
}

inline void emit_yaml(std::string& out, const Json& j, int indent) {
    emit_yaml_inline_or_block(out, j, indent);
}

}  // namespace detail

/// Canonical YAML: keys sorted (property of the document model), block style,
/// two-space indents, conservative quoting, no insignificant whitespace.
inline std::string to_canonical_yaml(const Json& j) {
    std::string out;
    detail::emit_yaml(out, j, 0);
    return out;
}

/// Canonical JSON: sorted keys, no whitespace.
inline std::string to_canonical_json(const Json& j) { return j.dump(); }

/// Human-oriented JSON for stdout (--format json).
inline std::string to_pretty_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace dagforge
