#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dagforge/common/error.hpp"

namespace dagforge {

using Json = nlohmann::json;

/// The closed primitive type system: four scalars and their lists, one level
/// of nesting only.
enum class PrimitiveType {
    Str,
    Int,
    Float,
    Bool,
    ListStr,
    ListInt,
    ListFloat,
    ListBool,
};

inline const char* type_name(PrimitiveType t) {
    switch (t) {
        case PrimitiveType::Str: return "str";
        case PrimitiveType::Int: return "int";
        case PrimitiveType::Float: return "float";
        case PrimitiveType::Bool: return "bool";
        case PrimitiveType::ListStr: return "list[str]";
        case PrimitiveType::ListInt: return "list[int]";
        case PrimitiveType::ListFloat: return "list[float]";
        case PrimitiveType::ListBool: return "list[bool]";
    }
    return "?";
}

inline std::optional<PrimitiveType> parse_type_name(const std::string& s) {
    if (s == "str") return PrimitiveType::Str;
    if (s == "int") return PrimitiveType::Int;
    if (s == "float") return PrimitiveType::Float;
    if (s == "bool") return PrimitiveType::Bool;
    if (s == "list[str]") return PrimitiveType::ListStr;
    if (s == "list[int]") return PrimitiveType::ListInt;
    if (s == "list[float]") return PrimitiveType::ListFloat;
    if (s == "list[bool]") return PrimitiveType::ListBool;
    return std::nullopt;  // anything else, including deeper nesting, is rejected
}

inline bool is_list_type(PrimitiveType t) {
    return t == PrimitiveType::ListStr || t == PrimitiveType::ListInt ||
           t == PrimitiveType::ListFloat || t == PrimitiveType::ListBool;
}

inline PrimitiveType element_type(PrimitiveType t) {
    switch (t) {
        case PrimitiveType::ListStr: return PrimitiveType::Str;
        case PrimitiveType::ListInt: return PrimitiveType::Int;
        case PrimitiveType::ListFloat: return PrimitiveType::Float;
        case PrimitiveType::ListBool: return PrimitiveType::Bool;
        default: throw Error(ErrorKind::Validation, "not a list type");
    }
}

inline PrimitiveType list_of(PrimitiveType t) {
    switch (t) {
        case PrimitiveType::Str: return PrimitiveType::ListStr;
        case PrimitiveType::Int: return PrimitiveType::ListInt;
        case PrimitiveType::Float: return PrimitiveType::ListFloat;
        case PrimitiveType::Bool: return PrimitiveType::ListBool;
        default: throw Error(ErrorKind::Validation, "lists nest only one level");
    }
}

/// A runtime value of some PrimitiveType.
using Value = std::variant<std::string, std::int64_t, double, bool,
                           std::vector<std::string>, std::vector<std::int64_t>,
                           std::vector<double>, std::vector<bool>>;

inline PrimitiveType type_of(const Value& v) {
    switch (v.index()) {
        case 0: return PrimitiveType::Str;
        case 1: return PrimitiveType::Int;
        case 2: return PrimitiveType::Float;
        case 3: return PrimitiveType::Bool;
        case 4: return PrimitiveType::ListStr;
        case 5: return PrimitiveType::ListInt;
        case 6: return PrimitiveType::ListFloat;
        default: return PrimitiveType::ListBool;
    }
}

/// ""/0/0.0/false/[] — the simulated-execution placeholders.
inline Value zero_value(PrimitiveType t) {
    switch (t) {
        case PrimitiveType::Str: return std::string{};
        case PrimitiveType::Int: return std::int64_t{0};
        case PrimitiveType::Float: return 0.0;
        case PrimitiveType::Bool: return false;
        case PrimitiveType::ListStr: return std::vector<std::string>{};
        case PrimitiveType::ListInt: return std::vector<std::int64_t>{};
        case PrimitiveType::ListFloat: return std::vector<double>{};
        case PrimitiveType::ListBool: return std::vector<bool>{};
    }
    return std::string{};
}

inline Json value_to_json(const Value& v) {
    return std::visit([](const auto& x) { return Json(x); }, v);
}

/// Strict conversion: the JSON shape must match `t` exactly (no coercion,
/// except int-valued JSON never stands in for float and vice versa).
inline std::optional<Value> value_from_json(const Json& j, PrimitiveType t) {
    auto scalar = [](const Json& e, PrimitiveType st) -> std::optional<Value> {
        switch (st) {
            case PrimitiveType::Str:
                if (e.is_string()) return Value(e.get<std::string>());
                return std::nullopt;
            case PrimitiveType::Int:
                if (e.is_number_integer() && !e.is_number_float())
                    return Value(e.get<std::int64_t>());
                return std::nullopt;
            case PrimitiveType::Float:
                if (e.is_number()) return Value(e.get<double>());
                return std::nullopt;
            case PrimitiveType::Bool:
                if (e.is_boolean()) return Value(e.get<bool>());
                return std::nullopt;
            default: return std::nullopt;
        }
    };
    if (!is_list_type(t)) return scalar(j, t);
    if (!j.is_array()) return std::nullopt;
    PrimitiveType et = element_type(t);
    switch (et) {
        case PrimitiveType::Str: {
            std::vector<std::string> out;
            for (const auto& e : j) {
                auto v = scalar(e, et);
                if (!v) return std::nullopt;
                out.push_back(std::get<std::string>(*v));
            }
            return Value(out);
        }
        case PrimitiveType::Int: {
            std::vector<std::int64_t> out;
            for (const auto& e : j) {
                auto v = scalar(e, et);
                if (!v) return std::nullopt;
                out.push_back(std::get<std::int64_t>(*v));
            }
            return Value(out);
        }
        case PrimitiveType::Float: {
            std::vector<double> out;
            for (const auto& e : j) {
                auto v = scalar(e, et);
                if (!v) return std::nullopt;
                out.push_back(std::get<double>(*v));
            }
            return Value(out);
        }
        default: {
            std::vector<bool> out;
            for (const auto& e : j) {
                auto v = scalar(e, et);
                if (!v) return std::nullopt;
                out.push_back(std::get<bool>(*v));
            }
            return Value(out);
        }
    }
}

inline bool value_equal(const Value& a, const Value& b) { return a == b; }

}  // namespace dagforge
