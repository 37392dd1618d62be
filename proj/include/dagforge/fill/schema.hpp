#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dagforge/common/doc.hpp"
#include "dagforge/common/value.hpp"

namespace dagforge {

/// A structured-output schema: scalar leaves (the PrimitiveType system, so a
/// list of scalars is itself a leaf), objects with named fields, and lists of
/// non-scalar elements. Lists of scalars are normalized into scalar leaves on
/// construction; only lists of objects keep an `element`.
struct SchemaNode {
    enum class Kind { Scalar, Object, List };

    Kind kind = Kind::Object;
    PrimitiveType scalar_type = PrimitiveType::Str;          // Kind::Scalar
    std::map<std::string, SchemaNode> fields;                // Kind::Object
    std::shared_ptr<SchemaNode> element;                     // Kind::List
    std::string description;

    static SchemaNode scalar(PrimitiveType t, std::string desc = {}) {
        SchemaNode s;
        s.kind = Kind::Scalar;
        s.scalar_type = t;
        s.description = std::move(desc);
        return s;
    }
    static SchemaNode object(std::map<std::string, SchemaNode> f, std::string desc = {}) {
        SchemaNode s;
        s.kind = Kind::Object;
        s.fields = std::move(f);
        s.description = std::move(desc);
        return s;
    }
    static SchemaNode list(SchemaNode elem, std::string desc = {}) {
        if (elem.kind == Kind::Scalar && !is_list_type(elem.scalar_type)) {
            SchemaNode s = scalar(list_of(elem.scalar_type), std::move(desc));
            if (s.description.empty()) s.description = elem.description;
            return s;
        }
        if (elem.kind == Kind::List || (elem.kind == Kind::Scalar && is_list_type(elem.scalar_type)))
            throw ValidationError("schema lists nest only one object level");
        SchemaNode s;
        s.kind = Kind::List;
        s.element = std::make_shared<SchemaNode>(std::move(elem));
        s.description = std::move(desc);
        return s;
    }
};

inline Json schema_to_doc(const SchemaNode& s) {
    Json j = Json::object();
    if (!s.description.empty()) j["description"] = s.description;
    switch (s.kind) {
        case SchemaNode::Kind::Scalar:
            if (is_list_type(s.scalar_type)) {
                j["type"] = "list";
                j["element"] = Json{{"type", type_name(element_type(s.scalar_type))}};
            } else {
                j["type"] = type_name(s.scalar_type);
            }
            break;
        case SchemaNode::Kind::Object: {
            j["type"] = "object";
            Json f = Json::object();
            for (const auto& [name, child] : s.fields) f[name] = schema_to_doc(child);
            j["fields"] = f;
            break;
        }
        case SchemaNode::Kind::List:
            j["type"] = "list";
            j["element"] = schema_to_doc(*s.element);
            break;
    }
    return j;
}

inline SchemaNode schema_from_doc(const Json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw ValidationError("schema document needs a 'type'");
    std::string t = j.at("type").get<std::string>();
    std::string desc = j.value("description", std::string{});
    if (t == "object") {
        std::map<std::string, SchemaNode> fields;
        if (j.contains("fields"))
            for (const auto& [name, child] : j.at("fields").items())
                fields[name] = schema_from_doc(child);
        return SchemaNode::object(std::move(fields), desc);
    }
    if (t == "list") {
        if (!j.contains("element")) throw ValidationError("list schema needs an 'element'");
        return SchemaNode::list(schema_from_doc(j.at("element")), desc);
    }
    auto pt = parse_type_name(t);
    if (!pt) throw ValidationError("unknown schema type '" + t + "'");
    return SchemaNode::scalar(*pt, desc);
}

inline SchemaNode parse_schema(const std::string& text, const std::string& format) {
    return schema_from_doc(parse_doc(text, format));
}

/// Canonical JSON of the schema: part of the provider cache key.
inline std::string canonical_schema_json(const SchemaNode& s) {
    return to_canonical_json(schema_to_doc(s));
}

/// Strict validation: field sets match exactly, every leaf has the declared
/// primitive shape. Returns the first problem, or empty string when valid.
inline std::string validate_instance(const Json& instance, const SchemaNode& schema,
                                     const std::string& path = "$") {
    switch (schema.kind) {
        case SchemaNode::Kind::Scalar:
            if (!value_from_json(instance, schema.scalar_type))
                return path + ": expected " + std::string(type_name(schema.scalar_type));
            return {};
        case SchemaNode::Kind::Object: {
            if (!instance.is_object()) return path + ": expected object";
            for (const auto& [name, child] : schema.fields) {
                if (!instance.contains(name)) return path + ": missing field '" + name + "'";
                std::string err = validate_instance(instance.at(name), child, path + "." + name);
                if (!err.empty()) return err;
            }
            for (const auto& [key, _] : instance.items())
                if (!schema.fields.count(key)) return path + ": unexpected field '" + key + "'";
            return {};
        }
        case SchemaNode::Kind::List: {
            if (!instance.is_array()) return path + ": expected list";
            for (std::size_t i = 0; i < instance.size(); ++i) {
                std::string err = validate_instance(instance[i], *schema.element,
                                                    path + "[" + std::to_string(i) + "]");
                if (!err.empty()) return err;
            }
            return {};
        }
    }
    return path + ": unreachable";
}

}  // namespace dagforge
