#pragma once

#include <string>
#include <vector>

#include "dagforge/common/doc.hpp"
#include "dagforge/common/hash.hpp"
#include "dagforge/graph/graph.hpp"
#include "dagforge/graph/ops.hpp"
#include "dagforge/graph/validate.hpp"

namespace dagforge {

// ---------------------------------------------------------------------------
// graph <-> document model
// ---------------------------------------------------------------------------

namespace detail {

inline Json port_to_doc(const PortSpec& p) {
    Json j = Json::object();
    j["name"] = p.name;
    j["type"] = type_name(p.type);
    if (p.default_value) j["default"] = value_to_json(*p.default_value);
    return j;
}

inline PortSpec port_from_doc(const Json& j, const std::string& locus) {
    if (!j.is_object() || !j.contains("name") || !j.contains("type"))
        throw ValidationError(locus + ": port needs 'name' and 'type'");
    PortSpec p;
    p.name = j.at("name").get<std::string>();
    auto t = parse_type_name(j.at("type").get<std::string>());
    if (!t)
        throw ValidationError(locus + ": unknown type '" + j.at("type").get<std::string>() +
                              "' for port '" + p.name + "'");
    p.type = *t;
    if (j.contains("default") && !j.at("default").is_null()) {
        auto v = value_from_json(j.at("default"), p.type);
        if (!v)
            throw ValidationError(locus + ": default for port '" + p.name +
                                  "' does not match declared type " + type_name(p.type));
        p.default_value = *v;
    }
    return p;
}

inline std::string endpoint_to_doc(const Endpoint& e) {
    return e.port.empty() ? e.node : e.node + "." + e.port;
}

inline Endpoint endpoint_from_doc(const std::string& s) {
    Endpoint e;
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        e.node = s;
    } else {
        e.node = s.substr(0, dot);
        e.port = s.substr(dot + 1);
    }
    return e;
}

}  // namespace detail

inline Json node_to_doc(const Node& n) {
    Json j = Json::object();
    j["id"] = n.id;
    if (n.name != n.id && !n.name.empty()) j["name"] = n.name;
    j["floor"] = floor_name(n.floor);
    j["state"] = state_name(n.state);
    if (!n.description.empty()) j["description"] = n.description;
    if (!n.context.empty()) j["context"] = n.context;
    if (!n.inputs.empty()) {
        Json a = Json::array();
        for (const auto& p : n.inputs) a.push_back(detail::port_to_doc(p));
        j["inputs"] = a;
    }
    if (!n.outputs.empty()) {
        Json a = Json::array();
        for (const auto& p : n.outputs) a.push_back(detail::port_to_doc(p));
        j["outputs"] = a;
    }
    if (n.spec) {
        j["spec"] = Json::object();
        j["spec"]["pre"] = n.spec->pre;
        j["spec"]["post"] = n.spec->post;
    }
    if (n.body) j["body"] = *n.body;
    if (!n.virtual_calls.empty()) {
        Json a = Json::array();
        for (const auto& v : n.virtual_calls) {
            Json vj = Json::object();
            vj["name"] = v.name;
            vj["kind"] = virtual_kind_name(v.kind);
            Json ins = Json::array();
            for (const auto& p : v.inputs) ins.push_back(detail::port_to_doc(p));
            vj["inputs"] = ins;
            vj["output"] = type_name(v.output);
            a.push_back(vj);
        }
        j["virtual_calls"] = a;
    }
    if (!n.effects.empty()) {
        Json a = Json::array();
        for (auto e : n.effects) a.push_back(effect_name(e));
        j["effects"] = a;
    }
    if (n.deferred) j["deferred"] = true;
    return j;
}

inline Node node_from_doc(const Json& j) {
    if (!j.is_object() || !j.contains("id"))
        throw ValidationError("node document needs an 'id' field");
    Node n;
    n.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    std::string locus = "node " + n.id;
    n.name = j.value("name", n.id);
    if (j.contains("floor")) {
        auto f = parse_floor_name(j.at("floor").get<std::string>());
        if (!f)
            throw ValidationError(locus + ": unknown floor '" +
                                  j.at("floor").get<std::string>() + "'");
        n.floor = *f;
    }
    if (j.contains("state")) {
        auto s = parse_state_name(j.at("state").get<std::string>());
        if (!s)
            throw ValidationError(locus + ": unknown state '" +
                                  j.at("state").get<std::string>() + "'");
        n.state = *s;
    } else {
        n.state = n.floor == TypeFloor::Pure ? ResolutionState::FullyResolved
                                             : ResolutionState::Unresolved;
    }
    n.description = j.value("description", std::string{});
    if (j.contains("context"))
        for (const auto& c : j.at("context")) n.context.push_back(c.get<std::string>());
    if (j.contains("inputs"))
        for (const auto& p : j.at("inputs")) n.inputs.push_back(detail::port_from_doc(p, locus));
    if (j.contains("outputs"))
        for (const auto& p : j.at("outputs")) n.outputs.push_back(detail::port_from_doc(p, locus));
    if (j.contains("spec") && !j.at("spec").is_null()) {
        Contract c;
        const auto& sj = j.at("spec");
        if (sj.contains("pre"))
            for (const auto& e : sj.at("pre")) c.pre.push_back(e.get<std::string>());
        if (sj.contains("post"))
            for (const auto& e : sj.at("post")) c.post.push_back(e.get<std::string>());
        n.spec = c;
    }
    if (j.contains("body") && !j.at("body").is_null()) n.body = j.at("body").get<std::string>();
    if (j.contains("virtual_calls")) {
        for (const auto& vj : j.at("virtual_calls")) {
            VirtualCallDecl v;
            v.name = vj.at("name").get<std::string>();
            auto k = parse_virtual_kind(vj.value("kind", std::string("virtualshim")));
            if (!k) throw ValidationError(locus + ": unknown virtual kind");
            v.kind = *k;
            if (vj.contains("inputs"))
                for (const auto& p : vj.at("inputs"))
                    v.inputs.push_back(detail::port_from_doc(p, locus));
            auto t = parse_type_name(vj.value("output", std::string("str")));
            if (!t) throw ValidationError(locus + ": unknown virtual output type");
            v.output = *t;
            n.virtual_calls.push_back(std::move(v));
        }
    }
    if (j.contains("effects")) {
        for (const auto& e : j.at("effects")) {
            auto ec = parse_effect_name(e.get<std::string>());
            if (!ec)
                throw ValidationError(locus + ": unknown effect class '" + e.get<std::string>() +
                                      "'");
            n.effects.insert(*ec);
        }
    }
    n.deferred = j.value("deferred", false);
    return n;
}

inline Json graph_to_doc(const WorkflowGraph& g) {
    Json j = Json::object();
    j["version"] = g.version;
    j["name"] = g.name;
    Json nodes = Json::array();
    for (const auto& n : g.nodes) nodes.push_back(node_to_doc(n));
    j["nodes"] = nodes;
    Json edges = Json::array();
    for (const auto& e : g.edges) {
        Json ej = Json::object();
        ej["from"] = detail::endpoint_to_doc(e.from);
        ej["to"] = detail::endpoint_to_doc(e.to);
        edges.push_back(ej);
    }
    j["edges"] = edges;
    return j;
}

/// Structural decode only; run validate_graph for the semantic invariants.
inline WorkflowGraph graph_from_doc(const Json& j) {
    if (!j.is_object()) throw ValidationError("graph document must be a mapping");
    WorkflowGraph g;
    g.version = j.value("version", 1);
    g.name = j.value("name", std::string{});
    if (j.contains("nodes"))
        for (const auto& nj : j.at("nodes")) g.nodes.push_back(node_from_doc(nj));
    if (j.contains("edges")) {
        for (const auto& ej : j.at("edges")) {
            if (!ej.is_object() || !ej.contains("from") || !ej.contains("to"))
                throw ValidationError("edge document needs 'from' and 'to'");
            Edge e;
            e.from = detail::endpoint_from_doc(ej.at("from").get<std::string>());
            e.to = detail::endpoint_from_doc(ej.at("to").get<std::string>());
            g.edges.push_back(e);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// parse / render
// ---------------------------------------------------------------------------

/// Parse + validate. Invariant violations throw with the full report text.
inline WorkflowGraph parse_graph(const std::string& text, const std::string& format) {
    WorkflowGraph g = graph_from_doc(parse_doc(text, format));
    ValidationReport report = validate_graph(g);
    if (!report.ok) throw ValidationError("invalid graph:\n" + report.to_string());
    return g;
}

/// One line per node (topological order), one `->` line per edge.
inline std::string render_ascii(const WorkflowGraph& g) {
    std::string out;
    auto layers = topo_layers(g);
    for (const auto& layer : layers) {
        for (const auto& id : layer) {
            const Node* n = g.find_node(id);
            out += n->id + " [" + floor_name(n->floor) + "]";
            if (!n->description.empty()) out += " " + n->description;
            out += "\n";
            std::vector<std::string> targets;
            for (const auto& e : out_edges(g, id)) targets.push_back(e.to.node);
            std::sort(targets.begin(), targets.end());
            for (const auto& t : targets) out += "  -> " + t + "\n";
        }
    }
    return out;
}

inline std::string render_graph(const WorkflowGraph& g, const std::string& format) {
    if (format == "yaml") return to_canonical_yaml(graph_to_doc(g));
    if (format == "json") return to_pretty_json(graph_to_doc(g));
    if (format == "ascii") return render_ascii(g);
    throw UsageError("unknown render format: " + format + " (expected yaml, json or ascii)");
}

/// Canonical bytes: the content-addressing identity of a graph.
inline std::string canonical_graph_bytes(const WorkflowGraph& g) {
    return to_canonical_yaml(graph_to_doc(g));
}

inline std::string graph_content_hash(const WorkflowGraph& g) {
    return sha256_hex(canonical_graph_bytes(g));
}

/// Equality modulo context notes (refinement must change nothing else).
inline bool equal_ignoring_context(const WorkflowGraph& a, const WorkflowGraph& b) {
    Json ja = graph_to_doc(a);
    Json jb = graph_to_doc(b);
    for (auto* j : {&ja, &jb})
        for (auto& n : (*j)["nodes"]) n.erase("context");
    return ja == jb;
}

}  // namespace dagforge
