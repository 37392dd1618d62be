#pragma once

#include <set>
#include <string>
#include <vector>

#include "dagforge/compiler/resolve.hpp"
#include "dagforge/graph/serialize.hpp"

namespace dagforge {

/// The single build target: a self-contained executable artifact embedding
/// the canonical graph, its schedule, and the tools it needs.
struct CompileManifest {
    WorkflowGraph graph;
    std::vector<std::vector<std::string>> schedule;
    std::set<std::string> tools;  // tool namespaces (fs, http, ...)
    TypeFloor floor = TypeFloor::Shim;
    std::string content_hash;
};

/// Tool namespaces referenced by node bodies across the graph.
inline std::set<std::string> graph_tool_requirements(const WorkflowGraph& g) {
    std::set<std::string> tools;
    for (const auto& n : g.nodes) {
        if (!n.body) continue;
        try {
            for (const auto& name : expr::program_tool_refs(expr::parse_program(*n.body)))
                tools.insert(expr::tool_namespace(name));
        } catch (const expr::ExprError&) {
            // validation reports unparseable bodies; nothing to collect here
        }
    }
    return tools;
}

inline Json manifest_to_doc(const CompileManifest& m) {
    Json j = Json::object();
    j["manifest_version"] = 1;
    j["graph"] = graph_to_doc(m.graph);
    Json schedule = Json::array();
    for (const auto& layer : m.schedule) schedule.push_back(layer);
    j["schedule"] = schedule;
    Json tools = Json::array();
    for (const auto& t : m.tools) tools.push_back(t);
    j["tools"] = tools;
    j["floor"] = floor_name(m.floor);
    j["content_hash"] = m.content_hash;
    return j;
}

inline std::string manifest_content_hash(const CompileManifest& m) {
    Json j = manifest_to_doc(m);
    j.erase("content_hash");
    return sha256_hex(to_canonical_yaml(j));
}

/// Compile a resolved graph (floor >= SHIM) to a manifest. Auto-resolution
/// for lower floors is the CLI's `-t` concern, not this function's.
inline CompileManifest compile_graph(const WorkflowGraph& graph,
                                     const std::string& build_target = "manifest") {
    if (build_target != "manifest")
        throw UsageError("unknown build target '" + build_target + "' (only 'manifest' exists)");
    ValidationReport report = validate_graph(graph);
    if (!report.ok) throw ValidationError("compile: invalid graph:\n" + report.to_string());
    TypeFloor floor = graph_floor(graph);
    if (floor < TypeFloor::Shim)
        throw ValidationError("compile: graph floor " + std::string(floor_name(floor)) +
                              " is below shim; resolve it first (or pass -t <floor>)");
    CompileManifest m;
    m.graph = graph;
    m.schedule = topo_layers(graph);
    m.tools = graph_tool_requirements(graph);
    m.floor = floor;
    m.content_hash = manifest_content_hash(m);
    return m;
}

inline std::string render_manifest(const CompileManifest& m) {
    return to_canonical_yaml(manifest_to_doc(m));
}

inline CompileManifest manifest_from_doc(const Json& j) {
    if (!j.is_object() || !j.contains("graph"))
        throw ValidationError("manifest document needs a 'graph'");
    if (j.value("manifest_version", 0) != 1)
        throw ValidationError("unsupported manifest_version");
    CompileManifest m;
    m.graph = graph_from_doc(j.at("graph"));
    for (const auto& layer : j.value("schedule", Json::array())) {
        std::vector<std::string> ids;
        for (const auto& id : layer) ids.push_back(id.get<std::string>());
        m.schedule.push_back(std::move(ids));
    }
    for (const auto& t : j.value("tools", Json::array())) m.tools.insert(t.get<std::string>());
    auto f = parse_floor_name(j.value("floor", std::string("shim")));
    if (!f) throw ValidationError("manifest: unknown floor");
    m.floor = *f;
    m.content_hash = j.value("content_hash", std::string{});
    std::string expected = manifest_content_hash(m);
    if (!m.content_hash.empty() && m.content_hash != expected)
        throw ValidationError("manifest content hash mismatch (artifact corrupted?)");
    return m;
}

inline CompileManifest parse_manifest(const std::string& text, const std::string& format) {
    return manifest_from_doc(parse_doc(text, format));
}

/// True when a document looks like a manifest rather than a bare graph.
inline bool doc_is_manifest(const Json& j) {
    return j.is_object() && j.contains("manifest_version");
}

}  // namespace dagforge
