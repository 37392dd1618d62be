#pragma once

#include <functional>
#include <set>
#include <string>

#include "dagforge/graph/ops.hpp"
#include "dagforge/provider/provider.hpp"

namespace dagforge {

/// Locality instrumentation: every prompt the resolver builds is reported
/// with the slice it was built from, so tests can assert prompts never
/// reference nodes outside the neighborhood.
struct PromptTrace {
    std::string node_id;
    RequestKind kind = RequestKind::Compose;
    std::set<std::string> slice_ids;
    std::string prompt;
};

using PromptHook = std::function<void(const PromptTrace&)>;

namespace prompts {

/// Shared header: everything comes from the node and its slice, never the
/// whole graph.
inline std::string slice_header(const ContextSlice& slice, RequestKind kind, int attempt) {
    const Node& node = slice.center_node();
    std::string p = "task: " + std::string(request_kind_name(kind)) + "\n";
    p += "node: " + node.id + "\n";
    p += "name: " + node.name + "\n";
    p += "description: " + node.description + "\n";
    for (const auto& note : node.context) p += "note: " + note + "\n";

    std::set<std::string> upstream, downstream;
    int in_degree = 0, out_degree = 0;
    for (const auto& e : slice.edges) {
        if (e.to.node == node.id) {
            ++in_degree;
            upstream.insert(e.from.node);
        }
        if (e.from.node == node.id) {
            ++out_degree;
            downstream.insert(e.to.node);
        }
    }
    p += "in_degree: " + std::to_string(in_degree) + "\n";
    p += "out_degree: " + std::to_string(out_degree) + "\n";
    auto join = [](const std::set<std::string>& ids) {
        std::string s;
        for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
        return s;
    };
    if (!upstream.empty()) p += "upstream: " + join(upstream) + "\n";
    if (!downstream.empty()) p += "downstream: " + join(downstream) + "\n";
    for (const auto& n : slice.nodes) {
        if (n.id == node.id) continue;
        p += "neighbor: " + n.id + ": " + n.description + "\n";
    }
    if (attempt > 1) p += "attempt: " + std::to_string(attempt) + "\n";
    return p;
}

inline std::string port_lines(const Node& node) {
    std::string p;
    for (const auto& port : node.inputs)
        p += "input: " + port.name + " " + type_name(port.type) + "\n";
    for (const auto& port : node.outputs)
        p += "output: " + port.name + " " + type_name(port.type) + "\n";
    return p;
}

inline std::string contract_lines(const Node& node) {
    std::string p;
    if (node.spec) {
        for (const auto& e : node.spec->pre) p += "require: " + e + "\n";
        for (const auto& e : node.spec->post) p += "ensure: " + e + "\n";
    }
    return p;
}

}  // namespace prompts

}  // namespace dagforge
