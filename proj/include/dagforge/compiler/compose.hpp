#pragma once

#include <set>
#include <string>
#include <vector>

#include "dagforge/graph/serialize.hpp"
#include "dagforge/provider/gateway.hpp"

namespace dagforge {

/// Deterministic node ids from natural-language labels:
/// "Fetch data from API" -> fetch_data_from_api.
inline std::string slugify(const std::string& text) {
    std::string slug;
    bool pending_sep = false;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            if (pending_sep && !slug.empty()) slug.push_back('_');
            pending_sep = false;
            slug.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            pending_sep = true;
        }
        if (slug.size() >= 40) break;
    }
    if (slug.empty()) slug = "node";
    if (std::isdigit(static_cast<unsigned char>(slug[0]))) slug = "n" + slug;
    return slug;
}

inline std::string unique_slug(const std::string& base, const std::set<std::string>& taken) {
    if (!taken.count(base)) return base;
    for (int i = 2;; ++i) {
        std::string candidate = base + "_" + std::to_string(i);
        if (!taken.count(candidate)) return candidate;
    }
}

/// Build a TEXT graph from one compose call: one node per returned segment,
/// chained in order with order-only edges.
inline WorkflowGraph compose_text(const std::string& nl, std::uint64_t seed, int intelligence,
                                  ProviderGateway& gateway) {
    if (nl.empty() || nl.find_first_not_of(" \t\r\n") == std::string::npos)
        throw UsageError("compose: text must not be empty");
    GenerationRequest req;
    req.kind = RequestKind::Compose;
    req.prompt = nl;
    req.seed = seed;
    req.intelligence = intelligence;
    GenerationResponse resp = gateway.generate(req);

    if (!resp.payload.is_array() || resp.payload.empty())
        throw ValidationError("compose: empty decomposition (no workflow stages found)");

    WorkflowGraph g;
    g.name = slugify(nl.substr(0, 40));
    std::set<std::string> taken;
    std::string prev;
    for (const auto& item : resp.payload) {
        Node n;
        n.name = item.value("name", std::string{});
        n.description = item.value("description", n.name);
        if (n.name.empty()) n.name = n.description;
        n.id = unique_slug(slugify(n.name), taken);
        taken.insert(n.id);
        n.floor = TypeFloor::Text;
        n.state = ResolutionState::Unresolved;
        g.nodes.push_back(n);
        if (!prev.empty()) g.edges.push_back({{prev, ""}, {n.id, ""}});
        prev = n.id;
    }
    return g;
}

/// Append a refinement note to one node (or all nodes); everything except
/// context lists is untouched.
inline WorkflowGraph refine(const WorkflowGraph& graph, const std::optional<std::string>& node_id,
                            const std::string& note) {
    WorkflowGraph g = graph;
    if (node_id) {
        Node* n = g.find_node(*node_id);
        if (!n) throw ValidationError("refine: unknown node id '" + *node_id + "'");
        n->context.push_back(note);
    } else {
        for (auto& n : g.nodes) n.context.push_back(note);
    }
    return g;
}

}  // namespace dagforge
