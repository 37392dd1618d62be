#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "dagforge/graph/graph.hpp"

namespace dagforge {

namespace detail {

inline std::map<std::string, std::vector<std::string>> successor_map(const WorkflowGraph& g) {
    std::map<std::string, std::vector<std::string>> succ;
    for (const auto& n : g.nodes) succ[n.id];
    for (const auto& e : g.edges) succ[e.from.node].push_back(e.to.node);
    return succ;
}

}  // namespace detail

/// Kahn-style stratification: layer k holds every node whose predecessors all
/// sit in layers < k; ids inside a layer are sorted so equal graphs always
/// yield equal layerings. Throws listing one cycle when the graph is cyclic.
inline std::vector<std::vector<std::string>> topo_layers(const WorkflowGraph& g) {
    std::map<std::string, int> indegree;
    for (const auto& n : g.nodes) indegree[n.id] = 0;
    auto succ = detail::successor_map(g);
    for (const auto& e : g.edges) {
        auto it = indegree.find(e.to.node);
        if (it != indegree.end() && indegree.count(e.from.node)) ++it->second;
    }

    std::set<std::string> ready;
    for (const auto& [id, d] : indegree)
        if (d == 0) ready.insert(id);

    std::vector<std::vector<std::string>> layers;
    std::size_t placed = 0;
    while (!ready.empty()) {
        std::vector<std::string> layer(ready.begin(), ready.end());  // sorted
        ready.clear();
        for (const auto& id : layer) {
            ++placed;
            for (const auto& s : succ[id]) {
                if (--indegree[s] == 0) ready.insert(s);
            }
        }
        layers.push_back(std::move(layer));
    }

    if (placed != g.nodes.size()) {
        // walk the residue to present one concrete cycle
        std::set<std::string> residue;
        for (const auto& [id, d] : indegree)
            if (d > 0) residue.insert(id);
        std::vector<std::string> cycle;
        std::set<std::string> seen;
        std::string cur = *residue.begin();
        while (!seen.count(cur)) {
            seen.insert(cur);
            cycle.push_back(cur);
            for (const auto& s : succ[cur]) {
                if (residue.count(s)) {
                    cur = s;
                    break;
                }
            }
        }
        std::string msg = "cycle detected:";
        for (const auto& id : cycle) msg += " " + id;
        throw ValidationError(msg);
    }
    return layers;
}

/// The locality unit: one node plus its immediate dependencies and
/// dependents, with the edges among them that touch the center.
struct ContextSlice {
    std::string center;
    std::vector<Node> nodes;  // center first, then neighbors in document order
    std::vector<Edge> edges;

    std::set<std::string> node_ids() const {
        std::set<std::string> ids;
        for (const auto& n : nodes) ids.insert(n.id);
        return ids;
    }
    const Node& center_node() const { return nodes.front(); }
};

inline ContextSlice neighborhood(const WorkflowGraph& g, const std::string& node_id) {
    const Node* center = g.find_node(node_id);
    if (!center) throw ValidationError("unknown node id: " + node_id);

    std::set<std::string> neighbor_ids;
    ContextSlice slice;
    slice.center = node_id;
    for (const auto& e : g.edges) {
        if (e.from.node == node_id || e.to.node == node_id) {
            slice.edges.push_back(e);
            neighbor_ids.insert(e.from.node == node_id ? e.to.node : e.from.node);
        }
    }
    neighbor_ids.erase(node_id);  // self-loops would be invalid anyway
    slice.nodes.push_back(*center);
    for (const auto& n : g.nodes)
        if (neighbor_ids.count(n.id)) slice.nodes.push_back(n);
    return slice;
}

/// Weakly-connected components, each returned as a standalone graph keeping
/// document order; components ordered by their smallest member id.
inline std::vector<WorkflowGraph> partition_independent(const WorkflowGraph& g) {
    std::map<std::string, std::string> rep;  // union-find, path-halving
    for (const auto& n : g.nodes) rep[n.id] = n.id;
    std::function<std::string(std::string)> find = [&](std::string x) {
        while (rep[x] != x) {
            rep[x] = rep[rep[x]];
            x = rep[x];
        }
        return x;
    };
    for (const auto& e : g.edges) {
        if (!rep.count(e.from.node) || !rep.count(e.to.node)) continue;
        std::string a = find(e.from.node), b = find(e.to.node);
        if (a != b) rep[std::max(a, b)] = std::min(a, b);
    }

    std::map<std::string, std::size_t> component_index;  // root -> position
    std::vector<WorkflowGraph> parts;
    for (const auto& n : g.nodes) {
        std::string root = find(n.id);
        if (!component_index.count(root)) {
            component_index[root] = parts.size();
            WorkflowGraph part;
            part.version = g.version;
            part.name = g.name;
            parts.push_back(std::move(part));
        }
        parts[component_index[root]].nodes.push_back(n);
    }
    for (const auto& e : g.edges) parts[component_index[find(e.from.node)]].edges.push_back(e);

    // order by smallest member id for determinism
    std::sort(parts.begin(), parts.end(), [](const WorkflowGraph& a, const WorkflowGraph& b) {
        auto min_id = [](const WorkflowGraph& w) {
            std::string m;
            for (const auto& n : w.nodes)
                if (m.empty() || n.id < m) m = n.id;
            return m;
        };
        return min_id(a) < min_id(b);
    });
    return parts;
}

/// Incoming edges of `node_id` in document order.
inline std::vector<Edge> in_edges(const WorkflowGraph& g, const std::string& node_id) {
    std::vector<Edge> out;
    for (const auto& e : g.edges)
        if (e.to.node == node_id) out.push_back(e);
    return out;
}

inline std::vector<Edge> out_edges(const WorkflowGraph& g, const std::string& node_id) {
    std::vector<Edge> out;
    for (const auto& e : g.edges)
        if (e.from.node == node_id) out.push_back(e);
    return out;
}

}  // namespace dagforge
