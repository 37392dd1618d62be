#pragma once

#include <map>
#include <set>
#include <string>

#include "dagforge/expr/check.hpp"
#include "dagforge/expr/parse.hpp"
#include "dagforge/graph/graph.hpp"
#include "dagforge/graph/ops.hpp"

namespace dagforge {

namespace detail {

inline expr::CheckEnv node_check_env(const Node& n, bool allow_out_read) {
    expr::CheckEnv env;
    for (const auto& p : n.inputs) env.inputs[p.name] = p.type;
    for (const auto& p : n.outputs) env.outputs[p.name] = p.type;
    for (const auto& v : n.virtual_calls) {
        expr::FnSig sig;
        for (const auto& p : v.inputs) sig.params.push_back(p.type);
        sig.result = v.output;
        env.virtuals[v.name] = sig;
    }
    env.allow_out_read = allow_out_read;
    return env;
}

inline void validate_ports(ValidationReport& report, const std::string& locus,
                           const std::vector<PortSpec>& ports, const char* side) {
    std::set<std::string> seen;
    for (const auto& p : ports) {
        if (!is_identifier(p.name) || expr::is_reserved_word(p.name) ||
            expr::is_builtin_name(p.name))
            report.error(locus, std::string(side) + " port name '" + p.name + "' is not a legal identifier");
        if (!seen.insert(p.name).second)
            report.error(locus, std::string("duplicate ") + side + " port '" + p.name + "'");
        if (p.default_value && type_of(*p.default_value) != p.type)
            report.error(locus, "default for port '" + p.name + "' has type " +
                                    type_name(type_of(*p.default_value)) + ", expected " +
                                    type_name(p.type));
    }
}

}  // namespace detail

/// Structural + typing invariants of a whole graph. Never throws for content
/// problems: everything is a report entry. ok=true iff the graph is
/// executable at its floor.
inline ValidationReport validate_graph(const WorkflowGraph& g) {
    ValidationReport report;
    if (g.version != 1)
        report.error("graph", "unsupported format version " + std::to_string(g.version));

    std::set<std::string> ids;
    for (const auto& n : g.nodes) {
        std::string locus = "node " + n.id;
        if (!is_identifier(n.id) || expr::is_reserved_word(n.id))
            report.error(locus, "node id is not a legal identifier");
        if (!ids.insert(n.id).second) report.error(locus, "duplicate node id");

        detail::validate_ports(report, locus, n.inputs, "input");
        detail::validate_ports(report, locus, n.outputs, "output");

        if (n.state == ResolutionState::InProgress)
            report.error(locus, "state in_progress is only valid inside a resolver pass");
        if (n.floor == TypeFloor::Pure && n.state != ResolutionState::FullyResolved)
            report.error(locus, "PURE node must be fully_resolved");

        if (n.floor >= TypeFloor::Typed && n.outputs.empty())
            report.error(locus, "typed node has no output ports");
        if (n.floor >= TypeFloor::Spec && !n.spec)
            report.error(locus, "node at floor " + std::string(floor_name(n.floor)) +
                                    " has no contract");
        if (n.floor >= TypeFloor::Stub && !n.body)
            report.error(locus, "node at floor " + std::string(floor_name(n.floor)) +
                                    " has no body");

        std::set<std::string> vnames;
        for (const auto& v : n.virtual_calls) {
            if (!is_identifier(v.name) || expr::is_reserved_word(v.name))
                report.error(locus, "virtual call name '" + v.name + "' is not a legal identifier");
            if (!vnames.insert(v.name).second)
                report.error(locus, "duplicate virtual call '" + v.name + "'");
            detail::validate_ports(report, locus + " virtual " + v.name, v.inputs, "input");
        }
        if (n.floor == TypeFloor::Pure && !n.virtual_calls.empty())
            report.error(locus, "PURE node declares virtual calls");

        // contracts
        if (n.spec) {
            auto pre_env = detail::node_check_env(n, false);
            pre_env.allow_effects = false;
            auto post_env = detail::node_check_env(n, true);
            post_env.allow_effects = false;
            for (const auto& src : n.spec->pre) {
                try {
                    expr::check_condition(expr::parse_expression(src), pre_env);
                } catch (const expr::ExprError& e) {
                    report.error(locus, "precondition '" + src + "': " + e.to_string());
                }
            }
            for (const auto& src : n.spec->post) {
                try {
                    expr::check_condition(expr::parse_expression(src), post_env);
                } catch (const expr::ExprError& e) {
                    report.error(locus, "postcondition '" + src + "': " + e.to_string());
                }
            }
        }

        // body
        if (n.body) {
            try {
                expr::Program prog = expr::parse_program(*n.body);
                if (prog.is_placeholder()) {
                    if (n.floor >= TypeFloor::Shim)
                        report.error(locus, "placeholder body above STUB floor");
                } else {
                    expr::check_program(prog, detail::node_check_env(n, false));
                    auto vrefs = expr::program_virtual_refs(prog);
                    if (n.floor == TypeFloor::Pure && !vrefs.empty())
                        report.error(locus, "PURE node contains virtual reference");
                    for (const auto& v : vrefs)
                        if (!vnames.count(v))
                            report.error(locus, "body references undeclared virtual '" + v + "'");
                }
            } catch (const expr::ExprError& e) {
                report.error(locus, "body: " + e.to_string());
            }
        }
    }

    // edges
    std::map<std::pair<std::string, std::string>, int> typed_in_count;
    for (const auto& e : g.edges) {
        std::string locus = "edge " + e.from.node +
                            (e.from.port.empty() ? "" : "." + e.from.port) + "->" + e.to.node +
                            (e.to.port.empty() ? "" : "." + e.to.port);
        const Node* src = g.find_node(e.from.node);
        const Node* dst = g.find_node(e.to.node);
        if (!src) report.error(locus, "unknown source node '" + e.from.node + "'");
        if (!dst) report.error(locus, "unknown destination node '" + e.to.node + "'");
        if (!src || !dst) continue;
        if (e.from.node == e.to.node) report.error(locus, "self-loop");

        if (e.from.port.empty() != e.to.port.empty()) {
            report.error(locus, "edge names a port on only one endpoint");
            continue;
        }
        if (e.portless()) {
            if (src->floor >= TypeFloor::Typed && dst->floor >= TypeFloor::Typed)
                report.error(locus, "portless edge between typed nodes");
            continue;
        }
        const PortSpec* out = src->find_output(e.from.port);
        const PortSpec* in = dst->find_input(e.to.port);
        if (!out)
            report.error(locus, "node '" + src->id + "' has no output port '" + e.from.port + "'");
        if (!in)
            report.error(locus, "node '" + dst->id + "' has no input port '" + e.to.port + "'");
        if (out && in && src->floor >= TypeFloor::Typed && dst->floor >= TypeFloor::Typed &&
            out->type != in->type)
            report.error(locus, "type mismatch: output '" + src->id + "." + e.from.port + "' is " +
                                    type_name(out->type) + " but input '" + dst->id + "." +
                                    e.to.port + "' is " + type_name(in->type));
        if (in) {
            int& cnt = typed_in_count[{dst->id, e.to.port}];
            if (++cnt > 1)
                report.error(locus, "input '" + dst->id + "." + e.to.port +
                                        "' receives more than one edge");
        }
    }

    // every typed input port is fed or defaulted
    for (const auto& n : g.nodes) {
        if (n.floor < TypeFloor::Typed) continue;
        std::set<std::string> fed;
        int portless_in = 0;
        for (const auto& e : g.edges) {
            if (e.to.node != n.id) continue;
            if (e.to.port.empty())
                ++portless_in;
            else
                fed.insert(e.to.port);
        }
        // portless in-edges (source still at TEXT) will be reified onto the
        // first unfed str inputs in document order
        for (const auto& p : n.inputs) {
            if (fed.count(p.name) || p.default_value) continue;
            if (portless_in > 0 && p.type == PrimitiveType::Str) {
                --portless_in;
                continue;
            }
            report.error("node " + n.id, "input port '" + p.name + "' has no edge and no default");
        }
    }

    // acyclicity
    if (ids.size() == g.nodes.size()) {
        try {
            topo_layers(g);
        } catch (const Error& e) {
            report.error("graph", e.what());
        }
    }
    return report;
}

}  // namespace dagforge
