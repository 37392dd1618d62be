#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dagforge/compiler/compose.hpp"
#include "dagforge/compiler/prompts.hpp"
#include "dagforge/graph/serialize.hpp"
#include "dagforge/provider/gateway.hpp"

namespace dagforge {

/// One transition in the floor lattice, with the request kind that drives it.
struct ResolverStep {
    TypeFloor from = TypeFloor::Text;
    TypeFloor to = TypeFloor::Typed;
    RequestKind kind = RequestKind::ResolveTyped;
};

inline const std::vector<ResolverStep>& resolver_steps() {
    static const std::vector<ResolverStep> steps = {
        {TypeFloor::Text, TypeFloor::Typed, RequestKind::ResolveTyped},
        {TypeFloor::Typed, TypeFloor::Spec, RequestKind::ResolveSpec},
        {TypeFloor::Spec, TypeFloor::Stub, RequestKind::ResolveStub},
        {TypeFloor::Stub, TypeFloor::Shim, RequestKind::SynthesizeBody},
        {TypeFloor::Shim, TypeFloor::Pure, RequestKind::SynthesizeBody},
    };
    return steps;
}

inline const ResolverStep& step_from_floor(TypeFloor f) {
    for (const auto& s : resolver_steps())
        if (s.from == f) return s;
    throw ValidationError("no resolver step starts at floor " + std::string(floor_name(f)));
}

/// Result of one resolve_node application. Decomposed carries replacement
/// nodes plus their internal chain edges (ids provisional until the caller
/// splices them into a graph).
struct ResolveOutcome {
    enum class Kind { Resolved, Decomposed, Virtualized, Deferred };

    Kind kind = Kind::Resolved;
    Node node;
    std::vector<Node> replacements;
    std::vector<Edge> replacement_edges;
    std::string note;
};

struct ResolverOptions {
    std::uint64_t seed = 0;
    int intelligence = 5;
    int max_passes = 3;
    int reask_attempts = 2;  // semantic re-asks per step (prompt varies, seed does not)
    PromptHook prompt_hook;
};

namespace resolver_detail {

struct SemanticFail {
    std::string reason;
};

inline std::string sanitize_port_name(const std::string& raw, const std::string& fallback) {
    std::string name;
    for (char c : raw) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
            name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (name.empty() || std::isdigit(static_cast<unsigned char>(name[0])) ||
        expr::is_reserved_word(name) || expr::is_builtin_name(name))
        return fallback;
    return name.substr(0, 24);
}

inline SchemaNode typed_step_schema() {
    SchemaNode port = SchemaNode::object(
        {{"name", SchemaNode::scalar(PrimitiveType::Str)},
         {"type", SchemaNode::scalar(PrimitiveType::Str)}});
    return SchemaNode::object(
        {{"inputs", SchemaNode::list(port)}, {"outputs", SchemaNode::list(port)}});
}

inline SchemaNode spec_step_schema() {
    return SchemaNode::object({{"pre", SchemaNode::scalar(PrimitiveType::ListStr)},
                               {"post", SchemaNode::scalar(PrimitiveType::ListStr)}});
}

inline SchemaNode body_step_schema() {
    return SchemaNode::object({{"body", SchemaNode::scalar(PrimitiveType::Str)}});
}

/// TEXT -> TYPED: take the provider's proposed ports but defend the edge
/// structure — every incoming order-only edge needs its own str input, and a
/// str output must exist for reification; surplus proposed inputs get zero
/// defaults so they stay satisfiable.
inline Node apply_typed(const Node& node, const ContextSlice& slice, const Json& payload) {
    Node out = node;
    int in_degree = 0;
    for (const auto& e : slice.edges)
        if (e.to.node == node.id) ++in_degree;

    std::set<std::string> taken;
    out.inputs.clear();
    const Json& proposed_inputs = payload.value("inputs", Json::array());
    for (int i = 0; i < in_degree; ++i) {
        std::string fallback = "in" + std::to_string(i + 1);
        std::string raw = static_cast<std::size_t>(i) < proposed_inputs.size()
                              ? proposed_inputs[static_cast<std::size_t>(i)].value("name", fallback)
                              : fallback;
        std::string name = sanitize_port_name(raw, fallback);
        if (taken.count(name)) name = fallback;
        while (taken.count(name)) name += "_";
        taken.insert(name);
        out.inputs.push_back({name, PrimitiveType::Str, std::nullopt});
    }
    for (std::size_t i = static_cast<std::size_t>(in_degree); i < proposed_inputs.size(); ++i) {
        std::string fallback = "in" + std::to_string(i + 1);
        std::string name =
            sanitize_port_name(proposed_inputs[i].value("name", fallback), fallback);
        while (taken.count(name)) name += "_";
        taken.insert(name);
        auto t = parse_type_name(proposed_inputs[i].value("type", std::string("str")));
        PrimitiveType type = t ? *t : PrimitiveType::Str;
        out.inputs.push_back({name, type, zero_value(type)});  // unfed extras need defaults
    }

    taken.clear();
    out.outputs.clear();
    const Json& proposed_outputs = payload.value("outputs", Json::array());
    for (std::size_t i = 0; i < proposed_outputs.size(); ++i) {
        std::string fallback = "out" + std::to_string(i + 1);
        std::string name =
            sanitize_port_name(proposed_outputs[i].value("name", fallback), fallback);
        while (taken.count(name)) name += "_";
        taken.insert(name);
        auto t = parse_type_name(proposed_outputs[i].value("type", std::string("str")));
        out.outputs.push_back({name, t ? *t : PrimitiveType::Str, std::nullopt});
    }
    bool has_str_output = false;
    for (const auto& p : out.outputs) has_str_output |= p.type == PrimitiveType::Str;
    if (!has_str_output) {
        std::string name = "out1";
        while (taken.count(name)) name += "_";
        out.outputs.push_back({name, PrimitiveType::Str, std::nullopt});
    }

    out.floor = TypeFloor::Typed;
    out.state = ResolutionState::PartiallyResolved;
    out.deferred = false;
    return out;
}

inline Node apply_spec(const Node& node, const Json& payload) {
    Node out = node;
    Contract contract;
    for (const auto& e : payload.value("pre", Json::array()))
        contract.pre.push_back(e.get<std::string>());
    for (const auto& e : payload.value("post", Json::array()))
        contract.post.push_back(e.get<std::string>());

    auto pre_env = detail::node_check_env(out, false);
    pre_env.allow_effects = false;
    auto post_env = detail::node_check_env(out, true);
    post_env.allow_effects = false;
    for (const auto& src : contract.pre) {
        try {
            expr::check_condition(expr::parse_expression(src), pre_env);
        } catch (const expr::ExprError& e) {
            throw SemanticFail{"precondition '" + src + "': " + e.to_string()};
        }
    }
    for (const auto& src : contract.post) {
        try {
            expr::check_condition(expr::parse_expression(src), post_env);
        } catch (const expr::ExprError& e) {
            throw SemanticFail{"postcondition '" + src + "': " + e.to_string()};
        }
    }
    out.spec = contract;
    out.floor = TypeFloor::Spec;
    out.state = ResolutionState::PartiallyResolved;
    out.deferred = false;
    return out;
}

inline Node apply_body_step(const Node& node, const Json& payload, TypeFloor to,
                            bool forbid_virtuals) {
    Node out = node;
    std::string body = payload.value("body", std::string{});
    expr::Program prog;
    try {
        prog = expr::parse_program(body);
    } catch (const expr::ExprError& e) {
        throw SemanticFail{"body does not parse: " + e.to_string()};
    }
    if (!prog.is_placeholder()) {
        try {
            expr::check_program(prog, detail::node_check_env(out, false));
        } catch (const expr::ExprError& e) {
            throw SemanticFail{"body does not type-check: " + e.to_string()};
        }
        auto vrefs = expr::program_virtual_refs(prog);
        if (forbid_virtuals && !vrefs.empty())
            throw SemanticFail{"body must not contain virtual calls"};
        for (const auto& v : vrefs) {
            bool declared = false;
            for (const auto& d : out.virtual_calls) declared |= d.name == v;
            if (!declared) throw SemanticFail{"body references undeclared virtual '" + v + "'"};
        }
    } else if (to >= TypeFloor::Shim) {
        throw SemanticFail{"placeholder body is not acceptable at floor " +
                           std::string(floor_name(to))};
    }
    out.body = body;
    out.floor = to;
    if (to == TypeFloor::Pure) {
        out.virtual_calls.clear();
        out.state = ResolutionState::FullyResolved;
    } else {
        out.state = ResolutionState::PartiallyResolved;
    }
    out.deferred = false;
    return out;
}

/// The Virtualized fallback: rewrite at SHIM with one synthesized-at-runtime
/// call per output port.
inline Node virtualize(const Node& node) {
    Node out = node;
    out.virtual_calls.clear();
    std::string body;
    std::string args;
    for (const auto& p : out.inputs) args += (args.empty() ? "" : ", ") + p.name;
    for (const auto& p : out.outputs) {
        std::string vname = out.outputs.size() == 1 ? "impl" : "impl_" + p.name;
        VirtualCallDecl decl;
        decl.name = vname;
        decl.kind = VirtualKind::VirtualShim;
        decl.inputs = out.inputs;
        for (auto& ip : decl.inputs) ip.default_value.reset();
        decl.output = p.type;
        out.virtual_calls.push_back(decl);
        body += "out." + p.name + " = virtual." + vname + "(" + args + ");\n";
    }
    out.body = body;
    out.floor = TypeFloor::Shim;
    out.state = ResolutionState::PartiallyResolved;
    out.deferred = false;
    return out;
}

inline Node defer(const Node& node) {
    Node out = node;
    out.deferred = true;
    out.state = ResolutionState::PartiallyResolved;
    return out;
}

}  // namespace resolver_detail

/// Resolve one node one floor upward using only its neighborhood slice.
/// On primary failure falls back, in order: Decomposed (when a compose call
/// on the node's description yields a multi-node plan), Virtualized (only
/// for SPEC->STUB and STUB->SHIM), Deferred.
inline ResolveOutcome resolve_node(const Node& node, const ContextSlice& slice,
                                   const ResolverStep& step, ProviderGateway& gateway,
                                   const ResolverOptions& options) {
    using namespace resolver_detail;
    if (node.floor != step.from)
        throw ValidationError("resolve_node: node '" + node.id + "' is at floor " +
                              floor_name(node.floor) + ", step starts at " +
                              floor_name(step.from));

    Node working = node;
    working.state = ResolutionState::InProgress;

    auto emit = [&](RequestKind kind, const std::string& prompt,
                    const std::optional<SchemaNode>& schema) {
        if (options.prompt_hook)
            options.prompt_hook({node.id, kind, slice.node_ids(), prompt});
        GenerationRequest req;
        req.kind = kind;
        req.prompt = prompt;
        req.schema = schema;
        req.seed = options.seed;
        req.intelligence = options.intelligence;
        return gateway.generate(req).payload;
    };

    auto build_prompt = [&](int attempt) {
        std::string p = prompts::slice_header(slice, step.kind, attempt);
        p += "floor: " + std::string(floor_name(step.from)) + " to " +
             std::string(floor_name(step.to)) + "\n";
        if (step.from >= TypeFloor::Typed) p += prompts::port_lines(working);
        if (step.from >= TypeFloor::Spec) p += prompts::contract_lines(working);
        if (step.from == TypeFloor::Shim) p += "constraint: no virtual calls\n";
        if (step.from == TypeFloor::Stub) p += "target: executable body\n";
        return p;
    };

    // SHIM -> PURE with a virtual-free body is a free promotion.
    if (step.from == TypeFloor::Shim && working.body) {
        try {
            expr::Program prog = expr::parse_program(*working.body);
            if (!prog.is_placeholder() && expr::program_virtual_refs(prog).empty()) {
                ResolveOutcome outcome;
                outcome.kind = ResolveOutcome::Kind::Resolved;
                outcome.node = working;
                outcome.node.floor = TypeFloor::Pure;
                outcome.node.state = ResolutionState::FullyResolved;
                outcome.node.virtual_calls.clear();
                outcome.node.deferred = false;
                return outcome;
            }
        } catch (const expr::ExprError&) {
            // unparseable body: ask the provider for a replacement below
        }
    }

    std::optional<SchemaNode> schema;
    switch (step.kind) {
        case RequestKind::ResolveTyped: schema = typed_step_schema(); break;
        case RequestKind::ResolveSpec: schema = spec_step_schema(); break;
        case RequestKind::ResolveStub:
        case RequestKind::SynthesizeBody: schema = body_step_schema(); break;
        default: break;
    }

    std::string failure;
    bool provider_failed = false;
    for (int attempt = 1; attempt <= 1 + options.reask_attempts; ++attempt) {
        Json payload;
        try {
            payload = emit(step.kind, build_prompt(attempt), schema);
        } catch (const Error& e) {
            failure = e.what();
            provider_failed = true;
            break;  // the gateway already retried and failed over
        }
        try {
            ResolveOutcome outcome;
            outcome.kind = ResolveOutcome::Kind::Resolved;
            switch (step.to) {
                case TypeFloor::Typed:
                    outcome.node = apply_typed(working, slice, payload);
                    break;
                case TypeFloor::Spec:
                    outcome.node = apply_spec(working, payload);
                    break;
                case TypeFloor::Stub:
                    outcome.node = apply_body_step(working, payload, TypeFloor::Stub, false);
                    break;
                case TypeFloor::Shim:
                    outcome.node = apply_body_step(working, payload, TypeFloor::Shim, false);
                    break;
                case TypeFloor::Pure:
                    outcome.node = apply_body_step(working, payload, TypeFloor::Pure, true);
                    break;
                default:
                    throw ValidationError("bad resolver step");
            }
            // description and refinement notes survive resolution verbatim
            outcome.node.description = node.description;
            outcome.node.context = node.context;
            return outcome;
        } catch (const SemanticFail& f) {
            failure = f.reason;
        }
    }

    // fallback 1: decomposition, if a compose call yields a multi-node plan
    try {
        Json segments = emit(RequestKind::Compose, working.description, std::nullopt);
        if (segments.is_array() && segments.size() >= 2) {
            ResolveOutcome outcome;
            outcome.kind = ResolveOutcome::Kind::Decomposed;
            outcome.note = failure;
            bool text_level = step.from == TypeFloor::Text;
            std::set<std::string> taken;
            for (const auto& item : segments) {
                Node r;
                r.name = item.value("name", std::string{});
                r.description = item.value("description", r.name);
                r.id = unique_slug(slugify(r.name), taken);
                taken.insert(r.id);
                r.floor = text_level ? TypeFloor::Text : TypeFloor::Typed;
                r.state = text_level ? ResolutionState::Unresolved
                                     : ResolutionState::PartiallyResolved;
                r.context = node.context;
                outcome.replacements.push_back(std::move(r));
            }
            if (!text_level) {
                // preserve the external port interface across the chain
                auto& first = outcome.replacements.front();
                auto& last = outcome.replacements.back();
                for (std::size_t i = 0; i < outcome.replacements.size(); ++i) {
                    auto& r = outcome.replacements[i];
                    if (i > 0) r.inputs = {{"link_in", PrimitiveType::Str, std::nullopt}};
                    if (i + 1 < outcome.replacements.size())
                        r.outputs = {{"link_out", PrimitiveType::Str, std::nullopt}};
                }
                first.inputs = node.inputs;
                last.outputs = node.outputs;
            }
            for (std::size_t i = 0; i + 1 < outcome.replacements.size(); ++i) {
                Edge e;
                e.from.node = outcome.replacements[i].id;
                e.to.node = outcome.replacements[i + 1].id;
                if (!text_level) {
                    e.from.port = "link_out";
                    e.to.port = "link_in";
                }
                outcome.replacement_edges.push_back(e);
            }
            return outcome;
        }
    } catch (const Error&) {
        // decomposition unavailable; fall through
    }

    // fallback 2: virtualization, legal only from SPEC and STUB
    if (step.from == TypeFloor::Spec || step.from == TypeFloor::Stub) {
        ResolveOutcome outcome;
        outcome.kind = ResolveOutcome::Kind::Virtualized;
        outcome.node = resolver_detail::virtualize(working);
        outcome.note = failure;
        return outcome;
    }

    // fallback 3: defer to a later pass
    ResolveOutcome outcome;
    outcome.kind = ResolveOutcome::Kind::Deferred;
    outcome.node = resolver_detail::defer(node);
    outcome.note = failure.empty() ? (provider_failed ? "provider failure" : "unresolvable")
                                   : failure;
    return outcome;
}

struct ResolveResult {
    WorkflowGraph graph;
    std::vector<std::string> warnings;
};

namespace resolver_detail {

/// Reify order-only edges whose two endpoints are now both typed: source's
/// first str output feeds the destination's next unclaimed str input.
inline void reify_edges(WorkflowGraph& g) {
    std::map<std::string, std::set<std::string>> claimed;  // node -> input ports taken
    for (const auto& e : g.edges)
        if (!e.to.port.empty()) claimed[e.to.node].insert(e.to.port);
    for (auto& e : g.edges) {
        if (!e.portless()) continue;
        Node* src = g.find_node(e.from.node);
        Node* dst = g.find_node(e.to.node);
        if (!src || !dst) continue;
        if (src->floor < TypeFloor::Typed || dst->floor < TypeFloor::Typed) continue;
        const PortSpec* out = nullptr;
        for (const auto& p : src->outputs)
            if (p.type == PrimitiveType::Str) {
                out = &p;
                break;
            }
        const PortSpec* in = nullptr;
        for (const auto& p : dst->inputs) {
            if (p.type != PrimitiveType::Str || p.default_value) continue;
            if (claimed[dst->id].count(p.name)) continue;
            in = &p;
            break;
        }
        if (!out || !in) continue;  // left portless; final validation reports it
        e.from.port = out->name;
        e.to.port = in->name;
        claimed[dst->id].insert(in->name);
    }
}

inline void splice_decomposition(WorkflowGraph& g, const std::string& node_id,
                                 ResolveOutcome outcome) {
    std::set<std::string> taken;
    for (const auto& n : g.nodes)
        if (n.id != node_id) taken.insert(n.id);
    std::map<std::string, std::string> rename;
    for (auto& r : outcome.replacements) {
        std::string final_id = unique_slug(r.id, taken);
        taken.insert(final_id);
        rename[r.id] = final_id;
        r.id = final_id;
        if (r.name.empty()) r.name = final_id;
    }
    for (auto& e : outcome.replacement_edges) {
        e.from.node = rename[e.from.node];
        e.to.node = rename[e.to.node];
    }

    std::size_t at = 0;
    for (; at < g.nodes.size(); ++at)
        if (g.nodes[at].id == node_id) break;
    g.nodes.erase(g.nodes.begin() + static_cast<std::ptrdiff_t>(at));
    g.nodes.insert(g.nodes.begin() + static_cast<std::ptrdiff_t>(at),
                   outcome.replacements.begin(), outcome.replacements.end());

    const std::string& first_id = outcome.replacements.front().id;
    const std::string& last_id = outcome.replacements.back().id;
    for (auto& e : g.edges) {
        if (e.to.node == node_id) e.to.node = first_id;
        if (e.from.node == node_id) e.from.node = last_id;
    }
    for (const auto& e : outcome.replacement_edges) g.edges.push_back(e);
}

}  // namespace resolver_detail

/// Floor-by-floor whole-graph resolution: up to `max_passes` sweeps in
/// topological order, climbing each node toward the target and retrying
/// deferred nodes on later passes. Node floors never decrease.
inline ResolveResult resolve(const WorkflowGraph& graph, TypeFloor target,
                             ProviderGateway& gateway, const ResolverOptions& options = {}) {
    if (graph.nodes.empty()) throw ValidationError("resolve: graph is empty");
    if (target < graph_floor(graph))
        throw ValidationError("resolve: target floor " + std::string(floor_name(target)) +
                              " is below the graph floor " +
                              std::string(floor_name(graph_floor(graph))));
    ResolveResult result;
    result.graph = graph;
    WorkflowGraph& g = result.graph;

    auto done = [&](const Node& n) {
        if (n.floor >= target) return true;
        // virtual-bearing SHIM nodes terminate at SHIM when the target is PURE
        return false;
    };

    for (int pass = 1; pass <= options.max_passes; ++pass) {
        bool pending = false;
        std::vector<std::string> order;
        for (const auto& layer : topo_layers(g))
            for (const auto& id : layer) order.push_back(id);

        bool decomposed_this_pass = false;
        for (const auto& id : order) {
            if (decomposed_this_pass) break;  // order is stale; next pass picks it up
            while (true) {
                Node* node = g.find_node(id);
                if (!node || done(*node)) break;
                const ResolverStep& step = step_from_floor(node->floor);
                ContextSlice slice = neighborhood(g, id);
                ResolveOutcome outcome = resolve_node(*node, slice, step, gateway, options);
                switch (outcome.kind) {
                    case ResolveOutcome::Kind::Resolved: {
                        if (outcome.node.floor < node->floor)
                            throw ExecutionError("resolver decreased a node floor");
                        *node = outcome.node;
                        if (step.to == TypeFloor::Typed) resolver_detail::reify_edges(g);
                        continue;
                    }
                    case ResolveOutcome::Kind::Virtualized: {
                        *node = outcome.node;
                        result.warnings.push_back("node " + id +
                                                  " virtualized at shim: " + outcome.note);
                        break;
                    }
                    case ResolveOutcome::Kind::Decomposed: {
                        resolver_detail::splice_decomposition(g, id, std::move(outcome));
                        resolver_detail::reify_edges(g);
                        decomposed_this_pass = true;
                        pending = true;
                        break;
                    }
                    case ResolveOutcome::Kind::Deferred: {
                        *node = outcome.node;
                        pending = true;
                        break;
                    }
                }
                break;  // Virtualized / Decomposed / Deferred all end this node's climb
            }
        }
        if (!pending) break;
    }

    std::vector<std::string> unresolved;
    for (auto& n : g.nodes) {
        if (n.floor >= target) continue;
        if (target == TypeFloor::Pure && n.floor == TypeFloor::Shim && !n.virtual_calls.empty()) {
            result.warnings.push_back("node " + n.id +
                                      " remains at shim (virtual calls resolve at run time)");
            continue;
        }
        unresolved.push_back(n.id);
    }
    if (!unresolved.empty()) {
        std::string msg = "unresolved nodes remain after " + std::to_string(options.max_passes) +
                          " passes:";
        for (const auto& id : unresolved) msg += " " + id;
        throw ProviderError(msg);
    }

    ValidationReport report = validate_graph(g);
    if (!report.ok)
        throw ValidationError("resolve produced an invalid graph:\n" + report.to_string());
    return result;
}

/// compose: one provider call for the TEXT skeleton, then resolve when a
/// higher floor was requested.
inline WorkflowGraph compose(const std::string& nl, TypeFloor target_floor, std::uint64_t seed,
                             int intelligence, ProviderGateway& gateway,
                             const ResolverOptions& options = {}) {
    WorkflowGraph g = compose_text(nl, seed, intelligence, gateway);
    if (target_floor > TypeFloor::Text) {
        ResolverOptions opts = options;
        opts.seed = seed;
        opts.intelligence = intelligence;
        g = resolve(g, target_floor, gateway, opts).graph;
    }
    ValidationReport report = validate_graph(g);
    if (!report.ok) throw ValidationError("compose produced an invalid graph:\n" + report.to_string());
    return g;
}

}  // namespace dagforge
