#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "dagforge/expr/eval.hpp"
#include "dagforge/graph/serialize.hpp"
#include "dagforge/provider/gateway.hpp"
#include "dagforge/runtime/synth.hpp"
#include "dagforge/runtime/tools.hpp"

namespace dagforge {

enum class JitMode { Prefine, Dynamic, Predict };

inline const char* jit_mode_name(JitMode m) {
    switch (m) {
        case JitMode::Prefine: return "prefine";
        case JitMode::Dynamic: return "dynamic";
        case JitMode::Predict: return "predict";
    }
    return "?";
}

inline std::optional<JitMode> parse_jit_mode(const std::string& s) {
    if (s == "prefine") return JitMode::Prefine;
    if (s == "dynamic") return JitMode::Dynamic;
    if (s == "predict") return JitMode::Predict;
    return std::nullopt;
}

struct RunConfig {
    JitMode mode = JitMode::Dynamic;
    std::set<std::string> tools;  // whitelisted namespaces
    bool allow_irreversible = false;
    std::uint64_t seed = 0;
    int intelligence = 5;
    int parallelism = 1;
    std::filesystem::path workspace = ".dagforge";
    std::map<std::string, std::string> http_fixtures;
};

struct NodeResult {
    std::string node_id;
    enum class Status { Ok, Simulated, Failed };
    Status status = Status::Ok;
    std::map<std::string, Value> outputs;
    int provider_requests = 0;
    double start_ms = 0.0;
    double end_ms = 0.0;
    bool speculative = false;
    std::string error;
};

inline const char* node_status_name(NodeResult::Status s) {
    switch (s) {
        case NodeResult::Status::Ok: return "ok";
        case NodeResult::Status::Simulated: return "simulated";
        case NodeResult::Status::Failed: return "failed";
    }
    return "?";
}

/// Everything one node execution needs. `journal`/`overlay` differ between a
/// normal run and a speculation ticket; the rest is shared run state.
struct ExecEnv {
    const WorkflowGraph* graph = nullptr;
    const RunConfig* config = nullptr;
    ProviderGateway* gateway = nullptr;
    SynthesisCache* synth = nullptr;
    Journal* journal = nullptr;
    std::filesystem::path workspace;
    std::filesystem::path overlay;  // set inside speculation tickets
};

namespace exec_detail {

inline std::string value_lines(const std::map<std::string, Value>& inputs) {
    std::string p;
    for (const auto& [name, value] : inputs)
        p += "value: " + name + " = " + value_to_json(value).dump() + "\n";
    return p;
}

inline std::string node_prompt_header(const char* task, const Node& node) {
    std::string p = std::string("task: ") + task + "\n";
    p += "node: " + node.id + "\n";
    p += "description: " + node.description + "\n";
    for (const auto& note : node.context) p += "note: " + note + "\n";
    return p;
}

inline SchemaNode output_schema(const Node& node) {
    std::map<std::string, SchemaNode> fields;
    for (const auto& p : node.outputs) fields[p.name] = SchemaNode::scalar(p.type);
    return SchemaNode::object(std::move(fields));
}

inline std::map<std::string, Value> payload_to_outputs(const Json& payload, const Node& node) {
    std::map<std::string, Value> outputs;
    for (const auto& p : node.outputs) {
        auto v = value_from_json(payload.at(p.name), p.type);
        if (!v)
            throw ExecutionError("node " + node.id + ": provider payload for port '" + p.name +
                                 "' does not match " + type_name(p.type));
        outputs[p.name] = *v;
    }
    return outputs;
}

inline bool eval_contracts(const std::vector<std::string>& exprs,
                           const std::map<std::string, Value>& inputs,
                           const std::map<std::string, Value>* outputs, std::string& which) {
    for (const auto& src : exprs) {
        if (!expr::eval_condition(expr::parse_expression(src), inputs, outputs)) {
            which = src;
            return false;
        }
    }
    return true;
}

}  // namespace exec_detail

/// Execute one node at its floor. TEXT chains prompts, TYPED/SPEC fill typed
/// outputs through the gateway (SPEC re-asks once on a postcondition
/// violation), STUB placeholders simulate with zero values, SHIM bodies
/// synthesize their virtual calls on demand, PURE bodies never touch a
/// provider. Failures come back as status=failed, never exceptions.
inline NodeResult execute_node(const Node& node, const std::map<std::string, Value>& inputs,
                               const std::string& upstream_text, const ExecEnv& env) {
    NodeResult result;
    result.node_id = node.id;
    int requests = 0;

    auto ask = [&](RequestKind kind, const std::string& prompt,
                   const std::optional<SchemaNode>& schema) {
        GenerationRequest req;
        req.kind = kind;
        req.prompt = prompt;
        req.schema = schema;
        req.seed = env.config->seed;
        req.intelligence = env.config->intelligence;
        ++requests;
        return env.gateway->generate(req).payload;
    };

    ToolPolicy policy;
    policy.whitelist = env.config->tools;
    policy.allow_irreversible = env.config->allow_irreversible;
    policy.http_fixtures = env.config->http_fixtures;
    ToolContext tools(env.workspace, policy, env.journal);
    if (!env.overlay.empty()) tools.set_overlay(env.overlay);

    try {
        switch (node.floor) {
            case TypeFloor::Text: {
                std::string prompt = exec_detail::node_prompt_header("execute_text", node);
                prompt += "upstream_text: " + upstream_text + "\n";
                SchemaNode schema =
                    SchemaNode::object({{"text", SchemaNode::scalar(PrimitiveType::Str)}});
                Json payload = ask(RequestKind::FillGroup, prompt, schema);
                result.outputs["text"] = payload.at("text").get<std::string>();
                result.status = NodeResult::Status::Ok;
                break;
            }
            case TypeFloor::Typed:
            case TypeFloor::Spec: {
                if (node.floor == TypeFloor::Spec && node.spec) {
                    std::string which;
                    if (!exec_detail::eval_contracts(node.spec->pre, inputs, nullptr, which))
                        throw ExecutionError("node " + node.id + ": precondition violated: " +
                                             which);
                }
                SchemaNode schema = exec_detail::output_schema(node);
                std::string base_prompt =
                    exec_detail::node_prompt_header("execute_node", node) +
                    exec_detail::value_lines(inputs);
                // schema-invalid payloads already exhausted the gateway's
                // retries and failover; two prompt-varied re-asks remain
                std::map<std::string, Value> outputs;
                std::string failure;
                bool done = false;
                for (int attempt = 1; attempt <= 3 && !done; ++attempt) {
                    std::string prompt = base_prompt;
                    if (attempt > 1) prompt += "attempt: " + std::to_string(attempt) + "\n";
                    try {
                        Json payload = ask(RequestKind::FillGroup, prompt, schema);
                        outputs = exec_detail::payload_to_outputs(payload, node);
                        done = true;
                    } catch (const Error& e) {
                        failure = e.what();
                    }
                }
                if (!done) throw ProviderError(failure);

                if (node.floor == TypeFloor::Spec && node.spec) {
                    std::string which;
                    if (!exec_detail::eval_contracts(node.spec->post, inputs, &outputs, which)) {
                        // one re-ask, then a contract error
                        std::string prompt = base_prompt + "attempt: post-violation '" + which +
                                             "'\n";
                        Json payload = ask(RequestKind::FillGroup, prompt, schema);
                        outputs = exec_detail::payload_to_outputs(payload, node);
                        if (!exec_detail::eval_contracts(node.spec->post, inputs, &outputs,
                                                         which))
                            throw ExecutionError("node " + node.id +
                                                 ": postcondition violated: " + which);
                    }
                }
                result.outputs = std::move(outputs);
                result.status = NodeResult::Status::Ok;
                break;
            }
            case TypeFloor::Stub:
            case TypeFloor::Shim:
            case TypeFloor::Pure: {
                expr::Program prog = expr::parse_program(node.body.value_or(""));
                if (prog.is_placeholder()) {
                    for (const auto& p : node.outputs) result.outputs[p.name] = zero_value(p.type);
                    result.status = NodeResult::Status::Simulated;
                    break;
                }
                std::string context_digest = upstream_context_digest(*env.graph, node.id);
                expr::EvalHooks hooks;
                hooks.call_tool = [&](const std::string& name, const std::vector<Value>& args) {
                    return tools.call(name, args);
                };
                hooks.call_virtual = [&](const std::string& name,
                                         const std::vector<Value>& args) -> Value {
                    const VirtualCallDecl* decl = nullptr;
                    for (const auto& d : node.virtual_calls)
                        if (d.name == name) decl = &d;
                    if (!decl) throw expr::ExprError{"undeclared virtual '" + name + "'", 0, 0};
                    std::string key = synthesis_key(node.id, *decl, context_digest);
                    auto factory = [&, decl, context_digest] {
                        return synthesize_virtual_body(*decl, node.id, context_digest, &inputs,
                                                       env.config->seed,
                                                       env.config->intelligence, *env.gateway,
                                                       [&] { ++requests; });
                    };
                    std::shared_future<std::string> fut = env.synth->ensure(key, factory, false);
                    std::string body;
                    try {
                        body = fut.get();
                    } catch (...) {
                        // warmed entry failed (prefine degradation): retry now
                        env.synth->forget(key);
                        body = env.synth->ensure(key, factory, false).get();
                    }
                    expr::Program vb = expr::parse_program(body);
                    std::map<std::string, Value> vargs;
                    for (std::size_t i = 0; i < decl->inputs.size() && i < args.size(); ++i)
                        vargs[decl->inputs[i].name] = args[i];
                    auto vout = expr::eval_program(vb, vargs, {{"result", decl->output}}, hooks);
                    return vout.at("result");
                };
                std::map<std::string, PrimitiveType> out_types;
                for (const auto& p : node.outputs) out_types[p.name] = p.type;
                result.outputs = expr::eval_program(prog, inputs, out_types, hooks);
                result.status = NodeResult::Status::Ok;
                break;
            }
        }
    } catch (const expr::ExprError& e) {
        result.status = NodeResult::Status::Failed;
        result.error = e.to_string();
    } catch (const Error& e) {
        result.status = NodeResult::Status::Failed;
        result.error = e.what();
    } catch (const Json::exception& e) {
        result.status = NodeResult::Status::Failed;
        result.error = std::string("payload error: ") + e.what();
    }
    result.provider_requests = requests;
    return result;
}

/// Gather the typed inputs of a node from upstream results and port defaults.
inline std::map<std::string, Value> gather_inputs(
    const WorkflowGraph& g, const Node& node,
    const std::map<std::string, NodeResult>& results) {
    std::map<std::string, Value> inputs;
    for (const auto& e : g.edges) {
        if (e.to.node != node.id || e.to.port.empty()) continue;
        auto it = results.find(e.from.node);
        if (it == results.end()) continue;
        auto v = it->second.outputs.find(e.from.port);
        if (v != it->second.outputs.end()) inputs[e.to.port] = v->second;
    }
    for (const auto& p : node.inputs)
        if (!inputs.count(p.name) && p.default_value) inputs[p.name] = *p.default_value;
    return inputs;
}

/// Concatenated upstream texts for a TEXT-floor node (order-only edges).
inline std::string gather_upstream_text(const WorkflowGraph& g, const Node& node,
                                        const std::map<std::string, NodeResult>& results) {
    std::string text;
    for (const auto& e : g.edges) {
        if (e.to.node != node.id || !e.to.port.empty()) continue;
        auto it = results.find(e.from.node);
        if (it == results.end()) continue;
        const NodeResult& r = it->second;
        std::string piece;
        auto t = r.outputs.find("text");
        if (t != r.outputs.end()) {
            piece = std::get<std::string>(t->second);
        } else {
            for (const auto& [name, value] : r.outputs) {
                if (type_of(value) == PrimitiveType::Str) {
                    piece = std::get<std::string>(value);
                    break;
                }
            }
            if (piece.empty() && !r.outputs.empty())
                piece = value_to_json(r.outputs.begin()->second).dump();
        }
        if (!text.empty()) text += "\n";
        text += piece;
    }
    return text;
}

}  // namespace dagforge
