#pragma once

#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <string>

#include "dagforge/compiler/prompts.hpp"
#include "dagforge/graph/serialize.hpp"
#include "dagforge/provider/gateway.hpp"

namespace dagforge {

/// Canonical signature text of a virtual call, part of the synthesis key.
inline std::string virtual_signature_text(const VirtualCallDecl& call) {
    std::string s = "(";
    for (std::size_t i = 0; i < call.inputs.size(); ++i) {
        if (i) s += ", ";
        s += call.inputs[i].name + ": " + type_name(call.inputs[i].type);
    }
    s += ") -> " + std::string(type_name(call.output));
    return s;
}

/// Digest of the static upstream slice: stable before execution starts, so
/// prefine-warmed entries are hits at dispatch time.
inline std::string upstream_context_digest(const WorkflowGraph& g, const std::string& node_id) {
    std::vector<std::string_view> parts;
    Json acc = Json::array();
    acc.push_back(node_id);
    std::set<std::string> upstream;
    for (const auto& e : g.edges)
        if (e.to.node == node_id) upstream.insert(e.from.node);
    for (const auto& id : upstream) {
        const Node* n = g.find_node(id);
        if (n) acc.push_back(node_to_doc(*n));
    }
    return sha256_hex(acc.dump());
}

inline std::string synthesis_key(const std::string& node_id, const VirtualCallDecl& call,
                                 const std::string& context_digest) {
    return sha256_hex(
        frame_fields({node_id, call.name, virtual_signature_text(call), context_digest}));
}

/// Body-source cache keyed by (node, call, signature, upstream digest).
/// ensure() is single-flight: concurrent callers share one in-flight
/// synthesis; prefine uses async=true to warm entries while upstream nodes
/// are still running.
class SynthesisCache {
public:
    std::shared_future<std::string> ensure(const std::string& key,
                                           std::function<std::string()> factory, bool async) {
        std::shared_ptr<std::packaged_task<std::string()>> task;
        std::shared_future<std::string> fut;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = entries_.find(key);
            if (it != entries_.end()) return it->second;
            task = std::make_shared<std::packaged_task<std::string()>>(std::move(factory));
            fut = task->get_future().share();
            entries_[key] = fut;
        }
        if (async) {
            std::lock_guard<std::mutex> lock(mutex_);
            workers_.emplace_back(std::async(std::launch::async, [task] { (*task)(); }));
        } else {
            (*task)();
        }
        return fut;
    }

    /// A failed prefine entry degrades to dynamic behavior: drop it so the
    /// caller can synthesize fresh at dispatch time.
    void forget(const std::string& key) {
        std::lock_guard<std::mutex> lock(mutex_);
        entries_.erase(key);
    }

    bool contains(const std::string& key) const {
        std::lock_guard<std::mutex> lock(mutex_);
        return entries_.count(key) > 0;
    }

    void wait_all() {
        std::vector<std::future<void>> pending;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            pending.swap(workers_);
        }
        for (auto& w : pending)
            if (w.valid()) w.wait();
    }

    ~SynthesisCache() { wait_all(); }

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_future<std::string>> entries_;
    std::vector<std::future<void>> workers_;
};

/// One synthesize_body request for a declared virtual call; the body must
/// type-check against the call signature (inputs by name, single output
/// `result`). Two prompt-varied re-asks, then failure.
inline std::string synthesize_virtual_body(
    const VirtualCallDecl& call, const std::string& node_id, const std::string& context_digest,
    const std::map<std::string, Value>* recent_inputs, std::uint64_t seed, int intelligence,
    ProviderGateway& gateway, std::function<void()> on_request = {}) {
    expr::CheckEnv env;
    for (const auto& p : call.inputs) env.inputs[p.name] = p.type;
    env.outputs["result"] = call.output;

    std::string failure;
    for (int attempt = 1; attempt <= 3; ++attempt) {
        std::string prompt = "task: synthesize_body\n";
        prompt += "target: virtual " + call.name + " on node " + node_id + "\n";
        prompt += "kind: " + std::string(virtual_kind_name(call.kind)) + "\n";
        for (const auto& p : call.inputs)
            prompt += "input: " + p.name + " " + type_name(p.type) + "\n";
        prompt += "output: result " + std::string(type_name(call.output)) + "\n";
        prompt += "context_digest: " + context_digest + "\n";
        if (recent_inputs)
            for (const auto& [name, value] : *recent_inputs)
                prompt += "hint: " + name + " = " + value_to_json(value).dump() + "\n";
        if (attempt > 1) prompt += "attempt: " + std::to_string(attempt) + "\n";

        GenerationRequest req;
        req.kind = RequestKind::SynthesizeBody;
        req.prompt = prompt;
        req.schema = SchemaNode::object({{"body", SchemaNode::scalar(PrimitiveType::Str)}});
        req.seed = seed;
        req.intelligence = intelligence;
        if (on_request) on_request();
        Json payload;
        try {
            payload = gateway.generate(req).payload;
        } catch (const Error& e) {
            failure = e.what();
            break;  // gateway already retried and failed over
        }
        std::string body = payload.value("body", std::string{});
        try {
            expr::Program prog = expr::parse_program(body);
            if (prog.is_placeholder()) {
                failure = "placeholder body";
                continue;
            }
            expr::check_program(prog, env);
            if (!expr::program_virtual_refs(prog).empty()) {
                failure = "synthesized body itself contains virtual calls";
                continue;
            }
            return body;
        } catch (const expr::ExprError& e) {
            failure = e.to_string();
        }
    }
    throw ProviderError("synthesis failed for virtual '" + call.name + "' on node '" + node_id +
                        "': " + failure);
}

}  // namespace dagforge
