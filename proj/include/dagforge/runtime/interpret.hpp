#pragma once

#include <string>

#include "dagforge/compiler/compile.hpp"
#include "dagforge/runtime/exec.hpp"

namespace dagforge {

/// interpret: natural language -> TEXT graph -> SHIM -> dynamic execution,
/// all under one seed; the intermediate graph rides along in the record.
inline RunRecord interpret(const std::string& nl, const RunConfig& config,
                           ProviderGateway& gateway, const ResolverOptions& resolver = {}) {
    ResolverOptions opts = resolver;
    opts.seed = config.seed;
    opts.intelligence = config.intelligence;
    WorkflowGraph graph;
    try {
        graph = compose(nl, TypeFloor::Shim, config.seed, config.intelligence, gateway, opts);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("interpret (compose/resolve): ") + e.what());
    }
    RunConfig run_config = config;
    run_config.mode = JitMode::Dynamic;
    RunRecord record = execute_graph(graph, run_config, gateway);
    record.graph_doc = graph_to_doc(graph);
    return record;
}

struct SynthesizeOutput {
    CompileManifest manifest;
    RunRecord record;
    std::vector<std::string> warnings;
};

/// synthesize: plan, compile and execute in one pass. Nodes whose synthesis
/// keeps failing stay SHIM (warning), so the manifest floor may be shim.
inline SynthesizeOutput synthesize(const std::string& nl, const RunConfig& config,
                                   ProviderGateway& gateway,
                                   const ResolverOptions& resolver = {}) {
    ResolverOptions opts = resolver;
    opts.seed = config.seed;
    opts.intelligence = config.intelligence;
    SynthesizeOutput out;
    WorkflowGraph text_graph;
    try {
        text_graph = compose_text(nl, config.seed, config.intelligence, gateway);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("synthesize (compose): ") + e.what());
    }
    ResolveResult resolved;
    try {
        resolved = resolve(text_graph, TypeFloor::Pure, gateway, opts);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("synthesize (resolve): ") + e.what());
    }
    out.warnings = resolved.warnings;
    out.manifest = compile_graph(resolved.graph);
    out.record = execute_manifest(out.manifest, config, gateway);
    return out;
}

}  // namespace dagforge
