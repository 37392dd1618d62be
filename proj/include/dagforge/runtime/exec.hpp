#pragma once

#include <condition_variable>
#include <future>
#include <mutex>
#include <thread>

#include "dagforge/compiler/compile.hpp"
#include "dagforge/runtime/node_exec.hpp"
#include "dagforge/runtime/speculate.hpp"

namespace dagforge {

struct RunRecord {
    std::string run_id;
    JitMode mode = JitMode::Dynamic;
    std::uint64_t seed = 0;
    enum class Status { Ok, Failed };
    Status status = Status::Ok;
    std::map<std::string, NodeResult> results;
    JournalSnapshot journal;
    int total_provider_requests = 0;
    double wall_clock_ms = 0.0;
    std::string failed_node;
    std::string error;
    std::vector<std::string> rollback_residue;
    std::optional<Json> graph_doc;  // interpret attaches the graph it built
};

/// Timings (and wall clock) are the only volatile fields; the stdout variant
/// of a record omits them so identical runs are byte-identical.
inline Json record_to_doc(const RunRecord& r, bool include_timings) {
    Json j = Json::object();
    j["run"] = r.run_id;
    j["mode"] = jit_mode_name(r.mode);
    j["seed"] = r.seed;
    j["status"] = r.status == RunRecord::Status::Ok ? "ok" : "failed";
    j["total_provider_requests"] = r.total_provider_requests;
    if (include_timings) j["wall_clock_ms"] = r.wall_clock_ms;
    Json results = Json::object();
    for (const auto& [id, nr] : r.results) {
        Json nj = Json::object();
        nj["status"] = node_status_name(nr.status);
        nj["provider_requests"] = nr.provider_requests;
        if (nr.speculative) nj["speculative"] = true;
        Json outs = Json::object();
        for (const auto& [port, value] : nr.outputs) outs[port] = value_to_json(value);
        nj["outputs"] = outs;
        if (include_timings) {
            nj["start_ms"] = nr.start_ms;
            nj["end_ms"] = nr.end_ms;
        }
        if (!nr.error.empty()) nj["error"] = nr.error;
        results[id] = nj;
    }
    j["results"] = results;
    j["journal"] = r.journal.to_doc();
    if (!r.failed_node.empty()) j["failed_node"] = r.failed_node;
    if (!r.error.empty()) j["error"] = r.error;
    if (!r.rollback_residue.empty()) j["rollback_residue"] = r.rollback_residue;
    if (r.graph_doc) j["graph"] = *r.graph_doc;
    return j;
}

/// Static run checks: graph validity, whitelist coverage of every tool
/// reference, declared-vs-implied effect agreement, PURE purity.
inline ValidationReport validate_run(const WorkflowGraph& graph, const RunConfig& config) {
    ValidationReport report = validate_graph(graph);
    for (const auto& n : graph.nodes) {
        std::string locus = "node " + n.id;
        std::set<EffectClass> implied;
        if (n.body) {
            try {
                expr::Program prog = expr::parse_program(*n.body);
                for (const auto& name : expr::program_tool_refs(prog)) {
                    std::string ns = expr::tool_namespace(name);
                    if (!config.tools.count(ns))
                        report.error(locus, "tool not whitelisted: " + ns);
                    if (auto e = tool_effect(name)) implied.insert(*e);
                }
            } catch (const expr::ExprError&) {
                // body parse errors were already reported by validate_graph
            }
        }
        for (auto e : n.effects)
            if (!implied.count(e))
                report.error(locus, std::string("declared effect '") + effect_name(e) +
                                        "' is not implied by any tool the body calls");
        for (auto e : implied)
            if (!n.effects.count(e))
                report.error(locus, std::string("body performs undeclared effect '") +
                                        effect_name(e) + "'");
    }
    return report;
}

inline ValidationReport validate_run(const CompileManifest& manifest, const RunConfig& config) {
    ValidationReport report = validate_run(manifest.graph, config);
    if (manifest.floor < TypeFloor::Shim)
        report.error("manifest", "manifest floor below shim");
    for (const auto& t : manifest.tools)
        if (!config.tools.count(t)) report.error("manifest", "tool not whitelisted: " + t);
    // the schedule must be a valid stratification of the embedded graph
    std::map<std::string, std::size_t> layer_of;
    std::size_t seen = 0;
    for (std::size_t k = 0; k < manifest.schedule.size(); ++k)
        for (const auto& id : manifest.schedule[k]) {
            if (layer_of.count(id)) report.error("manifest", "schedule repeats node " + id);
            layer_of[id] = k;
            ++seen;
        }
    if (seen != manifest.graph.nodes.size())
        report.error("manifest", "schedule does not cover the graph");
    for (const auto& e : manifest.graph.edges) {
        auto a = layer_of.find(e.from.node);
        auto b = layer_of.find(e.to.node);
        if (a != layer_of.end() && b != layer_of.end() && a->second >= b->second)
            report.error("manifest", "schedule violates edge " + e.from.node + "->" + e.to.node);
    }
    return report;
}

/// Warm the synthesis cache for every virtual call on SHIM nodes, issuing
/// requests concurrently with whatever else is running. Failures degrade to
/// dynamic synthesis at dispatch time.
inline int prefine_pass(const WorkflowGraph& graph, const ExecEnv& env,
                        std::atomic<int>* request_counter) {
    int started = 0;
    for (const auto& node : graph.nodes) {
        if (node.floor != TypeFloor::Shim) continue;
        std::string digest = upstream_context_digest(graph, node.id);
        for (const auto& decl : node.virtual_calls) {
            std::string key = synthesis_key(node.id, decl, digest);
            if (env.synth->contains(key)) continue;
            ProviderGateway* gateway = env.gateway;
            std::uint64_t seed = env.config->seed;
            int intelligence = env.config->intelligence;
            std::string node_id = node.id;
            VirtualCallDecl decl_copy = decl;
            env.synth->ensure(
                key,
                [=] {
                    return synthesize_virtual_body(decl_copy, node_id, digest, nullptr, seed,
                                                   intelligence, *gateway, [=] {
                                                       if (request_counter) ++*request_counter;
                                                   });
                },
                true);
            ++started;
        }
    }
    return started;
}

namespace exec_detail {

inline std::string run_identity(const WorkflowGraph& g, const RunConfig& config) {
    std::string tools;
    for (const auto& t : config.tools) tools += t + ",";
    return sha256_hex(frame_fields({graph_content_hash(g), jit_mode_name(config.mode),
                                    std::to_string(config.seed), tools,
                                    std::to_string(config.parallelism),
                                    config.allow_irreversible ? "irr" : "rev"}))
        .substr(0, 16);
}

class Scheduler {
public:
    Scheduler(const WorkflowGraph& g, const RunConfig& config, ProviderGateway& gateway)
        : graph_(g), config_(config), gateway_(gateway) {}

    RunRecord run() {
        RunRecord record;
        record.mode = config_.mode;
        record.seed = config_.seed;
        record.run_id = run_identity(graph_, config_);

        std::filesystem::path run_dir = config_.workspace / "runs" / record.run_id;
        std::error_code ec;
        std::filesystem::remove_all(run_dir, ec);
        std::filesystem::create_directories(run_dir, ec);

        Journal journal(record.run_id);
        SynthesisCache synth;
        ExecEnv env;
        env.graph = &graph_;
        env.config = &config_;
        env.gateway = &gateway_;
        env.synth = &synth;
        env.journal = &journal;
        env.workspace = config_.workspace;

        auto t0 = std::chrono::steady_clock::now();
        auto now_ms = [t0] {
            return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             t0)
                .count();
        };

        std::atomic<int> background_requests{0};
        if (config_.mode == JitMode::Prefine) prefine_pass(graph_, env, &background_requests);

        std::map<std::string, std::future<SpeculationTicket>> tickets;
        if (config_.mode == JitMode::Predict) {
            std::map<std::string, int> indeg;
            for (const auto& e : graph_.edges) ++indeg[e.to.node];
            for (const auto& node : graph_.nodes) {
                if (node.floor < TypeFloor::Typed || indeg[node.id] == 0) continue;
                std::filesystem::path overlay = run_dir / "overlay" / node.id;
                const Node* n = &node;
                tickets[node.id] = std::async(std::launch::async, [this, n, env, overlay] {
                    return speculate(*n, env, overlay);
                });
            }
        }

        // worker-pool topological dispatch
        std::mutex m;
        std::condition_variable cv;
        std::map<std::string, int> indegree;
        std::map<std::string, std::vector<std::string>> successors;
        for (const auto& n : graph_.nodes) indegree[n.id] = 0;
        for (const auto& e : graph_.edges) {
            ++indegree[e.to.node];
            successors[e.from.node].push_back(e.to.node);
        }
        std::set<std::string> ready;
        for (const auto& [id, d] : indegree)
            if (d == 0) ready.insert(id);
        std::size_t remaining = graph_.nodes.size();
        bool failed = false;
        std::string failed_node, failure;
        std::map<std::string, NodeResult> results;

        auto worker = [&] {
            std::unique_lock<std::mutex> lk(m);
            while (true) {
                cv.wait(lk, [&] { return failed || !ready.empty() || remaining == 0; });
                if (failed || remaining == 0) return;
                if (ready.empty()) continue;
                std::string id = *ready.begin();
                ready.erase(ready.begin());
                const Node* node = graph_.find_node(id);
                std::map<std::string, Value> inputs = gather_inputs(graph_, *node, results);
                std::string upstream_text = gather_upstream_text(graph_, *node, results);
                lk.unlock();

                double start = now_ms();
                NodeResult r;
                bool have_result = false;
                if (config_.mode == JitMode::Predict) {
                    auto t = tickets.find(id);
                    if (t != tickets.end()) {
                        SpeculationTicket ticket = t->second.get();
                        if (settle(ticket, inputs, config_.workspace, journal) ==
                            SettleOutcome::Committed) {
                            r = ticket.result;
                            r.speculative = true;
                            double at = now_ms();
                            r.start_ms = at;  // committed at settle time
                            r.end_ms = at;
                            have_result = true;
                        } else {
                            background_requests += ticket.result.provider_requests;
                        }
                    }
                }
                if (!have_result) {
                    r = execute_node(*node, inputs, upstream_text, env);
                    r.start_ms = start;
                    r.end_ms = now_ms();
                }

                lk.lock();
                results[id] = r;
                --remaining;
                if (r.status == NodeResult::Status::Failed) {
                    failed = true;  // halt new dispatch; in-flight workers drain
                    failed_node = id;
                    failure = r.error;
                } else {
                    for (const auto& s : successors[id])
                        if (--indegree[s] == 0) ready.insert(s);
                }
                cv.notify_all();
            }
        };

        std::vector<std::thread> pool;
        std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(std::max(config_.parallelism, 1)),
                                  std::max<std::size_t>(graph_.nodes.size(), 1));
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        // discard any un-settled speculation
        for (auto& [id, fut] : tickets) {
            if (!fut.valid()) continue;
            SpeculationTicket ticket = fut.get();
            std::error_code rmec;
            std::filesystem::remove_all(ticket.overlay_dir, rmec);
        }
        synth.wait_all();

        record.results = std::move(results);
        if (failed) {
            record.status = RunRecord::Status::Failed;
            record.failed_node = failed_node;
            record.error = failure;
            record.rollback_residue = journal.rollback(config_.workspace);
        } else {
            journal.commit();
        }
        record.journal = journal.freeze();
        record.total_provider_requests = background_requests.load();
        for (const auto& [id, r] : record.results)
            record.total_provider_requests += r.provider_requests;
        record.wall_clock_ms = now_ms();

        write_files(record, run_dir);
        return record;
    }

private:
    void write_files(const RunRecord& record, const std::filesystem::path& run_dir) {
        std::ofstream rec(run_dir / "record.yaml", std::ios::binary | std::ios::trunc);
        rec << to_canonical_yaml(record_to_doc(record, true));
        std::ofstream jr(run_dir / "journal.yaml", std::ios::binary | std::ios::trunc);
        jr << to_canonical_yaml(record.journal.to_doc());
    }

    const WorkflowGraph& graph_;
    const RunConfig& config_;
    ProviderGateway& gateway_;
};

}  // namespace exec_detail

/// Execute a graph. Throws ValidationError when validate_run rejects it (no
/// journal is opened in that case); node failures roll the journal back and
/// come back as a failed record, not an exception.
inline RunRecord execute_graph(const WorkflowGraph& graph, const RunConfig& config,
                               ProviderGateway& gateway) {
    ValidationReport report = validate_run(graph, config);
    if (!report.ok)
        throw ValidationError("run validation failed:\n" + report.to_string());
    std::error_code ec;
    std::filesystem::create_directories(config.workspace, ec);
    exec_detail::Scheduler scheduler(graph, config, gateway);
    return scheduler.run();
}

inline RunRecord execute_manifest(const CompileManifest& manifest, const RunConfig& config,
                                  ProviderGateway& gateway) {
    ValidationReport report = validate_run(manifest, config);
    if (!report.ok)
        throw ValidationError("run validation failed:\n" + report.to_string());
    std::error_code ec;
    std::filesystem::create_directories(config.workspace, ec);
    exec_detail::Scheduler scheduler(manifest.graph, config, gateway);
    return scheduler.run();
}

/// Every predecessor finished before its successor started (speculative
/// results count from their settle time).
inline bool scheduler_sound(const RunRecord& record, const WorkflowGraph& graph) {
    for (const auto& e : graph.edges) {
        auto a = record.results.find(e.from.node);
        auto b = record.results.find(e.to.node);
        if (a == record.results.end() || b == record.results.end()) continue;
        if (a->second.end_ms > b->second.start_ms + 1e-6) return false;
    }
    return true;
}

}  // namespace dagforge
