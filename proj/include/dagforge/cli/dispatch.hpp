#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dagforge/cli/store.hpp"
#include "dagforge/provider/http.hpp"
#include "dagforge/runtime/interpret.hpp"

namespace dagforge {

/// A parsed invocation (kept for introspection and tests; the CLI11 apps do
/// the actual flag validation).
struct CommandSpec {
    std::string tool;
    std::string verb;
    std::map<std::string, std::string> flags;
    std::vector<std::string> inputs;
};

/// Streams and service injection for in-process CLI runs (tests drive pipes
/// and instrument the gateway through this).
struct DispatchIO {
    std::istream* in = &std::cin;
    std::ostream* out = &std::cout;
    std::ostream* err = &std::cerr;
    ProviderGateway* gateway = nullptr;          // null: build from environment
    std::filesystem::path workspace_override;    // empty: DAGFORGE_WORKSPACE or .dagforge
    std::filesystem::path store_root_override;   // empty: AGILINK_ROOT or .agilink
};

namespace cli_detail {

inline std::filesystem::path resolve_workspace(const DispatchIO& io) {
    if (!io.workspace_override.empty()) return io.workspace_override;
    if (const char* env = std::getenv("DAGFORGE_WORKSPACE")) return env;
    return ".dagforge";
}

inline std::filesystem::path resolve_store_root(const DispatchIO& io) {
    if (!io.store_root_override.empty()) return io.store_root_override;
    return ArtifactStore::default_root();
}

/// Gateway per invocation: providers from DAGFORGE_PROVIDERS (yaml registry)
/// or one default mock; response cache persists under the workspace.
inline std::unique_ptr<ProviderGateway> build_gateway(const DispatchIO& io,
                                                      const std::filesystem::path& workspace) {
    auto gateway = std::make_unique<ProviderGateway>();
    gateway->set_cache_dir(workspace / "cache" / "providers");
    if (const char* env = std::getenv("DAGFORGE_HTTP_PROVIDERS"))
        if (std::string(env) == "1") enable_http_provider();
    if (const char* env = std::getenv("DAGFORGE_PROVIDERS")) {
        std::ifstream in(env, std::ios::binary);
        if (!in) throw UsageError(std::string("DAGFORGE_PROVIDERS file not found: ") + env);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        for (auto& spec : load_provider_specs(text)) gateway->register_provider(std::move(spec));
    } else {
        ProviderSpec spec;
        spec.id = "mock";
        spec.tier = 10;
        gateway->register_provider(spec);
    }
    return gateway;
}

inline std::string read_input(const std::string& arg, DispatchIO& io) {
    if (arg == "-") {
        return std::string((std::istreambuf_iterator<char>(*io.in)),
                           std::istreambuf_iterator<char>());
    }
    if (is_agilink_uri(arg)) {
        ArtifactStore store(resolve_store_root(io));
        return store.get(parse_uri(arg));
    }
    std::ifstream in(arg, std::ios::binary);
    if (!in) throw UsageError("cannot read input '" + arg + "'");
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline TypeFloor parse_floor_arg(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "plain_text" || s == "plain" || s == "text") return TypeFloor::Text;
    if (s == "code") return TypeFloor::Pure;  // the abstract's TEXT->...->CODE reading
    auto f = parse_floor_name(s);
    if (!f)
        throw UsageError("unknown type floor '" + s +
                         "' (text|typed|spec|stub|shim|pure, aliases plain_text, code)");
    return *f;
}

inline std::set<std::string> parse_tools_csv(const std::string& csv) {
    std::set<std::string> tools;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) tools.insert(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tools.insert(cur);
    return tools;
}

inline std::string join_text(const std::vector<std::string>& parts) {
    std::string text;
    for (const auto& p : parts) {
        if (!text.empty()) text += " ";
        text += p;
    }
    return text;
}

struct ExecFlags {
    std::string jit = "dynamic";
    std::string tools_csv;
    std::uint64_t seed = 0;
    int intelligence = 5;
    int parallelism = 1;
    bool allow_irreversible = false;
};

inline void add_exec_flags(CLI::App* cmd, ExecFlags& f) {
    cmd->add_option("--jit", f.jit, "JIT mode")
        ->check(CLI::IsMember({"prefine", "dynamic", "predict"}));
    cmd->add_option("--tools", f.tools_csv, "comma-separated tool whitelist");
    cmd->add_option("--seed", f.seed, "generation seed");
    cmd->add_option("--intelligence", f.intelligence, "model tier 1..10")->check(CLI::Range(1, 10));
    cmd->add_option("--parallelism", f.parallelism, "concurrent workers")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--allow-irreversible", f.allow_irreversible,
                  "permit network/database effects (not rollback-covered)");
}

inline RunConfig make_run_config(const ExecFlags& f, const std::filesystem::path& workspace) {
    RunConfig config;
    auto mode = parse_jit_mode(f.jit);
    config.mode = mode ? *mode : JitMode::Dynamic;
    config.tools = parse_tools_csv(f.tools_csv);
    config.seed = f.seed;
    config.intelligence = f.intelligence;
    config.parallelism = f.parallelism;
    config.allow_irreversible = f.allow_irreversible;
    config.workspace = workspace;
    return config;
}

inline void print_report(const ValidationReport& report, std::ostream& err) {
    if (!report.diagnostics.empty()) err << report.to_string();
}

}  // namespace cli_detail

/// The dagify / dagent verb grammar. Returns the process exit code:
/// 0 ok, 1 validation error, 2 execution error, 3 provider error, 4 usage.
inline int dispatch(const std::string& tool, const std::vector<std::string>& args,
                    DispatchIO io = {}) {
    using namespace cli_detail;
    CLI::App app{tool == "dagify" ? "dagify - workflow graph compiler"
                                  : "dagent - effect-aware graph runtime"};
    app.require_subcommand(1);

    // ---- dagify verbs ----
    std::string compose_type = "text", compose_fmt = "yaml";
    bool compose_ascii = false;
    std::uint64_t compose_seed = 0;
    int compose_intelligence = 5;
    std::vector<std::string> compose_text_parts;

    std::string refine_in, refine_node, refine_note, refine_fmt = "yaml";

    std::string resolve_in, resolve_floor = "pure", resolve_fmt = "yaml";
    std::uint64_t resolve_seed = 0;
    int resolve_intelligence = 5;
    bool resolve_ascii = false;

    std::string compile_in, compile_target_floor, compile_build_target = "manifest",
                            compile_fmt = "yaml";
    bool compile_ascii = false;
    std::uint64_t compile_seed = 0;
    int compile_intelligence = 5;

    // ---- dagent verbs ----
    std::string validate_in;
    std::string execute_in;
    ExecFlags execute_flags, interpret_flags, synthesize_flags;
    std::vector<std::string> interpret_text_parts, synthesize_text_parts;

    if (tool == "dagify") {
        auto* compose = app.add_subcommand("compose", "generate a DAG from natural language");
        compose->add_option("--type", compose_type, "target type floor");
        compose->add_option("-f,--format", compose_fmt)->check(CLI::IsMember({"yaml", "json"}));
        compose->add_flag("--ascii", compose_ascii, "sketch the DAG on stderr");
        compose->add_option("--seed", compose_seed);
        compose->add_option("--intelligence", compose_intelligence)->check(CLI::Range(1, 10));
        compose->add_option("text", compose_text_parts, "workflow description")->required();

        auto* refine = app.add_subcommand("refine", "attach context notes to nodes");
        refine->add_option("in", refine_in, "graph file, '-' or agilink URI")->required();
        refine->add_option("--node", refine_node, "target node id (default: all nodes)");
        refine->add_option("--note", refine_note, "note text")->required();
        refine->add_option("-f,--format", refine_fmt)->check(CLI::IsMember({"yaml", "json"}));

        auto* resolve = app.add_subcommand("resolve", "upgrade a DAG to a higher type floor");
        resolve->add_option("in", resolve_in, "graph file, '-' or agilink URI")->required();
        resolve->add_option("--type-floor", resolve_floor, "target floor (default pure)");
        resolve->add_option("--seed", resolve_seed);
        resolve->add_option("--intelligence", resolve_intelligence)->check(CLI::Range(1, 10));
        resolve->add_option("-f,--format", resolve_fmt)->check(CLI::IsMember({"yaml", "json"}));
        resolve->add_flag("--ascii", resolve_ascii);

        auto* compile = app.add_subcommand("compile", "produce an executable manifest");
        compile->add_option("in", compile_in, "graph file, '-' or agilink URI")->required();
        compile->add_option("-t", compile_target_floor, "resolve to this floor first");
        compile->add_option("--build-target", compile_build_target)
            ->check(CLI::IsMember({"manifest"}));
        compile->add_flag("--ascii", compile_ascii);
        compile->add_option("--seed", compile_seed);
        compile->add_option("--intelligence", compile_intelligence)->check(CLI::Range(1, 10));
        compile->add_option("-f,--format", compile_fmt)->check(CLI::IsMember({"yaml", "json"}));
    } else {
        auto* validate = app.add_subcommand("validate", "static analysis and type checking");
        validate->add_option("in", validate_in, "graph/manifest file, '-' or agilink URI")
            ->required();

        auto* execute = app.add_subcommand("execute", "run a graph or manifest");
        execute->add_option("in", execute_in, "graph/manifest file, '-' or agilink URI")
            ->required();
        add_exec_flags(execute, execute_flags);

        auto* interpret_cmd =
            app.add_subcommand("interpret", "generate and execute directly from text");
        interpret_cmd->add_option("text", interpret_text_parts, "workflow description")
            ->required();
        add_exec_flags(interpret_cmd, interpret_flags);

        auto* synthesize_cmd =
            app.add_subcommand("synthesize", "plan, compile and execute in one pass");
        synthesize_cmd->add_option("text", synthesize_text_parts, "workflow description")
            ->required();
        add_exec_flags(synthesize_cmd, synthesize_flags);
    }

    std::vector<char*> argv;
    std::vector<std::string> argv_storage;
    argv_storage.push_back(tool);
    for (const auto& a : args) argv_storage.push_back(a);
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        *io.out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        *io.err << "usage error: " << e.what() << "; run '" << tool << " --help'\n";
        return 4;
    }

    std::filesystem::path workspace = resolve_workspace(io);
    std::unique_ptr<ProviderGateway> owned_gateway;
    auto gateway = [&]() -> ProviderGateway& {
        if (io.gateway) return *io.gateway;
        if (!owned_gateway) owned_gateway = build_gateway(io, workspace);
        return *owned_gateway;
    };

    auto load_graph = [&](const std::string& arg) {
        std::string text = read_input(arg, io);
        return parse_graph(text, sniff_format(text));
    };

    try {
        if (tool == "dagify") {
            if (app.got_subcommand("compose")) {
                TypeFloor floor = parse_floor_arg(compose_type);
                WorkflowGraph g = compose(join_text(compose_text_parts), floor, compose_seed,
                                          compose_intelligence, gateway());
                *io.out << render_graph(g, compose_fmt);
                if (compose_ascii) *io.err << render_ascii(g);
                return 0;
            }
            if (app.got_subcommand("refine")) {
                WorkflowGraph g = load_graph(refine_in);
                std::optional<std::string> node;
                if (!refine_node.empty()) node = refine_node;
                WorkflowGraph refined = refine(g, node, refine_note);
                *io.out << render_graph(refined, refine_fmt);
                return 0;
            }
            if (app.got_subcommand("resolve")) {
                WorkflowGraph g = load_graph(resolve_in);
                ResolverOptions opts;
                opts.seed = resolve_seed;
                opts.intelligence = resolve_intelligence;
                ResolveResult r = resolve(g, parse_floor_arg(resolve_floor), gateway(), opts);
                for (const auto& w : r.warnings) *io.err << "warning: " << w << "\n";
                *io.out << render_graph(r.graph, resolve_fmt);
                if (resolve_ascii) *io.err << render_ascii(r.graph);
                return 0;
            }
            if (app.got_subcommand("compile")) {
                std::string text = read_input(compile_in, io);
                Json doc = parse_doc(text, sniff_format(text));
                if (doc_is_manifest(doc))
                    throw UsageError("compile: input is already a manifest");
                WorkflowGraph g = parse_graph(text, sniff_format(text));
                if (!compile_target_floor.empty()) {
                    ResolverOptions opts;
                    opts.seed = compile_seed;
                    opts.intelligence = compile_intelligence;
                    TypeFloor target = parse_floor_arg(compile_target_floor);
                    ResolveResult r = resolve(g, target, gateway(), opts);
                    for (const auto& w : r.warnings) *io.err << "warning: " << w << "\n";
                    g = r.graph;
                }
                CompileManifest manifest = compile_graph(g, compile_build_target);
                if (compile_fmt == "json")
                    *io.out << to_pretty_json(manifest_to_doc(manifest));
                else
                    *io.out << render_manifest(manifest);
                if (compile_ascii) *io.err << render_ascii(manifest.graph);
                return 0;
            }
        } else {
            if (app.got_subcommand("validate")) {
                std::string text = read_input(validate_in, io);
                Json doc = parse_doc(text, sniff_format(text));
                RunConfig permissive;
                permissive.tools = {"fs", "http"};
                permissive.workspace = workspace;
                ValidationReport report;
                if (doc_is_manifest(doc))
                    report = validate_run(manifest_from_doc(doc), permissive);
                else
                    report = validate_run(graph_from_doc(doc), permissive);
                print_report(report, *io.err);
                if (!report.ok) return 1;
                *io.err << "ok\n";
                return 0;
            }
            if (app.got_subcommand("execute")) {
                std::string text = read_input(execute_in, io);
                Json doc = parse_doc(text, sniff_format(text));
                RunConfig config = make_run_config(execute_flags, workspace);
                RunRecord record =
                    doc_is_manifest(doc)
                        ? execute_manifest(manifest_from_doc(doc), config, gateway())
                        : execute_graph(graph_from_doc(doc), config, gateway());
                *io.out << to_canonical_yaml(record_to_doc(record, false));
                *io.err << "run " << record.run_id << ": "
                        << (record.status == RunRecord::Status::Ok ? "ok" : "failed") << "\n";
                if (record.status != RunRecord::Status::Ok) {
                    *io.err << "failed node: " << record.failed_node << ": " << record.error
                            << "\n";
                    return 2;
                }
                return 0;
            }
            if (app.got_subcommand("interpret")) {
                RunConfig config = make_run_config(interpret_flags, workspace);
                RunRecord record = interpret(join_text(interpret_text_parts), config, gateway());
                *io.out << to_canonical_yaml(record_to_doc(record, false));
                *io.err << "run " << record.run_id << ": "
                        << (record.status == RunRecord::Status::Ok ? "ok" : "failed") << "\n";
                return record.status == RunRecord::Status::Ok ? 0 : 2;
            }
            if (app.got_subcommand("synthesize")) {
                RunConfig config = make_run_config(synthesize_flags, workspace);
                SynthesizeOutput out = synthesize(join_text(synthesize_text_parts), config,
                                                  gateway());
                for (const auto& w : out.warnings) *io.err << "warning: " << w << "\n";
                *io.out << render_manifest(out.manifest);
                *io.err << "run " << out.record.run_id << ": "
                        << (out.record.status == RunRecord::Status::Ok ? "ok" : "failed") << "\n";
                return out.record.status == RunRecord::Status::Ok ? 0 : 2;
            }
        }
        *io.err << "usage error: missing verb; run '" << tool << " --help'\n";
        return 4;
    } catch (const Error& e) {
        *io.err << tool << ": " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        *io.err << tool << ": internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace dagforge
