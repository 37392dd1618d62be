#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dagforge/expr/ast.hpp"
#include "dagforge/expr/check.hpp"
#include "dagforge/runtime/journal.hpp"

namespace dagforge {

struct ToolPolicy {
    std::set<std::string> whitelist;  // tool namespaces: fs, http
    bool allow_irreversible = false;
    std::map<std::string, std::string> http_fixtures;  // url -> body (tests)
};

/// Dispatches `tool.*` calls for one run (or one speculation overlay).
/// Whitelisting and the irreversibility gate fire before anything is
/// journaled; every performed effect is journaled before it happens. In
/// overlay mode writes land under the overlay root and reads prefer it, so
/// nothing escapes until the ticket commits.
class ToolContext {
public:
    ToolContext(std::filesystem::path workspace, ToolPolicy policy, Journal* journal)
        : workspace_(std::move(workspace)), policy_(std::move(policy)), journal_(journal) {}

    void set_overlay(const std::filesystem::path& overlay) { overlay_ = overlay; }
    bool in_overlay() const { return !overlay_.empty(); }

    Value call(const std::string& dotted, const std::vector<Value>& args) {
        std::string ns = expr::tool_namespace(dotted);
        if (!policy_.whitelist.count(ns))
            throw expr::ExprError{"tool not whitelisted: " + ns, 0, 0};
        auto effect = tool_effect(dotted);
        if (!effect) throw expr::ExprError{"unknown tool: " + dotted, 0, 0};
        if (effect_irreversible(*effect)) {
            if (in_overlay())
                throw expr::ExprError{
                    "irreversible effect '" + dotted + "' refused inside a speculation overlay",
                    0, 0};
            if (!policy_.allow_irreversible)
                throw expr::ExprError{"irreversible effect '" + dotted +
                                          "' refused (pass --allow-irreversible)",
                                      0, 0};
        }

        if (dotted == "fs.read") return fs_read(std::get<std::string>(args.at(0)));
        if (dotted == "fs.write")
            return fs_write(std::get<std::string>(args.at(0)), std::get<std::string>(args.at(1)));
        if (dotted == "http.get") return http_get(std::get<std::string>(args.at(0)));
        throw expr::ExprError{"unknown tool: " + dotted, 0, 0};
    }

    /// Workspace-relative, lexically confined; the run bookkeeping area and
    /// the provider cache are off limits to tools.
    static std::string confine(const std::string& raw) {
        if (raw.empty()) throw expr::ExprError{"empty path", 0, 0};
        std::filesystem::path p(raw);
        if (p.is_absolute()) throw expr::ExprError{"absolute paths are not allowed: " + raw, 0, 0};
        std::filesystem::path normal = p.lexically_normal();
        std::string s = normal.generic_string();
        for (const auto& part : normal)
            if (part == "..")
                throw expr::ExprError{"path escapes the workspace: " + raw, 0, 0};
        if (s.rfind("runs/", 0) == 0 || s == "runs" || s.rfind("cache/", 0) == 0 || s == "cache" ||
            s.rfind(".agilink", 0) == 0)
            throw expr::ExprError{"path targets a reserved workspace area: " + raw, 0, 0};
        return s;
    }

private:
    std::filesystem::path target_root() const { return in_overlay() ? overlay_ : workspace_; }

    Value fs_read(const std::string& raw) {
        std::string rel = confine(raw);
        EffectRecord r;
        r.effect = EffectClass::FsRead;
        r.description = "fs.read " + rel;
        r.inverse = EffectRecord::InverseKind::None;
        r.none_reason = "readonly";
        r.path = rel;
        journal_->append(r);

        std::filesystem::path file = target_root() / rel;
        if (in_overlay() && !std::filesystem::exists(file)) file = workspace_ / rel;
        std::ifstream in(file, std::ios::binary);
        if (!in) throw expr::ExprError{"fs.read: no such file: " + rel, 0, 0};
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    }

    Value fs_write(const std::string& raw, const std::string& data) {
        std::string rel = confine(raw);
        std::filesystem::path file = target_root() / rel;

        EffectRecord r;
        r.effect = EffectClass::FsWrite;
        r.description = "fs.write " + rel;
        r.path = rel;
        r.written = data;
        if (std::filesystem::exists(file)) {
            std::ifstream in(file, std::ios::binary);
            r.prior.assign((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
            r.inverse = EffectRecord::InverseKind::RestoreBytes;
        } else {
            r.inverse = EffectRecord::InverseKind::DeleteCreated;
            // note directories the write is about to create, deepest-first
            std::filesystem::path dir = file.parent_path();
            std::filesystem::path rel_dir = std::filesystem::path(rel).parent_path();
            while (!rel_dir.empty() && rel_dir != "." && !std::filesystem::exists(dir)) {
                r.created_dirs.push_back(rel_dir.generic_string());
                dir = dir.parent_path();
                rel_dir = rel_dir.parent_path();
            }
        }
        journal_->append(r);  // journal first, then perform

        std::error_code ec;
        std::filesystem::create_directories(file.parent_path(), ec);
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        if (!out) throw expr::ExprError{"fs.write: cannot open " + rel, 0, 0};
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        return true;
    }

    Value http_get(const std::string& url) {
        EffectRecord r;
        r.effect = EffectClass::Network;
        r.description = "http.get " + url;
        r.inverse = EffectRecord::InverseKind::None;
        r.none_reason = "irreversible";
        journal_->append(r);

        auto it = policy_.http_fixtures.find(url);
        if (it == policy_.http_fixtures.end())
            throw expr::ExprError{"http.get: no fixture for " + url, 0, 0};
        return it->second;
    }

    std::filesystem::path workspace_;
    std::filesystem::path overlay_;
    ToolPolicy policy_;
    Journal* journal_;
};

/// Map path -> bytes of a workspace tree, skipping the bookkeeping areas.
/// This is the rollback-exactness comparison domain.
inline std::map<std::string, std::string> workspace_snapshot(
    const std::filesystem::path& workspace) {
    std::map<std::string, std::string> snapshot;
    if (!std::filesystem::exists(workspace)) return snapshot;
    for (auto it = std::filesystem::recursive_directory_iterator(workspace);
         it != std::filesystem::recursive_directory_iterator(); ++it) {
        std::string rel = std::filesystem::relative(it->path(), workspace).generic_string();
        if (rel == "runs" || rel.rfind("runs/", 0) == 0 || rel == "cache" ||
            rel.rfind("cache/", 0) == 0 || rel.rfind(".agilink", 0) == 0) {
            if (it->is_directory()) it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file()) {
            std::ifstream in(it->path(), std::ios::binary);
            snapshot[rel].assign((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
        } else if (it->is_directory()) {
            snapshot[rel + "/"];  // empty marker so bare directories count
        }
    }
    return snapshot;
}

}  // namespace dagforge
