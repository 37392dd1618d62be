#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "dagforge/fill/schema.hpp"
#include "dagforge/provider/gateway.hpp"

namespace dagforge {

/// One unit of the fill plan. Scalars and WholeList groups each cost one
/// focused provider call; Branch entries are structural (their contents fill
/// at the next level).
struct FillGroup {
    enum class Kind { Scalars, WholeList, Branch };

    Kind kind = Kind::Scalars;
    std::string path;                  // dotted prefix, "" = root
    std::vector<std::string> fields;   // Scalars: leaf fields; otherwise one field
    SchemaNode call_schema;            // object of exactly this group's fields

    bool is_call() const { return kind != Kind::Branch; }
};

struct FillPlan {
    std::vector<std::vector<FillGroup>> levels;

    std::size_t call_count() const {
        std::size_t n = 0;
        for (const auto& level : levels)
            for (const auto& g : level)
                if (g.is_call()) ++n;
        return n;
    }
};

struct PartialInstance {
    std::string path;
    Json values;  // object keyed by the group's fields
};

namespace fill_detail {

inline std::string join_path(const std::string& prefix, const std::string& field) {
    return prefix.empty() ? field : prefix + "." + field;
}

inline void decompose_object(const SchemaNode& schema, const std::string& path, std::size_t depth,
                             FillPlan& plan) {
    if (plan.levels.size() <= depth) plan.levels.resize(depth + 1);

    FillGroup scalars;
    scalars.kind = FillGroup::Kind::Scalars;
    scalars.path = path;
    scalars.call_schema = SchemaNode::object({});
    for (const auto& [name, child] : schema.fields) {
        if (child.kind == SchemaNode::Kind::Scalar) {
            scalars.fields.push_back(name);
            scalars.call_schema.fields[name] = child;
        }
    }
    if (!scalars.fields.empty()) plan.levels[depth].push_back(scalars);

    for (const auto& [name, child] : schema.fields) {
        if (child.kind == SchemaNode::Kind::List) {
            FillGroup g;
            g.kind = FillGroup::Kind::WholeList;  // provider returns the whole list
            g.path = path;
            g.fields = {name};
            g.call_schema = SchemaNode::object({{name, child}});
            plan.levels[depth].push_back(std::move(g));
        } else if (child.kind == SchemaNode::Kind::Object) {
            FillGroup g;
            g.kind = FillGroup::Kind::Branch;
            g.path = path;
            g.fields = {name};
            plan.levels[depth].push_back(std::move(g));
            decompose_object(child, join_path(path, name), depth + 1, plan);
        }
    }
}

/// Run tasks with at most `cap` running at once; exceptions re-thrown in task
/// order after everything joins.
inline void run_concurrent(const std::vector<std::function<void()>>& tasks, int cap) {
    if (tasks.empty()) return;
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks.size());
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                tasks[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(cap, 1)), tasks.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::string schema_kind_label(const SchemaNode& s) {
    switch (s.kind) {
        case SchemaNode::Kind::Scalar: return type_name(s.scalar_type);
        case SchemaNode::Kind::Object: return "object";
        case SchemaNode::Kind::List: return "list";
    }
    return "?";
}

inline std::string group_prompt(const FillGroup& g, const std::string& context, int attempt) {
    std::string p = "task: fill_group\n";
    p += "context: " + context + "\n";
    p += "path: " + (g.path.empty() ? std::string("(root)") : g.path) + "\n";
    for (const auto& f : g.fields) {
        const SchemaNode& child = g.call_schema.fields.count(f)
                                      ? g.call_schema.fields.at(f)
                                      : g.call_schema;
        p += "field: " + f + " " + schema_kind_label(child) + "\n";
        if (!child.description.empty()) p += "desc: " + child.description + "\n";
    }
    if (attempt > 1) p += "attempt: " + std::to_string(attempt) + "\n";
    return p;
}

}  // namespace fill_detail

/// Split a nested schema into levels of focused groups: at each object, all
/// scalar leaves (including lists of scalars) form one group, every list of
/// objects is one whole-list group, and every object field is a branch that
/// recurses one level down.
inline FillPlan decompose(const SchemaNode& schema) {
    if (schema.kind != SchemaNode::Kind::Object)
        throw ValidationError("decompose: top-level schema must be an object");
    FillPlan plan;
    fill_detail::decompose_object(schema, "", 0, plan);
    // trim trailing empty levels (branches with no leaves)
    while (!plan.levels.empty() && plan.levels.back().empty()) plan.levels.pop_back();
    return plan;
}

/// Assemble partial instances by path. Errors on overlap; the final schema
/// validation catches anything missing.
inline Json merge(const std::vector<PartialInstance>& partials, const SchemaNode& schema) {
    Json instance = Json::object();
    for (const auto& part : partials) {
        Json* at = &instance;
        if (!part.path.empty()) {
            std::size_t pos = 0;
            while (pos <= part.path.size()) {
                std::size_t dot = part.path.find('.', pos);
                std::string seg = part.path.substr(pos, dot == std::string::npos ? std::string::npos
                                                                                 : dot - pos);
                if (!at->contains(seg)) (*at)[seg] = Json::object();
                at = &(*at)[seg];
                if (dot == std::string::npos) break;
                pos = dot + 1;
            }
        }
        if (!part.values.is_object())
            throw ValidationError("merge: partial at '" + part.path + "' is not an object");
        for (const auto& [key, value] : part.values.items()) {
            if (at->contains(key))
                throw ValidationError("merge: duplicate path '" +
                                      fill_detail::join_path(part.path, key) + "'");
            (*at)[key] = value;
        }
    }
    std::string err = validate_instance(instance, schema);
    if (!err.empty()) throw ValidationError("merge: missing or invalid paths: " + err);
    return instance;
}

struct FillOptions {
    int max_concurrency = 8;
    int regeneration_attempts = 2;  // extra tries per failing group
};

/// Fill a schema through the gateway: one focused request per call group,
/// groups within a level run concurrently, levels are barriers.
inline Json fill(const SchemaNode& schema, const std::string& context, std::uint64_t seed,
                 int intelligence, ProviderGateway& gateway, const FillOptions& options = {}) {
    FillPlan plan = decompose(schema);
    std::vector<PartialInstance> partials;
    std::mutex partials_mutex;

    for (const auto& level : plan.levels) {
        std::vector<std::function<void()>> tasks;
        for (const auto& group : level) {
            if (!group.is_call()) continue;
            tasks.push_back([&, group] {
                ProviderError last("unset");
                for (int attempt = 1; attempt <= 1 + options.regeneration_attempts; ++attempt) {
                    GenerationRequest req;
                    req.kind = RequestKind::FillGroup;
                    req.prompt = fill_detail::group_prompt(group, context, attempt);
                    req.schema = group.call_schema;
                    req.seed = seed;
                    req.intelligence = intelligence;
                    try {
                        GenerationResponse resp = gateway.generate(req);
                        std::lock_guard<std::mutex> lock(partials_mutex);
                        partials.push_back({group.path, resp.payload});
                        return;
                    } catch (const ProviderError& e) {
                        last = e;
                    }
                }
                throw ProviderError("fill group '" + group.path + "' failed after " +
                                    std::to_string(1 + options.regeneration_attempts) +
                                    " attempts: " + last.what());
            });
        }
        fill_detail::run_concurrent(tasks, options.max_concurrency);
    }
    return merge(partials, schema);
}

}  // namespace dagforge
