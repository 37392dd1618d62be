#pragma once

#include <atomic>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dagforge/common/doc.hpp"
#include "dagforge/provider/mock.hpp"
#include "dagforge/provider/provider.hpp"

namespace dagforge {

class ProviderBackend {
public:
    virtual ~ProviderBackend() = default;
    virtual const ProviderSpec& spec() const = 0;
    virtual Json generate(const GenerationRequest& req) = 0;
};

class MockBackend : public ProviderBackend {
public:
    explicit MockBackend(ProviderSpec spec) : impl_(std::move(spec)) {}
    const ProviderSpec& spec() const override { return impl_.spec(); }
    Json generate(const GenerationRequest& req) override { return impl_.generate(req); }

private:
    MockProvider impl_;
};

/// Single gateway for all model calls: registry, tier routing with failover,
/// seed-deterministic caching (memory + optional on-disk persistence under
/// the workspace), and instrumentation counters the test suites rely on.
class ProviderGateway {
public:
    ProviderGateway() = default;

    void set_cache_dir(const std::filesystem::path& dir) { cache_dir_ = dir; }

    void register_provider(ProviderSpec spec) {
        if (spec.tier < 1 || spec.tier > 10)
            throw ValidationError("provider '" + spec.id + "': tier " + std::to_string(spec.tier) +
                                  " out of range 1..10");
        if (spec.id.empty()) throw ValidationError("provider id must not be empty");
        std::lock_guard<std::mutex> lock(mutex_);
        for (const auto& p : providers_)
            if (p->spec().id == spec.id)
                throw ValidationError("duplicate provider id '" + spec.id + "'");
        providers_.push_back(make_backend(std::move(spec)));
    }

    void register_backend(std::unique_ptr<ProviderBackend> backend) {
        std::lock_guard<std::mutex> lock(mutex_);
        for (const auto& p : providers_)
            if (p->spec().id == backend->spec().id)
                throw ValidationError("duplicate provider id '" + backend->spec().id + "'");
        providers_.push_back(std::move(backend));
    }

    std::size_t provider_count() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return providers_.size();
    }

    /// Failover order: providers meeting the requested intelligence first
    /// (ascending tier, then id), then the rest by descending tier (then id).
    std::vector<std::string> route(const GenerationRequest& req) const {
        std::lock_guard<std::mutex> lock(mutex_);
        if (providers_.empty()) throw ProviderError("no providers registered");
        std::vector<const ProviderSpec*> capable, fallback;
        for (const auto& p : providers_) {
            (p->spec().tier >= req.intelligence ? capable : fallback).push_back(&p->spec());
        }
        auto by_tier_asc = [](const ProviderSpec* a, const ProviderSpec* b) {
            return a->tier != b->tier ? a->tier < b->tier : a->id < b->id;
        };
        auto by_tier_desc = [](const ProviderSpec* a, const ProviderSpec* b) {
            return a->tier != b->tier ? a->tier > b->tier : a->id < b->id;
        };
        std::sort(capable.begin(), capable.end(), by_tier_asc);
        std::sort(fallback.begin(), fallback.end(), by_tier_desc);
        std::vector<std::string> order;
        for (auto* s : capable) order.push_back(s->id);
        for (auto* s : fallback) order.push_back(s->id);
        return order;
    }

    GenerationResponse generate(const GenerationRequest& req) {
        ++requests_;
        {
            std::lock_guard<std::mutex> lock(listener_mutex_);
            if (request_listener_) request_listener_(req);
        }
        std::string key = cache_key(req);

        if (auto hit = cache_lookup(key)) {
            ++cache_hits_;
            GenerationResponse resp;
            resp.provider_id = hit->first;
            resp.payload = hit->second;
            resp.from_cache = true;
            resp.attempt_count = 0;
            return resp;
        }

        std::vector<std::string> order = route(req);
        std::string causes;
        int attempts = 0;
        for (const auto& pid : order) {
            ProviderBackend* backend = find_backend(pid);
            if (!backend) continue;
            for (int attempt = 0; attempt < 1 + kRetriesPerProvider; ++attempt) {
                ++attempts;
                ++invocations_;
                try {
                    Json payload = backend->generate(req);
                    if (req.schema) {
                        std::string err = validate_instance(payload, *req.schema);
                        if (!err.empty())
                            throw ProviderError("provider " + pid +
                                                ": schema validation failed: " + err);
                    }
                    cache_store(key, pid, payload);
                    GenerationResponse resp;
                    resp.provider_id = pid;
                    resp.payload = std::move(payload);
                    resp.from_cache = false;
                    resp.attempt_count = attempts;
                    return resp;
                } catch (const Error& e) {
                    causes += std::string("\n  ") + pid + " attempt " +
                              std::to_string(attempt + 1) + ": " + e.what();
                }
            }
        }
        throw ProviderError("all providers failed for " +
                            std::string(request_kind_name(req.kind)) + " request:" + causes);
    }

    // --- instrumentation ---------------------------------------------------

    std::uint64_t request_count() const { return requests_.load(); }
    std::uint64_t invocation_count() const { return invocations_.load(); }
    std::uint64_t cache_hit_count() const { return cache_hits_.load(); }

    void set_request_listener(std::function<void(const GenerationRequest&)> fn) {
        std::lock_guard<std::mutex> lock(listener_mutex_);
        request_listener_ = std::move(fn);
    }

public:
    /// Backends other than the mock (the optional HTTP adapter) register a
    /// factory here; nothing but "mock" exists until something does.
    using BackendFactory = std::function<std::unique_ptr<ProviderBackend>(ProviderSpec)>;

    static std::map<std::string, BackendFactory>& backend_factories() {
        static std::map<std::string, BackendFactory> factories;
        return factories;
    }

private:
    static constexpr int kRetriesPerProvider = 2;

    static std::unique_ptr<ProviderBackend> make_backend(ProviderSpec spec) {
        if (spec.kind == "mock") return std::make_unique<MockBackend>(std::move(spec));
        auto it = backend_factories().find(spec.kind);
        if (it == backend_factories().end())
            throw ValidationError("provider '" + spec.id + "': unknown or disabled kind '" +
                                  spec.kind + "'");
        return it->second(std::move(spec));
    }

    ProviderBackend* find_backend(const std::string& id) const {
        std::lock_guard<std::mutex> lock(mutex_);
        for (const auto& p : providers_)
            if (p->spec().id == id) return p.get();
        return nullptr;
    }

    std::optional<std::pair<std::string, Json>> cache_lookup(const std::string& key) {
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            auto it = memory_cache_.find(key);
            if (it != memory_cache_.end()) return it->second;
        }
        if (cache_dir_.empty()) return std::nullopt;
        std::filesystem::path file = cache_path(key);
        std::error_code ec;
        if (!std::filesystem::exists(file, ec)) return std::nullopt;
        std::ifstream in(file, std::ios::binary);
        if (!in) return std::nullopt;
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        try {
            Json doc = Json::parse(text);
            auto entry = std::make_pair(doc.at("provider_id").get<std::string>(),
                                        doc.at("payload"));
            std::lock_guard<std::mutex> lock(cache_mutex_);
            memory_cache_[key] = entry;
            return entry;
        } catch (...) {
            return std::nullopt;  // corrupt entry: treat as miss
        }
    }

    void cache_store(const std::string& key, const std::string& provider_id, const Json& payload) {
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            memory_cache_[key] = {provider_id, payload};
        }
        if (cache_dir_.empty()) return;
        std::filesystem::path file = cache_path(key);
        std::error_code ec;
        std::filesystem::create_directories(file.parent_path(), ec);
        Json doc{{"provider_id", provider_id}, {"payload", payload}};
        // write-then-rename keeps readers from seeing partial entries
        std::filesystem::path tmp = file;
        tmp += ".tmp." + std::to_string(reinterpret_cast<std::uintptr_t>(this));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << doc.dump();
        }
        std::filesystem::rename(tmp, file, ec);
    }

    std::filesystem::path cache_path(const std::string& key) const {
        return cache_dir_ / key.substr(0, 2) / key;
    }

    mutable std::mutex mutex_;
    std::vector<std::unique_ptr<ProviderBackend>> providers_;

    std::mutex cache_mutex_;
    std::map<std::string, std::pair<std::string, Json>> memory_cache_;
    std::filesystem::path cache_dir_;

    std::atomic<std::uint64_t> requests_{0};
    std::atomic<std::uint64_t> invocations_{0};
    std::atomic<std::uint64_t> cache_hits_{0};

    std::mutex listener_mutex_;
    std::function<void(const GenerationRequest&)> request_listener_;
};

// ---------------------------------------------------------------------------
// provider registry files (DAGFORGE_PROVIDERS)
// ---------------------------------------------------------------------------

inline ScriptRule script_rule_from_doc(const Json& j, bool default_fail) {
    ScriptRule r;
    if (j.contains("kind")) {
        auto k = parse_request_kind(j.at("kind").get<std::string>());
        if (!k) throw ValidationError("script rule: unknown request kind");
        r.kind = *k;
    }
    r.contains = j.value("contains", std::string{});
    if (j.contains("payload")) r.payload = j.at("payload");
    r.fail = j.value("fail", default_fail && !r.payload);
    r.times = j.value("times", -1);
    return r;
}

inline ProviderSpec provider_spec_from_doc(const Json& j) {
    ProviderSpec s;
    s.id = j.value("id", std::string{});
    s.tier = j.value("tier", 5);
    s.kind = j.value("kind", std::string("mock"));
    s.simulated_latency = std::chrono::milliseconds(j.value("simulated_latency_ms", 0));
    if (j.contains("latency_by_kind"))
        for (const auto& [k, v] : j.at("latency_by_kind").items()) {
            auto kind = parse_request_kind(k);
            if (!kind) throw ValidationError("latency_by_kind: unknown request kind '" + k + "'");
            s.latency_by_kind[*kind] = std::chrono::milliseconds(v.get<int>());
        }
    if (j.contains("failure_script"))
        for (const auto& rj : j.at("failure_script"))
            s.script.push_back(script_rule_from_doc(rj, true));
    if (j.contains("responses"))
        for (const auto& rj : j.at("responses"))
            s.script.push_back(script_rule_from_doc(rj, false));
    s.endpoint = j.value("endpoint", std::string{});
    return s;
}

inline std::vector<ProviderSpec> load_provider_specs(const std::string& text) {
    Json doc = parse_doc(text, sniff_format(text));
    if (!doc.is_array()) throw ValidationError("provider registry must be a list");
    std::vector<ProviderSpec> specs;
    for (const auto& j : doc) specs.push_back(provider_spec_from_doc(j));
    return specs;
}

}  // namespace dagforge
