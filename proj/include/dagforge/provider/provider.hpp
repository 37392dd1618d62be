#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dagforge/common/hash.hpp"
#include "dagforge/fill/schema.hpp"

namespace dagforge {

enum class RequestKind {
    Compose,
    RefineSuggest,
    ResolveTyped,
    ResolveSpec,
    ResolveStub,
    SynthesizeBody,
    PredictInputs,
    FillGroup,
};

inline const char* request_kind_name(RequestKind k) {
    switch (k) {
        case RequestKind::Compose: return "compose";
        case RequestKind::RefineSuggest: return "refine_suggest";
        case RequestKind::ResolveTyped: return "resolve_typed";
        case RequestKind::ResolveSpec: return "resolve_spec";
        case RequestKind::ResolveStub: return "resolve_stub";
        case RequestKind::SynthesizeBody: return "synthesize_body";
        case RequestKind::PredictInputs: return "predict_inputs";
        case RequestKind::FillGroup: return "fill_group";
    }
    return "?";
}

inline std::optional<RequestKind> parse_request_kind(const std::string& s) {
    for (auto k : {RequestKind::Compose, RequestKind::RefineSuggest, RequestKind::ResolveTyped,
                   RequestKind::ResolveSpec, RequestKind::ResolveStub,
                   RequestKind::SynthesizeBody, RequestKind::PredictInputs,
                   RequestKind::FillGroup})
        if (s == request_kind_name(k)) return k;
    return std::nullopt;
}

/// One structured call to a model provider. Seed is always present; schema is
/// present for every kind except freeform compose.
struct GenerationRequest {
    RequestKind kind = RequestKind::Compose;
    std::string prompt;
    std::optional<SchemaNode> schema;
    std::uint64_t seed = 0;
    int intelligence = 5;
};

struct GenerationResponse {
    std::string provider_id;
    Json payload;  // text (string) or structured instance
    bool from_cache = false;
    int attempt_count = 0;
};

/// Scripted behavior for the mock provider, matched in order. An entry with
/// `fail` forces a provider error; one with a payload substitutes it. `times`
/// < 0 means unlimited.
struct ScriptRule {
    std::optional<RequestKind> kind;
    std::string contains;  // substring of the prompt; empty matches any
    bool fail = false;
    std::optional<Json> payload;
    int times = -1;
};

struct ProviderSpec {
    std::string id;
    int tier = 5;  // intelligence level 1..10
    std::string kind = "mock";
    std::chrono::milliseconds simulated_latency{0};
    std::map<RequestKind, std::chrono::milliseconds> latency_by_kind;
    std::vector<ScriptRule> script;
    std::string endpoint;  // http adapter only

    std::chrono::milliseconds latency_for(RequestKind k) const {
        auto it = latency_by_kind.find(k);
        return it != latency_by_kind.end() ? it->second : simulated_latency;
    }
};

/// Collision-free by construction: every key field is length-framed before
/// hashing. Equal requests produce equal keys; any field change changes the
/// key.
inline std::string cache_key(const GenerationRequest& r) {
    std::string schema_text = r.schema ? canonical_schema_json(*r.schema) : std::string{};
    std::string seed_text = std::to_string(r.seed);
    std::string intel_text = std::to_string(r.intelligence);
    return sha256_hex(frame_fields(
        {request_kind_name(r.kind), r.prompt, schema_text, seed_text, intel_text}));
}

}  // namespace dagforge
