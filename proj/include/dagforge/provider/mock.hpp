#pragma once

#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dagforge/common/error.hpp"
#include "dagforge/common/hash.hpp"
#include "dagforge/provider/provider.hpp"

namespace dagforge {

namespace mock_detail {

/// Request digest d = stable-hash(seed ‖ prompt ‖ canonical schema).
inline std::uint64_t request_digest(const GenerationRequest& r) {
    std::string schema_text = r.schema ? canonical_schema_json(*r.schema) : std::string{};
    return sha256_u64(frame_fields({std::to_string(r.seed), r.prompt, schema_text}));
}

/// Deterministic value stream drawn from d: element 0 is d itself, later
/// elements re-hash (d, index).
struct DigestStream {
    std::uint64_t d;
    std::size_t index = 0;

    std::uint64_t next() {
        std::uint64_t v =
            index == 0 ? d : sha256_u64(frame_fields({std::to_string(d), std::to_string(index)}));
        ++index;
        return v;
    }
};

inline std::string base32_token(std::uint64_t x) {
    static const char* alphabet = "abcdefghijklmnopqrstuvwxyz234567";
    std::string s(8, 'a');
    for (int i = 0; i < 8; ++i) s[static_cast<std::size_t>(i)] = alphabet[(x >> (59 - 5 * i)) & 31];
    return s;
}

inline Json fill_scalar(PrimitiveType t, DigestStream& stream) {
    switch (t) {
        case PrimitiveType::Str: return base32_token(stream.next());
        case PrimitiveType::Int: return static_cast<std::int64_t>(stream.next() % 1000);
        case PrimitiveType::Float: return static_cast<double>(stream.next() % 10000) / 100.0;
        case PrimitiveType::Bool: return (stream.next() & 1) == 1;
        default: {
            std::size_t len = static_cast<std::size_t>(stream.next() % 3) + 1;
            Json a = Json::array();
            for (std::size_t i = 0; i < len; ++i) a.push_back(fill_scalar(element_type(t), stream));
            return a;
        }
    }
}

inline Json fill_schema(const SchemaNode& s, DigestStream& stream) {
    switch (s.kind) {
        case SchemaNode::Kind::Scalar:
            return fill_scalar(s.scalar_type, stream);
        case SchemaNode::Kind::Object: {
            Json o = Json::object();
            for (const auto& [name, child] : s.fields) o[name] = fill_schema(child, stream);
            return o;
        }
        case SchemaNode::Kind::List: {
            std::size_t len = static_cast<std::size_t>(stream.next() % 3) + 1;
            Json a = Json::array();
            for (std::size_t i = 0; i < len; ++i) a.push_back(fill_schema(*s.element, stream));
            return a;
        }
    }
    return Json();
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

/// Split on "→"/"->" first; single segment falls back to sentence boundaries.
inline std::vector<std::string> split_segments(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t arrow = std::string::npos;
        std::size_t arrow_len = 0;
        std::size_t a = text.find("\xE2\x86\x92", start);  // →
        std::size_t b = text.find("->", start);
        if (a != std::string::npos && (b == std::string::npos || a < b)) {
            arrow = a;
            arrow_len = 3;
        } else if (b != std::string::npos) {
            arrow = b;
            arrow_len = 2;
        }
        if (arrow == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, arrow - start));
        start = arrow + arrow_len;
    }
    std::vector<std::string> segments;
    for (const auto& p : parts) {
        std::string t = trim(p);
        if (!t.empty()) segments.push_back(t);
    }
    if (segments.size() > 1) return segments;

    segments.clear();
    std::string cur;
    for (char c : text) {
        if (c == '.' || c == '!' || c == '?' || c == ';' || c == '\n') {
            std::string t = trim(cur);
            if (!t.empty()) segments.push_back(t);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    std::string t = trim(cur);
    if (!t.empty()) segments.push_back(t);
    return segments;
}

/// Structured prompts are plain "key: value" lines; these helpers read them.
inline std::vector<std::string> prompt_values(const std::string& prompt, const std::string& key) {
    std::vector<std::string> out;
    std::string needle = key + ": ";
    std::size_t pos = 0;
    while (pos < prompt.size()) {
        std::size_t eol = prompt.find('\n', pos);
        std::string line = prompt.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        if (line.rfind(needle, 0) == 0) out.push_back(line.substr(needle.size()));
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    return out;
}

inline std::string prompt_value(const std::string& prompt, const std::string& key,
                                const std::string& fallback = {}) {
    auto vs = prompt_values(prompt, key);
    return vs.empty() ? fallback : vs.front();
}

struct PortLine {
    std::string name;
    PrimitiveType type;
};

inline std::vector<PortLine> prompt_ports(const std::string& prompt, const std::string& key) {
    std::vector<PortLine> out;
    for (const auto& v : prompt_values(prompt, key)) {
        std::size_t sp = v.find(' ');
        if (sp == std::string::npos) continue;
        auto t = parse_type_name(v.substr(sp + 1));
        if (!t) continue;
        out.push_back({v.substr(0, sp), *t});
    }
    return out;
}

inline std::string zero_literal(PrimitiveType t) {
    switch (t) {
        case PrimitiveType::Str: return "\"\"";
        case PrimitiveType::Int: return "0";
        case PrimitiveType::Float: return "0.0";
        case PrimitiveType::Bool: return "false";
        default: return "[]";
    }
}

}  // namespace mock_detail

/// The deterministic stand-in for any model: payloads are pure functions of
/// (seed, prompt, schema, kind), with a scripted override table for tests.
class MockProvider {
public:
    explicit MockProvider(ProviderSpec spec) : spec_(std::move(spec)) {
        for (const auto& r : spec_.script) remaining_.push_back(r.times);
    }

    const ProviderSpec& spec() const { return spec_; }

    Json generate(const GenerationRequest& req) {
        simulate_latency(req);
        if (auto scripted = apply_script(req)) {
            if (scripted->is_null())
                throw ProviderError("provider " + spec_.id + ": scripted failure");
            return *scripted;
        }
        return mock_generate(req);
    }

    /// The unscripted deterministic payload rule, exposed for direct tests.
    Json mock_generate(const GenerationRequest& req) const {
        using namespace mock_detail;
        DigestStream stream{request_digest(req)};
        switch (req.kind) {
            case RequestKind::Compose: {
                auto segments = split_segments(req.prompt);
                Json nodes = Json::array();
                for (const auto& s : segments)
                    nodes.push_back(Json{{"name", s}, {"description", s}});
                return nodes;
            }
            case RequestKind::ResolveTyped: {
                int in_degree = std::stoi(prompt_value(req.prompt, "in_degree", "0"));
                Json inputs = Json::array();
                for (int i = 0; i < in_degree; ++i)
                    inputs.push_back(Json{{"name", "in" + std::to_string(i + 1)}, {"type", "str"}});
                Json outputs = Json::array();
                outputs.push_back(Json{{"name", "out1"}, {"type", "str"}});
                return Json{{"inputs", inputs}, {"outputs", outputs}};
            }
            case RequestKind::ResolveSpec: {
                Json post = Json::array();
                for (const auto& p : prompt_ports(req.prompt, "output")) {
                    if (p.type == PrimitiveType::Bool)
                        post.push_back("out." + p.name + " or not out." + p.name);
                    else if (is_list_type(p.type))
                        post.push_back("len(out." + p.name + ") >= 0");
                    else
                        post.push_back("out." + p.name + " <= out." + p.name);
                }
                return Json{{"pre", Json::array()}, {"post", post}};
            }
            case RequestKind::ResolveStub:
                return Json{{"body", "unimplemented;"}};
            case RequestKind::SynthesizeBody: {
                auto inputs = prompt_ports(req.prompt, "input");
                auto outputs = prompt_ports(req.prompt, "output");
                std::string body;
                for (const auto& o : outputs) {
                    const PortLine* match = nullptr;
                    for (const auto& i : inputs)
                        if (i.type == o.type) {
                            match = &i;
                            break;
                        }
                    body += "out." + o.name + " = " +
                            (match ? match->name : zero_literal(o.type)) + ";\n";
                }
                if (body.empty()) body = "unimplemented;";
                return Json{{"body", body}};
            }
            case RequestKind::RefineSuggest:
                return Json{{"note", "note-" + base32_token(stream.next())}};
            case RequestKind::PredictInputs:
            case RequestKind::FillGroup: {
                if (!req.schema) return Json::object();
                return fill_schema(*req.schema, stream);
            }
        }
        return Json();
    }

private:
    void simulate_latency(const GenerationRequest& req) const {
        auto ms = spec_.latency_for(req.kind);
        if (ms.count() > 0) std::this_thread::sleep_for(ms);
    }

    // Returns a payload (or null json = forced failure) when a script rule
    // matches; nullopt otherwise.
    std::optional<Json> apply_script(const GenerationRequest& req) {
        std::lock_guard<std::mutex> lock(mutex_);
        for (std::size_t i = 0; i < spec_.script.size(); ++i) {
            const ScriptRule& rule = spec_.script[i];
            if (rule.kind && *rule.kind != req.kind) continue;
            if (!rule.contains.empty() && req.prompt.find(rule.contains) == std::string::npos)
                continue;
            if (remaining_[i] == 0) continue;
            if (remaining_[i] > 0) --remaining_[i];
            if (rule.fail) return Json(nullptr);
            if (rule.payload) return *rule.payload;
            return Json(nullptr);
        }
        return std::nullopt;
    }

    ProviderSpec spec_;
    std::vector<int> remaining_;
    std::mutex mutex_;
};

}  // namespace dagforge
