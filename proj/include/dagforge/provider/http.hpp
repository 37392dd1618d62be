#pragma once

#include <memory>
#include <string>

#include <httplib.h>

#include "dagforge/provider/gateway.hpp"

namespace dagforge {

/// Generic HTTP adapter: POSTs {kind, prompt, schema, seed, intelligence} as
/// JSON and expects {payload}. Disabled unless enable_http_provider() runs.
class HttpBackend : public ProviderBackend {
public:
    explicit HttpBackend(ProviderSpec spec) : spec_(std::move(spec)) {
        auto scheme_end = spec_.endpoint.find("://");
        std::string rest = scheme_end == std::string::npos
                               ? spec_.endpoint
                               : spec_.endpoint.substr(scheme_end + 3);
        auto slash = rest.find('/');
        host_ = "http://" + (slash == std::string::npos ? rest : rest.substr(0, slash));
        path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    }

    const ProviderSpec& spec() const override { return spec_; }

    Json generate(const GenerationRequest& req) override {
        Json body{{"kind", request_kind_name(req.kind)},
                  {"prompt", req.prompt},
                  {"seed", req.seed},
                  {"intelligence", req.intelligence}};
        if (req.schema) body["schema"] = schema_to_doc(*req.schema);
        httplib::Client client(host_);
        client.set_connection_timeout(5);
        client.set_read_timeout(30);
        auto res = client.Post(path_, body.dump(), "application/json");
        if (!res)
            throw ProviderError("provider " + spec_.id + ": no response from " + spec_.endpoint);
        if (res->status != 200)
            throw ProviderError("provider " + spec_.id + ": HTTP " + std::to_string(res->status));
        try {
            Json doc = Json::parse(res->body);
            if (!doc.contains("payload"))
                throw ProviderError("provider " + spec_.id + ": response missing 'payload'");
            return doc.at("payload");
        } catch (const Json::parse_error& e) {
            throw ProviderError("provider " + spec_.id + ": bad response body: " + e.what());
        }
    }

private:
    ProviderSpec spec_;
    std::string host_;
    std::string path_;
};

inline void enable_http_provider() {
    ProviderGateway::backend_factories()["http"] = [](ProviderSpec spec) {
        return std::make_unique<HttpBackend>(std::move(spec));
    };
}

}  // namespace dagforge
