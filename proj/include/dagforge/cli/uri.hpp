#pragma once

#include <cctype>
#include <string>

#include "dagforge/common/error.hpp"

namespace dagforge {

/// agilink://<store>/<name>[@<version>] — names are [a-z0-9_-]+, version is
/// "latest" (default) or a content-hash prefix.
struct AgilinkUri {
    std::string store;
    std::string name;
    std::string version = "latest";

    std::string to_string() const {
        return "agilink://" + store + "/" + name + "@" + version;
    }
};

inline bool is_agilink_uri(const std::string& text) {
    return text.rfind("agilink://", 0) == 0;
}

namespace uri_detail {

inline bool name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

[[noreturn]] inline void fail(const std::string& text, std::size_t pos, const std::string& why) {
    std::string caret(pos, ' ');
    throw UsageError("malformed agilink uri: " + why + "\n  " + text + "\n  " + caret + "^");
}

}  // namespace uri_detail

inline AgilinkUri parse_uri(const std::string& text) {
    const std::string scheme = "agilink://";
    if (text.rfind(scheme, 0) != 0) {
        std::size_t bad = 0;
        while (bad < text.size() && bad < scheme.size() && text[bad] == scheme[bad]) ++bad;
        uri_detail::fail(text, bad, "expected scheme 'agilink://'");
    }
    std::size_t pos = scheme.size();
    AgilinkUri uri;
    while (pos < text.size() && uri_detail::name_char(text[pos])) uri.store.push_back(text[pos++]);
    if (uri.store.empty()) uri_detail::fail(text, pos, "expected store name ([a-z0-9_-]+)");
    if (pos >= text.size() || text[pos] != '/')
        uri_detail::fail(text, pos, "expected '/' after store name");
    ++pos;
    while (pos < text.size() && uri_detail::name_char(text[pos])) uri.name.push_back(text[pos++]);
    if (uri.name.empty()) uri_detail::fail(text, pos, "expected artifact name ([a-z0-9_-]+)");
    if (pos < text.size()) {
        if (text[pos] != '@') uri_detail::fail(text, pos, "expected '@<version>' or end");
        ++pos;
        std::string version;
        while (pos < text.size()) version.push_back(text[pos++]);
        if (version.empty()) uri_detail::fail(text, pos, "empty version");
        if (version != "latest") {
            for (std::size_t i = 0; i < version.size(); ++i) {
                char c = version[i];
                bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                if (!hex)
                    uri_detail::fail(text, scheme.size() + uri.store.size() + 1 +
                                               uri.name.size() + 1 + i,
                                     "version must be 'latest' or a hex hash prefix");
            }
            if (version.size() < 6)
                uri_detail::fail(text, text.size(), "hash prefix needs at least 6 characters");
        }
        uri.version = version;
    }
    return uri;
}

}  // namespace dagforge
