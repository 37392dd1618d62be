#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dagforge/common/doc.hpp"
#include "dagforge/common/hash.hpp"
#include "dagforge/cli/uri.hpp"

namespace dagforge {

/// One stored artifact version. version == sha256(bytes): equal bytes
/// deduplicate by construction.
struct ArtifactEntry {
    std::string name;
    std::string version;
    std::string media_kind;  // graph | manifest | run-record | schema
    std::string created_at;
    std::string bytes;
};

/// Content-addressed, versioned artifact store:
///   <root>/<store>/objects/<hash>            immutable bytes
///   <root>/<store>/names/<name>/latest       mutable pointer (atomic rename)
///   <root>/<store>/names/<name>/versions/<hash>  per-version metadata
class ArtifactStore {
public:
    explicit ArtifactStore(std::filesystem::path root) : root_(std::move(root)) {}

    static std::filesystem::path default_root() {
        if (const char* env = std::getenv("AGILINK_ROOT")) return env;
        return ".agilink";
    }

    const std::filesystem::path& root() const { return root_; }

    AgilinkUri put(const std::string& bytes, const std::string& name, const std::string& store,
                   const std::string& media_kind) {
        check_name(store, "store");
        check_name(name, "artifact");
        std::string version = sha256_hex(bytes);
        std::filesystem::path base = root_ / store;
        std::error_code ec;
        std::filesystem::create_directories(base / "objects", ec);
        std::filesystem::create_directories(base / "names" / name / "versions", ec);

        std::filesystem::path object = base / "objects" / version;
        if (!std::filesystem::exists(object)) {
            // hash-named objects are create-once; concurrent writers of the
            // same bytes race harmlessly through the temp+rename
            std::filesystem::path tmp = object;
            tmp += ".tmp";
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw ExecutionError("store: cannot write " + object.string());
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            out.close();
            std::filesystem::rename(tmp, object, ec);
            if (ec) throw ExecutionError("store: cannot place " + object.string());
        }

        Json meta{{"kind", media_kind}, {"created_at", now_iso()}};
        std::filesystem::path version_file = base / "names" / name / "versions" / version;
        if (!std::filesystem::exists(version_file)) {
            std::ofstream out(version_file, std::ios::binary | std::ios::trunc);
            out << meta.dump();
        }

        // latest pointer: write-then-rename keeps readers consistent
        std::filesystem::path latest = base / "names" / name / "latest";
        std::filesystem::path tmp = latest;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << version;
        }
        std::filesystem::rename(tmp, latest, ec);
        if (ec) throw ExecutionError("store: cannot update latest pointer for " + name);

        AgilinkUri uri;
        uri.store = store;
        uri.name = name;
        uri.version = version;
        return uri;
    }

    std::string get(const AgilinkUri& uri) const { return entry(uri).bytes; }

    ArtifactEntry entry(const AgilinkUri& uri) const {
        std::string version = resolve_version(uri);
        std::filesystem::path base = root_ / uri.store;
        std::filesystem::path object = base / "objects" / version;
        std::ifstream in(object, std::ios::binary);
        if (!in)
            throw ValidationError("store '" + uri.store + "': artifact '" + uri.name +
                                  "' has no object for version " + version);
        ArtifactEntry e;
        e.name = uri.name;
        e.version = version;
        e.bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::filesystem::path version_file = base / "names" / uri.name / "versions" / version;
        std::ifstream meta(version_file, std::ios::binary);
        if (meta) {
            try {
                Json doc = Json::parse(std::string((std::istreambuf_iterator<char>(meta)),
                                                   std::istreambuf_iterator<char>()));
                e.media_kind = doc.value("kind", std::string{});
                e.created_at = doc.value("created_at", std::string{});
            } catch (...) {
            }
        }
        return e;
    }

    /// Recompute every object's hash and compare with its file name; also
    /// check latest pointers resolve. Returns problems (empty = healthy).
    std::vector<std::string> fsck(const std::string& store) const {
        std::vector<std::string> problems;
        std::filesystem::path base = root_ / store;
        std::filesystem::path objects = base / "objects";
        if (!std::filesystem::exists(objects)) return problems;
        for (const auto& entry : std::filesystem::directory_iterator(objects)) {
            if (!entry.is_regular_file()) continue;
            std::ifstream in(entry.path(), std::ios::binary);
            std::string bytes((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
            std::string expected = entry.path().filename().string();
            if (sha256_hex(bytes) != expected)
                problems.push_back("object " + expected + ": content hash mismatch");
        }
        std::filesystem::path names = base / "names";
        if (std::filesystem::exists(names)) {
            for (const auto& name_dir : std::filesystem::directory_iterator(names)) {
                std::filesystem::path latest = name_dir.path() / "latest";
                if (!std::filesystem::exists(latest)) continue;
                std::ifstream in(latest, std::ios::binary);
                std::string version((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
                if (!std::filesystem::exists(objects / version))
                    problems.push_back("name " + name_dir.path().filename().string() +
                                       ": latest points at a missing object");
            }
        }
        return problems;
    }

private:
    static void check_name(const std::string& s, const char* what) {
        if (s.empty()) throw UsageError(std::string("store: empty ") + what + " name");
        for (char c : s) {
            bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
            if (!ok)
                throw UsageError(std::string("store: ") + what + " name '" + s +
                                 "' must match [a-z0-9_-]+");
        }
    }

    std::string resolve_version(const AgilinkUri& uri) const {
        std::filesystem::path name_dir = root_ / uri.store / "names" / uri.name;
        if (!std::filesystem::exists(name_dir))
            throw ValidationError("store '" + uri.store + "': unknown artifact '" + uri.name +
                                  "'");
        if (uri.version == "latest") {
            std::ifstream in(name_dir / "latest", std::ios::binary);
            if (!in)
                throw ValidationError("store '" + uri.store + "': artifact '" + uri.name +
                                      "' has no latest pointer");
            std::string version((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
            return version;
        }
        std::vector<std::string> matches;
        std::filesystem::path versions = name_dir / "versions";
        if (std::filesystem::exists(versions)) {
            for (const auto& entry : std::filesystem::directory_iterator(versions)) {
                std::string v = entry.path().filename().string();
                if (v.rfind(uri.version, 0) == 0) matches.push_back(v);
            }
        }
        if (matches.empty())
            throw ValidationError("store '" + uri.store + "': artifact '" + uri.name +
                                  "' has no version matching '" + uri.version + "'");
        if (matches.size() > 1)
            throw ValidationError("store '" + uri.store + "': version prefix '" + uri.version +
                                  "' is ambiguous for '" + uri.name + "'");
        return matches.front();
    }

    static std::string now_iso() {
        auto now = std::chrono::system_clock::now();
        std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        return buf;
    }

    std::filesystem::path root_;
};

}  // namespace dagforge
