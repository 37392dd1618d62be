#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "dagforge/common/doc.hpp"
#include "dagforge/graph/graph.hpp"

namespace dagforge {

/// One journaled side effect with enough information to undo it. fs_write
/// always carries a reversible inverse (restore prior bytes, or delete what
/// it created, including directories it had to make). Reads invert to
/// nothing; network/database effects are irreversible and flagged as such.
struct EffectRecord {
    enum class InverseKind { DeleteCreated, RestoreBytes, None };

    EffectClass effect = EffectClass::FsRead;
    std::string description;
    InverseKind inverse = InverseKind::None;
    std::string path;                       // workspace-relative (fs effects)
    std::string prior;                      // RestoreBytes payload
    std::string written;                    // bytes written (overlay replay)
    std::vector<std::string> created_dirs;  // deepest-first
    std::string none_reason;                // "readonly" | "irreversible"

    bool irreversible() const {
        return inverse == InverseKind::None && none_reason == "irreversible";
    }
};

inline const char* inverse_kind_name(EffectRecord::InverseKind k) {
    switch (k) {
        case EffectRecord::InverseKind::DeleteCreated: return "delete_created";
        case EffectRecord::InverseKind::RestoreBytes: return "restore_bytes";
        case EffectRecord::InverseKind::None: return "none";
    }
    return "?";
}

/// Plain-data view of a journal, embeddable in run records and documents.
struct JournalSnapshot {
    std::string run_id;
    std::vector<EffectRecord> records;
    bool committed = false;
    bool rolled_back = false;

    Json to_doc() const {
        Json j = Json::object();
        j["run"] = run_id;
        j["committed"] = committed;
        j["rolled_back"] = rolled_back;
        Json rs = Json::array();
        for (const auto& r : records) {
            Json rj = Json::object();
            rj["effect"] = effect_name(r.effect);
            rj["description"] = r.description;
            Json inv = Json::object();
            inv["kind"] = inverse_kind_name(r.inverse);
            if (!r.path.empty()) inv["path"] = r.path;
            if (r.inverse == EffectRecord::InverseKind::RestoreBytes) inv["prior"] = r.prior;
            if (!r.created_dirs.empty()) inv["created_dirs"] = r.created_dirs;
            if (!r.none_reason.empty()) inv["reason"] = r.none_reason;
            rj["inverse"] = inv;
            rs.push_back(rj);
        }
        j["records"] = rs;
        return j;
    }
};

class Journal {
public:
    Journal() = default;
    explicit Journal(std::string run_id) : run_id_(std::move(run_id)) {}

    void append(EffectRecord record) {
        std::lock_guard<std::mutex> lock(mutex_);
        records_.push_back(std::move(record));
    }

    std::vector<EffectRecord> snapshot() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return records_;
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return records_.size();
    }

    void commit() { committed_ = true; }
    bool committed() const { return committed_; }
    bool rolled_back() const { return rolled_back_; }
    const std::string& run_id() const { return run_id_; }
    void set_run_id(std::string id) { run_id_ = std::move(id); }

    /// Apply inverses in reverse order against the workspace. Irreversible
    /// records (and any inverse that fails to apply) end up in the residue.
    std::vector<std::string> rollback(const std::filesystem::path& workspace) {
        std::vector<std::string> residue;
        std::vector<EffectRecord> records = snapshot();
        for (auto it = records.rbegin(); it != records.rend(); ++it) {
            const EffectRecord& r = *it;
            try {
                switch (r.inverse) {
                    case EffectRecord::InverseKind::DeleteCreated: {
                        std::filesystem::remove(workspace / r.path);
                        for (const auto& d : r.created_dirs)
                            std::filesystem::remove(workspace / d);  // empty dirs only
                        break;
                    }
                    case EffectRecord::InverseKind::RestoreBytes: {
                        std::ofstream out(workspace / r.path, std::ios::binary | std::ios::trunc);
                        out.write(r.prior.data(),
                                  static_cast<std::streamsize>(r.prior.size()));
                        break;
                    }
                    case EffectRecord::InverseKind::None:
                        if (r.irreversible())
                            residue.push_back("irreversible: " + r.description);
                        break;
                }
            } catch (const std::exception& e) {
                residue.push_back("inverse failed for '" + r.description + "': " + e.what());
            }
        }
        committed_ = false;
        rolled_back_ = true;
        return residue;
    }

    JournalSnapshot freeze() const {
        JournalSnapshot s;
        s.run_id = run_id_;
        s.records = snapshot();
        s.committed = committed_;
        s.rolled_back = rolled_back_;
        return s;
    }

    Json to_doc() const { return freeze().to_doc(); }

private:
    std::string run_id_;
    mutable std::mutex mutex_;
    std::vector<EffectRecord> records_;
    bool committed_ = false;
    bool rolled_back_ = false;
};

}  // namespace dagforge
