#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "dagforge/runtime/node_exec.hpp"

namespace dagforge {

/// One speculative execution: the node ran (or failed) against predicted
/// inputs inside an isolated overlay subtree with its own journal. Nothing
/// touches the real workspace until settle() commits it.
struct SpeculationTicket {
    std::string node_id;
    std::map<std::string, Value> predicted_inputs;
    std::shared_ptr<Journal> overlay_journal;
    std::filesystem::path overlay_dir;
    NodeResult result;  // outputs of the speculative run
    bool viable = false;
    std::string error;
};

/// Predict likely inputs (one predict_inputs call) and pre-execute the node
/// in an overlay. Never throws: a broken speculation is just not viable.
inline SpeculationTicket speculate(const Node& node, const ExecEnv& base_env,
                                   const std::filesystem::path& overlay_dir) {
    SpeculationTicket ticket;
    ticket.node_id = node.id;
    ticket.overlay_dir = overlay_dir;
    ticket.overlay_journal = std::make_shared<Journal>("overlay:" + node.id);

    try {
        std::error_code ec;
        std::filesystem::create_directories(overlay_dir, ec);

        if (!node.inputs.empty()) {
            std::map<std::string, SchemaNode> fields;
            for (const auto& p : node.inputs) fields[p.name] = SchemaNode::scalar(p.type);
            GenerationRequest req;
            req.kind = RequestKind::PredictInputs;
            req.prompt = exec_detail::node_prompt_header("predict_inputs", node);
            req.schema = SchemaNode::object(std::move(fields));
            req.seed = base_env.config->seed;
            req.intelligence = base_env.config->intelligence;
            Json payload = base_env.gateway->generate(req).payload;
            for (const auto& p : node.inputs) {
                auto v = value_from_json(payload.at(p.name), p.type);
                if (!v) throw ExecutionError("prediction payload mismatch for " + p.name);
                ticket.predicted_inputs[p.name] = *v;
            }
            ticket.result.provider_requests += 1;
        }

        ExecEnv env = base_env;
        env.journal = ticket.overlay_journal.get();
        env.overlay = overlay_dir;
        NodeResult r = execute_node(node, ticket.predicted_inputs, "", env);
        r.provider_requests += ticket.result.provider_requests;
        ticket.result = std::move(r);
        ticket.viable = ticket.result.status != NodeResult::Status::Failed;
        if (!ticket.viable) ticket.error = ticket.result.error;
    } catch (const Error& e) {
        ticket.viable = false;
        ticket.error = e.what();
    }
    return ticket;
}

namespace speculate_detail {

/// Re-perform one overlay fs_write against the real workspace, journaling a
/// fresh record whose inverse reflects the real prior state.
inline void replay_write(const std::filesystem::path& workspace, const EffectRecord& overlay_rec,
                         Journal& main_journal) {
    std::filesystem::path file = workspace / overlay_rec.path;
    EffectRecord r;
    r.effect = EffectClass::FsWrite;
    r.description = overlay_rec.description;
    r.path = overlay_rec.path;
    r.written = overlay_rec.written;
    if (std::filesystem::exists(file)) {
        std::ifstream in(file, std::ios::binary);
        r.prior.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        r.inverse = EffectRecord::InverseKind::RestoreBytes;
    } else {
        r.inverse = EffectRecord::InverseKind::DeleteCreated;
        std::filesystem::path dir = file.parent_path();
        std::filesystem::path rel_dir = std::filesystem::path(overlay_rec.path).parent_path();
        while (!rel_dir.empty() && rel_dir != "." && !std::filesystem::exists(dir)) {
            r.created_dirs.push_back(rel_dir.generic_string());
            dir = dir.parent_path();
            rel_dir = rel_dir.parent_path();
        }
    }
    main_journal.append(r);
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(overlay_rec.written.data(),
              static_cast<std::streamsize>(overlay_rec.written.size()));
}

}  // namespace speculate_detail

enum class SettleOutcome { Committed, Discarded };

/// Compare predicted and actual inputs for exact equality. Equal: the overlay
/// journal merges into the main journal (writes replayed against the real
/// workspace) and the speculative outputs are reused. Unequal or non-viable:
/// the overlay is rolled back and the caller re-executes normally.
inline SettleOutcome settle(const SpeculationTicket& ticket,
                            const std::map<std::string, Value>& actual_inputs,
                            const std::filesystem::path& workspace, Journal& main_journal) {
    bool hit = ticket.viable && ticket.predicted_inputs == actual_inputs;
    if (hit) {
        for (const auto& rec : ticket.overlay_journal->snapshot()) {
            if (rec.effect == EffectClass::FsWrite)
                speculate_detail::replay_write(workspace, rec, main_journal);
            else
                main_journal.append(rec);
        }
    }
    std::error_code ec;
    std::filesystem::remove_all(ticket.overlay_dir, ec);
    if (ec)
        throw ExecutionError("overlay rollback failed for ticket '" + ticket.node_id +
                             "': " + ec.message());
    return hit ? SettleOutcome::Committed : SettleOutcome::Discarded;
}

}  // namespace dagforge
