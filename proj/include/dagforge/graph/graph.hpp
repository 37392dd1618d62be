#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dagforge/common/error.hpp"
#include "dagforge/common/value.hpp"

namespace dagforge {

/// The six-floor lattice, totally ordered. meet = minimum.
enum class TypeFloor { Text = 0, Typed = 1, Spec = 2, Stub = 3, Shim = 4, Pure = 5 };

inline const char* floor_name(TypeFloor f) {
    switch (f) {
        case TypeFloor::Text: return "text";
        case TypeFloor::Typed: return "typed";
        case TypeFloor::Spec: return "spec";
        case TypeFloor::Stub: return "stub";
        case TypeFloor::Shim: return "shim";
        case TypeFloor::Pure: return "pure";
    }
    return "?";
}

inline std::optional<TypeFloor> parse_floor_name(const std::string& s) {
    if (s == "text") return TypeFloor::Text;
    if (s == "typed") return TypeFloor::Typed;
    if (s == "spec") return TypeFloor::Spec;
    if (s == "stub") return TypeFloor::Stub;
    if (s == "shim") return TypeFloor::Shim;
    if (s == "pure") return TypeFloor::Pure;
    return std::nullopt;
}

inline TypeFloor floor_meet(TypeFloor a, TypeFloor b) { return a < b ? a : b; }

enum class ResolutionState { Unresolved, InProgress, PartiallyResolved, FullyResolved };

inline const char* state_name(ResolutionState s) {
    switch (s) {
        case ResolutionState::Unresolved: return "unresolved";
        case ResolutionState::InProgress: return "in_progress";
        case ResolutionState::PartiallyResolved: return "partially_resolved";
        case ResolutionState::FullyResolved: return "fully_resolved";
    }
    return "?";
}

inline std::optional<ResolutionState> parse_state_name(const std::string& s) {
    if (s == "unresolved") return ResolutionState::Unresolved;
    if (s == "in_progress") return ResolutionState::InProgress;
    if (s == "partially_resolved") return ResolutionState::PartiallyResolved;
    if (s == "fully_resolved") return ResolutionState::FullyResolved;
    return std::nullopt;
}

/// Closed set of journaled side-effect classes.
enum class EffectClass { FsRead, FsWrite, Network, Database };

inline const char* effect_name(EffectClass e) {
    switch (e) {
        case EffectClass::FsRead: return "fs_read";
        case EffectClass::FsWrite: return "fs_write";
        case EffectClass::Network: return "network";
        case EffectClass::Database: return "database";
    }
    return "?";
}

inline std::optional<EffectClass> parse_effect_name(const std::string& s) {
    if (s == "fs_read") return EffectClass::FsRead;
    if (s == "fs_write") return EffectClass::FsWrite;
    if (s == "network") return EffectClass::Network;
    if (s == "database") return EffectClass::Database;
    return std::nullopt;
}

/// Effect class of each built-in tool namespace function.
inline std::optional<EffectClass> tool_effect(const std::string& dotted) {
    if (dotted == "fs.read") return EffectClass::FsRead;
    if (dotted == "fs.write") return EffectClass::FsWrite;
    if (dotted == "http.get") return EffectClass::Network;
    return std::nullopt;
}

inline bool effect_irreversible(EffectClass e) {
    return e == EffectClass::Network || e == EffectClass::Database;
}

struct PortSpec {
    std::string name;
    PrimitiveType type = PrimitiveType::Str;
    std::optional<Value> default_value;

    friend bool operator==(const PortSpec&, const PortSpec&) = default;
};

/// Pre/post condition source text in the expression language.
struct Contract {
    std::vector<std::string> pre;
    std::vector<std::string> post;

    friend bool operator==(const Contract&, const Contract&) = default;
};

enum class VirtualKind { VirtualStub, VirtualShim, VirtualPure };

inline const char* virtual_kind_name(VirtualKind k) {
    switch (k) {
        case VirtualKind::VirtualStub: return "virtualstub";
        case VirtualKind::VirtualShim: return "virtualshim";
        case VirtualKind::VirtualPure: return "virtualpure";
    }
    return "?";
}

inline std::optional<VirtualKind> parse_virtual_kind(const std::string& s) {
    if (s == "virtualstub") return VirtualKind::VirtualStub;
    if (s == "virtualshim") return VirtualKind::VirtualShim;
    if (s == "virtualpure") return VirtualKind::VirtualPure;
    return std::nullopt;
}

/// A typed call site whose implementation a provider synthesizes at (or
/// before) run time.
struct VirtualCallDecl {
    std::string name;
    VirtualKind kind = VirtualKind::VirtualShim;
    std::vector<PortSpec> inputs;
    PrimitiveType output = PrimitiveType::Str;

    friend bool operator==(const VirtualCallDecl&, const VirtualCallDecl&) = default;
};

struct Node {
    std::string id;
    std::string name;
    TypeFloor floor = TypeFloor::Text;
    ResolutionState state = ResolutionState::Unresolved;
    std::string description;
    std::vector<std::string> context;  // refinement notes, append-only
    std::vector<PortSpec> inputs;
    std::vector<PortSpec> outputs;
    std::optional<Contract> spec;
    std::optional<std::string> body;
    std::vector<VirtualCallDecl> virtual_calls;
    std::set<EffectClass> effects;
    bool deferred = false;

    const PortSpec* find_input(const std::string& port) const {
        for (const auto& p : inputs)
            if (p.name == port) return &p;
        return nullptr;
    }
    const PortSpec* find_output(const std::string& port) const {
        for (const auto& p : outputs)
            if (p.name == port) return &p;
        return nullptr;
    }

    friend bool operator==(const Node&, const Node&) = default;
};

struct Endpoint {
    std::string node;
    std::string port;  // empty for order-only TEXT edges

    friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct Edge {
    Endpoint from;
    Endpoint to;

    bool portless() const { return from.port.empty() && to.port.empty(); }

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct WorkflowGraph {
    int version = 1;
    std::string name;
    std::vector<Node> nodes;
    std::vector<Edge> edges;

    const Node* find_node(const std::string& id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
    Node* find_node(const std::string& id) {
        for (auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }

    friend bool operator==(const WorkflowGraph&, const WorkflowGraph&) = default;
};

inline bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string locus;  // "node <id>", "edge <a>-><b>", ...
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Diagnostic> diagnostics;

    void error(const std::string& locus, const std::string& message) {
        diagnostics.push_back({Diagnostic::Severity::Error, locus, message});
        ok = false;
    }
    void warning(const std::string& locus, const std::string& message) {
        diagnostics.push_back({Diagnostic::Severity::Warning, locus, message});
    }
    std::string to_string() const {
        std::string out;
        for (const auto& d : diagnostics) {
            out += d.severity == Diagnostic::Severity::Error ? "error" : "warning";
            out += " [" + d.locus + "]: " + d.message + "\n";
        }
        return out;
    }
};

/// Minimum node floor: the floor the graph as a whole "is at".
inline TypeFloor graph_floor(const WorkflowGraph& g) {
    if (g.nodes.empty()) throw ValidationError("graph_floor: graph is empty");
    TypeFloor f = TypeFloor::Pure;
    for (const auto& n : g.nodes) f = floor_meet(f, n.floor);
    return f;
}

}  // namespace dagforge
