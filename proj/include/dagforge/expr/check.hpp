#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dagforge/expr/ast.hpp"

namespace dagforge::expr {

struct FnSig {
    std::vector<PrimitiveType> params;
    PrimitiveType result = PrimitiveType::Str;
};

/// Built-in tool surface. The three tools cover the three effect classes the
/// runtime can journal; anything else fails type checking.
inline const std::map<std::string, FnSig>& tool_signatures() {
    static const std::map<std::string, FnSig> sigs = {
        {"fs.read", {{PrimitiveType::Str}, PrimitiveType::Str}},
        {"fs.write", {{PrimitiveType::Str, PrimitiveType::Str}, PrimitiveType::Bool}},
        {"http.get", {{PrimitiveType::Str}, PrimitiveType::Str}},
    };
    return sigs;
}

inline std::string tool_namespace(const std::string& dotted) {
    auto pos = dotted.find('.');
    return pos == std::string::npos ? dotted : dotted.substr(0, pos);
}

struct CheckEnv {
    std::map<std::string, PrimitiveType> inputs;          // bare variables
    std::map<std::string, PrimitiveType> outputs;         // out.<port>
    std::map<std::string, FnSig> virtuals;                // declared virtual calls
    bool allow_out_read = false;                          // postcondition context
    bool allow_effects = true;                            // contracts stay pure
};

namespace detail {

class Checker {
public:
    Checker(const CheckEnv& env) : env_(env), locals_() {}

    PrimitiveType check(const ExprPtr& e, std::optional<PrimitiveType> expected) {
        PrimitiveType t = infer(e, expected);
        if (expected && t != *expected)
            throw ExprError{std::string("expected ") + type_name(*expected) + ", got " +
                                type_name(t),
                            e->line, e->col};
        return t;
    }

    std::map<std::string, PrimitiveType>& locals() { return locals_; }

private:
    PrimitiveType infer(const ExprPtr& e, std::optional<PrimitiveType> expected) {
        return std::visit(
            [&](const auto& n) -> PrimitiveType { return infer_node(n, *e, expected); }, e->node);
    }

    PrimitiveType infer_node(const Expr::Lit& n, const Expr&, std::optional<PrimitiveType>) {
        return type_of(n.value);
    }

    PrimitiveType infer_node(const Expr::Var& n, const Expr& e, std::optional<PrimitiveType>) {
        auto it = locals_.find(n.name);
        if (it != locals_.end()) return it->second;
        auto in = env_.inputs.find(n.name);
        if (in != env_.inputs.end()) return in->second;
        throw ExprError{"unknown variable '" + n.name + "'", e.line, e.col};
    }

    PrimitiveType infer_node(const Expr::OutRef& n, const Expr& e, std::optional<PrimitiveType>) {
        if (!env_.allow_out_read)
            throw ExprError{"output port 'out." + n.port + "' cannot be read here", e.line, e.col};
        auto it = env_.outputs.find(n.port);
        if (it == env_.outputs.end())
            throw ExprError{"unknown output port '" + n.port + "'", e.line, e.col};
        return it->second;
    }

    PrimitiveType infer_node(const Expr::Unary& n, const Expr& e, std::optional<PrimitiveType>) {
        PrimitiveType t = infer(n.operand, std::nullopt);
        if (n.op == UnOp::Not) {
            if (t != PrimitiveType::Bool)
                throw ExprError{"'not' needs bool", e.line, e.col};
            return PrimitiveType::Bool;
        }
        if (t != PrimitiveType::Int && t != PrimitiveType::Float)
            throw ExprError{"unary '-' needs int or float", e.line, e.col};
        return t;
    }

    PrimitiveType infer_node(const Expr::Binary& n, const Expr& e, std::optional<PrimitiveType>) {
        using enum BinOp;
        if (n.op == And || n.op == Or) {
            check(n.lhs, PrimitiveType::Bool);
            check(n.rhs, PrimitiveType::Bool);
            return PrimitiveType::Bool;
        }
        PrimitiveType lt = infer(n.lhs, std::nullopt);
        PrimitiveType rt = infer(n.rhs, std::nullopt);
        if (lt != rt)
            throw ExprError{std::string("operands of '") + binop_name(n.op) +
                                "' differ: " + type_name(lt) + " vs " + type_name(rt),
                            e.line, e.col};
        switch (n.op) {
            case Add:
            case Sub:
            case Mul:
            case Div:
                if (lt != PrimitiveType::Int && lt != PrimitiveType::Float)
                    throw ExprError{std::string("'") + binop_name(n.op) +
                                        "' needs int or float operands",
                                    e.line, e.col};
                return lt;
            case Mod:
                if (lt != PrimitiveType::Int)
                    throw ExprError{"'%' needs int operands", e.line, e.col};
                return PrimitiveType::Int;
            case Eq:
            case Ne:
                return PrimitiveType::Bool;
            case Lt:
            case Le:
            case Gt:
            case Ge:
                if (lt != PrimitiveType::Int && lt != PrimitiveType::Float &&
                    lt != PrimitiveType::Str)
                    throw ExprError{"ordered comparison needs int, float or str", e.line, e.col};
                return PrimitiveType::Bool;
            default:
                break;
        }
        throw ExprError{"bad operator", e.line, e.col};
    }

    PrimitiveType infer_node(const Expr::Cond& n, const Expr&,
                             std::optional<PrimitiveType> expected) {
        check(n.cond, PrimitiveType::Bool);
        if (expected) {
            check(n.then_branch, expected);
            check(n.else_branch, expected);
            return *expected;
        }
        PrimitiveType a = infer(n.then_branch, std::nullopt);
        check(n.else_branch, a);
        return a;
    }

    PrimitiveType infer_node(const Expr::Builtin& n, const Expr& e,
                             std::optional<PrimitiveType>) {
        auto need = [&](std::size_t k) {
            if (n.args.size() != k)
                throw ExprError{n.name + " takes " + std::to_string(k) + " argument(s)", e.line,
                                e.col};
        };
        if (n.name == "concat") {
            if (n.args.size() < 2)
                throw ExprError{"concat takes at least 2 arguments", e.line, e.col};
            for (const auto& a : n.args) check(a, PrimitiveType::Str);
            return PrimitiveType::Str;
        }
        if (n.name == "upper" || n.name == "lower") {
            need(1);
            check(n.args[0], PrimitiveType::Str);
            return PrimitiveType::Str;
        }
        if (n.name == "split") {
            need(2);
            check(n.args[0], PrimitiveType::Str);
            check(n.args[1], PrimitiveType::Str);
            return PrimitiveType::ListStr;
        }
        if (n.name == "join") {
            need(2);
            check(n.args[0], PrimitiveType::ListStr);
            check(n.args[1], PrimitiveType::Str);
            return PrimitiveType::Str;
        }
        if (n.name == "len") {
            need(1);
            PrimitiveType t = infer(n.args[0], std::nullopt);
            if (!is_list_type(t)) throw ExprError{"len needs a list", e.line, e.col};
            return PrimitiveType::Int;
        }
        if (n.name == "get") {
            need(2);
            PrimitiveType t = infer(n.args[0], std::nullopt);
            if (!is_list_type(t)) throw ExprError{"get needs a list", e.line, e.col};
            check(n.args[1], PrimitiveType::Int);
            return element_type(t);
        }
        if (n.name == "append") {
            need(2);
            PrimitiveType t = infer(n.args[0], std::nullopt);
            if (!is_list_type(t)) throw ExprError{"append needs a list", e.line, e.col};
            check(n.args[1], element_type(t));
            return t;
        }
        if (n.name == "head") {
            need(1);
            PrimitiveType t = infer(n.args[0], std::nullopt);
            if (!is_list_type(t)) throw ExprError{"head needs a list", e.line, e.col};
            return element_type(t);
        }
        if (n.name == "tail") {
            need(1);
            PrimitiveType t = infer(n.args[0], std::nullopt);
            if (!is_list_type(t)) throw ExprError{"tail needs a list", e.line, e.col};
            return t;
        }
        throw ExprError{"unknown function '" + n.name + "'", e.line, e.col};
    }

    PrimitiveType infer_node(const Expr::ToolCall& n, const Expr& e,
                             std::optional<PrimitiveType>) {
        if (!env_.allow_effects)
            throw ExprError{"tool calls are not allowed in contract expressions", e.line, e.col};
        auto it = tool_signatures().find(n.name);
        if (it == tool_signatures().end())
            throw ExprError{"unknown tool '" + n.name + "'", e.line, e.col};
        check_call_args(it->second, n.args, "tool." + n.name, e);
        return it->second.result;
    }

    PrimitiveType infer_node(const Expr::VirtualCall& n, const Expr& e,
                             std::optional<PrimitiveType>) {
        if (!env_.allow_effects)
            throw ExprError{"virtual calls are not allowed in contract expressions", e.line,
                            e.col};
        auto it = env_.virtuals.find(n.name);
        if (it == env_.virtuals.end())
            throw ExprError{"undeclared virtual call '" + n.name + "'", e.line, e.col};
        check_call_args(it->second, n.args, "virtual." + n.name, e);
        return it->second.result;
    }

    PrimitiveType infer_node(const Expr::ListLit& n, const Expr& e,
                             std::optional<PrimitiveType> expected) {
        if (n.elems.empty()) {
            if (expected && is_list_type(*expected)) return *expected;
            throw ExprError{"cannot infer the element type of []", e.line, e.col};
        }
        std::optional<PrimitiveType> elem_hint;
        if (expected && is_list_type(*expected)) elem_hint = element_type(*expected);
        PrimitiveType et = infer(n.elems[0], elem_hint);
        if (is_list_type(et))
            throw ExprError{"lists nest only one level", e.line, e.col};
        for (std::size_t i = 1; i < n.elems.size(); ++i) check(n.elems[i], et);
        return list_of(et);
    }

    void check_call_args(const FnSig& sig, const std::vector<ExprPtr>& args,
                         const std::string& what, const Expr& e) {
        if (args.size() != sig.params.size())
            throw ExprError{what + " takes " + std::to_string(sig.params.size()) + " argument(s)",
                            e.line, e.col};
        for (std::size_t i = 0; i < args.size(); ++i) check(args[i], sig.params[i]);
    }

    const CheckEnv& env_;
    std::map<std::string, PrimitiveType> locals_;
};

}  // namespace detail

/// Type-check a contract expression; must come out bool.
inline void check_condition(const ExprPtr& e, const CheckEnv& env) {
    detail::Checker c(env);
    c.check(e, PrimitiveType::Bool);
}

/// Type-check a full body: let-scoping, out-port coverage (each declared
/// output assigned exactly once), expression typing. Placeholder bodies pass
/// trivially.
inline void check_program(const Program& p, const CheckEnv& env) {
    if (p.is_placeholder()) return;
    detail::Checker c(env);
    std::set<std::string> assigned;
    for (const auto& s : p.statements) {
        if (s.kind == Stmt::Kind::Let) {
            if (env.inputs.count(s.name) || c.locals().count(s.name))
                throw ExprError{"redefinition of '" + s.name + "'", s.line, s.col};
            c.locals()[s.name] = c.check(s.value, std::nullopt);
        } else if (s.kind == Stmt::Kind::OutAssign) {
            auto it = env.outputs.find(s.name);
            if (it == env.outputs.end())
                throw ExprError{"unknown output port '" + s.name + "'", s.line, s.col};
            if (!assigned.insert(s.name).second)
                throw ExprError{"output port '" + s.name + "' assigned twice", s.line, s.col};
            c.check(s.value, it->second);
        }
    }
    for (const auto& [port, type] : env.outputs) {
        (void)type;
        if (!assigned.count(port))
            throw ExprError{"output port '" + port + "' is never assigned", 1, 1};
    }
}

/// Depth-first visit of every expression node reachable from `root`.
template <typename Fn>
inline void walk_exprs(const ExprPtr& root, Fn&& fn) {
    std::vector<ExprPtr> stack{root};
    while (!stack.empty()) {
        ExprPtr e = stack.back();
        stack.pop_back();
        fn(*e);
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Expr::Unary>) {
                    stack.push_back(n.operand);
                } else if constexpr (std::is_same_v<T, Expr::Binary>) {
                    stack.push_back(n.lhs);
                    stack.push_back(n.rhs);
                } else if constexpr (std::is_same_v<T, Expr::Cond>) {
                    stack.push_back(n.cond);
                    stack.push_back(n.then_branch);
                    stack.push_back(n.else_branch);
                } else if constexpr (std::is_same_v<T, Expr::Builtin> ||
                                     std::is_same_v<T, Expr::ToolCall> ||
                                     std::is_same_v<T, Expr::VirtualCall>) {
                    for (const auto& a : n.args) stack.push_back(a);
                } else if constexpr (std::is_same_v<T, Expr::ListLit>) {
                    for (const auto& a : n.elems) stack.push_back(a);
                }
            },
            e->node);
    }
}

/// Every `tool.<name>` referenced by the program (full dotted names).
inline std::set<std::string> program_tool_refs(const Program& p) {
    std::set<std::string> out;
    for (const auto& s : p.statements)
        if (s.value)
            walk_exprs(s.value, [&](const Expr& e) {
                if (auto* t = std::get_if<Expr::ToolCall>(&e.node)) out.insert(t->name);
            });
    return out;
}

/// Every `virtual.<name>` referenced by the program.
inline std::set<std::string> program_virtual_refs(const Program& p) {
    std::set<std::string> out;
    for (const auto& s : p.statements)
        if (s.value)
            walk_exprs(s.value, [&](const Expr& e) {
                if (auto* v = std::get_if<Expr::VirtualCall>(&e.node)) out.insert(v->name);
            });
    return out;
}

}  // namespace dagforge::expr
