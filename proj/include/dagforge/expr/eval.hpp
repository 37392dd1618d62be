#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dagforge/expr/ast.hpp"
#include "dagforge/expr/check.hpp"

namespace dagforge::expr {

/// Effectful calls are delegated: the runtime supplies the tool dispatcher
/// (which journals effects) and the virtual-call resolver (which synthesizes
/// and evaluates on demand). Either may throw ExprError to abort evaluation.
struct EvalHooks {
    std::function<Value(const std::string& dotted_name, const std::vector<Value>& args)> call_tool;
    std::function<Value(const std::string& name, const std::vector<Value>& args)> call_virtual;
};

namespace detail {

class Evaluator {
public:
    Evaluator(const std::map<std::string, Value>& inputs,
              const std::map<std::string, Value>* outputs, const EvalHooks& hooks)
        : inputs_(inputs), outputs_(outputs), hooks_(hooks) {}

    Value eval(const ExprPtr& e) {
        return std::visit([&](const auto& n) -> Value { return eval_node(n, *e); }, e->node);
    }

    std::map<std::string, Value>& locals() { return locals_; }

private:
    Value eval_node(const Expr::Lit& n, const Expr&) { return n.value; }

    Value eval_node(const Expr::Var& n, const Expr& e) {
        auto it = locals_.find(n.name);
        if (it != locals_.end()) return it->second;
        auto in = inputs_.find(n.name);
        if (in != inputs_.end()) return in->second;
        throw ExprError{"unbound variable '" + n.name + "'", e.line, e.col};
    }

    Value eval_node(const Expr::OutRef& n, const Expr& e) {
        if (!outputs_) throw ExprError{"out." + n.port + " unavailable here", e.line, e.col};
        auto it = outputs_->find(n.port);
        if (it == outputs_->end())
            throw ExprError{"no value for out." + n.port, e.line, e.col};
        return it->second;
    }

    Value eval_node(const Expr::Unary& n, const Expr& e) {
        Value v = eval(n.operand);
        if (n.op == UnOp::Not) return !std::get<bool>(v);
        if (auto* i = std::get_if<std::int64_t>(&v)) return -*i;
        if (auto* f = std::get_if<double>(&v)) return -*f;
        throw ExprError{"unary '-' on non-number", e.line, e.col};
    }

    Value eval_node(const Expr::Binary& n, const Expr& e) {
        using enum BinOp;
        if (n.op == And) {  // short-circuit
            if (!std::get<bool>(eval(n.lhs))) return false;
            return std::get<bool>(eval(n.rhs));
        }
        if (n.op == Or) {
            if (std::get<bool>(eval(n.lhs))) return true;
            return std::get<bool>(eval(n.rhs));
        }
        Value a = eval(n.lhs);
        Value b = eval(n.rhs);
        switch (n.op) {
            case Eq: return a == b;
            case Ne: return !(a == b);
            case Lt: return compare(a, b, e) < 0;
            case Le: return compare(a, b, e) <= 0;
            case Gt: return compare(a, b, e) > 0;
            case Ge: return compare(a, b, e) >= 0;
            default: break;
        }
        if (auto* ai = std::get_if<std::int64_t>(&a)) {
            std::int64_t bi = std::get<std::int64_t>(b);
            switch (n.op) {
                case Add: return *ai + bi;
                case Sub: return *ai - bi;
                case Mul: return *ai * bi;
                case Div:
                    if (bi == 0) throw ExprError{"division by zero", e.line, e.col};
                    return *ai / bi;
                case Mod:
                    if (bi == 0) throw ExprError{"modulo by zero", e.line, e.col};
                    return *ai % bi;
                default: break;
            }
        }
        if (auto* af = std::get_if<double>(&a)) {
            double bf = std::get<double>(b);
            switch (n.op) {
                case Add: return *af + bf;
                case Sub: return *af - bf;
                case Mul: return *af * bf;
                case Div:
                    if (bf == 0.0) throw ExprError{"division by zero", e.line, e.col};
                    return *af / bf;
                default: break;
            }
        }
        throw ExprError{"bad arithmetic operands", e.line, e.col};
    }

    int compare(const Value& a, const Value& b, const Expr& e) {
        if (auto* ai = std::get_if<std::int64_t>(&a)) {
            std::int64_t bi = std::get<std::int64_t>(b);
            return *ai < bi ? -1 : (*ai > bi ? 1 : 0);
        }
        if (auto* af = std::get_if<double>(&a)) {
            double bf = std::get<double>(b);
            return *af < bf ? -1 : (*af > bf ? 1 : 0);
        }
        if (auto* as = std::get_if<std::string>(&a)) {
            const auto& bs = std::get<std::string>(b);
            return as->compare(bs) < 0 ? -1 : (as->compare(bs) > 0 ? 1 : 0);
        }
        throw ExprError{"unordered operands", e.line, e.col};
    }

    Value eval_node(const Expr::Cond& n, const Expr&) {
        return std::get<bool>(eval(n.cond)) ? eval(n.then_branch) : eval(n.else_branch);
    }

    Value eval_node(const Expr::Builtin& n, const Expr& e) {
        std::vector<Value> args;
        args.reserve(n.args.size());
        for (const auto& a : n.args) args.push_back(eval(a));
        if (n.name == "concat") {
            std::string s;
            for (const auto& a : args) s += std::get<std::string>(a);
            return s;
        }
        if (n.name == "upper" || n.name == "lower") {
            std::string s = std::get<std::string>(args[0]);
            for (auto& c : s)
                c = static_cast<char>(n.name == "upper" ? std::toupper(static_cast<unsigned char>(c))
                                                        : std::tolower(static_cast<unsigned char>(c)));
            return s;
        }
        if (n.name == "split") {
            const auto& s = std::get<std::string>(args[0]);
            const auto& sep = std::get<std::string>(args[1]);
            std::vector<std::string> out;
            if (sep.empty()) {
                for (char c : s) out.emplace_back(1, c);
                return out;
            }
            std::size_t start = 0;
            while (true) {
                std::size_t p = s.find(sep, start);
                if (p == std::string::npos) {
                    out.push_back(s.substr(start));
                    break;
                }
                out.push_back(s.substr(start, p - start));
                start = p + sep.size();
            }
            return out;
        }
        if (n.name == "join") {
            const auto& xs = std::get<std::vector<std::string>>(args[0]);
            const auto& sep = std::get<std::string>(args[1]);
            std::string out;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (i) out += sep;
                out += xs[i];
            }
            return out;
        }
        if (n.name == "len") return list_length(args[0]);
        if (n.name == "get") {
            std::int64_t idx = std::get<std::int64_t>(args[1]);
            std::int64_t size = std::get<std::int64_t>(list_length(args[0]));
            if (idx < 0 || idx >= size)
                throw ExprError{"list index " + std::to_string(idx) + " out of range (size " +
                                    std::to_string(size) + ")",
                                e.line, e.col};
            return list_get(args[0], static_cast<std::size_t>(idx));
        }
        if (n.name == "append") return list_append(args[0], args[1]);
        if (n.name == "head") {
            if (std::get<std::int64_t>(list_length(args[0])) == 0)
                throw ExprError{"head of empty list", e.line, e.col};
            return list_get(args[0], 0);
        }
        if (n.name == "tail") {
            if (std::get<std::int64_t>(list_length(args[0])) == 0)
                throw ExprError{"tail of empty list", e.line, e.col};
            return list_tail(args[0]);
        }
        throw ExprError{"unknown function '" + n.name + "'", e.line, e.col};
    }

    static Value list_length(const Value& v) {
        return std::visit(
            [](const auto& x) -> Value {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, std::vector<std::string>> ||
                              std::is_same_v<T, std::vector<std::int64_t>> ||
                              std::is_same_v<T, std::vector<double>> ||
                              std::is_same_v<T, std::vector<bool>>) {
                    return static_cast<std::int64_t>(x.size());
                } else {
                    throw ExprError{"len on non-list", 0, 0};
                }
            },
            v);
    }

    static Value list_get(const Value& v, std::size_t i) {
        return std::visit(
            [&](const auto& x) -> Value {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, std::vector<std::string>>) return x[i];
                else if constexpr (std::is_same_v<T, std::vector<std::int64_t>>) return x[i];
                else if constexpr (std::is_same_v<T, std::vector<double>>) return x[i];
                else if constexpr (std::is_same_v<T, std::vector<bool>>) return static_cast<bool>(x[i]);
                else throw ExprError{"get on non-list", 0, 0};
            },
            v);
    }

    static Value list_append(const Value& v, const Value& elem) {
        return std::visit(
            [&](const auto& x) -> Value {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, std::vector<std::string>>) {
                    auto copy = x;
                    copy.push_back(std::get<std::string>(elem));
                    return copy;
                } else if constexpr (std::is_same_v<T, std::vector<std::int64_t>>) {
                    auto copy = x;
                    copy.push_back(std::get<std::int64_t>(elem));
                    return copy;
                } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                    auto copy = x;
                    copy.push_back(std::get<double>(elem));
                    return copy;
                } else if constexpr (std::is_same_v<T, std::vector<bool>>) {
                    auto copy = x;
                    copy.push_back(std::get<bool>(elem));
                    return copy;
                } else {
                    throw ExprError{"append on non-list", 0, 0};
                }
            },
            v);
    }

    static Value list_tail(const Value& v) {
        return std::visit(
            [](const auto& x) -> Value {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, std::vector<std::string>> ||
                              std::is_same_v<T, std::vector<std::int64_t>> ||
                              std::is_same_v<T, std::vector<double>> ||
                              std::is_same_v<T, std::vector<bool>>) {
                    return T(x.begin() + 1, x.end());
                } else {
                    throw ExprError{"tail on non-list", 0, 0};
                }
            },
            v);
    }

    Value eval_node(const Expr::ToolCall& n, const Expr& e) {
        if (!hooks_.call_tool) throw ExprError{"tool calls unavailable here", e.line, e.col};
        std::vector<Value> args;
        for (const auto& a : n.args) args.push_back(eval(a));
        return hooks_.call_tool(n.name, args);
    }

    Value eval_node(const Expr::VirtualCall& n, const Expr& e) {
        if (!hooks_.call_virtual)
            throw ExprError{"virtual calls unavailable here", e.line, e.col};
        std::vector<Value> args;
        for (const auto& a : n.args) args.push_back(eval(a));
        return hooks_.call_virtual(n.name, args);
    }

    Value eval_node(const Expr::ListLit& n, const Expr& e) {
        if (n.elems.empty()) {
            // the type checker guarantees empty literals only appear where the
            // expected type is known; eval needs a concrete representation
            return std::vector<std::string>{};
        }
        Value first = eval(n.elems[0]);
        Value acc = std::visit(
            [](const auto& x) -> Value {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, std::string>) return std::vector<std::string>{x};
                else if constexpr (std::is_same_v<T, std::int64_t>) return std::vector<std::int64_t>{x};
                else if constexpr (std::is_same_v<T, double>) return std::vector<double>{x};
                else if constexpr (std::is_same_v<T, bool>) return std::vector<bool>{x};
                else throw ExprError{"nested lists are not representable", 0, 0};
            },
            first);
        for (std::size_t i = 1; i < n.elems.size(); ++i) acc = list_append(acc, eval(n.elems[i]));
        (void)e;
        return acc;
    }

    const std::map<std::string, Value>& inputs_;
    const std::map<std::string, Value>* outputs_;
    const EvalHooks& hooks_;
    std::map<std::string, Value> locals_;
};

}  // namespace detail

/// Evaluate a type-checked body. `output_types` fixes the representation of
/// empty-list results. Returns one value per declared output port.
inline std::map<std::string, Value> eval_program(
    const Program& p, const std::map<std::string, Value>& inputs,
    const std::map<std::string, PrimitiveType>& output_types, const EvalHooks& hooks) {
    std::map<std::string, Value> outputs;
    detail::Evaluator ev(inputs, nullptr, hooks);
    for (const auto& s : p.statements) {
        if (s.kind == Stmt::Kind::Let) {
            ev.locals()[s.name] = ev.eval(s.value);
        } else if (s.kind == Stmt::Kind::OutAssign) {
            Value v = ev.eval(s.value);
            auto it = output_types.find(s.name);
            // [] evaluates to list[str]; recast to the declared list type
            if (it != output_types.end() && type_of(v) != it->second && is_list_type(it->second)) {
                if (auto* xs = std::get_if<std::vector<std::string>>(&v); xs && xs->empty())
                    v = zero_value(it->second);
            }
            outputs[s.name] = std::move(v);
        }
    }
    return outputs;
}

/// Evaluate one contract expression to bool with inputs (and, for
/// postconditions, produced outputs) in scope.
inline bool eval_condition(const ExprPtr& e, const std::map<std::string, Value>& inputs,
                           const std::map<std::string, Value>* outputs) {
    EvalHooks no_hooks;
    detail::Evaluator ev(inputs, outputs, no_hooks);
    return std::get<bool>(ev.eval(e));
}

}  // namespace dagforge::expr
