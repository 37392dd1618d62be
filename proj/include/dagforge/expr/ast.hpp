#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dagforge/common/value.hpp"

namespace dagforge::expr {

enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnOp { Neg, Not };

inline const char* binop_name(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Mod: return "%";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::And: return "and";
        case BinOp::Or: return "or";
    }
    return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    struct Lit {
        Value value;
    };
    struct Var {
        std::string name;
    };
    struct OutRef {  // `out.<port>` read; legal only in postconditions
        std::string port;
    };
    struct Unary {
        UnOp op;
        ExprPtr operand;
    };
    struct Binary {
        BinOp op;
        ExprPtr lhs, rhs;
    };
    struct Cond {
        ExprPtr cond, then_branch, else_branch;
    };
    struct Builtin {
        std::string name;
        std::vector<ExprPtr> args;
    };
    struct ToolCall {  // `tool.fs.write(...)`: name is the dotted remainder
        std::string name;
        std::vector<ExprPtr> args;
    };
    struct VirtualCall {  // `virtual.impl(...)`
        std::string name;
        std::vector<ExprPtr> args;
    };
    struct ListLit {
        std::vector<ExprPtr> elems;
    };

    using NodeVariant = std::variant<Lit, Var, OutRef, Unary, Binary, Cond, Builtin, ToolCall,
                                     VirtualCall, ListLit>;
    NodeVariant node;
    int line = 0;
    int col = 0;
};

struct Stmt {
    enum class Kind { Let, OutAssign, Unimplemented };
    Kind kind = Kind::Let;
    std::string name;  // let-binding name or output port
    ExprPtr value;
    int line = 0;
    int col = 0;
};

/// A parsed node body: `let`/`out.<port> =` statements, or the single
/// `unimplemented;` placeholder that stub floors carry.
struct Program {
    std::vector<Stmt> statements;

    bool is_placeholder() const {
        return statements.size() == 1 && statements[0].kind == Stmt::Kind::Unimplemented;
    }
};

/// Parse/type/eval errors carry a source locus within the body text.
class ExprError : public std::runtime_error {
public:
    ExprError(const std::string& message, int line, int col)
        : std::runtime_error(message + " (at " + std::to_string(line) + ":" +
                             std::to_string(col) + ")"),
          message(message),
          line(line),
          col(col) {}

    std::string to_string() const { return what(); }

    std::string message;
    int line = 0;
    int col = 0;
};

inline bool is_reserved_word(const std::string& s) {
    static const char* words[] = {"let",  "out",  "if",      "then",          "else",
                                  "and",  "or",   "not",     "true",          "false",
                                  "tool", "virtual", "unimplemented"};
    for (auto w : words)
        if (s == w) return true;
    return false;
}

inline bool is_builtin_name(const std::string& s) {
    static const char* names[] = {"concat", "upper", "lower", "split", "join",
                                  "len",    "get",   "append", "head", "tail"};
    for (auto n : names)
        if (s == n) return true;
    return false;
}

}  // namespace dagforge::expr
