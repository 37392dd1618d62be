#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "dagforge/expr/ast.hpp"

namespace dagforge::expr {

namespace detail {

enum class Tok {
    End,
    Ident,
    IntLit,
    FloatLit,
    StrLit,
    BoolLit,
    Punct,  // ( ) [ ] , ; = .
    Op,     // + - * / % == != < <= > >=
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t int_value = 0;
    double float_value = 0.0;
    bool bool_value = false;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }

    Token next() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws_and_comments();
        cur_ = Token{};
        cur_.line = line_;
        cur_.col = col_;
        if (pos_ >= src_.size()) {
            cur_.kind = Tok::End;
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                id.push_back(take());
            }
            if (id == "true" || id == "false") {
                cur_.kind = Tok::BoolLit;
                cur_.bool_value = (id == "true");
                cur_.text = id;
            } else {
                cur_.kind = Tok::Ident;
                cur_.text = id;
            }
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_number();
            return;
        }
        if (c == '"') {
            lex_string();
            return;
        }
        // multi-char operators first
        auto two = src_.substr(pos_, 2);
        if (two == "==" || two == "!=" || two == "<=" || two == ">=") {
            take();
            take();
            cur_.kind = Tok::Op;
            cur_.text = two;
            return;
        }
        if (std::string("+-*/%<>").find(c) != std::string::npos) {
            take();
            cur_.kind = Tok::Op;
            cur_.text = std::string(1, c);
            return;
        }
        if (std::string("()[],;=.").find(c) != std::string::npos) {
            take();
            cur_.kind = Tok::Punct;
            cur_.text = std::string(1, c);
            return;
        }
        throw ExprError{std::string("unexpected character '") + c + "'", line_, col_};
    }

    void lex_number() {
        std::string num;
        bool is_float = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            num.push_back(take());
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            is_float = true;
            num.push_back(take());
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                num.push_back(take());
        } else if (pos_ < src_.size() && src_[pos_] == '.' &&
                   !(pos_ + 1 < src_.size() &&
                     (std::isalpha(static_cast<unsigned char>(src_[pos_ + 1])) ||
                      src_[pos_ + 1] == '_'))) {
            // `1.` with no following identifier: treat as float literal
            is_float = true;
            num.push_back(take());
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            is_float = true;
            num.push_back(take());
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) num.push_back(take());
            if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
                throw ExprError{"malformed exponent", cur_.line, cur_.col};
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                num.push_back(take());
        }
        if (is_float) {
            cur_.kind = Tok::FloatLit;
            cur_.float_value = std::stod(num);
        } else {
            cur_.kind = Tok::IntLit;
            try {
                cur_.int_value = std::stoll(num);
            } catch (...) {
                throw ExprError{"integer literal out of range", cur_.line, cur_.col};
            }
        }
        cur_.text = num;
    }

    void lex_string() {
        take();  // opening quote
        std::string s;
        while (true) {
            if (pos_ >= src_.size()) throw ExprError{"unterminated string", cur_.line, cur_.col};
            char c = take();
            if (c == '"') break;
            if (c == '\\') {
                if (pos_ >= src_.size())
                    throw ExprError{"unterminated escape", cur_.line, cur_.col};
                char e = take();
                switch (e) {
                    case 'n': s.push_back('\n'); break;
                    case 't': s.push_back('\t'); break;
                    case 'r': s.push_back('\r'); break;
                    case '"': s.push_back('"'); break;
                    case '\\': s.push_back('\\'); break;
                    default:
                        throw ExprError{std::string("unknown escape \\") + e, cur_.line, cur_.col};
                }
            } else {
                s.push_back(c);
            }
        }
        cur_.kind = Tok::StrLit;
        cur_.text = s;
    }

    void skip_ws_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') take();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                take();
            } else {
                break;
            }
        }
    }

    char take() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token cur_;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    Program parse_program() {
        Program p;
        while (lex_.peek().kind != Tok::End) p.statements.push_back(parse_stmt());
        for (const auto& s : p.statements) {
            if (s.kind == Stmt::Kind::Unimplemented && p.statements.size() != 1)
                throw ExprError{"'unimplemented;' must be the only statement", s.line, s.col};
        }
        return p;
    }

    ExprPtr parse_single_expression() {
        ExprPtr e = parse_expr();
        if (lex_.peek().kind != Tok::End)
            throw ExprError{"trailing input after expression", lex_.peek().line, lex_.peek().col};
        return e;
    }

private:
    Stmt parse_stmt() {
        Token t = lex_.peek();
        Stmt s;
        s.line = t.line;
        s.col = t.col;
        if (t.kind == Tok::Ident && t.text == "unimplemented") {
            lex_.next();
            expect_punct(";");
            s.kind = Stmt::Kind::Unimplemented;
            return s;
        }
        if (t.kind == Tok::Ident && t.text == "let") {
            lex_.next();
            Token name = expect_ident();
            if (is_reserved_word(name.text) || is_builtin_name(name.text))
                throw ExprError{"'" + name.text + "' is reserved", name.line, name.col};
            expect_punct("=");
            s.kind = Stmt::Kind::Let;
            s.name = name.text;
            s.value = parse_expr();
            expect_punct(";");
            return s;
        }
        if (t.kind == Tok::Ident && t.text == "out") {
            lex_.next();
            expect_punct(".");
            Token port = expect_ident();
            expect_punct("=");
            s.kind = Stmt::Kind::OutAssign;
            s.name = port.text;
            s.value = parse_expr();
            expect_punct(";");
            return s;
        }
        throw ExprError{"expected statement ('let', 'out.<port> =' or 'unimplemented')", t.line,
                        t.col};
    }

    ExprPtr parse_expr() {
        Token t = lex_.peek();
        if (t.kind == Tok::Ident && t.text == "if") {
            lex_.next();
            auto cond = parse_expr();
            expect_keyword("then");
            auto a = parse_expr();
            expect_keyword("else");
            auto b = parse_expr();
            return make(Expr::Cond{std::move(cond), std::move(a), std::move(b)}, t);
        }
        return parse_or();
    }

    ExprPtr parse_or() {
        auto lhs = parse_and();
        while (peek_keyword("or")) {
            Token t = lex_.next();
            auto rhs = parse_and();
            lhs = make(Expr::Binary{BinOp::Or, std::move(lhs), std::move(rhs)}, t);
        }
        return lhs;
    }

    ExprPtr parse_and() {
        auto lhs = parse_not();
        while (peek_keyword("and")) {
            Token t = lex_.next();
            auto rhs = parse_not();
            lhs = make(Expr::Binary{BinOp::And, std::move(lhs), std::move(rhs)}, t);
        }
        return lhs;
    }

    ExprPtr parse_not() {
        if (peek_keyword("not")) {
            Token t = lex_.next();
            auto operand = parse_not();
            return make(Expr::Unary{UnOp::Not, std::move(operand)}, t);
        }
        return parse_cmp();
    }

    ExprPtr parse_cmp() {
        auto lhs = parse_add();
        Token t = lex_.peek();
        if (t.kind == Tok::Op &&
            (t.text == "==" || t.text == "!=" || t.text == "<" || t.text == "<=" ||
             t.text == ">" || t.text == ">=")) {
            lex_.next();
            auto rhs = parse_add();
            BinOp op = t.text == "==" ? BinOp::Eq
                       : t.text == "!=" ? BinOp::Ne
                       : t.text == "<"  ? BinOp::Lt
                       : t.text == "<=" ? BinOp::Le
                       : t.text == ">"  ? BinOp::Gt
                                        : BinOp::Ge;
            return make(Expr::Binary{op, std::move(lhs), std::move(rhs)}, t);
        }
        return lhs;
    }

    ExprPtr parse_add() {
        auto lhs = parse_mul();
        while (true) {
            Token t = lex_.peek();
            if (t.kind == Tok::Op && (t.text == "+" || t.text == "-")) {
                lex_.next();
                auto rhs = parse_mul();
                lhs = make(Expr::Binary{t.text == "+" ? BinOp::Add : BinOp::Sub, std::move(lhs),
                                        std::move(rhs)},
                           t);
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_mul() {
        auto lhs = parse_unary();
        while (true) {
            Token t = lex_.peek();
            if (t.kind == Tok::Op && (t.text == "*" || t.text == "/" || t.text == "%")) {
                lex_.next();
                auto rhs = parse_unary();
                BinOp op = t.text == "*" ? BinOp::Mul : t.text == "/" ? BinOp::Div : BinOp::Mod;
                lhs = make(Expr::Binary{op, std::move(lhs), std::move(rhs)}, t);
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_unary() {
        Token t = lex_.peek();
        if (t.kind == Tok::Op && t.text == "-") {
            lex_.next();
            auto operand = parse_unary();
            return make(Expr::Unary{UnOp::Neg, std::move(operand)}, t);
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        Token t = lex_.peek();
        switch (t.kind) {
            case Tok::IntLit:
                lex_.next();
                return make(Expr::Lit{Value(t.int_value)}, t);
            case Tok::FloatLit:
                lex_.next();
                return make(Expr::Lit{Value(t.float_value)}, t);
            case Tok::StrLit:
                lex_.next();
                return make(Expr::Lit{Value(t.text)}, t);
            case Tok::BoolLit:
                lex_.next();
                return make(Expr::Lit{Value(t.bool_value)}, t);
            case Tok::Punct:
                if (t.text == "(") {
                    lex_.next();
                    auto e = parse_expr();
                    expect_punct(")");
                    return e;
                }
                if (t.text == "[") {
                    lex_.next();
                    Expr::ListLit lit;
                    if (!peek_punct("]")) {
                        lit.elems.push_back(parse_expr());
                        while (peek_punct(",")) {
                            lex_.next();
                            lit.elems.push_back(parse_expr());
                        }
                    }
                    expect_punct("]");
                    return make(std::move(lit), t);
                }
                break;
            case Tok::Ident: {
                lex_.next();
                if (t.text == "tool") {
                    expect_punct(".");
                    std::string dotted = expect_ident().text;
                    while (peek_punct(".")) {
                        lex_.next();
                        dotted += "." + expect_ident().text;
                    }
                    auto args = parse_args();
                    return make(Expr::ToolCall{dotted, std::move(args)}, t);
                }
                if (t.text == "virtual") {
                    expect_punct(".");
                    std::string name = expect_ident().text;
                    auto args = parse_args();
                    return make(Expr::VirtualCall{name, std::move(args)}, t);
                }
                if (t.text == "out") {
                    expect_punct(".");
                    std::string port = expect_ident().text;
                    return make(Expr::OutRef{port}, t);
                }
                if (is_reserved_word(t.text))
                    throw ExprError{"'" + t.text + "' cannot start an expression", t.line, t.col};
                if (peek_punct("(")) {
                    if (!is_builtin_name(t.text))
                        throw ExprError{"unknown function '" + t.text + "'", t.line, t.col};
                    auto args = parse_args();
                    return make(Expr::Builtin{t.text, std::move(args)}, t);
                }
                return make(Expr::Var{t.text}, t);
            }
            default:
                break;
        }
        throw ExprError{"expected expression", t.line, t.col};
    }

    std::vector<ExprPtr> parse_args() {
        expect_punct("(");
        std::vector<ExprPtr> args;
        if (!peek_punct(")")) {
            args.push_back(parse_expr());
            while (peek_punct(",")) {
                lex_.next();
                args.push_back(parse_expr());
            }
        }
        expect_punct(")");
        return args;
    }

    template <typename NodeT>
    static ExprPtr make(NodeT&& n, const Token& t) {
        auto e = std::make_shared<Expr>();
        e->node = std::forward<NodeT>(n);
        e->line = t.line;
        e->col = t.col;
        return e;
    }

    bool peek_punct(const std::string& p) const {
        return lex_.peek().kind == Tok::Punct && lex_.peek().text == p;
    }
    bool peek_keyword(const std::string& k) const {
        return lex_.peek().kind == Tok::Ident && lex_.peek().text == k;
    }
    void expect_punct(const std::string& p) {
        Token t = lex_.next();
        if (t.kind != Tok::Punct || t.text != p)
            throw ExprError{"expected '" + p + "'", t.line, t.col};
    }
    void expect_keyword(const std::string& k) {
        Token t = lex_.next();
        if (t.kind != Tok::Ident || t.text != k)
            throw ExprError{"expected '" + k + "'", t.line, t.col};
    }
    Token expect_ident() {
        Token t = lex_.next();
        if (t.kind != Tok::Ident) throw ExprError{"expected identifier", t.line, t.col};
        return t;
    }

    mutable Lexer lex_;
};

}  // namespace detail

/// Parse a node body into a Program. Throws ExprError with a locus.
inline Program parse_program(const std::string& source) {
    detail::Parser p(source);
    return p.parse_program();
}

/// Parse one contract expression (pre/post condition source).
inline ExprPtr parse_expression(const std::string& source) {
    detail::Parser p(source);
    return p.parse_single_expression();
}

}  // namespace dagforge::expr
