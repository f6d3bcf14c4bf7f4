#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chorex/ast.hpp"
#include "chorex/lexer.hpp"

namespace chorex {

namespace detail {

inline bool upper_start(const std::string& s) {
    return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

inline int binop_prec(const Token& t) {
    if (t.kind == Token::Kind::Op) {
        const std::string& s = t.text;
        if (s == "==" || s == "!=" || s == "<" || s == "<=" || s == ">" || s == ">=") return 1;
        if (s == "<>") return 2;
        if (s == "+" || s == "-") return 3;
        if (s == "*" || s == "/") return 4;
    }
    if (t.is_ident("rem")) return 4;
    return 0;
}

} // namespace detail

class Parser {
public:
    Parser(std::string source, std::string file)
        : file_(std::move(file)) {
        Lexer lex(std::move(source), file_);
        lines_ = lex.source_lines();
        toks_ = lex.tokens();
    }

    ChorProgram parse_choreography() {
        ChorProgram prog;
        prog.file = file_;
        prog.source_lines = lines_;

        prescan_defs();
        skip_newlines();
        expect_ident("defchor");
        expect_punct("[");
        prog.roles = parse_role_list("]");
        expect_punct("]");
        expect_ident("do");
        roles_.clear();
        for (const auto& r : prog.roles) {
            if (!detail::upper_start(r))
                throw ParseError("role name must start with an uppercase letter: " + r, prev_span());
            if (!roles_.insert(r).second)
                throw ParseError("duplicate role " + r, prev_span());
        }

        skip_newlines();
        while (!peek().is_ident("end")) {
            if (peek().is(Token::Kind::End))
                throw ParseError("unexpected end of input in defchor", peek().span, "expected def or end");
            prog.functions.push_back(parse_function());
            skip_newlines();
        }
        expect_ident("end");
        skip_newlines();
        if (!peek().is(Token::Kind::End))
            throw ParseError("unexpected input after defchor block", peek().span);

        int runs = 0;
        for (const auto& f : prog.functions)
            if (f.name == "run") ++runs;
        if (runs == 0)
            throw ParseError("choreography must define a run function", SourceSpan{1, 1, 1}, "one function named run is required");
        if (runs > 1)
            throw ParseError("choreography must define exactly one run function", SourceSpan{1, 1, 1});

        prog.site_count = next_site_;
        prog.ckpt_site_count = next_ckpt_;
        return prog;
    }

    std::vector<ImplModule> parse_impls() {
        std::vector<ImplModule> mods;
        skip_newlines();
        while (!peek().is(Token::Kind::End)) {
            expect_ident("defimpl");
            ImplModule mod;
            Token role = expect(Token::Kind::Ident, "role name");
            if (!detail::upper_start(role.text))
                throw ParseError("role name must start with an uppercase letter: " + role.text, role.span);
            mod.role = role.text;
            expect_ident("do");
            skip_newlines();
            while (!peek().is_ident("end")) {
                mod.functions.push_back(parse_impl_function());
                skip_newlines();
            }
            expect_ident("end");
            skip_newlines();
            mods.push_back(std::move(mod));
        }
        return mods;
    }

    /// Standalone literal values, comma separated (CLI --args).
    std::vector<Value> parse_value_list() {
        std::vector<Value> vals;
        skip_newlines();
        if (peek().is(Token::Kind::End)) return vals;
        while (true) {
            vals.push_back(parse_literal_value());
            if (peek().is_punct(",")) {
                advance();
                continue;
            }
            break;
        }
        skip_newlines();
        if (!peek().is(Token::Kind::End))
            throw ParseError("unexpected input after value list", peek().span);
        return vals;
    }

private:
    std::string file_;
    std::vector<std::string> lines_;
    std::vector<Token> toks_;
    size_t i_ = 0;

    std::set<RoleName> roles_;
    std::map<std::string, std::set<int>> def_table_; // name -> arities (pre-scanned)
    std::set<std::string> cur_func_params_;          // function-valued params in scope
    int next_site_ = 0;
    int next_ckpt_ = 0;

    // --- token plumbing ------------------------------------------------

    const Token& peek(size_t ahead = 0) const {
        size_t j = i_ + ahead;
        return j < toks_.size() ? toks_[j] : toks_.back();
    }
    const Token& advance() { return toks_[std::min(i_++, toks_.size() - 1)]; }
    SourceSpan prev_span() const { return i_ > 0 ? toks_[i_ - 1].span : SourceSpan{1, 1, 1}; }

    Token expect(Token::Kind k, const char* what) {
        if (!peek().is(k))
            throw ParseError(std::string("expected ") + what + ", found '" + describe(peek()) + "'",
                             peek().span, what);
        return advance();
    }
    void expect_ident(const char* s) {
        if (!peek().is_ident(s))
            throw ParseError(std::string("expected '") + s + "', found '" + describe(peek()) + "'",
                             peek().span, s);
        advance();
    }
    void expect_punct(const char* s) {
        if (!peek().is_punct(s))
            throw ParseError(std::string("expected '") + s + "', found '" + describe(peek()) + "'",
                             peek().span, s);
        advance();
    }
    void expect_op(const char* s) {
        if (!peek().is_op(s))
            throw ParseError(std::string("expected '") + s + "', found '" + describe(peek()) + "'",
                             peek().span, s);
        advance();
    }
    void expect_newline_or(const char* closer) {
        if (peek().is(Token::Kind::Newline)) {
            skip_newlines();
            return;
        }
        if (peek().is_ident(closer) || peek().is_ident("end") || peek().is_ident("else") ||
            peek().is_ident("rescue") || peek().is(Token::Kind::End))
            return;
        throw ParseError("expected end of statement, found '" + describe(peek()) + "'", peek().span,
                         "newline");
    }
    void skip_newlines() {
        while (peek().is(Token::Kind::Newline)) advance();
    }
    static std::string describe(const Token& t) {
        switch (t.kind) {
        case Token::Kind::End: return "end of input";
        case Token::Kind::Newline: return "end of line";
        case Token::Kind::String: return "\"" + t.text + "\"";
        case Token::Kind::AtomLit: return ":" + t.text;
        default: return t.text;
        }
    }

    bool is_role(const std::string& s) const { return roles_.count(s) > 0; }

    // Pre-scan `def name(p, q)` headers so call sites can be resolved in a
    // single parse pass.
    void prescan_defs() {
        for (size_t j = 0; j + 1 < toks_.size(); ++j) {
            if (!toks_[j].is_ident("def")) continue;
            if (!toks_[j + 1].is(Token::Kind::Ident)) continue;
            const std::string& name = toks_[j + 1].text;
            if (j + 2 >= toks_.size() || !toks_[j + 2].is_punct("(")) continue;
            int depth = 1;
            int arity = 0;
            bool any = false;
            for (size_t k = j + 3; k < toks_.size() && depth > 0; ++k) {
                const Token& t = toks_[k];
                if (t.is_punct("(") || t.is_punct("[") || t.is_punct("{")) ++depth;
                else if (t.is_punct(")") || t.is_punct("]") || t.is_punct("}")) --depth;
                else if (depth == 1 && t.is_punct(",")) ++arity;
                if (depth > 0) any = true;
            }
            def_table_[name].insert(any ? arity + 1 : 0);
        }
    }
    bool is_chor_def(const std::string& name, int arity) const {
        auto it = def_table_.find(name);
        return it != def_table_.end() && it->second.count(arity) > 0;
    }
    bool is_chor_def_name(const std::string& name) const { return def_table_.count(name) > 0; }

    // --- roles / functions ---------------------------------------------

    std::vector<RoleName> parse_role_list(const char* closer) {
        std::vector<RoleName> rs;
        if (peek().is_punct(closer)) return rs;
        while (true) {
            Token t = expect(Token::Kind::Ident, "role name");
            rs.push_back(t.text);
            if (peek().is_punct(",")) {
                advance();
                continue;
            }
            return rs;
        }
    }

    ChorFunction parse_function() {
        ChorFunction fn;
        fn.span = peek().span;
        expect_ident("def");
        Token name = expect(Token::Kind::Ident, "function name");
        fn.name = name.text;
        expect_punct("(");
        cur_func_params_.clear();
        if (!peek().is_punct(")")) {
            while (true) {
                fn.params.push_back(parse_param());
                if (peek().is_punct(",")) {
                    advance();
                    continue;
                }
                break;
            }
        }
        expect_punct(")");
        expect_ident("do");
        skip_newlines();
        fn.body = parse_stmts();
        expect_ident("end");
        for (const auto& p : fn.params)
            if (p.kind == Param::Kind::Func) cur_func_params_.erase(p.name);
        return fn;
    }

    Param parse_param() {
        Param p;
        p.span = peek().span;
        Token t = expect(Token::Kind::Ident, "parameter");
        if (is_role(t.text)) {
            p.kind = Param::Kind::Located;
            p.role = t.text;
            expect_punct(".");
            p.pattern = parse_pattern();
            return p;
        }
        if (detail::upper_start(t.text))
            throw ParseError("unknown role " + t.text, t.span);
        p.kind = Param::Kind::Func;
        p.name = t.text;
        cur_func_params_.insert(t.text);
        return p;
    }

    ImplFunction parse_impl_function() {
        ImplFunction fn;
        fn.span = peek().span;
        expect_ident("def");
        Token name = expect(Token::Kind::Ident, "function name");
        fn.name = name.text;
        expect_punct("(");
        if (!peek().is_punct(")")) {
            while (true) {
                Token p = expect(Token::Kind::Ident, "parameter name");
                if (detail::upper_start(p.text))
                    throw ParseError("impl parameters must be lowercase identifiers", p.span);
                fn.params.push_back(p.text);
                if (peek().is_punct(",")) {
                    advance();
                    continue;
                }
                break;
            }
        }
        expect_punct(")");
        expect_ident("do");
        skip_newlines();
        while (!peek().is_ident("end")) {
            fn.body.push_back(parse_expr());
            if (peek().is(Token::Kind::Newline)) skip_newlines();
        }
        expect_ident("end");
        if (fn.body.empty())
            throw ParseError("impl function body may not be empty", fn.span);
        return fn;
    }

    // --- statements ------------------------------------------------------

    StmtList parse_stmts() {
        StmtList out;
        skip_newlines();
        while (true) {
            const Token& t = peek();
            if (t.is_ident("end") || t.is_ident("else") || t.is_ident("rescue") ||
                t.is(Token::Kind::End))
                return out;
            out.push_back(parse_stmt());
            expect_newline_or("end");
        }
    }

    StmtPtr parse_stmt() {
        const Token& t = peek();
        if (t.is_ident("if")) return parse_if();
        if (t.is_ident("checkpoint")) return parse_checkpoint();
        if (t.is_ident("with")) return parse_with();
        if (t.is(Token::Kind::Ident) && detail::upper_start(t.text)) {
            if (!is_role(t.text))
                throw ParseError("unknown role " + t.text, t.span);
            return parse_located_stmt();
        }
        if (t.is(Token::Kind::Ident) && (peek(1).is_punct("(") || peek(1).is_punct(".")))
            return parse_call_stmt();
        throw ParseError("expected a statement, found '" + describe(t) + "'", t.span,
                         "delivery, if, checkpoint, with, local expression, or call");
    }

    StmtPtr parse_located_stmt() {
        auto st = std::make_shared<Statement>();
        st->span = peek().span;
        RoleName role = advance().text;
        expect_punct(".");
        ExprPtr e = parse_located_expr_tail();
        if (peek().is_op("~>")) {
            advance();
            Token r = expect(Token::Kind::Ident, "receiver role");
            if (!is_role(r.text)) throw ParseError("unknown role " + r.text, r.span);
            if (r.text == role)
                throw ParseError("delivery sender and receiver must differ", r.span);
            expect_punct(".");
            st->kind = Statement::Kind::Delivery;
            st->sender = role;
            st->expr = e;
            st->receiver = r.text;
            st->pattern = parse_pattern();
            st->site = next_site_++;
            return st;
        }
        st->kind = Statement::Kind::LocalExpr;
        st->role = role;
        st->expr = e;
        return st;
    }

    StmtPtr parse_if() {
        auto st = std::make_shared<Statement>();
        st->kind = Statement::Kind::If;
        st->span = peek().span;
        expect_ident("if");
        Token d = expect(Token::Kind::Ident, "deciding role");
        if (!is_role(d.text)) throw ParseError("unknown role " + d.text, d.span);
        st->decider = d.text;
        expect_punct(".");
        st->expr = parse_located_expr_tail();
        if (peek().is_punct(",")) {
            advance();
            skip_newlines();
            Token n = expect(Token::Kind::Ident, "notify");
            if (n.text != "notify")
                throw ParseError("expected notify annotation", n.span, "notify:");
            expect_punct(":");
            expect_punct("[");
            std::vector<RoleName> notify = parse_role_list("]");
            expect_punct("]");
            for (const auto& r : notify) {
                if (!is_role(r)) throw ParseError("unknown role " + r + " in notify", n.span);
                if (r == st->decider)
                    throw ParseError("notify may not include the deciding actor " + r, n.span);
            }
            std::set<RoleName> seen;
            for (const auto& r : notify)
                if (!seen.insert(r).second)
                    throw ParseError("duplicate role " + r + " in notify", n.span);
            st->notify = std::move(notify);
        }
        st->site = next_site_++;
        expect_ident("do");
        skip_newlines();

        // then/else share a site numbering base so that identical branches
        // project identically for merged roles.
        int s0 = next_site_, c0 = next_ckpt_;
        st->then_branch = parse_stmts();
        int s1 = next_site_, c1 = next_ckpt_;
        if (!peek().is_ident("else"))
            throw ParseError("if requires an else branch", peek().span, "else");
        advance();
        skip_newlines();
        next_site_ = s0;
        next_ckpt_ = c0;
        st->else_branch = parse_stmts();
        next_site_ = std::max(next_site_, s1);
        next_ckpt_ = std::max(next_ckpt_, c1);
        expect_ident("end");
        return st;
    }

    StmtPtr parse_checkpoint() {
        auto st = std::make_shared<Statement>();
        st->kind = Statement::Kind::Checkpoint;
        st->span = peek().span;
        expect_ident("checkpoint");
        st->site = next_ckpt_++;
        expect_ident("do");
        skip_newlines();
        st->body = parse_stmts();
        if (peek().is_ident("rescue")) {
            advance();
            skip_newlines();
            st->rescue = parse_stmts();
        }
        expect_ident("end");
        if (!st->body.empty() && st->rescue.empty())
            throw ParseError("checkpoint with a non-empty body requires a rescue block", st->span);
        return st;
    }

    StmtPtr parse_with() {
        auto st = std::make_shared<Statement>();
        st->kind = Statement::Kind::With;
        st->span = peek().span;
        expect_ident("with");
        Token r = expect(Token::Kind::Ident, "role");
        if (!is_role(r.text)) throw ParseError("unknown role " + r.text, r.span);
        st->role = r.text;
        expect_punct(".");
        st->pattern = parse_pattern();
        expect_op("<-");

        const Token& t = peek();
        if (t.is(Token::Kind::Ident) && is_role(t.text) && peek(1).is_punct(".")) {
            if (t.text != st->role)
                throw ParseError("with expression must be located at the binding role " + st->role,
                                 t.span);
            advance();
            expect_punct(".");
            st->expr = parse_located_expr_tail();
        } else if (t.is(Token::Kind::Ident) && cur_func_params_.count(t.text) &&
                   peek(1).is_punct(".")) {
            st->with_call = parse_call_stmt();
        } else if (t.is(Token::Kind::Ident) && peek(1).is_punct("(") &&
                   is_chor_def_name(t.text)) {
            st->with_call = parse_call_stmt();
        } else {
            st->expr = parse_expr();
        }

        expect_ident("do");
        skip_newlines();
        st->rest = parse_stmts();
        expect_ident("end");
        return st;
    }

    StmtPtr parse_call_stmt() {
        auto st = std::make_shared<Statement>();
        st->kind = Statement::Kind::Call;
        st->span = peek().span;
        Token name = expect(Token::Kind::Ident, "function name");
        st->fname = name.text;
        if (peek().is_punct(".")) {
            // indirect call through a function-valued parameter: f.(args)
            if (!cur_func_params_.count(st->fname))
                throw ParseError(st->fname + " is not a function-valued parameter", name.span);
            advance();
            st->indirect = true;
        } else if (cur_func_params_.count(st->fname)) {
            throw ParseError("call a function-valued parameter as " + st->fname + ".(...)",
                             name.span);
        }
        expect_punct("(");
        if (!peek().is_punct(")")) {
            while (true) {
                st->args.push_back(parse_call_arg());
                if (peek().is_punct(",")) {
                    advance();
                    continue;
                }
                break;
            }
        }
        expect_punct(")");
        if (st->fname == "run")
            throw ParseError("run is the entry point and may not be called", name.span);
        if (!st->indirect && !is_chor_def(st->fname, static_cast<int>(st->args.size())))
            throw ParseError("unknown choreography function " + st->fname + "/" +
                                 std::to_string(st->args.size()),
                             name.span);
        return st;
    }

    CallArg parse_call_arg() {
        CallArg arg;
        arg.span = peek().span;
        const Token& t = peek();
        if (t.is(Token::Kind::Ident) && is_role(t.text) && peek(1).is_punct(".")) {
            arg.kind = CallArg::Kind::Located;
            arg.role = advance().text;
            expect_punct(".");
            arg.expr = parse_located_expr_tail();
            return arg;
        }
        if (t.is_punct("@")) {
            advance();
            Token name = expect(Token::Kind::Ident, "function name");
            expect_op("/");
            Token n = expect(Token::Kind::Int, "arity");
            arg.kind = CallArg::Kind::FuncRefLit;
            arg.fname = name.text;
            arg.arity = static_cast<int>(n.int_value);
            if (!is_chor_def(arg.fname, arg.arity))
                throw ParseError("unknown choreography function @" + arg.fname + "/" +
                                     std::to_string(arg.arity),
                                 name.span);
            return arg;
        }
        if (t.is(Token::Kind::Ident) && cur_func_params_.count(t.text)) {
            arg.kind = CallArg::Kind::FuncParam;
            arg.fname = advance().text;
            return arg;
        }
        throw ParseError("choreography call arguments must be located (Role.expr), @f/arity, "
                         "or a function-valued parameter",
                         t.span);
    }

    // --- patterns --------------------------------------------------------

    PatternPtr parse_pattern() {
        auto p = std::make_shared<Pattern>();
        p->span = peek().span;
        const Token& t = peek();
        if (t.is_punct("(")) {
            advance();
            PatternPtr inner = parse_pattern();
            expect_punct(")");
            return inner;
        }
        if (t.is_punct("^")) {
            advance();
            Token name = expect(Token::Kind::Ident, "variable after ^");
            p->kind = Pattern::Kind::Pin;
            p->name = name.text;
            return p;
        }
        if (t.is_punct("{")) {
            advance();
            p->kind = Pattern::Kind::Tuple;
            if (!peek().is_punct("}")) {
                while (true) {
                    p->elems.push_back(parse_pattern());
                    if (peek().is_punct(",")) {
                        advance();
                        continue;
                    }
                    break;
                }
            }
            expect_punct("}");
            return p;
        }
        if (t.is_punct("[")) {
            advance();
            p->kind = Pattern::Kind::List;
            if (!peek().is_punct("]")) {
                while (true) {
                    p->elems.push_back(parse_pattern());
                    if (peek().is_punct(",")) {
                        advance();
                        continue;
                    }
                    break;
                }
            }
            expect_punct("]");
            return p;
        }
        if (t.is(Token::Kind::Ident)) {
            if (t.text == "_") {
                advance();
                p->kind = Pattern::Kind::Wildcard;
                return p;
            }
            if (t.text == "nil" || t.text == "true" || t.text == "false") {
                p->kind = Pattern::Kind::Lit;
                p->lit = t.text == "nil" ? Value::nil() : Value::boolean(t.text == "true");
                advance();
                return p;
            }
            if (detail::upper_start(t.text))
                throw ParseError("variables must start with a lowercase letter", t.span);
            p->kind = Pattern::Kind::Var;
            p->name = advance().text;
            return p;
        }
        if (t.is(Token::Kind::Int)) {
            p->kind = Pattern::Kind::Lit;
            p->lit = Value::integer(advance().int_value);
            return p;
        }
        if (t.is(Token::Kind::String)) {
            p->kind = Pattern::Kind::Lit;
            p->lit = Value::str(advance().text);
            return p;
        }
        if (t.is(Token::Kind::AtomLit)) {
            p->kind = Pattern::Kind::Lit;
            p->lit = Value::atom(advance().text);
            return p;
        }
        throw ParseError("expected a pattern, found '" + describe(t) + "'", t.span, "pattern");
    }

    // --- expressions -----------------------------------------------------

    /// Located expression after `Role.`: either a parenthesized expression
    /// or a primary, optionally continued by binary operators.
    ExprPtr parse_located_expr_tail() {
        ExprPtr base;
        if (peek().is_punct("(")) {
            advance();
            base = parse_expr();
            expect_punct(")");
        } else {
            base = parse_primary();
        }
        return parse_binop_cont(std::move(base), 1);
    }

    ExprPtr parse_expr(int min_prec = 1) { return parse_binop_cont(parse_unary(), min_prec); }

    ExprPtr parse_binop_cont(ExprPtr lhs, int min_prec) {
        while (true) {
            int prec = detail::binop_prec(peek());
            if (prec < min_prec || prec == 0) return lhs;
            Token op = advance();
            std::string sym = op.is_ident("rem") ? "rem" : op.text;
            ExprPtr rhs = parse_unary();
            while (detail::binop_prec(peek()) > prec)
                rhs = parse_binop_cont(std::move(rhs), detail::binop_prec(peek()));
            lhs = make_binop(sym, std::move(lhs), std::move(rhs), op.span);
        }
    }

    ExprPtr parse_unary() {
        if (peek().is_op("-")) {
            Token m = advance();
            if (peek().is(Token::Kind::Int)) {
                Token n = advance();
                return make_lit(Value::integer(-n.int_value), m.span);
            }
            ExprPtr inner = parse_unary();
            return make_binop("-", make_lit(Value::integer(0), m.span), std::move(inner), m.span);
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        SourceSpan sp = t.span;
        if (t.is(Token::Kind::Int)) return make_lit(Value::integer(advance().int_value), sp);
        if (t.is(Token::Kind::String)) return make_lit(Value::str(advance().text), sp);
        if (t.is(Token::Kind::AtomLit)) return make_lit(Value::atom(advance().text), sp);
        if (t.is_punct("(")) {
            advance();
            ExprPtr e = parse_expr();
            expect_punct(")");
            return e;
        }
        if (t.is_punct("@")) {
            advance();
            Token name = expect(Token::Kind::Ident, "function name");
            expect_op("/");
            Token n = expect(Token::Kind::Int, "arity");
            return make_lit(Value::func(name.text, static_cast<int>(n.int_value)), sp);
        }
        if (t.is_punct("{")) {
            advance();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::Tuple;
            e->span = sp;
            if (!peek().is_punct("}")) {
                while (true) {
                    e->args.push_back(parse_expr());
                    if (peek().is_punct(",")) {
                        advance();
                        continue;
                    }
                    break;
                }
            }
            expect_punct("}");
            return e;
        }
        if (t.is_punct("[")) {
            advance();
            auto e = std::make_shared<Expr>();
            e->kind = Expr::Kind::List;
            e->span = sp;
            if (!peek().is_punct("]")) {
                while (true) {
                    e->args.push_back(parse_expr());
                    if (peek().is_punct(",")) {
                        advance();
                        continue;
                    }
                    break;
                }
            }
            expect_punct("]");
            return e;
        }
        if (t.is(Token::Kind::Ident)) {
            if (t.text == "nil") {
                advance();
                return make_lit(Value::nil(), sp);
            }
            if (t.text == "true" || t.text == "false") {
                bool b = t.text == "true";
                advance();
                return make_lit(Value::boolean(b), sp);
            }
            if (detail::upper_start(t.text))
                throw ParseError(is_role(t.text)
                                     ? "located expressions may not nest role qualifiers"
                                     : "unknown role or invalid variable " + t.text,
                                 t.span);
            Token name = advance();
            if (peek().is_punct("(")) {
                advance();
                std::vector<ExprPtr> args;
                if (!peek().is_punct(")")) {
                    while (true) {
                        args.push_back(parse_expr());
                        if (peek().is_punct(",")) {
                            advance();
                            continue;
                        }
                        break;
                    }
                }
                expect_punct(")");
                return make_call(name.text, std::move(args), sp);
            }
            return make_var(name.text, sp);
        }
        throw ParseError("expected an expression, found '" + describe(t) + "'", t.span,
                         "expression");
    }

    Value parse_literal_value() {
        ExprPtr e = parse_unary();
        return const_fold(*e);
    }

    Value const_fold(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Lit: return e.lit;
        case Expr::Kind::Tuple: {
            std::vector<Value> vs;
            for (const auto& a : e.args) vs.push_back(const_fold(*a));
            return Value::tuple(std::move(vs));
        }
        case Expr::Kind::List: {
            std::vector<Value> vs;
            for (const auto& a : e.args) vs.push_back(const_fold(*a));
            return Value::list(std::move(vs));
        }
        default:
            throw ParseError("expected a literal value", e.span);
        }
    }
};

inline ChorProgram parse_choreography(const std::string& source, const std::string& file = "<input>") {
    Parser p(source, file);
    return p.parse_choreography();
}

inline std::vector<ImplModule> parse_impl_modules(const std::string& source,
                                                  const std::string& file = "<input>") {
    Parser p(source, file);
    return p.parse_impls();
}

inline std::vector<Value> parse_values(const std::string& source) {
    Parser p(source, "<args>");
    return p.parse_value_list();
}

} // namespace chorex
