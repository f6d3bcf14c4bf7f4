#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chorex/ast.hpp"

namespace chorex {

struct ScopeError {
    RoleName role;        // role performing the bad read
    std::string variable;
    SourceSpan span;
    std::optional<RoleName> located_at; // set when the variable lives at another role
    std::string function;               // Role.fn/arity context for display
};

namespace detail {

struct ScopeCtx {
    const ChorProgram& prog;
    std::vector<ScopeError>* out;
    std::string func_label;
    std::set<std::string> funcparams;

    using Env = std::map<RoleName, std::set<std::string>>;

    void report(const RoleName& role, const std::string& var, SourceSpan sp, const Env& env) {
        ScopeError e;
        e.role = role;
        e.variable = var;
        e.span = sp;
        e.function = func_label;
        for (const auto& [other, vars] : env)
            if (other != role && vars.count(var)) {
                e.located_at = other;
                break;
            }
        out->push_back(std::move(e));
    }

    void check_expr(const Expr& e, const RoleName& role, const Env& env) {
        switch (e.kind) {
        case Expr::Kind::Var:
            if (!env.at(role).count(e.name) && !funcparams.count(e.name))
                report(role, e.name, e.span, env);
            break;
        case Expr::Kind::Binop:
        case Expr::Kind::Call:
        case Expr::Kind::Tuple:
        case Expr::Kind::List:
            for (const auto& a : e.args) check_expr(*a, role, env);
            break;
        case Expr::Kind::Lit:
            break;
        }
    }

    void bind_pattern(const Pattern& p, const RoleName& role, Env& env, SourceSpan sp) {
        PatternVars pv = pattern_vars(p);
        for (const auto& used : pv.used)
            if (!env.at(role).count(used)) report(role, used, p.span.line ? p.span : sp, env);
        for (const auto& b : pv.bound) env[role].insert(b);
    }

    void check_call_args(const Statement& call, const Env& env) {
        for (const auto& a : call.args)
            if (a.kind == CallArg::Kind::Located) check_expr(*a.expr, a.role, env);
    }

    // Bindings are lexical: a nested block sees enclosing bindings, but
    // bindings made inside it do not escape.
    void walk(const StmtList& stmts, Env& env) {
        for (const auto& sp : stmts) {
            const Statement& s = *sp;
            switch (s.kind) {
            case Statement::Kind::Delivery:
                check_expr(*s.expr, s.sender, env);
                bind_pattern(*s.pattern, s.receiver, env, s.span);
                break;
            case Statement::Kind::LocalExpr:
                check_expr(*s.expr, s.role, env);
                break;
            case Statement::Kind::If: {
                check_expr(*s.expr, s.decider, env);
                Env then_env = env;
                walk(s.then_branch, then_env);
                Env else_env = env;
                walk(s.else_branch, else_env);
                break;
            }
            case Statement::Kind::Checkpoint: {
                Env body_env = env;
                walk(s.body, body_env);
                Env rescue_env = env; // rescue starts from the entry environment
                walk(s.rescue, rescue_env);
                break;
            }
            case Statement::Kind::With: {
                Env inner = env;
                if (s.with_call)
                    check_call_args(*s.with_call, inner);
                else
                    check_expr(*s.expr, s.role, inner);
                bind_pattern(*s.pattern, s.role, inner, s.span);
                walk(s.rest, inner);
                break;
            }
            case Statement::Kind::Call:
                check_call_args(s, env);
                break;
            }
        }
    }
};

} // namespace detail

/// Every located variable read must be preceded, per role and in control
/// order, by a binding at that same role. Cross-role reads are reported
/// with the role that actually owns the variable.
inline std::vector<ScopeError> check_located_scope(const ChorProgram& prog) {
    std::vector<ScopeError> errors;
    for (const auto& fn : prog.functions) {
        detail::ScopeCtx ctx{prog, &errors, {}, {}};
        detail::ScopeCtx::Env env;
        for (const auto& r : prog.roles) env[r] = {};
        ctx.func_label = fn.name + "/" + std::to_string(fn.arity());
        for (const auto& p : fn.params) {
            if (p.kind == Param::Kind::Func)
                ctx.funcparams.insert(p.name);
            else
                ctx.bind_pattern(*p.pattern, p.role, env, p.span);
        }
        ctx.walk(fn.body, env);
    }
    return errors;
}

// ---------------------------------------------------------------------------
// Required impl functions per role: every application function invoked in
// an expression located at that role. Builtins do not count.

namespace detail {

inline void collect_calls(const Expr& e, std::set<FunctionSpec>& out) {
    if (e.kind == Expr::Kind::Call && !is_builtin_function(e.name) &&
        !(e.name == "rem" && e.args.size() == 2))
        out.insert(FunctionSpec{e.name, static_cast<int>(e.args.size())});
    for (const auto& a : e.args) collect_calls(*a, out);
}

inline void collect_required(const StmtList& stmts, const RoleName& role,
                             std::set<FunctionSpec>& out) {
    for (const auto& sp : stmts) {
        const Statement& s = *sp;
        switch (s.kind) {
        case Statement::Kind::Delivery:
            if (s.sender == role) collect_calls(*s.expr, out);
            break;
        case Statement::Kind::LocalExpr:
            if (s.role == role) collect_calls(*s.expr, out);
            break;
        case Statement::Kind::If:
            if (s.decider == role) collect_calls(*s.expr, out);
            collect_required(s.then_branch, role, out);
            collect_required(s.else_branch, role, out);
            break;
        case Statement::Kind::Checkpoint:
            collect_required(s.body, role, out);
            collect_required(s.rescue, role, out);
            break;
        case Statement::Kind::With:
            if (s.with_call) {
                for (const auto& a : s.with_call->args)
                    if (a.kind == CallArg::Kind::Located && a.role == role)
                        collect_calls(*a.expr, out);
            } else if (s.role == role) {
                collect_calls(*s.expr, out);
            }
            collect_required(s.rest, role, out);
            break;
        case Statement::Kind::Call:
            for (const auto& a : s.args)
                if (a.kind == CallArg::Kind::Located && a.role == role)
                    collect_calls(*a.expr, out);
            break;
        }
    }
}

} // namespace detail

inline std::set<FunctionSpec> required_functions(const ChorProgram& prog, const RoleName& role) {
    std::set<FunctionSpec> out;
    for (const auto& fn : prog.functions) detail::collect_required(fn.body, role, out);
    return out;
}

/// Roles whose impl module is missing a required function, with the specs.
inline std::vector<std::pair<RoleName, FunctionSpec>>
missing_impl_functions(const ChorProgram& prog, const ImplRegistry& impls) {
    std::vector<std::pair<RoleName, FunctionSpec>> missing;
    for (const auto& role : prog.roles)
        for (const auto& spec : required_functions(prog, role))
            if (!impls.find(role, spec.name, spec.arity))
                missing.emplace_back(role, spec);
    return missing;
}

// ---------------------------------------------------------------------------
// Diagnostic rendering in the compiler-error style the CLI prints.

inline std::string render_source_error(const ChorProgram& prog, const std::string& headline,
                                       SourceSpan span, const std::string& footer_label) {
    std::ostringstream os;
    os << "ERROR: " << headline << "\n";
    os << "  |\n";
    if (span.line >= 1 && span.line <= static_cast<int>(prog.source_lines.size())) {
        const std::string& line = prog.source_lines[span.line - 1];
        os << "  | " << line << "\n";
        os << "  | ";
        for (int i = 1; i < span.column; ++i)
            os << (i - 1 < static_cast<int>(line.size()) && line[i - 1] == '\t' ? '\t' : ' ');
        for (int i = 0; i < std::max(1, span.length); ++i) os << '^';
        os << "\n";
    }
    os << "  |\n";
    std::string shown = prog.file;
    if (auto cut = shown.find_last_of('/'); cut != std::string::npos) shown = shown.substr(cut + 1);
    os << "  |-- " << shown << ":" << span.line;
    if (!footer_label.empty()) os << " " << footer_label;
    os << "\n";
    return os.str();
}

inline std::string render_scope_error(const ChorProgram& prog, const ScopeError& e) {
    std::string headline = "undefined variable \"" + e.variable + "\"";
    if (e.located_at)
        headline += " (located at " + *e.located_at + ", read at " + e.role + ")";
    return render_source_error(prog, headline, e.span, e.role + "." + e.function);
}

} // namespace chorex
