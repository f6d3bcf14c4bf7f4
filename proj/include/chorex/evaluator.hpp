#pragma once

#include <set>
#include <string>

#include "chorex/ast.hpp"
#include "chorex/codec.hpp"
#include "chorex/stack.hpp"
#include "chorex/value.hpp"

namespace chorex {

/// Raised for anything that crashes an actor: division by zero, type
/// errors, failed matches, crash_if. Callers translate it into recovery
/// or session abort.
struct CrashSignal {
    std::string reason;
    SourceSpan span;
    std::string role; // filled in by whoever knows the evaluating role
};

[[noreturn]] inline void crash(std::string reason, SourceSpan sp = {}) {
    throw CrashSignal{std::move(reason), sp, {}};
}

inline bool truthy(const Value& v) {
    if (v.is_nil()) return false;
    if (v.is_bool()) return v.as_bool();
    return true;
}

// ---------------------------------------------------------------------------
// Pattern matching. Variables rebind on first occurrence per match and must
// agree on repeats; pinned variables compare against the current binding.

namespace detail {

inline bool match_into(const Pattern& p, const Value& v, VarMap& vars,
                       std::set<std::string>& bound_here) {
    switch (p.kind) {
    case Pattern::Kind::Wildcard: return true;
    case Pattern::Kind::Lit: return p.lit == v;
    case Pattern::Kind::Var:
        if (bound_here.count(p.name)) return vars.at(p.name) == v;
        vars[p.name] = v;
        bound_here.insert(p.name);
        return true;
    case Pattern::Kind::Pin: {
        auto it = vars.find(p.name);
        if (it == vars.end()) crash("pinned variable " + p.name + " is unbound", p.span);
        return it->second == v;
    }
    case Pattern::Kind::Tuple: {
        if (!v.is_tuple() || v.as_tuple().elems.size() != p.elems.size()) return false;
        for (size_t i = 0; i < p.elems.size(); ++i)
            if (!match_into(*p.elems[i], v.as_tuple().elems[i], vars, bound_here)) return false;
        return true;
    }
    case Pattern::Kind::List: {
        if (!v.is_list() || v.as_list().elems.size() != p.elems.size()) return false;
        for (size_t i = 0; i < p.elems.size(); ++i)
            if (!match_into(*p.elems[i], v.as_list().elems[i], vars, bound_here)) return false;
        return true;
    }
    }
    return false;
}

} // namespace detail

/// Non-destructive on failure: bindings land in `vars` only on success.
inline bool match_pattern(const Pattern& p, const Value& v, VarMap& vars) {
    VarMap scratch = vars;
    std::set<std::string> bound;
    if (!detail::match_into(p, v, scratch, bound)) return false;
    vars = std::move(scratch);
    return true;
}

inline void match_or_crash(const Pattern& p, const Value& v, VarMap& vars) {
    if (!match_pattern(p, v, vars))
        crash("no match of value " + to_text(v), p.span);
}

// ---------------------------------------------------------------------------
// Expression evaluation against one role's variables and impl module.

inline constexpr int kMaxImplDepth = 512;

inline Value eval_expr(const Expr& e, const VarMap& vars, const ImplModule* impl, int depth = 0);

namespace detail {

inline std::int64_t want_int(const Value& v, const char* op, SourceSpan sp) {
    if (!v.is_int()) crash(std::string("bad argument for ") + op + ": " + to_text(v), sp);
    return v.as_int();
}

inline Value eval_binop(const std::string& op, const Value& a, const Value& b, SourceSpan sp) {
    if (op == "==") return Value::boolean(a == b);
    if (op == "!=") return Value::boolean(!(a == b));
    if (op == "<>") {
        if (!a.is_string() || !b.is_string()) crash("<> expects strings", sp);
        return Value::str(a.as_string() + b.as_string());
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
        int cmp;
        if (a.is_int() && b.is_int())
            cmp = a.as_int() < b.as_int() ? -1 : (a.as_int() == b.as_int() ? 0 : 1);
        else if (a.is_string() && b.is_string())
            cmp = a.as_string().compare(b.as_string()) < 0 ? -1
                  : a.as_string() == b.as_string()         ? 0
                                                           : 1;
        else
            crash("comparison of incompatible values " + to_text(a) + " and " + to_text(b), sp);
        if (op == "<") return Value::boolean(cmp < 0);
        if (op == "<=") return Value::boolean(cmp <= 0);
        if (op == ">") return Value::boolean(cmp > 0);
        return Value::boolean(cmp >= 0);
    }
    std::int64_t x = want_int(a, op.c_str(), sp), y = want_int(b, op.c_str(), sp);
    if (op == "+") return Value::integer(x + y);
    if (op == "-") return Value::integer(x - y);
    if (op == "*") return Value::integer(x * y);
    if (op == "/") {
        if (y == 0) crash("division by zero", sp);
        return Value::integer(x / y);
    }
    if (op == "rem") {
        if (y == 0) crash("rem by zero", sp);
        return Value::integer(x % y);
    }
    crash("unknown operator " + op, sp);
}

inline Value eval_builtin(const std::string& name, const std::vector<Value>& args, SourceSpan sp) {
    if (name == "str" && args.size() == 1) return Value::str(to_display(args[0]));
    if (name == "len" && args.size() == 1) {
        const Value& v = args[0];
        if (v.is_string()) return Value::integer(static_cast<std::int64_t>(v.as_string().size()));
        if (v.is_tuple()) return Value::integer(static_cast<std::int64_t>(v.as_tuple().elems.size()));
        if (v.is_list()) return Value::integer(static_cast<std::int64_t>(v.as_list().elems.size()));
        crash("len expects a string, tuple, or list", sp);
    }
    if (name == "hash64" && args.size() == 1)
        return Value::integer(static_cast<std::int64_t>(hash64(args[0])));
    if (name == "crash_if" && args.size() == 1) {
        if (truthy(args[0])) crash("crash_if", sp);
        return Value::nil();
    }
    if (name == "rem" && args.size() == 2) return eval_binop("rem", args[0], args[1], sp);
    crash("unknown function " + name + "/" + std::to_string(args.size()), sp);
}

} // namespace detail

inline Value eval_expr(const Expr& e, const VarMap& vars, const ImplModule* impl, int depth) {
    switch (e.kind) {
    case Expr::Kind::Lit: return e.lit;
    case Expr::Kind::Var: {
        auto it = vars.find(e.name);
        if (it == vars.end()) crash("unbound variable " + e.name, e.span);
        return it->second;
    }
    case Expr::Kind::Tuple: {
        std::vector<Value> vs;
        vs.reserve(e.args.size());
        for (const auto& a : e.args) vs.push_back(eval_expr(*a, vars, impl, depth));
        return Value::tuple(std::move(vs));
    }
    case Expr::Kind::List: {
        std::vector<Value> vs;
        vs.reserve(e.args.size());
        for (const auto& a : e.args) vs.push_back(eval_expr(*a, vars, impl, depth));
        return Value::list(std::move(vs));
    }
    case Expr::Kind::Binop: {
        Value a = eval_expr(*e.args[0], vars, impl, depth);
        Value b = eval_expr(*e.args[1], vars, impl, depth);
        return detail::eval_binop(e.name, a, b, e.span);
    }
    case Expr::Kind::Call: {
        std::vector<Value> args;
        args.reserve(e.args.size());
        for (const auto& a : e.args) args.push_back(eval_expr(*a, vars, impl, depth));
        if (is_builtin_function(e.name) || (e.name == "rem" && args.size() == 2))
            return detail::eval_builtin(e.name, args, e.span);
        const ImplFunction* fn =
            impl ? impl->find(e.name, static_cast<int>(args.size())) : nullptr;
        if (!fn)
            crash("missing impl function " + e.name + "/" + std::to_string(args.size()), e.span);
        if (depth >= kMaxImplDepth) crash("impl call depth exceeded", e.span);
        VarMap locals;
        for (size_t i = 0; i < fn->params.size(); ++i) locals[fn->params[i]] = args[i];
        Value result;
        for (const auto& body_expr : fn->body)
            result = eval_expr(*body_expr, locals, impl, depth + 1);
        return result;
    }
    }
    crash("bad expression", e.span);
}

} // namespace chorex
