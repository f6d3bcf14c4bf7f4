#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chorex/value.hpp"

namespace chorex {

struct SourceSpan {
    int line = 0;   // 1-based
    int column = 0; // 1-based
    int length = 0;
};

using RoleName = std::string;

// ---------------------------------------------------------------------------
// Expressions

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind {
        Lit,     // literal Value (nil/bool/int/string/atom/funcref)
        Var,     // variable read
        Binop,   // name = operator symbol, args = {lhs, rhs}
        Call,    // impl-function call name(args...)
        Tuple,   // {e1, ..., en}
        List,    // [e1, ..., en]
    };
    Kind kind = Kind::Lit;
    Value lit;
    std::string name; // Var name, Binop symbol, Call fname
    std::vector<ExprPtr> args;
    SourceSpan span;
};

inline ExprPtr make_lit(Value v, SourceSpan sp = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Lit;
    e->lit = std::move(v);
    e->span = sp;
    return e;
}

inline ExprPtr make_var(std::string name, SourceSpan sp = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Var;
    e->name = std::move(name);
    e->span = sp;
    return e;
}

inline ExprPtr make_binop(std::string op, ExprPtr l, ExprPtr r, SourceSpan sp = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Binop;
    e->name = std::move(op);
    e->args = {std::move(l), std::move(r)};
    e->span = sp;
    return e;
}

inline ExprPtr make_call(std::string fname, std::vector<ExprPtr> args, SourceSpan sp = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Call;
    e->name = std::move(fname);
    e->args = std::move(args);
    e->span = sp;
    return e;
}

// ---------------------------------------------------------------------------
// Patterns

struct Pattern;
using PatternPtr = std::shared_ptr<const Pattern>;

struct Pattern {
    enum class Kind { Lit, Var, Pin, Wildcard, Tuple, List };
    Kind kind = Kind::Wildcard;
    Value lit;
    std::string name; // Var / Pin
    std::vector<PatternPtr> elems;
    SourceSpan span;
};

inline PatternPtr make_pat_var(std::string name, SourceSpan sp = {}) {
    auto p = std::make_shared<Pattern>();
    p->kind = Pattern::Kind::Var;
    p->name = std::move(name);
    p->span = sp;
    return p;
}

inline PatternPtr make_pat_wildcard(SourceSpan sp = {}) {
    auto p = std::make_shared<Pattern>();
    p->kind = Pattern::Kind::Wildcard;
    p->span = sp;
    return p;
}

inline PatternPtr make_pat_lit(Value v, SourceSpan sp = {}) {
    auto p = std::make_shared<Pattern>();
    p->kind = Pattern::Kind::Lit;
    p->lit = std::move(v);
    p->span = sp;
    return p;
}

/// bound = variables a match introduces; used = pinned variables it reads.
struct PatternVars {
    std::set<std::string> bound;
    std::set<std::string> used;
};

inline void pattern_vars_into(const Pattern& p, PatternVars& out) {
    switch (p.kind) {
    case Pattern::Kind::Var: out.bound.insert(p.name); break;
    case Pattern::Kind::Pin: out.used.insert(p.name); break;
    case Pattern::Kind::Tuple:
    case Pattern::Kind::List:
        for (const auto& e : p.elems) pattern_vars_into(*e, out);
        break;
    case Pattern::Kind::Lit:
    case Pattern::Kind::Wildcard:
        break;
    }
}

inline PatternVars pattern_vars(const Pattern& p) {
    PatternVars pv;
    pattern_vars_into(p, pv);
    return pv;
}

// ---------------------------------------------------------------------------
// Statements

struct Statement;
using StmtPtr = std::shared_ptr<const Statement>;
using StmtList = std::vector<StmtPtr>;

/// Argument of a choreography-level call.
struct CallArg {
    enum class Kind { Located, FuncRefLit, FuncParam };
    Kind kind = Kind::Located;
    RoleName role;     // Located
    ExprPtr expr;      // Located
    std::string fname; // FuncRefLit / FuncParam name
    int arity = 0;     // FuncRefLit
    SourceSpan span;
};

struct Statement {
    enum class Kind { Delivery, If, Checkpoint, With, LocalExpr, Call };
    Kind kind = Kind::LocalExpr;
    SourceSpan span;

    // Delivery
    RoleName sender;
    ExprPtr expr; // Delivery payload expr / If cond / With rhs expr / LocalExpr
    RoleName receiver;
    PatternPtr pattern; // Delivery receive pattern / With bind pattern
    int site = -1;      // Delivery/If: send site id; Checkpoint: checkpoint site id

    // If
    RoleName decider;
    std::optional<std::vector<RoleName>> notify; // absent = all other roles
    StmtList then_branch;
    StmtList else_branch;

    // Checkpoint
    StmtList body;
    StmtList rescue;

    // With
    RoleName role; // binding role (also LocalExpr role)
    StmtPtr with_call; // set when rhs is a choreography call; else `expr` holds rhs
    StmtList rest;

    // Call
    std::string fname;
    bool indirect = false; // fname names a function-valued parameter
    std::vector<CallArg> args;
};

// ---------------------------------------------------------------------------
// Functions and programs

struct Param {
    enum class Kind { Located, Func };
    Kind kind = Kind::Located;
    RoleName role;      // Located
    PatternPtr pattern; // Located
    std::string name;   // Func
    SourceSpan span;
};

struct ChorFunction {
    std::string name;
    std::vector<Param> params;
    StmtList body;
    SourceSpan span;
    int arity() const { return static_cast<int>(params.size()); }
};

struct ChorProgram {
    std::string file; // source path, for diagnostics
    std::vector<RoleName> roles;
    std::vector<ChorFunction> functions;
    std::vector<std::string> source_lines; // for caret diagnostics
    int site_count = 0;
    int ckpt_site_count = 0;

    bool has_role(const RoleName& r) const {
        for (const auto& x : roles)
            if (x == r) return true;
        return false;
    }
    const ChorFunction* find_run() const {
        for (const auto& f : functions)
            if (f.name == "run") return &f;
        return nullptr;
    }
};

struct FunctionSpec {
    std::string name;
    int arity = 0;
    friend bool operator<(const FunctionSpec& a, const FunctionSpec& b) {
        return a.name != b.name ? a.name < b.name : a.arity < b.arity;
    }
    friend bool operator==(const FunctionSpec& a, const FunctionSpec& b) {
        return a.name == b.name && a.arity == b.arity;
    }
};

// ---------------------------------------------------------------------------
// Impl modules (.chim): per-role application functions in the expression
// language. Bodies are expression sequences; the last value is the result.

struct ImplFunction {
    std::string name;
    std::vector<std::string> params;
    std::vector<ExprPtr> body;
    SourceSpan span;
    int arity() const { return static_cast<int>(params.size()); }
};

struct ImplModule {
    RoleName role;
    std::vector<ImplFunction> functions;

    const ImplFunction* find(const std::string& name, int arity) const {
        for (const auto& f : functions)
            if (f.name == name && f.arity() == arity) return &f;
        return nullptr;
    }
};

struct ImplRegistry {
    std::vector<ImplModule> modules;

    const ImplModule* module_for(const RoleName& role) const {
        for (const auto& m : modules)
            if (m.role == role) return &m;
        return nullptr;
    }
    const ImplFunction* find(const RoleName& role, const std::string& name, int arity) const {
        const ImplModule* m = module_for(role);
        return m ? m->find(name, arity) : nullptr;
    }
};

inline bool is_builtin_function(const std::string& name) {
    return name == "str" || name == "len" || name == "hash64" || name == "crash_if";
}

} // namespace chorex
