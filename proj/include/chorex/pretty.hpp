#pragma once

#include <string>

#include "chorex/ast.hpp"
#include "chorex/value.hpp"

namespace chorex {

inline std::string expr_to_text(const Expr& e);

namespace detail {

inline void join_exprs(std::string& out, const std::vector<ExprPtr>& es) {
    for (size_t i = 0; i < es.size(); ++i) {
        if (i) out += ", ";
        out += expr_to_text(*es[i]);
    }
}

} // namespace detail

inline std::string expr_to_text(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Lit: return to_text(e.lit);
    case Expr::Kind::Var: return e.name;
    case Expr::Kind::Binop:
        return "(" + expr_to_text(*e.args[0]) + " " + e.name + " " + expr_to_text(*e.args[1]) + ")";
    case Expr::Kind::Call: {
        std::string out = e.name + "(";
        detail::join_exprs(out, e.args);
        return out + ")";
    }
    case Expr::Kind::Tuple: {
        std::string out = "{";
        detail::join_exprs(out, e.args);
        return out + "}";
    }
    case Expr::Kind::List: {
        std::string out = "[";
        detail::join_exprs(out, e.args);
        return out + "]";
    }
    }
    return "?";
}

inline std::string pattern_to_text(const Pattern& p) {
    switch (p.kind) {
    case Pattern::Kind::Lit: return to_text(p.lit);
    case Pattern::Kind::Var: return p.name;
    case Pattern::Kind::Pin: return "^" + p.name;
    case Pattern::Kind::Wildcard: return "_";
    case Pattern::Kind::Tuple:
    case Pattern::Kind::List: {
        std::string out = p.kind == Pattern::Kind::Tuple ? "{" : "[";
        for (size_t i = 0; i < p.elems.size(); ++i) {
            if (i) out += ", ";
            out += pattern_to_text(*p.elems[i]);
        }
        out += p.kind == Pattern::Kind::Tuple ? "}" : "]";
        return out;
    }
    }
    return "?";
}

// Structural equality with spans erased; the merge rule for conditionals.

inline bool expr_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.name != b.name || !(a.lit == b.lit) || a.args.size() != b.args.size())
        return false;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (!expr_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

inline bool pattern_equal(const Pattern& a, const Pattern& b) {
    if (a.kind != b.kind || a.name != b.name || !(a.lit == b.lit) || a.elems.size() != b.elems.size())
        return false;
    for (size_t i = 0; i < a.elems.size(); ++i)
        if (!pattern_equal(*a.elems[i], *b.elems[i])) return false;
    return true;
}

} // namespace chorex
