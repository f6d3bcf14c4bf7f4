#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chorex {

/// Closed runtime value universe: nil, bool, 64-bit int, string, atom,
/// tuple, list, and function references. Structural equality throughout.
struct Value;

struct Atom {
    std::string name;
    friend bool operator==(const Atom& a, const Atom& b) { return a.name == b.name; }
};

struct FuncRef {
    std::string name;
    int arity = 0;
    friend bool operator==(const FuncRef& a, const FuncRef& b) {
        return a.name == b.name && a.arity == b.arity;
    }
};

struct Tuple {
    std::vector<Value> elems;
    friend bool operator==(const Tuple&, const Tuple&);
};

struct List {
    std::vector<Value> elems;
    friend bool operator==(const List&, const List&);
};

struct Value {
    using Rep = std::variant<std::monostate, bool, std::int64_t, std::string, Atom, Tuple, List, FuncRef>;
    Rep rep;

    Value() = default;
    explicit Value(Rep r) : rep(std::move(r)) {}

    static Value nil() { return Value{}; }
    static Value boolean(bool b) { return Value{Rep{b}}; }
    static Value integer(std::int64_t i) { return Value{Rep{i}}; }
    static Value str(std::string s) { return Value{Rep{std::move(s)}}; }
    static Value atom(std::string s) { return Value{Rep{Atom{std::move(s)}}}; }
    static Value tuple(std::vector<Value> vs) { return Value{Rep{Tuple{std::move(vs)}}}; }
    static Value list(std::vector<Value> vs) { return Value{Rep{List{std::move(vs)}}}; }
    static Value func(std::string name, int arity) { return Value{Rep{FuncRef{std::move(name), arity}}}; }

    bool is_nil() const { return std::holds_alternative<std::monostate>(rep); }
    bool is_bool() const { return std::holds_alternative<bool>(rep); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(rep); }
    bool is_string() const { return std::holds_alternative<std::string>(rep); }
    bool is_atom() const { return std::holds_alternative<Atom>(rep); }
    bool is_tuple() const { return std::holds_alternative<Tuple>(rep); }
    bool is_list() const { return std::holds_alternative<List>(rep); }
    bool is_func() const { return std::holds_alternative<FuncRef>(rep); }

    bool as_bool() const { return std::get<bool>(rep); }
    std::int64_t as_int() const { return std::get<std::int64_t>(rep); }
    const std::string& as_string() const { return std::get<std::string>(rep); }
    const Atom& as_atom() const { return std::get<Atom>(rep); }
    const Tuple& as_tuple() const { return std::get<Tuple>(rep); }
    const List& as_list() const { return std::get<List>(rep); }
    const FuncRef& as_func() const { return std::get<FuncRef>(rep); }

    friend bool operator==(const Value& a, const Value& b) { return a.rep == b.rep; }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
};

inline bool operator==(const Tuple& a, const Tuple& b) { return a.elems == b.elems; }
inline bool operator==(const List& a, const List& b) { return a.elems == b.elems; }

inline void escape_into(std::string& out, const std::string& s) {
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
        }
    }
}

/// Canonical printable form: nil, true, 42, "s", :atom, {a, b}, [a, b], @f/1.
inline std::string to_text(const Value& v) {
    struct Visitor {
        std::string out;
        void walk(const Value& v) {
            if (v.is_nil()) {
                out += "nil";
            } else if (v.is_bool()) {
                out += v.as_bool() ? "true" : "false";
            } else if (v.is_int()) {
                out += std::to_string(v.as_int());
            } else if (v.is_string()) {
                out += '"';
                escape_into(out, v.as_string());
                out += '"';
            } else if (v.is_atom()) {
                out += ':';
                out += v.as_atom().name;
            } else if (v.is_tuple()) {
                out += '{';
                join(v.as_tuple().elems);
                out += '}';
            } else if (v.is_list()) {
                out += '[';
                join(v.as_list().elems);
                out += ']';
            } else {
                out += '@';
                out += v.as_func().name;
                out += '/';
                out += std::to_string(v.as_func().arity);
            }
        }
        void join(const std::vector<Value>& vs) {
            for (size_t i = 0; i < vs.size(); ++i) {
                if (i) out += ", ";
                walk(vs[i]);
            }
        }
    } vis;
    vis.walk(v);
    return vis.out;
}

/// `str(v)` builtin rendering: strings come out raw, everything else as to_text.
inline std::string to_display(const Value& v) {
    if (v.is_string()) return v.as_string();
    return to_text(v);
}

} // namespace chorex
