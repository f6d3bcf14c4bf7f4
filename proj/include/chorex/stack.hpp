#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chorex/ast.hpp"
#include "chorex/civ.hpp"
#include "chorex/value.hpp"

namespace chorex {

using VarMap = std::map<std::string, Value>;
using SiteCounters = std::map<int, int>; // checkpoint site -> entries so far

/// Control frame. Return frames recover call/return; checkpoint frames
/// carry everything a rescue entry needs to restore.
struct Frame {
    enum class Kind { Return, Checkpoint };
    Kind kind = Kind::Return;
    int target = -1;     // Return: landing block; Checkpoint: rescue block
    int exit_block = -1; // Checkpoint: block entered after the barrier
    VarMap saved_vars;
    CkptInstance instance;      // Checkpoint only
    SiteCounters saved_counters; // Checkpoint only

    friend bool operator==(const Frame& a, const Frame& b) {
        return a.kind == b.kind && a.target == b.target && a.exit_block == b.exit_block &&
               a.saved_vars == b.saved_vars && a.instance == b.instance &&
               a.saved_counters == b.saved_counters;
    }
};

/// Immutable stack of frames with structural sharing. Push/pop are O(1)
/// and snapshots are pointer copies, which keeps checkpoint recording
/// cheap no matter how deep the stack grows.
struct StackNode {
    Frame frame;
    std::shared_ptr<const StackNode> next;
    int len = 0;
};

using Stack = std::shared_ptr<const StackNode>;

inline int stack_len(const Stack& s) { return s ? s->len : 0; }

inline Stack stack_push(const Stack& s, Frame f) {
    auto n = std::make_shared<StackNode>();
    n->frame = std::move(f);
    n->next = s;
    n->len = stack_len(s) + 1;
    return n;
}

inline Stack stack_pop(const Stack& s) { return s ? s->next : nullptr; }

inline const Frame& stack_top(const Stack& s) { return s->frame; }

/// Frames bottom-to-top.
inline std::vector<Frame> stack_to_vector(const Stack& s) {
    std::vector<Frame> out(static_cast<size_t>(stack_len(s)));
    size_t i = out.size();
    for (Stack n = s; n; n = n->next) out[--i] = n->frame;
    return out;
}

inline Stack stack_from_vector(const std::vector<Frame>& frames) {
    Stack s;
    for (const auto& f : frames) s = stack_push(s, f);
    return s;
}

inline bool stack_equal(const Stack& a, const Stack& b) {
    Stack x = a, y = b;
    while (x && y) {
        if (x == y) return true; // shared tail
        if (!(x->frame == y->frame)) return false;
        x = x->next;
        y = y->next;
    }
    return !x && !y;
}

/// One actor's checkpointable state.
struct Snapshot {
    Stack stack;
    VarMap vars;
    SiteCounters counters;

    friend bool operator==(const Snapshot& a, const Snapshot& b) {
        return stack_equal(a.stack, b.stack) && a.vars == b.vars && a.counters == b.counters;
    }
};

/// Difference between two snapshots: the shared stack prefix length, the
/// frames above it, and the variable bindings that changed. Added frames
/// are held as a slice of the (immutable, shared) stack so that recording
/// a checkpoint never copies frames.
struct StackDelta {
    int base_len = 0;
    Stack added_top;     // list whose first added_count nodes are the added frames
    int added_count = 0;
    std::map<std::string, std::optional<Value>> vars_delta; // nullopt = removed
    std::map<int, std::optional<int>> counters_delta;

    size_t stored_frames() const { return static_cast<size_t>(added_count); }

    std::vector<Frame> added_frames() const { // bottom-to-top
        std::vector<Frame> out(static_cast<size_t>(added_count));
        size_t i = out.size();
        Stack n = added_top;
        while (i > 0) {
            out[--i] = n->frame;
            n = n->next;
        }
        return out;
    }
};

namespace detail {

/// Longest shared prefix, detected by node identity. Structurally equal but
/// unshared frames are treated as changed, which is safe and only costs a
/// larger delta.
inline Stack common_prefix(Stack a, Stack b) {
    if (!a || !b) return nullptr;
    while (stack_len(a) > stack_len(b)) a = a->next;
    while (stack_len(b) > stack_len(a)) b = b->next;
    while (a && a != b) {
        a = a->next;
        b = b->next;
    }
    return a;
}

template <typename K, typename V>
std::map<K, std::optional<V>> map_delta(const std::map<K, V>& prev, const std::map<K, V>& cur) {
    std::map<K, std::optional<V>> d;
    for (const auto& [k, v] : cur) {
        auto it = prev.find(k);
        if (it == prev.end() || !(it->second == v)) d[k] = v;
    }
    for (const auto& [k, v] : prev)
        if (!cur.count(k)) d[k] = std::nullopt;
    return d;
}

template <typename K, typename V>
std::map<K, V> map_apply(std::map<K, V> base, const std::map<K, std::optional<V>>& d) {
    for (const auto& [k, v] : d) {
        if (v)
            base[k] = *v;
        else
            base.erase(k);
    }
    return base;
}

} // namespace detail

inline StackDelta compute_delta(const Snapshot& prev, const Snapshot& cur) {
    StackDelta d;
    Stack shared = detail::common_prefix(prev.stack, cur.stack);
    d.base_len = stack_len(shared);
    d.added_top = cur.stack;
    d.added_count = stack_len(cur.stack) - d.base_len;
    d.vars_delta = detail::map_delta(prev.vars, cur.vars);
    d.counters_delta = detail::map_delta(prev.counters, cur.counters);
    return d;
}

/// Full snapshot stored as freshly copied nodes, no sharing. The degraded
/// mode the nest benchmark uses to show why deltas matter.
inline StackDelta full_copy_delta(const Snapshot& cur) {
    StackDelta d;
    d.base_len = 0;
    d.added_top = stack_from_vector(stack_to_vector(cur.stack));
    d.added_count = stack_len(cur.stack);
    for (const auto& [k, v] : cur.vars) d.vars_delta[k] = v;
    for (const auto& [k, v] : cur.counters) d.counters_delta[k] = v;
    return d;
}

inline Snapshot apply_delta(const Snapshot& prev, const StackDelta& d) {
    Snapshot out;
    Stack base = prev.stack;
    while (stack_len(base) > d.base_len) base = base->next;
    Stack below_added = d.added_top;
    for (int i = 0; i < d.added_count; ++i) below_added = below_added->next;
    if (below_added == base) {
        out.stack = d.added_top; // shared tail, reuse as-is
    } else {
        Stack s = base;
        for (const auto& f : d.added_frames()) s = stack_push(s, f);
        out.stack = s;
    }
    out.vars = detail::map_apply(prev.vars, d.vars_delta);
    out.counters = detail::map_apply(prev.counters, d.counters_delta);
    return out;
}

} // namespace chorex
