#pragma once

#include <map>
#include <string>
#include <vector>

#include "chorex/chorex.hpp"

namespace chorex::test {

/// Barrier safety over a session trace: once a role reports done for an
/// instance, its next activity must be the matching barrier release (or a
/// rescue entry when a recovery voided the attempt). Returns an empty
/// string when the property holds.
inline std::string check_barrier_safety(const std::vector<TraceEvent>& trace) {
    std::map<std::string, std::string> open; // role -> instance awaited
    for (const auto& e : trace) {
        if (e.role.empty()) continue;
        bool activity = e.kind == "send" || e.kind == "recv" || e.kind == "send-choice" ||
                        e.kind == "recv-choice" || e.kind == "ckpt-enter" || e.kind == "done" ||
                        e.kind == "finish";
        auto it = open.find(e.role);
        if (it != open.end()) {
            if (e.kind == "barrier" && e.detail == it->second) {
                open.erase(it);
                continue;
            }
            if (e.kind == "rescue-enter" || e.kind == "revive") {
                open.erase(it); // the attempt was rolled back
                continue;
            }
            if (activity)
                return e.role + " did " + e.kind + "(" + e.detail + ") while awaiting barrier " +
                       it->second;
            continue;
        }
        if (e.kind == "done") open[e.role] = e.detail;
    }
    return {};
}

/// Pairwise FIFO: per (sender, receiver) channel, the receiver consumes
/// chorex messages in exactly the order the sender sent them.
inline std::string check_pairwise_fifo(const std::vector<TraceEvent>& trace) {
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> sent, received;
    for (const auto& e : trace) {
        auto cut = e.detail.find_first_of("<>");
        if (cut == std::string::npos) continue;
        std::string site = e.detail.substr(0, cut);
        std::string peer = e.detail.substr(cut + 1);
        if (e.kind == "send")
            sent[{e.role, peer}].push_back(site);
        else if (e.kind == "recv")
            received[{peer, e.role}].push_back(site);
    }
    for (const auto& [chan, consumed] : received) {
        // consumption must be an order-preserving subsequence of the sends:
        // messages may be dropped (failed attempts) but never overtaken
        const auto& s = sent[chan];
        size_t si = 0;
        for (size_t ci = 0; ci < consumed.size(); ++ci) {
            while (si < s.size() && s[si] != consumed[ci]) ++si;
            if (si == s.size())
                return chan.first + "->" + chan.second + ": receive of site " + consumed[ci] +
                       " out of send order";
            ++si;
        }
    }
    return {};
}

/// Per-role epochs observed through epoch-bump events must strictly increase.
inline std::string check_epoch_monotonic(const std::vector<TraceEvent>& trace) {
    std::map<std::string, int> last;
    for (const auto& e : trace) {
        if (e.kind != "epoch-bump") continue;
        int v = std::stoi(e.detail);
        auto it = last.find(e.role);
        if (it != last.end() && v <= it->second)
            return e.role + " epoch went from " + std::to_string(it->second) + " to " +
                   std::to_string(v);
        last[e.role] = v;
    }
    return {};
}

/// Exactly-once rescue: after a single recovery, every role enters the
/// rescue of the same instance exactly once.
inline std::string check_atomic_rescue(const std::vector<TraceEvent>& trace,
                                       const std::vector<RoleName>& roles, int expected_recoveries) {
    std::map<std::string, std::map<std::string, int>> entries; // instance -> role -> count
    for (const auto& e : trace)
        if (e.kind == "rescue-enter") entries[e.detail][e.role]++;
    if (expected_recoveries == 0) {
        if (!entries.empty()) return "rescue entered without a recovery";
        return {};
    }
    if (static_cast<int>(entries.size()) != expected_recoveries)
        return "expected " + std::to_string(expected_recoveries) + " rescued instances, saw " +
               std::to_string(entries.size());
    for (const auto& [inst, per_role] : entries) {
        for (const auto& role : roles) {
            auto it = per_role.find(role);
            if (it == per_role.end()) return role + " never entered rescue " + inst;
            if (it->second != 1)
                return role + " entered rescue " + inst + " " + std::to_string(it->second) +
                       " times";
        }
    }
    return {};
}

} // namespace chorex::test
