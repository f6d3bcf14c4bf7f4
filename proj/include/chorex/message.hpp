#pragma once

#include <optional>
#include <variant>

#include "chorex/civ.hpp"
#include "chorex/stack.hpp"
#include "chorex/value.hpp"

namespace chorex {

enum class MsgType { Chorex, Choice, Revive, Recover, Barrier };

inline const char* msg_type_name(MsgType t) {
    switch (t) {
    case MsgType::Chorex: return "chorex";
    case MsgType::Choice: return "choice";
    case MsgType::Revive: return "revive";
    case MsgType::Recover: return "recover";
    case MsgType::Barrier: return "barrier";
    }
    return "?";
}

/// Sent to survivors after a crash: reconfigure the network, unwind to the
/// failed checkpoint instance, move to the new attempt epoch.
struct RecoverPayload {
    NetworkConfig config;
    CkptInstance instance;
    int epoch = 0;
};

/// Sent to a freshly spawned replacement actor: the state to install.
struct RevivePayload {
    Snapshot snapshot;
    CkptInstance instance;
    int epoch = 0;
    NetworkConfig config;
    SessionToken session;
};

struct BarrierPayload {
    CkptInstance instance;
    int epoch = 0;
};

struct Message {
    MsgType type = MsgType::Chorex;
    std::optional<CivToken> civ; // chorex and choice only
    std::variant<Value, RecoverPayload, RevivePayload, BarrierPayload> payload;

    static Message chorex(CivToken civ, Value v) {
        Message m;
        m.type = MsgType::Chorex;
        m.civ = std::move(civ);
        m.payload = std::move(v);
        return m;
    }
    static Message choice(CivToken civ, bool taken) {
        Message m;
        m.type = MsgType::Choice;
        m.civ = std::move(civ);
        m.payload = Value::boolean(taken);
        return m;
    }
    static Message barrier(CkptInstance inst, int epoch) {
        Message m;
        m.type = MsgType::Barrier;
        m.payload = BarrierPayload{inst, epoch};
        return m;
    }
    static Message recover(RecoverPayload p) {
        Message m;
        m.type = MsgType::Recover;
        m.payload = std::move(p);
        return m;
    }
    static Message revive(RevivePayload p) {
        Message m;
        m.type = MsgType::Revive;
        m.payload = std::move(p);
        return m;
    }

    const Value& value() const { return std::get<Value>(payload); }

    friend bool operator==(const Message& a, const Message& b);
};

inline bool operator==(const BarrierPayload& a, const BarrierPayload& b) {
    return a.instance == b.instance && a.epoch == b.epoch;
}
inline bool operator==(const RecoverPayload& a, const RecoverPayload& b) {
    return a.config == b.config && a.instance == b.instance && a.epoch == b.epoch;
}
inline bool operator==(const RevivePayload& a, const RevivePayload& b) {
    return a.snapshot == b.snapshot && a.instance == b.instance && a.epoch == b.epoch &&
           a.config == b.config && a.session == b.session;
}
inline bool operator==(const Message& a, const Message& b) {
    return a.type == b.type && a.civ == b.civ && a.payload == b.payload;
}

} // namespace chorex
