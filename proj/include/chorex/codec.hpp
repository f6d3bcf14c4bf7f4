#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "chorex/message.hpp"
#include "chorex/value.hpp"

namespace chorex {

using Bytes = std::vector<std::uint8_t>;

// Value tags, pinned: changing any of these breaks the wire format.
inline constexpr std::uint8_t kTagNil = 0x00;
inline constexpr std::uint8_t kTagFalse = 0x01;
inline constexpr std::uint8_t kTagTrue = 0x02;
inline constexpr std::uint8_t kTagInt = 0x03;
inline constexpr std::uint8_t kTagString = 0x04;
inline constexpr std::uint8_t kTagAtom = 0x05;
inline constexpr std::uint8_t kTagTuple = 0x06;
inline constexpr std::uint8_t kTagList = 0x07;
inline constexpr std::uint8_t kTagFuncRef = 0x08;

inline constexpr std::size_t kDefaultMaxFrame = 16u * 1024u * 1024u;

inline std::size_t max_frame_size() {
    if (const char* env = std::getenv("CHOREX_MAX_FRAME")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return kDefaultMaxFrame;
}

struct CodecError : std::runtime_error {
    std::size_t offset;
    CodecError(std::string reason, std::size_t off)
        : std::runtime_error(std::move(reason)), offset(off) {}
};

struct OversizeFrame : CodecError {
    explicit OversizeFrame(std::size_t size) : CodecError("frame exceeds size cap", size) {}
};

namespace wire {

inline void put_u32(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u64(Bytes& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline void put_str(Bytes& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

struct Reader {
    const Bytes& buf;
    std::size_t pos = 0;

    bool need(std::size_t n) const { return pos + n <= buf.size(); }
    std::uint8_t u8() {
        if (!need(1)) throw CodecError("truncated input", pos);
        return buf[pos++];
    }
    std::uint32_t u32() {
        if (!need(4)) throw CodecError("truncated input", pos);
        std::uint32_t v = (static_cast<std::uint32_t>(buf[pos]) << 24) |
                          (static_cast<std::uint32_t>(buf[pos + 1]) << 16) |
                          (static_cast<std::uint32_t>(buf[pos + 2]) << 8) |
                          static_cast<std::uint32_t>(buf[pos + 3]);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t hi = u32(), lo = u32();
        return hi << 32 | lo;
    }
    std::string str() {
        std::uint32_t n = u32();
        if (!need(n)) throw CodecError("truncated string", pos);
        std::string s(buf.begin() + static_cast<long>(pos), buf.begin() + static_cast<long>(pos + n));
        pos += n;
        return s;
    }
};

} // namespace wire

inline void encode_value_into(const Value& v, Bytes& out) {
    if (v.is_nil()) {
        out.push_back(kTagNil);
    } else if (v.is_bool()) {
        out.push_back(v.as_bool() ? kTagTrue : kTagFalse);
    } else if (v.is_int()) {
        out.push_back(kTagInt);
        wire::put_u64(out, static_cast<std::uint64_t>(v.as_int()));
    } else if (v.is_string()) {
        out.push_back(kTagString);
        wire::put_str(out, v.as_string());
    } else if (v.is_atom()) {
        out.push_back(kTagAtom);
        wire::put_str(out, v.as_atom().name);
    } else if (v.is_tuple()) {
        out.push_back(kTagTuple);
        wire::put_u32(out, static_cast<std::uint32_t>(v.as_tuple().elems.size()));
        for (const auto& e : v.as_tuple().elems) encode_value_into(e, out);
    } else if (v.is_list()) {
        out.push_back(kTagList);
        wire::put_u32(out, static_cast<std::uint32_t>(v.as_list().elems.size()));
        for (const auto& e : v.as_list().elems) encode_value_into(e, out);
    } else {
        out.push_back(kTagFuncRef);
        wire::put_str(out, v.as_func().name);
        out.push_back(static_cast<std::uint8_t>(v.as_func().arity));
    }
}

inline Bytes encode_value(const Value& v) {
    Bytes out;
    encode_value_into(v, out);
    return out;
}

inline Value decode_value(wire::Reader& r) {
    std::size_t at = r.pos;
    std::uint8_t tag = r.u8();
    switch (tag) {
    case kTagNil: return Value::nil();
    case kTagFalse: return Value::boolean(false);
    case kTagTrue: return Value::boolean(true);
    case kTagInt: return Value::integer(static_cast<std::int64_t>(r.u64()));
    case kTagString: return Value::str(r.str());
    case kTagAtom: return Value::atom(r.str());
    case kTagTuple: {
        std::uint32_t n = r.u32();
        std::vector<Value> vs;
        vs.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) vs.push_back(decode_value(r));
        return Value::tuple(std::move(vs));
    }
    case kTagList: {
        std::uint32_t n = r.u32();
        std::vector<Value> vs;
        vs.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) vs.push_back(decode_value(r));
        return Value::list(std::move(vs));
    }
    case kTagFuncRef: {
        std::string name = r.str();
        int arity = r.u8();
        return Value::func(std::move(name), arity);
    }
    default: throw CodecError("unknown value tag", at);
    }
}

inline Value decode_value(const Bytes& buf) {
    wire::Reader r{buf};
    Value v = decode_value(r);
    if (r.pos != buf.size()) throw CodecError("trailing bytes after value", r.pos);
    return v;
}

// ---------------------------------------------------------------------------
// FNV-1a 64-bit and the hash64 builtin.

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n,
                             std::uint64_t h = kFnvOffsetBasis) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= kFnvPrime;
    }
    return h;
}

/// hash64 builtin: strings hash their UTF-8 bytes, everything else hashes
/// its canonical encoding.
inline std::uint64_t hash64(const Value& v) {
    if (v.is_string()) {
        const std::string& s = v.as_string();
        return fnv1a64(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
    }
    Bytes enc = encode_value(v);
    return fnv1a64(enc.data(), enc.size());
}

// ---------------------------------------------------------------------------
// Messages on the wire. Chorex/choice/recover/barrier messages serialize;
// revive payloads carry control stacks and never leave the process.

inline Value civ_to_value(const CivToken& civ) {
    return Value::tuple({Value::str(civ.session.hex()),
                         Value::tuple({Value::integer(civ.site), Value::integer(civ.epoch)}),
                         Value::atom(civ.sender), Value::atom(civ.receiver)});
}

inline CivToken civ_from_value(const Value& v) {
    if (!v.is_tuple() || v.as_tuple().elems.size() != 4) throw CodecError("bad civ token", 0);
    const auto& e = v.as_tuple().elems;
    const auto& meta = e[1].as_tuple().elems;
    CivToken civ;
    civ.session = SessionToken::from_hex(e[0].as_string());
    civ.site = static_cast<int>(meta[0].as_int());
    civ.epoch = static_cast<int>(meta[1].as_int());
    civ.sender = e[2].as_atom().name;
    civ.receiver = e[3].as_atom().name;
    return civ;
}

inline Value instance_to_value(const CkptInstance& inst) {
    return Value::tuple({Value::integer(inst.site), Value::integer(inst.seq)});
}

inline CkptInstance instance_from_value(const Value& v) {
    const auto& e = v.as_tuple().elems;
    return CkptInstance{static_cast<int>(e[0].as_int()), static_cast<int>(e[1].as_int())};
}

inline Value address_to_value(const Address& a) {
    return Value::tuple({Value::atom(a.kind == Address::Kind::Mem ? "mem" : "tcp"),
                         Value::str(a.host), Value::integer(a.port), Value::integer(a.slot)});
}

inline Address address_from_value(const Value& v) {
    const auto& e = v.as_tuple().elems;
    Address a;
    a.kind = e[0].as_atom().name == "mem" ? Address::Kind::Mem : Address::Kind::Tcp;
    a.host = e[1].as_string();
    a.port = static_cast<int>(e[2].as_int());
    a.slot = static_cast<int>(e[3].as_int());
    return a;
}

inline Value message_to_value(const Message& m) {
    Value civ = m.civ ? civ_to_value(*m.civ) : Value::nil();
    switch (m.type) {
    case MsgType::Chorex:
        return Value::tuple({Value::atom("chorex"), civ, m.value()});
    case MsgType::Choice:
        return Value::tuple({Value::atom("choice"), civ, m.value()});
    case MsgType::Barrier: {
        const auto& p = std::get<BarrierPayload>(m.payload);
        return Value::tuple({Value::atom("barrier"), Value::nil(),
                             Value::tuple({instance_to_value(p.instance), Value::integer(p.epoch)})});
    }
    case MsgType::Recover: {
        const auto& p = std::get<RecoverPayload>(m.payload);
        std::vector<Value> cfg;
        for (const auto& [role, addr] : p.config)
            cfg.push_back(Value::tuple({Value::atom(role), address_to_value(addr)}));
        return Value::tuple({Value::atom("recover"), Value::nil(),
                             Value::tuple({Value::list(std::move(cfg)),
                                           instance_to_value(p.instance), Value::integer(p.epoch)})});
    }
    case MsgType::Revive:
        throw CodecError("revive messages are in-process only", 0);
    }
    throw CodecError("unknown message type", 0);
}

inline Message message_from_value(const Value& v) {
    if (!v.is_tuple() || v.as_tuple().elems.size() != 3) throw CodecError("bad message shape", 0);
    const auto& e = v.as_tuple().elems;
    const std::string& tag = e[0].as_atom().name;
    if (tag == "chorex") return Message::chorex(civ_from_value(e[1]), e[2]);
    if (tag == "choice") return Message::choice(civ_from_value(e[1]), e[2].as_bool());
    if (tag == "barrier") {
        const auto& p = e[2].as_tuple().elems;
        return Message::barrier(instance_from_value(p[0]), static_cast<int>(p[1].as_int()));
    }
    if (tag == "recover") {
        const auto& p = e[2].as_tuple().elems;
        RecoverPayload rp;
        for (const auto& entry : p[0].as_list().elems) {
            const auto& kv = entry.as_tuple().elems;
            rp.config[kv[0].as_atom().name] = address_from_value(kv[1]);
        }
        rp.instance = instance_from_value(p[1]);
        rp.epoch = static_cast<int>(p[2].as_int());
        return Message::recover(std::move(rp));
    }
    throw CodecError("unknown message tag " + tag, 0);
}

inline Bytes encode_message(const Message& m) { return encode_value(message_to_value(m)); }

inline Message decode_message(const Bytes& buf) { return message_from_value(decode_value(buf)); }

/// Full wire frame: 4-byte big-endian payload length, then the message.
inline Bytes encode_frame(const Message& m) {
    Bytes body = encode_message(m);
    if (body.size() > max_frame_size()) throw OversizeFrame(body.size());
    Bytes out;
    out.reserve(body.size() + 4);
    wire::put_u32(out, static_cast<std::uint32_t>(body.size()));
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

enum class FrameStatus { Ok, NeedMoreBytes };

/// Streaming decode: consumes one complete frame from the front of `buf`
/// or reports that more bytes are required.
inline FrameStatus decode_frame(Bytes& buf, Message& out) {
    if (buf.size() < 4) return FrameStatus::NeedMoreBytes;
    wire::Reader r{buf};
    std::uint32_t n = r.u32();
    if (n > max_frame_size()) throw OversizeFrame(n);
    if (buf.size() < 4u + n) return FrameStatus::NeedMoreBytes;
    Bytes body(buf.begin() + 4, buf.begin() + 4 + static_cast<long>(n));
    out = decode_message(body);
    buf.erase(buf.begin(), buf.begin() + 4 + static_cast<long>(n));
    return FrameStatus::Ok;
}

} // namespace chorex
