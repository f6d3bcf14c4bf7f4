#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "chorex/ast.hpp"

namespace chorex {

/// 128-bit session id, one per choreography instance.
struct SessionToken {
    std::array<std::uint8_t, 16> bytes{};

    static SessionToken generate() {
        static std::random_device rd;
        SessionToken t;
        for (size_t i = 0; i < t.bytes.size(); i += 4) {
            std::uint32_t w = (static_cast<std::uint32_t>(rd()) << 16) ^ rd();
            t.bytes[i] = static_cast<std::uint8_t>(w >> 24);
            t.bytes[i + 1] = static_cast<std::uint8_t>(w >> 16);
            t.bytes[i + 2] = static_cast<std::uint8_t>(w >> 8);
            t.bytes[i + 3] = static_cast<std::uint8_t>(w);
        }
        return t;
    }

    static SessionToken from_hex(const std::string& hex) {
        SessionToken t;
        auto nibble = [](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            return -1;
        };
        for (size_t i = 0; i < 16 && 2 * i + 1 < hex.size(); ++i) {
            int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
            if (hi < 0 || lo < 0) break;
            t.bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
        }
        return t;
    }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string s;
        s.reserve(32);
        for (std::uint8_t b : bytes) {
            s += digits[b >> 4];
            s += digits[b & 0xf];
        }
        return s;
    }

    friend bool operator==(const SessionToken& a, const SessionToken& b) { return a.bytes == b.bytes; }
    friend bool operator!=(const SessionToken& a, const SessionToken& b) { return !(a == b); }
    friend bool operator<(const SessionToken& a, const SessionToken& b) { return a.bytes < b.bytes; }
};

/// Communication-integrity token: both parties of one delivery construct
/// equal tokens, and no other delivery produces the same one.
struct CivToken {
    SessionToken session;
    int site = 0;  // static send-site id
    int epoch = 0; // recovery attempt epoch
    RoleName sender;
    RoleName receiver;

    friend bool operator==(const CivToken& a, const CivToken& b) {
        return a.session == b.session && a.site == b.site && a.epoch == b.epoch &&
               a.sender == b.sender && a.receiver == b.receiver;
    }
};

/// Dynamic checkpoint instance: static site plus per-site entry counter.
struct CkptInstance {
    int site = -1;
    int seq = 0;

    friend bool operator==(const CkptInstance& a, const CkptInstance& b) {
        return a.site == b.site && a.seq == b.seq;
    }
    friend bool operator!=(const CkptInstance& a, const CkptInstance& b) { return !(a == b); }
    friend bool operator<(const CkptInstance& a, const CkptInstance& b) {
        return a.site != b.site ? a.site < b.site : a.seq < b.seq;
    }
};

struct Address {
    enum class Kind { Mem, Tcp };
    Kind kind = Kind::Mem;
    std::string host; // tcp
    int port = 0;     // tcp
    int slot = -1;    // actor slot within the session process

    friend bool operator==(const Address& a, const Address& b) {
        return a.kind == b.kind && a.host == b.host && a.port == b.port && a.slot == b.slot;
    }
};

using NetworkConfig = std::map<RoleName, Address>;

} // namespace chorex
