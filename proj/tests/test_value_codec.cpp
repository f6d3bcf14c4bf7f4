#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "chorex/chorex.hpp"

using namespace chorex;

namespace {

Value fuzz_value(std::mt19937_64& rng, int depth = 0) {
    std::uniform_int_distribution<int> pick(0, depth >= 3 ? 5 : 7);
    switch (pick(rng)) {
    case 0: return Value::nil();
    case 1: return Value::boolean(rng() & 1);
    case 2: return Value::integer(static_cast<std::int64_t>(rng()));
    case 3: {
        std::string s;
        for (size_t i = 0, n = rng() % 12; i < n; ++i) s += static_cast<char>('a' + rng() % 26);
        return Value::str(s);
    }
    case 4: {
        std::string s;
        for (size_t i = 0, n = 1 + rng() % 8; i < n; ++i) s += static_cast<char>('a' + rng() % 26);
        return Value::atom(s);
    }
    case 5: return Value::func("f" + std::to_string(rng() % 10), static_cast<int>(rng() % 5));
    case 6: {
        std::vector<Value> vs;
        for (size_t i = 0, n = rng() % 4; i < n; ++i) vs.push_back(fuzz_value(rng, depth + 1));
        return Value::tuple(std::move(vs));
    }
    default: {
        std::vector<Value> vs;
        for (size_t i = 0, n = rng() % 4; i < n; ++i) vs.push_back(fuzz_value(rng, depth + 1));
        return Value::list(std::move(vs));
    }
    }
}

CivToken fuzz_civ(std::mt19937_64& rng) {
    CivToken civ;
    civ.session = SessionToken::generate();
    civ.site = static_cast<int>(rng() % 100);
    civ.epoch = static_cast<int>(rng() % 5);
    civ.sender = "Role" + std::to_string(rng() % 4);
    civ.receiver = "Role" + std::to_string(rng() % 4);
    return civ;
}

} // namespace

TEST_CASE("golden byte vectors are pinned") {
    CHECK(encode_value(Value::nil()) == Bytes{0x00});

    Bytes int42{0x03, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x2A};
    CHECK(encode_value(Value::integer(42)) == int42);

    // a full chorex message, all fields fixed by hand
    CivToken civ;
    civ.session = SessionToken::from_hex("000102030405060708090a0b0c0d0e0f");
    civ.site = 7;
    civ.epoch = 1;
    civ.sender = "A";
    civ.receiver = "B";
    Message m = Message::chorex(civ, Value::integer(42));

    Bytes expect;
    auto str = [&](const std::string& s) {
        expect.push_back(static_cast<std::uint8_t>(s.size() >> 24 & 0xff));
        expect.push_back(static_cast<std::uint8_t>(s.size() >> 16 & 0xff));
        expect.push_back(static_cast<std::uint8_t>(s.size() >> 8 & 0xff));
        expect.push_back(static_cast<std::uint8_t>(s.size() & 0xff));
        for (char c : s) expect.push_back(static_cast<std::uint8_t>(c));
    };
    expect.push_back(0x06); // message tuple
    expect.insert(expect.end(), {0x00, 0x00, 0x00, 0x03});
    expect.push_back(0x05); // :chorex
    str("chorex");
    expect.push_back(0x06); // civ 4-tuple
    expect.insert(expect.end(), {0x00, 0x00, 0x00, 0x04});
    expect.push_back(0x04); // session hex string
    str("000102030405060708090a0b0c0d0e0f");
    expect.push_back(0x06); // metadata {site, epoch}
    expect.insert(expect.end(), {0x00, 0x00, 0x00, 0x02});
    expect.insert(expect.end(), {0x03, 0, 0, 0, 0, 0, 0, 0, 7});
    expect.insert(expect.end(), {0x03, 0, 0, 0, 0, 0, 0, 0, 1});
    expect.push_back(0x05); // :A
    str("A");
    expect.push_back(0x05); // :B
    str("B");
    expect.push_back(0x03); // payload int 42
    expect.insert(expect.end(), {0, 0, 0, 0, 0, 0, 0, 42});

    CHECK(encode_message(m) == expect);

    // frame adds the 4-byte big-endian length
    Bytes frame = encode_frame(m);
    REQUIRE(frame.size() == expect.size() + 4);
    std::uint32_t n = static_cast<std::uint32_t>(frame[0]) << 24 |
                      static_cast<std::uint32_t>(frame[1]) << 16 |
                      static_cast<std::uint32_t>(frame[2]) << 8 | frame[3];
    CHECK(n == expect.size());
    CHECK(Bytes(frame.begin() + 4, frame.end()) == expect);
}

TEST_CASE("decode is the inverse of encode over fuzzed messages") {
    std::mt19937_64 rng(20240817);
    for (int i = 0; i < 10000; ++i) {
        Message m = (i % 3 == 0) ? Message::choice(fuzz_civ(rng), rng() & 1)
                                 : Message::chorex(fuzz_civ(rng), fuzz_value(rng));
        Bytes frame = encode_frame(m);
        Message out;
        Bytes buf = frame;
        REQUIRE(decode_frame(buf, out) == FrameStatus::Ok);
        CHECK(out == m);
        CHECK(buf.empty());
    }
}

TEST_CASE("truncated frames ask for more bytes") {
    Message m = Message::chorex(fuzz_civ(*new std::mt19937_64(1)), Value::str("hello"));
    Bytes frame = encode_frame(m);
    for (size_t cut = 0; cut < frame.size(); ++cut) {
        Bytes part(frame.begin(), frame.begin() + static_cast<long>(cut));
        Message out;
        CHECK(decode_frame(part, out) == FrameStatus::NeedMoreBytes);
    }
}

TEST_CASE("malformed input reports offset") {
    Bytes bad{0xFF};
    CHECK_THROWS_AS(decode_value(bad), CodecError);
}

TEST_CASE("CHOREX_MAX_FRAME caps frame sizes") {
    setenv("CHOREX_MAX_FRAME", "64", 1);
    CivToken civ;
    civ.sender = "A";
    civ.receiver = "B";
    Message small = Message::chorex(civ, Value::integer(1));
    CHECK_THROWS_AS(encode_frame(small), OversizeFrame); // civ alone exceeds 64 bytes
    unsetenv("CHOREX_MAX_FRAME");
    CHECK_NOTHROW(encode_frame(small));
}

TEST_CASE("control messages round-trip; revive is in-process only") {
    Message b = Message::barrier(CkptInstance{3, 2}, 5);
    Bytes buf = encode_frame(b);
    Message out;
    REQUIRE(decode_frame(buf, out) == FrameStatus::Ok);
    CHECK(out == b);

    RecoverPayload rp;
    rp.config["Alice"] = Address{Address::Kind::Tcp, "127.0.0.1", 4000, 2};
    rp.instance = CkptInstance{1, 0};
    rp.epoch = 2;
    Message r = Message::recover(rp);
    buf = encode_frame(r);
    REQUIRE(decode_frame(buf, out) == FrameStatus::Ok);
    CHECK(out == r);

    Message rv = Message::revive(RevivePayload{});
    CHECK_THROWS_AS(encode_frame(rv), CodecError);
}

TEST_CASE("hash64 matches FNV-1a reference values") {
    CHECK(hash64(Value::str("")) == 0xcbf29ce484222325ull);
    // independently computed FNV-1a of "a": (basis ^ 0x61) * prime
    std::uint64_t expect_a = (0xcbf29ce484222325ull ^ 0x61ull) * 0x100000001b3ull;
    CHECK(hash64(Value::str("a")) == expect_a);
    CHECK(hash64(Value::integer(1)) == fnv1a64(encode_value(Value::integer(1)).data(), 9));
    CHECK(hash64(Value::integer(1)) == hash64(Value::integer(1)));
    CHECK(hash64(Value::integer(1)) != hash64(Value::integer(2)));
}

TEST_CASE("value printing") {
    Value v = Value::tuple({Value::atom("answer"), Value::integer(-3), Value::str("hi"),
                            Value::list({Value::nil(), Value::boolean(true)}),
                            Value::func("f", 2)});
    CHECK(to_text(v) == "{:answer, -3, \"hi\", [nil, true], @f/2}");
    CHECK(to_display(Value::str("raw")) == "raw");
}
