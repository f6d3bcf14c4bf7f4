#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "chorex/chorex.hpp"

namespace chorex::test {

inline std::string corpus_dir() { return std::string(CHOREX_SOURCE_DIR) + "/tests/corpus/"; }
inline std::string golden_dir() { return std::string(CHOREX_SOURCE_DIR) + "/tests/golden/"; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline ChorProgram load_chor(const std::string& name) {
    return parse_choreography(slurp(corpus_dir() + name), name);
}

inline ImplRegistry load_impls(const std::string& name) {
    ImplRegistry reg;
    reg.modules = parse_impl_modules(slurp(corpus_dir() + name), name);
    return reg;
}

struct Compiled {
    ChorProgram prog;
    EndpointMap endpoints;
    ImplRegistry impls;
};

inline Compiled compile_corpus(const std::string& chor, const std::string& chim = {}) {
    Compiled c;
    c.prog = load_chor(chor);
    if (!check_located_scope(c.prog).empty())
        throw std::runtime_error(chor + ": scope check failed");
    c.endpoints = project_all(c.prog);
    if (!chim.empty()) c.impls = load_impls(chim);
    return c;
}

inline SessionResult run_compiled(const Compiled& c, std::vector<Value> args,
                                  SessionOptions opts = {}) {
    Session s(c.prog.roles, c.endpoints, c.impls, std::move(args), opts);
    return s.run();
}

struct CorpusCase {
    const char* chor;
    const char* chim; // may be null
    std::vector<Value> args;
};

/// Programs whose distributed runs are compared against the oracle.
inline const std::vector<CorpusCase>& oracle_corpus() {
    static std::vector<CorpusCase> cases{
        {"minimal_ok.chor", "minimal.chim", {}},
        {"minimal_ckpt.chor", "minimal.chim", {}},
        {"two_senders.chor", "two_senders.chim", {}},
        {"bookseller.chor", "bookseller.chim", {Value::boolean(true)}},
        {"bookseller.chor", "bookseller.chim", {Value::boolean(false)}},
        {"out_of_order.chor", "out_of_order.chim", {}},
        {"nested_ckpt.chor", "nested_ckpt.chim", {}},
        {"unwind_depth.chor", "unwind_depth.chim", {}},
        {"pie.chor", "pie.chim", {}},
        {"koc_notify.chor", "koc_notify.chim", {Value::integer(42)}},
        {"koc_notify.chor", "koc_notify.chim", {Value::integer(7)}},
        {"loop.chor", "loop.chim", {}},
        {"with_pins.chor", "with_pins.chim", {}},
        {"overload.chor", "overload.chim", {Value::atom("register")}},
        {"overload.chor", "overload.chim", {Value::atom("login")}},
        {"higher_order2.chor", nullptr, {Value::integer(3)}},
        {"tcp_like.chor", "tcp_like.chim", {Value::str("sck")}},
        {"zkp_round.chor", "zkp_round.chim", {Value::integer(2)}},
        {"zero_comm.chor", nullptr, {}},
    };
    return cases;
}

} // namespace chorex::test
