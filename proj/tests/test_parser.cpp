#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace chorex;
using namespace chorex::test;

TEST_CASE("tuple delivery parses to tuple expr and pattern") {
    ChorProgram p = parse_choreography(
        "defchor [Alice, Bob] do\n"
        "  def run() do\n"
        "    Alice.{:answer, 42} ~> Bob.{:answer, the_answer}\n"
        "  end\n"
        "end\n");
    REQUIRE(p.functions.size() == 1);
    const Statement& s = *p.functions[0].body.at(0);
    REQUIRE(s.kind == Statement::Kind::Delivery);
    CHECK(s.sender == "Alice");
    CHECK(s.receiver == "Bob");
    REQUIRE(s.expr->kind == Expr::Kind::Tuple);
    CHECK(s.expr->args[0]->lit == Value::atom("answer"));
    CHECK(s.expr->args[1]->lit == Value::integer(42));
    REQUIRE(s.pattern->kind == Pattern::Kind::Tuple);
    CHECK(s.pattern->elems[1]->kind == Pattern::Kind::Var);
    CHECK(s.pattern->elems[1]->name == "the_answer");
}

TEST_CASE("empty defchor is missing run") {
    CHECK_THROWS_WITH(parse_choreography("defchor [A] do\nend\n"),
                      Catch::Matchers::ContainsSubstring("run"));
}

TEST_CASE("the minimal checkpoint listing parses to the expected shape") {
    ChorProgram p = load_chor("minimal_ckpt.chor");
    const auto& body = p.functions[0].body;
    REQUIRE(body.size() == 4); // checkpoint + three continuation statements
    const Statement& ck = *body[0];
    REQUIRE(ck.kind == Statement::Kind::Checkpoint);
    CHECK(ck.body.size() == 1);
    CHECK(ck.rescue.size() == 1);
    CHECK(body[1]->kind == Statement::Kind::Delivery);
    CHECK(body[2]->kind == Statement::Kind::Delivery);
    CHECK(body[3]->kind == Statement::Kind::LocalExpr);
}

TEST_CASE("site ids are deterministic and branch-aligned") {
    std::string src =
        "defchor [A, B, C] do\n"
        "  def run() do\n"
        "    A.(1) ~> B.x\n"
        "    if A.(x == x), notify: [B] do\n"
        "      A.(2) ~> C.y\n"
        "    else\n"
        "      A.(3) ~> C.y\n"
        "    end\n"
        "    A.(4) ~> B.z\n"
        "  end\n"
        "end\n";
    // x is located at B; the condition must be at A. Fix the program:
    src = "defchor [A, B, C] do\n"
          "  def run() do\n"
          "    A.(1) ~> B.x\n"
          "    if A.flip(), notify: [B] do\n"
          "      A.(2) ~> C.y\n"
          "    else\n"
          "      A.(3) ~> C.y\n"
          "    end\n"
          "    A.(4) ~> B.z\n"
          "  end\n"
          "end\n";
    ChorProgram p = parse_choreography(src);
    ChorProgram q = parse_choreography(src);
    const auto& body = p.functions[0].body;
    CHECK(body[0]->site == 0);
    CHECK(body[1]->site == 1);                  // the if itself
    CHECK(body[1]->then_branch[0]->site == 2);  // aligned across branches
    CHECK(body[1]->else_branch[0]->site == 2);
    CHECK(body[2]->site == 3);
    CHECK(q.functions[0].body[2]->site == 3); // stable across parses
}

TEST_CASE("if requires else") {
    CHECK_THROWS_WITH(parse_choreography("defchor [A, B] do\n"
                                         "  def run() do\n"
                                         "    if A.go() do\n"
                                         "      A.(1) ~> B.x\n"
                                         "    end\n"
                                         "  end\n"
                                         "end\n"),
                      Catch::Matchers::ContainsSubstring("else"));
}

TEST_CASE("notify may not include the decider") {
    CHECK_THROWS_WITH(parse_choreography("defchor [A, B] do\n"
                                         "  def run() do\n"
                                         "    if A.go(), notify: [A] do\n"
                                         "      A.(1)\n"
                                         "    else\n"
                                         "      A.(2)\n"
                                         "    end\n"
                                         "  end\n"
                                         "end\n"),
                      Catch::Matchers::ContainsSubstring("deciding"));
}

TEST_CASE("checkpoint with a body requires a rescue") {
    CHECK_THROWS_WITH(parse_choreography("defchor [A, B] do\n"
                                         "  def run() do\n"
                                         "    checkpoint do\n"
                                         "      A.(1) ~> B.x\n"
                                         "    end\n"
                                         "  end\n"
                                         "end\n"),
                      Catch::Matchers::ContainsSubstring("rescue"));
}

TEST_CASE("delivery to self is rejected") {
    CHECK_THROWS_WITH(parse_choreography("defchor [A, B] do\n"
                                         "  def run() do\n"
                                         "    A.(1) ~> A.x\n"
                                         "  end\n"
                                         "end\n"),
                      Catch::Matchers::ContainsSubstring("differ"));
}

TEST_CASE("run may not be called") {
    CHECK_THROWS_WITH(parse_choreography("defchor [A] do\n"
                                         "  def run() do\n"
                                         "    run()\n"
                                         "  end\n"
                                         "end\n"),
                      Catch::Matchers::ContainsSubstring("entry point"));
}

TEST_CASE("unknown roles and bad syntax carry spans and hints") {
    try {
        parse_choreography("defchor [A, B] do\n"
                           "  def run() do\n"
                           "    Z.(1) ~> B.x\n"
                           "  end\n"
                           "end\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.span.line == 3);
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("unknown role Z"));
    }
    try {
        parse_choreography("defchor [A, B] do\n  def run() do\n    A.(1 ~> B.x\n  end\nend\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.span.line > 0);
        CHECK(!e.hint.empty()); // expected-token hint
    }
}

TEST_CASE("multi-line notify headers and comments parse") {
    ChorProgram p = parse_choreography("defchor [Alice, Bob, Carol] do\n"
                                       "  def run() do # entry\n"
                                       "    if Alice.decide(),\n"
                                       "      notify: [Bob, Carol] do\n"
                                       "      Alice.(1) ~> Bob.x   # then\n"
                                       "    else\n"
                                       "      Alice.(2) ~> Bob.x\n"
                                       "    end\n"
                                       "  end\n"
                                       "end\n");
    const Statement& s = *p.functions[0].body[0];
    REQUIRE(s.notify.has_value());
    CHECK(s.notify->size() == 2);
}

TEST_CASE("located binop continuation parses (paper notation abuse)") {
    ChorProgram p = parse_choreography("defchor [V, P] do\n"
                                       "  def run(V.rounds) do\n"
                                       "    go(V.rounds - 1, P.(:ok))\n"
                                       "  end\n"
                                       "  def go(V.r, P.(:ok)) do\n"
                                       "    V.(r)\n"
                                       "  end\n"
                                       "end\n");
    const Statement& s = *p.functions[0].body[0];
    REQUIRE(s.kind == Statement::Kind::Call);
    REQUIRE(s.args[0].kind == CallArg::Kind::Located);
    CHECK(s.args[0].expr->kind == Expr::Kind::Binop);
    CHECK(s.args[0].expr->name == "-");
}

TEST_CASE("impl modules parse with multi-expression bodies") {
    auto mods = parse_impl_modules("defimpl Alice do\n"
                                   "  def f(x) do\n"
                                   "    crash_if(x == 0)\n"
                                   "    x * 2\n"
                                   "  end\n"
                                   "  def g() do 5 end\n"
                                   "end\n");
    REQUIRE(mods.size() == 1);
    CHECK(mods[0].role == "Alice");
    REQUIRE(mods[0].functions.size() == 2);
    CHECK(mods[0].functions[0].body.size() == 2);
    CHECK(mods[0].functions[1].body.size() == 1);
}

TEST_CASE("value lists parse for CLI arguments") {
    auto vs = parse_values("true, 42, \"s\", :tag, {1, [nil]}, @two_party/1, -7");
    REQUIRE(vs.size() == 7);
    CHECK(vs[0] == Value::boolean(true));
    CHECK(vs[4] == Value::tuple({Value::integer(1), Value::list({Value::nil()})}));
    CHECK(vs[5] == Value::func("two_party", 1));
    CHECK(vs[6] == Value::integer(-7));
}

TEST_CASE("whole corpus parses") {
    for (const char* name :
         {"minimal_ckpt.chor", "minimal_ok.chor", "two_senders.chor", "bookseller.chor",
          "out_of_order.chor", "nested_ckpt.chor", "unwind_depth.chor", "pie.chor",
          "koc_notify.chor", "loop.chor", "with_pins.chor", "overload.chor",
          "higher_order2.chor", "tcp_like.chor", "zkp_round.chor", "zero_comm.chor",
          "crash_outside.chor", "deadlock.chor", "bad_branch.chor"}) {
        INFO(name);
        CHECK_NOTHROW(load_chor(name));
    }
}

TEST_CASE("mutated sources either parse or raise ParseError, never crash") {
    std::string base = slurp(corpus_dir() + "bookseller.chor");
    std::mt19937_64 rng(31337);
    int parse_errors = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::string src = base;
        for (int edits = 0; edits < 1 + static_cast<int>(rng() % 4); ++edits) {
            size_t at = rng() % src.size();
            switch (rng() % 3) {
            case 0: src[at] = static_cast<char>(32 + rng() % 95); break;
            case 1: src.erase(at, 1 + rng() % 3); break;
            default: src.insert(at, 1, static_cast<char>(32 + rng() % 95)); break;
            }
        }
        try {
            ChorProgram p = parse_choreography(src, "<fuzz>");
            (void)check_located_scope(p); // must not crash either
        } catch (const ParseError&) {
            ++parse_errors;
        }
    }
    CHECK(parse_errors > 100); // mutations mostly break the program
}

TEST_CASE("pattern variable classification") {
    // [x, ^y, x] binds x once and reads y
    ChorProgram p = parse_choreography("defchor [A, B] do\n"
                                       "  def run() do\n"
                                       "    A.make() ~> B.[x, ^y, x]\n"
                                       "  end\n"
                                       "end\n");
    const Statement& s = *p.functions[0].body[0];
    PatternVars pv = pattern_vars(*s.pattern);
    CHECK(pv.bound == std::set<std::string>{"x"});
    CHECK(pv.used == std::set<std::string>{"y"});

    PatternVars wild = pattern_vars(*make_pat_wildcard());
    CHECK(wild.bound.empty());
    CHECK(wild.used.empty());

    // {a, {^a, b}} binds a and b, reads a
    ChorProgram q = parse_choreography("defchor [A, B] do\n"
                                       "  def run() do\n"
                                       "    A.make() ~> B.{a, {^a, b}}\n"
                                       "  end\n"
                                       "end\n");
    PatternVars pv2 = pattern_vars(*q.functions[0].body[0]->pattern);
    CHECK(pv2.bound == std::set<std::string>{"a", "b"});
    CHECK(pv2.used == std::set<std::string>{"a"});
}
