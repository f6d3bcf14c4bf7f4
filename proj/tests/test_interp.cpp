#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace chorex;
using namespace chorex::test;

TEST_CASE("local expression evaluation basics") {
    VarMap vars;
    ImplModule* no_impl = nullptr;

    auto eval_src = [&](const std::string& s) {
        ChorProgram p = parse_choreography("defchor [A] do\n  def run() do\n    A.(" + s +
                                           ")\n  end\nend\n");
        return eval_expr(*p.functions[0].body[0]->expr, vars, no_impl);
    };

    CHECK(eval_src("2 + 2") == Value::integer(4));
    CHECK(eval_src("7 / 2") == Value::integer(3));
    CHECK(eval_src("7 rem 2") == Value::integer(1));
    CHECK(eval_src("rem(7, 2)") == Value::integer(1));
    CHECK(eval_src("\"a\" <> \"b\"") == Value::str("ab"));
    CHECK(eval_src("1 < 2") == Value::boolean(true));
    CHECK(eval_src("{1, 2} == {1, 2}") == Value::boolean(true));
    CHECK(eval_src("str(42)") == Value::str("42"));
    CHECK(eval_src("len([1, 2, 3])") == Value::integer(3));
    CHECK(eval_src("hash64(\"\")") == Value::integer(static_cast<std::int64_t>(0xcbf29ce484222325ull)));
    CHECK(eval_src("crash_if(false)") == Value::nil());

    CHECK_THROWS_AS(eval_src("1 / 0"), CrashSignal);
    CHECK_THROWS_AS(eval_src("1 rem 0"), CrashSignal);
    CHECK_THROWS_AS(eval_src("1 + \"x\""), CrashSignal);
    CHECK_THROWS_AS(eval_src("crash_if(true)"), CrashSignal);
    CHECK_THROWS_AS(eval_src("nope(1)"), CrashSignal);
}

TEST_CASE("runaway impl recursion crashes instead of exhausting the stack") {
    ChorProgram p = parse_choreography("defchor [A, B] do\n"
                                       "  def run() do\n"
                                       "    A.(inf(1)) ~> B.x\n"
                                       "  end\n"
                                       "end\n");
    ImplRegistry impls;
    impls.modules = parse_impl_modules("defimpl A do\n  def inf(x) do\n    inf(x)\n  end\nend\n");
    GlobalOutcome out = eval_global(p, {}, impls);
    CHECK(!out.ok());
    CHECK_THAT(out.abort_reason, Catch::Matchers::ContainsSubstring("depth"));
}

TEST_CASE("minimal example without crash: Alice gets 8") {
    ChorProgram p = load_chor("minimal_ok.chor");
    ImplRegistry impls = load_impls("minimal.chim");
    GlobalOutcome out = eval_global(p, {}, impls);
    REQUIRE(out.ok());
    CHECK(out.results.at("Alice") == Value::integer(8));
    CHECK(out.results.at("Bob") == Value::nil());
    CHECK(out.rescue_count.empty());
}

TEST_CASE("minimal example with division crash: rescue runs once, Alice still gets 8") {
    ChorProgram p = load_chor("minimal_ckpt.chor");
    ImplRegistry impls = load_impls("minimal.chim");
    GlobalOutcome out = eval_global(p, {}, impls);
    REQUIRE(out.ok());
    CHECK(out.results.at("Alice") == Value::integer(8));
    CHECK(out.results.at("Bob") == Value::nil());
    CHECK(out.rescue_count.size() == 1);
    CHECK(out.rescue_count.begin()->second == 1);

    bool saw_crash = false, saw_rescue = false;
    for (const auto& e : out.trace) {
        if (e.kind == "crash") saw_crash = true;
        if (e.kind == "rescue-enter") saw_rescue = true;
    }
    CHECK(saw_crash);
    CHECK(saw_rescue);
}

TEST_CASE("bookseller two-party and one-party paths") {
    ChorProgram p = load_chor("bookseller.chor");
    ImplRegistry impls = load_impls("bookseller.chim");

    GlobalOutcome two = eval_global(p, {Value::boolean(true)}, impls);
    REQUIRE(two.ok());
    CHECK(two.results.at("Buyer") ==
          Value::tuple({Value::atom("delivery"), Value::str("ttaotd"), Value::str("123 Elm St")}));

    GlobalOutcome one = eval_global(p, {Value::boolean(false)}, impls);
    REQUIRE(one.ok());
    CHECK(one.results.at("Buyer") == Value::nil());
}

TEST_CASE("eval_global rollback restores every role environment") {
    // At rescue entry Q's a binding must be back even though the body rebound it.
    ChorProgram p = parse_choreography("defchor [P, Q] do\n"
                                       "  def run() do\n"
                                       "    P.(1) ~> Q.a\n"
                                       "    checkpoint do\n"
                                       "      P.(2) ~> Q.a\n"
                                       "      Q.boom(a) ~> P.x\n"
                                       "    rescue\n"
                                       "      Q.(a) ~> P.x\n"
                                       "      P.(x)\n"
                                       "    end\n"
                                       "  end\n"
                                       "end\n");
    ImplRegistry impls;
    impls.modules = parse_impl_modules("defimpl Q do\n  def boom(a) do\n    crash_if(a == 2)\n"
                                       "    a\n  end\nend\n");
    GlobalOutcome out = eval_global(p, {}, impls);
    REQUIRE(out.ok());
    CHECK(out.results.at("P") == Value::integer(1)); // rescue saw the entry value of a
}

TEST_CASE("crash outside checkpoint aborts") {
    ChorProgram p = load_chor("crash_outside.chor");
    ImplRegistry impls;
    GlobalOutcome out = eval_global(p, {}, impls);
    CHECK(!out.ok());
    CHECK_THAT(out.abort_reason, Catch::Matchers::ContainsSubstring("crash outside checkpoint"));
    CHECK_THAT(out.abort_reason, Catch::Matchers::ContainsSubstring("division by zero"));
}

TEST_CASE("crash inside rescue aborts the session") {
    ChorProgram p = parse_choreography("defchor [A, B] do\n"
                                       "  def run() do\n"
                                       "    checkpoint do\n"
                                       "      A.(1 / 0) ~> B.x\n"
                                       "    rescue\n"
                                       "      A.(2 / 0) ~> B.x\n"
                                       "    end\n"
                                       "  end\n"
                                       "end\n");
    ImplRegistry impls;
    GlobalOutcome out = eval_global(p, {}, impls);
    CHECK(!out.ok());
    CHECK_THAT(out.abort_reason, Catch::Matchers::ContainsSubstring("rescue"));
}

TEST_CASE("missing impl function is reported before evaluation") {
    ChorProgram p = load_chor("pie.chor");
    ImplRegistry impls; // empty
    GlobalOutcome out = eval_global(p, {}, impls);
    CHECK(!out.ok());
    REQUIRE(!out.missing.empty());
    CHECK_THAT(out.abort_reason, Catch::Matchers::ContainsSubstring("missing impl function"));
}

TEST_CASE("higher-order calls, overloads, loops, pins evaluate") {
    {
        Compiled c = compile_corpus("higher_order2.chor");
        GlobalOutcome out = eval_global(c.prog, {Value::integer(3)}, c.impls);
        REQUIRE(out.ok());
        CHECK(out.results.at("B") == Value::integer(80));
    }
    {
        Compiled c = compile_corpus("overload.chor", "overload.chim");
        GlobalOutcome reg = eval_global(c.prog, {Value::atom("register")}, c.impls);
        REQUIRE(reg.ok());
        CHECK(reg.results.at("Client") == Value::tuple({Value::atom("stored"), Value::str("r")}));
        GlobalOutcome login = eval_global(c.prog, {Value::atom("login")}, c.impls);
        REQUIRE(login.ok());
        CHECK(login.results.at("Client") == Value::tuple({Value::atom("ok"), Value::str("l")}));
    }
    {
        Compiled c = compile_corpus("loop.chor", "loop.chim");
        GlobalOutcome out = eval_global(c.prog, {}, c.impls);
        REQUIRE(out.ok());
        CHECK(out.results.at("Q") == Value::integer(10));
    }
    {
        Compiled c = compile_corpus("with_pins.chor", "with_pins.chim");
        GlobalOutcome out = eval_global(c.prog, {}, c.impls);
        REQUIRE(out.ok());
        CHECK(out.results.at("A") == Value::integer(15));
    }
    {
        Compiled c = compile_corpus("tcp_like.chor", "tcp_like.chim");
        GlobalOutcome out = eval_global(c.prog, {Value::str("sck")}, c.impls);
        REQUIRE(out.ok());
        CHECK(out.results.at("Handler") == Value::integer(12));
    }
    {
        Compiled c = compile_corpus("zkp_round.chor", "zkp_round.chim");
        GlobalOutcome out = eval_global(c.prog, {Value::integer(2)}, c.impls);
        REQUIRE(out.ok());
        CHECK(out.results.at("Verifier") == Value::atom("accept"));
    }
}

TEST_CASE("deep tail recursion does not overflow") {
    ChorProgram p = parse_choreography("defchor [P, Q] do\n"
                                       "  def run() do\n"
                                       "    down(P.(100000))\n"
                                       "  end\n"
                                       "  def down(P.n) do\n"
                                       "    if P.(n == 0) do\n"
                                       "      P.(:done)\n"
                                       "    else\n"
                                       "      down(P.(n - 1))\n"
                                       "    end\n"
                                       "  end\n"
                                       "end\n");
    ImplRegistry impls;
    GlobalOutcome out = eval_global(p, {}, impls);
    REQUIRE(out.ok());
    CHECK(out.results.at("P") == Value::atom("done"));
}

TEST_CASE("determinism: eval_global is a pure function of its inputs") {
    Compiled c = compile_corpus("bookseller.chor", "bookseller.chim");
    GlobalOutcome a = eval_global(c.prog, {Value::boolean(true)}, c.impls);
    GlobalOutcome b = eval_global(c.prog, {Value::boolean(true)}, c.impls);
    CHECK(a.results == b.results);
    CHECK(a.trace.size() == b.trace.size());
}
