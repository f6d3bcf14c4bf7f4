#include <catch2/catch_amalgamated.hpp>

#include "chorex/bench.hpp"

using namespace chorex;

TEST_CASE("bench programs parse, run, and report") {
    for (const char* name : {"flat", "nest", "ckpt-demo"}) {
        INFO(name);
        BenchReport plain = run_benchmark(name, 20, "plain", 1);
        CHECK(plain.recoveries == 0);
        CHECK(plain.monitor_peak_frames == 0);

        BenchReport chk = run_benchmark(name, 20, "chk", 1);
        CHECK(chk.recoveries == 0);
        CHECK(chk.results_match_plain); // checkpointing must not change results

        BenchReport rescue = run_benchmark(name, 20, "chk-rescue", 1);
        CHECK(rescue.recoveries > 0);
    }
}

TEST_CASE("unknown benchmark or variant is rejected") {
    CHECK_THROWS(run_benchmark("warp", 10, "plain", 0));
    CHECK_THROWS(run_benchmark("flat", 10, "fast", 0));
}

TEST_CASE("delta mode bounds nested checkpoint storage; full copies blow up") {
    BenchReport with_deltas = run_benchmark("nest", 100, "chk", 2, true);
    BenchReport without = run_benchmark("nest", 100, "chk", 2, false);
    CHECK(with_deltas.monitor_peak_frames <= 4u * 100u);
    CHECK(without.monitor_peak_frames > 50u * 100u);
    CHECK(with_deltas.result == without.result); // storage mode is invisible
}
