#pragma once

#include <chrono>
#include <sstream>
#include <stdexcept>
#include <string>

#include "chorex/parser.hpp"
#include "chorex/session.hpp"

namespace chorex {

/// Microbenchmark harness. Programs are generated from a parameterized
/// template so that desk-scale runs and large runs share one code path.
/// Variants: plain (no checkpoints), chk (checkpoints, no crashes), and
/// chk-rescue (deterministic crashes driven by the iteration counter).
struct BenchReport {
    std::string name;
    std::string variant;
    int iterations = 0;
    double wall_ms = 0;
    double plain_wall_ms = 0;   // same-machine baseline, 0 when variant == plain
    double ratio_vs_plain = 0;  // wall_ms / plain_wall_ms
    int recoveries = 0;
    std::size_t monitor_peak_frames = 0;
    bool results_match_plain = true; // checkpoints must not change semantics
    Value result;
    long steps = 0;
};

namespace bench_detail {

// Nested hashing gives each iteration measurable local work.
inline std::string hash_chain(std::string inner, int depth) {
    for (int i = 0; i < depth; ++i) inner = "hash64(" + inner + ")";
    return inner;
}

inline std::string flat_source(int k, bool chk) {
    std::ostringstream os;
    os << "defchor [Prime, Echo] do\n";
    os << "  def run() do\n    loop(Prime.({0, 0}))\n  end\n";
    os << "  def loop(Prime.{i, acc}) do\n";
    os << "    if Prime.(i < " << k << ") do\n";
    os << "      with Prime.acc2 <- mix(i, acc) do\n";
    if (chk) {
        os << "        checkpoint do\n";
        os << "          Prime.step(i, acc2) ~> Echo.x\n";
        os << "          Echo.echo(x) ~> Prime.y\n";
        os << "          Prime.sink(y)\n";
        os << "        rescue\n";
        os << "          Prime.step_safe(i, acc2) ~> Echo.x\n";
        os << "          Echo.echo(x) ~> Prime.y\n";
        os << "          Prime.sink(y)\n";
        os << "        end\n";
    } else {
        os << "        Prime.step(i, acc2) ~> Echo.x\n";
        os << "        Echo.echo(x) ~> Prime.y\n";
        os << "        Prime.sink(y)\n";
    }
    os << "        loop(Prime.({i + 1, acc2}))\n";
    os << "      end\n";
    os << "    else\n";
    os << "      Prime.(acc)\n";
    os << "    end\n";
    os << "  end\n";
    os << "end\n";
    return os.str();
}

inline std::string flat_impls(bool crash, int k) {
    int period = std::max(2, k / 20); // 20 deterministic crashes per run
    const int work = 32;              // hash rounds per local function
    std::ostringstream os;
    os << "defimpl Prime do\n";
    os << "  def mix(i, acc) do\n    " << hash_chain("{i, acc}", work) << "\n  end\n";
    os << "  def step(i, acc) do\n";
    if (crash) os << "    crash_if(rem(i, " << period << ") == " << period / 2 << ")\n";
    os << "    " << hash_chain("{acc, i}", work) << "\n  end\n";
    os << "  def step_safe(i, acc) do\n    " << hash_chain("{acc, i}", work) << "\n  end\n";
    os << "  def sink(y) do\n    y\n  end\n";
    os << "end\n";
    os << "defimpl Echo do\n";
    os << "  def echo(x) do\n    " << hash_chain("{x, 1}", work) << "\n  end\n";
    os << "end\n";
    return os.str();
}

inline std::string nest_source(int k, bool chk) {
    std::ostringstream os;
    os << "defchor [Prime, Echo] do\n";
    os << "  def run() do\n    nest(Prime.(0))\n  end\n";
    os << "  def nest(Prime.i) do\n";
    os << "    if Prime.(i < " << k << ") do\n";
    if (chk) {
        os << "      checkpoint do\n";
        os << "        Prime.step(i, i) ~> Echo.x\n";
        os << "        Echo.echo(x) ~> Prime.y\n";
        os << "        nest(Prime.(i + 1))\n";
        os << "      rescue\n";
        os << "        Prime.(:recovered)\n";
        os << "      end\n";
    } else {
        os << "      Prime.step(i, i) ~> Echo.x\n";
        os << "      Echo.echo(x) ~> Prime.y\n";
        os << "      nest(Prime.(i + 1))\n";
    }
    os << "    else\n";
    os << "      Prime.(:bottom)\n";
    os << "    end\n";
    os << "  end\n";
    os << "end\n";
    return os.str();
}

inline std::string nest_impls(bool crash, int k) {
    std::ostringstream os;
    os << "defimpl Prime do\n";
    os << "  def step(i, acc) do\n";
    if (crash) os << "    crash_if(i == " << k - 1 << ")\n";
    os << "    hash64({acc, i})\n  end\n";
    os << "end\n";
    os << "defimpl Echo do\n";
    os << "  def echo(x) do\n    hash64({x, 1})\n  end\n";
    os << "end\n";
    return os.str();
}

inline std::string ckpt_demo_source(int k, bool chk) {
    std::ostringstream os;
    os << "defchor [Prime, Echo] do\n";
    os << "  def run() do\n    loop(Prime.({0, \"seed\"}))\n  end\n";
    os << "  def loop(Prime.{i, payload}) do\n";
    os << "    if Prime.(i < " << k << ") do\n";
    os << "      with Prime.p2 <- extend(payload, i) do\n";
    if (chk) {
        os << "        checkpoint do\n";
        os << "          Prime.guard(p2, i) ~> Echo.blob\n";
        os << "          Echo.digest(blob) ~> Prime.d\n";
        os << "          Prime.sink(d)\n";
        os << "        rescue\n";
        os << "          Prime.(p2) ~> Echo.blob\n";
        os << "          Echo.digest(blob) ~> Prime.d\n";
        os << "          Prime.sink(d)\n";
        os << "        end\n";
    } else {
        os << "        Prime.guard(p2, i) ~> Echo.blob\n";
        os << "        Echo.digest(blob) ~> Prime.d\n";
        os << "        Prime.sink(d)\n";
    }
    os << "        loop(Prime.({i + 1, p2}))\n";
    os << "      end\n";
    os << "    else\n";
    os << "      Prime.(hash64(payload))\n";
    os << "    end\n";
    os << "  end\n";
    os << "end\n";
    return os.str();
}

inline std::string ckpt_demo_impls(bool crash, int k) {
    int period = std::max(2, k / 5);
    std::ostringstream os;
    os << "defimpl Prime do\n";
    os << "  def extend(p, i) do\n    str(hash64({p, i})) <> \"-\" <> str(i)\n  end\n";
    os << "  def guard(p, i) do\n";
    if (crash) os << "    crash_if(rem(i, " << period << ") == " << period / 2 << ")\n";
    os << "    p\n  end\n";
    os << "  def sink(d) do\n    d\n  end\n";
    os << "end\n";
    os << "defimpl Echo do\n";
    os << "  def digest(b) do\n    hash64(b)\n  end\n";
    os << "end\n";
    return os.str();
}

struct BenchProgram {
    std::string chor;
    std::string impls;
};

inline BenchProgram generate(const std::string& name, int iters, const std::string& variant) {
    bool chk = variant != "plain";
    bool crash = variant == "chk-rescue";
    if (name == "flat") return {flat_source(iters, chk), flat_impls(crash, iters)};
    if (name == "nest") return {nest_source(iters, chk), nest_impls(crash, iters)};
    if (name == "ckpt-demo") return {ckpt_demo_source(iters, chk), ckpt_demo_impls(crash, iters)};
    throw std::runtime_error("unknown benchmark " + name + " (flat, nest, ckpt-demo)");
}

struct RunOutcome {
    double wall_ms = 0;
    SessionResult result;
};

inline RunOutcome run_once(const BenchProgram& bp, std::uint64_t seed, bool deltas_enabled) {
    ChorProgram prog = parse_choreography(bp.chor, "<bench>");
    EndpointMap endpoints = project_all(prog);
    ImplRegistry impls;
    impls.modules = parse_impl_modules(bp.impls, "<bench-impls>");
    SessionOptions opts;
    opts.seed = seed;
    opts.deltas_enabled = deltas_enabled;
    opts.timeout_ms = 300'000;
    auto t0 = std::chrono::steady_clock::now();
    SessionResult r = run_session(prog.roles, endpoints, impls, {}, opts);
    auto t1 = std::chrono::steady_clock::now();
    if (!r.ok())
        throw std::runtime_error("bench run failed: " +
                                 (r.abort_reason.empty() ? "timeout" : r.abort_reason));
    return RunOutcome{std::chrono::duration<double, std::milli>(t1 - t0).count(), std::move(r)};
}

} // namespace bench_detail

inline BenchReport run_benchmark(const std::string& name, int iters, const std::string& variant,
                                 std::uint64_t seed, bool deltas_enabled = true) {
    if (variant != "plain" && variant != "chk" && variant != "chk-rescue")
        throw std::runtime_error("unknown variant " + variant + " (plain, chk, chk-rescue)");

    BenchReport report;
    report.name = name;
    report.variant = variant;
    report.iterations = iters;

    bench_detail::BenchProgram bp = bench_detail::generate(name, iters, variant);
    bench_detail::RunOutcome main = bench_detail::run_once(bp, seed, deltas_enabled);
    report.wall_ms = main.wall_ms;
    report.recoveries = main.result.recoveries;
    report.monitor_peak_frames = main.result.monitor_peak_frames;
    report.result = main.result.results.at("Prime");
    report.steps = main.result.steps;

    if (variant != "plain") {
        bench_detail::BenchProgram plain = bench_detail::generate(name, iters, "plain");
        bench_detail::RunOutcome base = bench_detail::run_once(plain, seed, deltas_enabled);
        report.plain_wall_ms = base.wall_ms;
        report.ratio_vs_plain = base.wall_ms > 0 ? main.wall_ms / base.wall_ms : 0;
        if (variant == "chk")
            report.results_match_plain = main.result.results == base.result.results;
    }
    return report;
}

} // namespace chorex
