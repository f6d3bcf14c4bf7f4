#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "chorex/bench.hpp"
#include "chorex/chorex.hpp"

using namespace chorex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

std::string slurp_or_exit(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        std::exit(kExitUsage);
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Checked {
    ChorProgram prog;
    bool ok = false;
};

/// Parse + scope + knowledge-of-choice. Prints diagnostics; on success the
/// program is safe to project.
Checked check_file(const std::string& path) {
    std::string src = slurp_or_exit(path);
    Checked out;
    try {
        out.prog = parse_choreography(src, path);
    } catch (const ParseError& e) {
        ChorProgram shell;
        shell.file = path;
        Lexer lex(src, path);
        shell.source_lines = lex.source_lines();
        std::cout << render_source_error(shell, e.what(), e.span,
                                         e.hint.empty() ? "" : "expected " + e.hint);
        return out;
    }
    auto scope_errors = check_located_scope(out.prog);
    for (const auto& e : scope_errors) std::cout << render_scope_error(out.prog, e);
    if (!scope_errors.empty()) return out;

    auto koc_errors = check_knowledge_of_choice(out.prog);
    for (const auto& e : koc_errors)
        std::cout << render_source_error(
            out.prog,
            "Branches differ for actor " + e.role + "; `if` block needs to notify", e.if_span,
            "");
    if (!koc_errors.empty()) return out;
    out.ok = true;
    return out;
}

int cmd_check(const std::string& path, bool interfaces) {
    Checked c = check_file(path);
    if (!c.ok) return kExitCheckFailed;
    std::cout << "ok: " << c.prog.roles.size() << " roles, " << c.prog.functions.size()
              << " functions\n";
    if (interfaces) {
        for (const auto& role : c.prog.roles) {
            std::cout << role << ":\n";
            for (const auto& spec : required_functions(c.prog, role))
                std::cout << "  " << spec.name << "/" << spec.arity << "\n";
        }
    }
    return kExitOk;
}

int cmd_project(const std::string& path, const std::string& role) {
    Checked c = check_file(path);
    if (!c.ok) return kExitCheckFailed;
    if (!role.empty() && !c.prog.has_role(role)) {
        std::cerr << "error: unknown role " << role << "\n";
        return kExitUsage;
    }
    bool first = true;
    for (const auto& r : c.prog.roles) {
        if (!role.empty() && r != role) continue;
        if (!first) std::cout << "\n";
        std::cout << print_endpoint(project(c.prog, r));
        first = false;
    }
    return kExitOk;
}

void write_trace(const std::string& path, const SessionResult& r) {
    std::ofstream out(path, std::ios::binary);
    for (const auto& e : r.trace) {
        nlohmann::json j{{"t", e.t}, {"role", e.role}, {"kind", e.kind}, {"detail", e.detail}};
        out << j.dump() << "\n";
    }
}

int cmd_run(const std::string& path, const std::string& impl_path, const std::string& args_text,
            std::uint64_t seed, const std::string& transport, const std::string& trace_path) {
    Checked c = check_file(path);
    if (!c.ok) return kExitCheckFailed;
    if (transport != "mem" && transport != "tcp") {
        std::cerr << "error: --transport must be mem or tcp\n";
        return kExitUsage;
    }

    ImplRegistry impls;
    if (!impl_path.empty()) {
        try {
            impls.modules = parse_impl_modules(slurp_or_exit(impl_path), impl_path);
        } catch (const ParseError& e) {
            std::cerr << impl_path << ":" << e.span.line << ": " << e.what() << "\n";
            return kExitCheckFailed;
        }
    }
    std::vector<Value> args;
    try {
        args = parse_values(args_text);
    } catch (const ParseError& e) {
        std::cerr << "error: bad --args: " << e.what() << "\n";
        return kExitUsage;
    }

    auto missing = missing_impl_functions(c.prog, impls);
    if (!missing.empty()) {
        for (const auto& [role, spec] : missing)
            std::cerr << "error: missing impl function " << role << "." << spec.name << "/"
                      << spec.arity << "\n";
        return kExitCheckFailed;
    }

    EndpointMap endpoints = project_all(c.prog);
    SessionOptions opts;
    opts.seed = seed;
    opts.use_tcp = transport == "tcp";
    opts.collect_trace = !trace_path.empty();
    Session session(c.prog.roles, endpoints, impls, args, opts);
    SessionResult r = session.run();
    if (!trace_path.empty()) write_trace(trace_path, r);

    if (r.status == SessionResult::Status::Aborted) {
        std::cerr << "session aborted: " << r.abort_reason << "\n";
        return kExitCheckFailed;
    }
    if (r.status == SessionResult::Status::Timeout) {
        std::cerr << "session timed out\n";
        return kExitCheckFailed;
    }
    for (const auto& role : c.prog.roles) std::cout << role << ": " << to_text(r.results.at(role)) << "\n";
    std::cout << "recoveries: " << r.recoveries << "\n";
    return kExitOk;
}

int cmd_bench(const std::string& name, int iters, const std::string& variant, std::uint64_t seed,
              bool no_deltas) {
    try {
        BenchReport r = run_benchmark(name, iters, variant, seed, !no_deltas);
        std::cout << "bench: " << r.name << "\n";
        std::cout << "variant: " << r.variant << "\n";
        std::cout << "iterations: " << r.iterations << "\n";
        std::cout << "wall_ms: " << r.wall_ms << "\n";
        if (r.variant != "plain") {
            std::cout << "plain_wall_ms: " << r.plain_wall_ms << "\n";
            std::cout << "ratio_vs_plain: " << r.ratio_vs_plain << "\n";
            std::cout << "results_match_plain: " << (r.results_match_plain ? "true" : "false")
                      << "\n";
        }
        std::cout << "recoveries: " << r.recoveries << "\n";
        std::cout << "monitor_peak_frames: " << r.monitor_peak_frames << "\n";
        std::cout << "steps: " << r.steps << "\n";
        std::cout << "result: " << to_text(r.result) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chorex: choreography checker, projector, and runtime"};
    app.require_subcommand(1);

    std::string file, impl_path, args_text, role, transport = "mem", trace_path;
    std::string bench_name, variant = "plain";
    std::uint64_t seed = 0;
    int iters = 1000;
    bool interfaces = false, no_deltas = false;

    CLI::App* check = app.add_subcommand("check", "parse and statically check a choreography");
    check->add_option("file", file)->required();
    check->add_flag("--interfaces", interfaces, "print required functions per role");

    CLI::App* proj = app.add_subcommand("project", "print per-role endpoint programs");
    proj->add_option("file", file)->required();
    proj->add_option("--role", role, "project a single role");

    CLI::App* run = app.add_subcommand("run", "run a choreography");
    run->add_option("file", file)->required();
    run->add_option("--impl", impl_path, "impl module file (.chim)");
    run->add_option("--args", args_text, "comma-separated run arguments");
    run->add_option("--seed", seed, "scheduler seed");
    run->add_option("--transport", transport, "mem or tcp");
    run->add_option("--trace", trace_path, "write a JSON-lines event trace");

    CLI::App* bench = app.add_subcommand("bench", "run a generated microbenchmark");
    bench->add_option("name", bench_name, "flat, nest, or ckpt-demo")->required();
    bench->add_option("--iters", iters, "iteration count / depth");
    bench->add_option("--variant", variant, "plain, chk, or chk-rescue");
    bench->add_option("--seed", seed, "scheduler seed");
    bench->add_flag("--no-deltas", no_deltas, "store full checkpoint snapshots in the monitor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (check->parsed()) return cmd_check(file, interfaces);
        if (proj->parsed()) return cmd_project(file, role);
        if (run->parsed())
            return cmd_run(file, impl_path, args_text, seed, transport, trace_path);
        if (bench->parsed()) return cmd_bench(bench_name, iters, variant, seed, no_deltas);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
