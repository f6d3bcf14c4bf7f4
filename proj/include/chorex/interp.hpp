#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "chorex/ast.hpp"
#include "chorex/checks.hpp"
#include "chorex/evaluator.hpp"

namespace chorex {

struct TraceEvent {
    int t = 0;
    std::string role; // empty for session-wide events
    std::string kind;
    std::string detail;
};

struct GlobalOutcome {
    enum class Status { Ok, Aborted };
    Status status = Status::Ok;
    std::map<RoleName, Value> results;
    std::map<int, int> rescue_count; // checkpoint site -> rescue entries
    std::vector<TraceEvent> trace;
    std::string abort_reason;
    std::vector<std::pair<RoleName, FunctionSpec>> missing;

    bool ok() const { return status == Status::Ok; }
};

/// Sequential reference semantics: one environment per role, deliveries move
/// values between them, checkpoints snapshot and restore every environment.
class GlobalInterp {
public:
    GlobalInterp(const ChorProgram& prog, const ImplRegistry& impls)
        : prog_(prog), impls_(impls) {}

    GlobalOutcome run(const std::vector<Value>& args) {
        out_ = GlobalOutcome{};
        out_.missing = missing_impl_functions(prog_, impls_);
        if (!out_.missing.empty()) {
            out_.status = GlobalOutcome::Status::Aborted;
            out_.abort_reason = "missing impl function " + out_.missing.front().first + "." +
                                out_.missing.front().second.name + "/" +
                                std::to_string(out_.missing.front().second.arity);
            return std::move(out_);
        }
        const ChorFunction* entry = prog_.find_run();
        if (static_cast<int>(args.size()) != entry->arity()) {
            out_.status = GlobalOutcome::Status::Aborted;
            out_.abort_reason = "run expects " + std::to_string(entry->arity()) + " arguments";
            return std::move(out_);
        }
        std::vector<ArgValue> inputs;
        for (size_t i = 0; i < args.size(); ++i) {
            const Param& p = entry->params[i];
            if (p.kind == Param::Kind::Located)
                inputs.push_back(ArgValue{true, p.role, args[i]});
            else if (args[i].is_func())
                inputs.push_back(ArgValue{false, {}, args[i]});
            else {
                out_.status = GlobalOutcome::Status::Aborted;
                out_.abort_reason = "run argument " + std::to_string(i + 1) +
                                    " must be a function reference";
                return std::move(out_);
            }
        }
        try {
            PerRole r = call_function("run", entry->arity(), inputs);
            out_.results = r.v;
        } catch (const CrashSignal& c) {
            out_.status = GlobalOutcome::Status::Aborted;
            out_.abort_reason = "crash outside checkpoint at " + c.role + " (line " +
                                std::to_string(c.span.line) + "): " + c.reason;
        } catch (const AbortSignal& a) {
            out_.status = GlobalOutcome::Status::Aborted;
            out_.abort_reason = a.reason;
        }
        return std::move(out_);
    }

private:
    struct AbortSignal {
        std::string reason;
    };

    using Envs = std::map<RoleName, VarMap>;

    struct PerRole {
        std::map<RoleName, Value> v;
    };

    struct ArgValue {
        bool located = true;
        RoleName role;  // located only
        Value value;    // located value or funcref
    };

    struct TailCall {
        std::string name;
        int arity = 0;
        std::vector<ArgValue> inputs;
    };

    using StmtResult = std::variant<PerRole, TailCall>;

    const ChorProgram& prog_;
    const ImplRegistry& impls_;
    GlobalOutcome out_;
    int time_ = 0;

    void trace(const std::string& role, const std::string& kind, const std::string& detail = {}) {
        out_.trace.push_back(TraceEvent{time_++, role, kind, detail});
    }

    PerRole all_nil() const {
        PerRole r;
        for (const auto& role : prog_.roles) r.v[role] = Value::nil();
        return r;
    }

    Value eval_at(const RoleName& role, const Expr& e, const Envs& envs) {
        try {
            return eval_expr(e, envs.at(role), impls_.module_for(role));
        } catch (CrashSignal& c) {
            if (c.role.empty()) c.role = role;
            throw;
        }
    }

    void bind_at(const RoleName& role, const Pattern& p, const Value& v, Envs& envs) {
        try {
            match_or_crash(p, v, envs[role]);
        } catch (CrashSignal& c) {
            if (c.role.empty()) c.role = role;
            throw;
        }
    }

    std::vector<const ChorFunction*> candidates(const std::string& name, int arity) const {
        std::vector<const ChorFunction*> out;
        for (const auto& f : prog_.functions)
            if (f.name == name && f.arity() == arity) out.push_back(&f);
        return out;
    }

    static bool shape_compatible(const ChorFunction& f, const std::vector<ArgValue>& inputs) {
        for (size_t i = 0; i < inputs.size(); ++i) {
            const Param& p = f.params[i];
            if (p.kind == Param::Kind::Located) {
                if (!inputs[i].located || inputs[i].role != p.role) return false;
            } else {
                if (inputs[i].located || !inputs[i].value.is_func()) return false;
            }
        }
        return true;
    }

    /// Per-role first-match dispatch; all roles must agree on the overload.
    const ChorFunction* dispatch(const std::string& name, int arity,
                                 const std::vector<ArgValue>& inputs) {
        std::vector<const ChorFunction*> cands;
        for (const ChorFunction* f : candidates(name, arity))
            if (shape_compatible(*f, inputs)) cands.push_back(f);
        if (cands.empty())
            throw AbortSignal{"no matching definition for " + name + "/" + std::to_string(arity)};
        const ChorFunction* chosen = nullptr;
        for (const auto& role : prog_.roles) {
            const ChorFunction* pick = nullptr;
            for (const ChorFunction* f : cands) {
                VarMap scratch;
                bool all = true;
                for (size_t i = 0; i < inputs.size(); ++i) {
                    const Param& p = f->params[i];
                    if (p.kind != Param::Kind::Located || p.role != role) continue;
                    if (!match_pattern(*p.pattern, inputs[i].value, scratch)) {
                        all = false;
                        break;
                    }
                }
                if (all) {
                    pick = f;
                    break;
                }
            }
            if (!pick) {
                CrashSignal c{"no function clause matching " + name + "/" + std::to_string(arity),
                              {}, {}};
                c.role = role;
                throw c;
            }
            if (chosen && pick != chosen)
                throw AbortSignal{"overload dispatch disagreement for " + name + "/" +
                                  std::to_string(arity)};
            chosen = pick;
        }
        return chosen;
    }

    PerRole call_function(std::string name, int arity, std::vector<ArgValue> inputs) {
        while (true) {
            const ChorFunction* fn = dispatch(name, arity, inputs);
            Envs envs;
            for (const auto& role : prog_.roles) envs[role] = {};
            for (size_t i = 0; i < inputs.size(); ++i) {
                const Param& p = fn->params[i];
                if (p.kind == Param::Kind::Located)
                    bind_at(p.role, *p.pattern, inputs[i].value, envs);
                else
                    for (const auto& role : prog_.roles) envs[role][p.name] = inputs[i].value;
            }
            StmtResult r = eval_stmts(fn->body, envs, true);
            if (std::holds_alternative<PerRole>(r)) return std::get<PerRole>(std::move(r));
            TailCall tc = std::get<TailCall>(std::move(r));
            name = std::move(tc.name);
            arity = tc.arity;
            inputs = std::move(tc.inputs);
        }
    }

    std::vector<ArgValue> build_inputs(const Statement& call, Envs& envs) {
        std::vector<ArgValue> inputs;
        for (const auto& a : call.args) {
            switch (a.kind) {
            case CallArg::Kind::Located:
                inputs.push_back(ArgValue{true, a.role, eval_at(a.role, *a.expr, envs)});
                break;
            case CallArg::Kind::FuncRefLit:
                inputs.push_back(ArgValue{false, {}, Value::func(a.fname, a.arity)});
                break;
            case CallArg::Kind::FuncParam:
                inputs.push_back(ArgValue{false, {}, read_shared(a.fname, envs)});
                break;
            }
        }
        return inputs;
    }

    /// Function-valued bindings exist at every role and must agree.
    Value read_shared(const std::string& name, const Envs& envs) {
        const Value* first = nullptr;
        for (const auto& role : prog_.roles) {
            auto it = envs.at(role).find(name);
            if (it == envs.at(role).end())
                throw AbortSignal{"function-valued binding " + name + " is unbound"};
            if (!first)
                first = &it->second;
            else if (!(*first == it->second))
                throw AbortSignal{"roles disagree on function-valued binding " + name};
        }
        if (!first->is_func()) {
            CrashSignal c{"called value is not a function: " + to_text(*first), {}, {}};
            throw c;
        }
        return *first;
    }

    TailCall make_call(const Statement& s, Envs& envs) {
        if (s.indirect) {
            Value f = read_shared(s.fname, envs);
            if (f.as_func().arity != static_cast<int>(s.args.size()))
                throw AbortSignal{"arity mismatch calling " + to_text(f)};
            return TailCall{f.as_func().name, f.as_func().arity, build_inputs(s, envs)};
        }
        return TailCall{s.fname, static_cast<int>(s.args.size()), build_inputs(s, envs)};
    }

    StmtResult eval_stmts(const StmtList& stmts, Envs& envs, bool tail) {
        if (stmts.empty()) return all_nil();
        for (size_t i = 0; i + 1 < stmts.size(); ++i) eval_stmt(*stmts[i], envs);
        if (tail) return eval_stmt_tail(*stmts.back(), envs);
        return eval_stmt(*stmts.back(), envs);
    }

    StmtResult eval_stmt_tail(const Statement& s, Envs& envs) {
        switch (s.kind) {
        case Statement::Kind::Call:
            return make_call(s, envs);
        case Statement::Kind::If: {
            Value c = eval_at(s.decider, *s.expr, envs);
            bool taken = truthy(c);
            trace(s.decider, "choice", std::to_string(s.site) + (taken ? " then" : " else"));
            return eval_stmts(taken ? s.then_branch : s.else_branch, envs, true);
        }
        case Statement::Kind::With: {
            eval_with_header(s, envs);
            return eval_stmts(s.rest, envs, true);
        }
        default:
            return eval_stmt(s, envs);
        }
    }

    void eval_with_header(const Statement& s, Envs& envs) {
        Value v;
        if (s.with_call) {
            TailCall tc = make_call(*s.with_call, envs);
            PerRole r = call_function(tc.name, tc.arity, std::move(tc.inputs));
            // every role binds its own view of the call's result
            for (const auto& role : prog_.roles)
                if (role == s.role) bind_at(role, *s.pattern, r.v[role], envs);
            return;
        }
        v = eval_at(s.role, *s.expr, envs);
        bind_at(s.role, *s.pattern, v, envs);
    }

    PerRole eval_stmt(const Statement& s, Envs& envs) {
        switch (s.kind) {
        case Statement::Kind::Delivery: {
            Value v = eval_at(s.sender, *s.expr, envs);
            trace(s.sender, "send", std::to_string(s.site));
            bind_at(s.receiver, *s.pattern, v, envs);
            trace(s.receiver, "recv", std::to_string(s.site));
            PerRole r = all_nil();
            r.v[s.receiver] = v;
            return r;
        }
        case Statement::Kind::LocalExpr: {
            Value v = eval_at(s.role, *s.expr, envs);
            PerRole r = all_nil();
            r.v[s.role] = v;
            return r;
        }
        case Statement::Kind::If: {
            Value c = eval_at(s.decider, *s.expr, envs);
            bool taken = truthy(c);
            trace(s.decider, "choice", std::to_string(s.site) + (taken ? " then" : " else"));
            StmtResult r = eval_stmts(taken ? s.then_branch : s.else_branch, envs, false);
            return std::get<PerRole>(std::move(r));
        }
        case Statement::Kind::Checkpoint: {
            Envs snapshot = envs;
            for (const auto& role : prog_.roles) trace(role, "ckpt-enter", std::to_string(s.site));
            PerRole result;
            try {
                result = std::get<PerRole>(eval_stmts(s.body, envs, false));
            } catch (const CrashSignal& c) {
                trace(c.role, "crash", c.reason);
                envs = snapshot;
                ++out_.rescue_count[s.site];
                for (const auto& role : prog_.roles)
                    trace(role, "rescue-enter", std::to_string(s.site));
                try {
                    result = std::get<PerRole>(eval_stmts(s.rescue, envs, false));
                } catch (const CrashSignal& rc) {
                    throw AbortSignal{"crash inside rescue at " + rc.role + ": " + rc.reason};
                }
            }
            trace("", "barrier", std::to_string(s.site));
            return result;
        }
        case Statement::Kind::With: {
            eval_with_header(s, envs);
            return std::get<PerRole>(eval_stmts(s.rest, envs, false));
        }
        case Statement::Kind::Call: {
            TailCall tc = make_call(s, envs);
            return call_function(tc.name, tc.arity, std::move(tc.inputs));
        }
        }
        return all_nil();
    }
};

inline GlobalOutcome eval_global(const ChorProgram& prog, const std::vector<Value>& args,
                                 const ImplRegistry& impls) {
    GlobalInterp interp(prog, impls);
    return interp.run(args);
}

} // namespace chorex
