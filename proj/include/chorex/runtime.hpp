#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>

#include "chorex/evaluator.hpp"
#include "chorex/message.hpp"
#include "chorex/projection.hpp"
#include "chorex/stack.hpp"

namespace chorex {

/// Externally visible outputs of running handler blocks. The session wires
/// these to the transport, the monitor, and the caller.
struct EffectSink {
    virtual ~EffectSink() = default;
    virtual void effect_send(const Address& from, const Address& to, Message m) = 0;
    virtual void effect_checkpoint(const RoleName& role, const CkptInstance& inst,
                                   const Snapshot& snap, int epoch) = 0;
    virtual void effect_done(const RoleName& role, const CkptInstance& inst, int epoch) = 0;
    virtual void effect_crash(const RoleName& role, const CrashSignal& c) = 0;
    virtual void effect_finish(const RoleName& role, const Value& v) = 0;
    virtual void effect_rescue_entry(const RoleName& role, const CkptInstance& inst,
                                     const VarMap& vars) = 0;
    virtual void effect_trace(const RoleName& role, const std::string& kind,
                              const std::string& detail) = 0;
    virtual void effect_abort(const std::string& reason) = 0;
};

/// One choreography actor: inbox, control stack, variables, session token,
/// network config, impl reference, plus the continuation it is parked on.
class Actor {
public:
    Actor(RoleName role, Address addr, std::shared_ptr<const EndpointProgram> program,
          const ImplModule* impl, SessionToken session, NetworkConfig config)
        : role_(std::move(role)), addr_(addr), program_(std::move(program)), impl_(impl),
          session_(session), config_(std::move(config)) {
        current_ = program_->entry;
    }

    const RoleName& role() const { return role_; }
    const Address& address() const { return addr_; }
    bool finished() const { return finished_; }
    bool crashed() const { return crashed_; }
    bool halted() const { return halted_; }
    int epoch() const { return epoch_; }
    int drops_foreign() const { return drops_foreign_; }
    int drops_stale() const { return drops_stale_; }
    const Stack& stack() const { return stack_; }
    const VarMap& vars() const { return vars_; }
    int current_block() const { return current_; }

    void halt() { halted_ = true; }

    /// Fresh replacement actors stay dormant until their revive arrives.
    void make_dormant() {
        dormant_ = true;
        args_bound_ = true;
    }

    void set_run_args(std::vector<Value> args) { pending_args_ = std::move(args); }

    /// Transport-side delivery of choreography traffic. Foreign-session and
    /// stale-epoch messages are dropped and counted, never consumed.
    void enqueue(const Message& m) {
        if (m.type != MsgType::Chorex && m.type != MsgType::Choice) {
            enqueue_control(m);
            return;
        }
        if (!m.civ || !(m.civ->session == session_) || m.civ->receiver != role_) {
            ++drops_foreign_;
            return;
        }
        if (m.civ->epoch < epoch_) {
            ++drops_stale_;
            return;
        }
        inbox_.push_back(m);
    }

    void enqueue_control(Message m) { control_.push_back(std::move(m)); }

    bool has_work() const {
        if (halted_) return false;
        if (!control_.empty() && !crashed_) return true;
        if (finished_ || crashed_ || dormant_) return false;
        return runnable();
    }

    /// One scheduler quantum: either one control message or one handler block.
    bool step(EffectSink& sink) {
        if (halted_ || crashed_) return false;
        if (!control_.empty()) {
            Message m = std::move(control_.front());
            control_.pop_front();
            process_control(m, sink);
            return true;
        }
        if (finished_ || dormant_ || !runnable()) return false;
        run_block(sink);
        return true;
    }

private:
    RoleName role_;
    Address addr_;
    std::shared_ptr<const EndpointProgram> program_;
    const ImplModule* impl_;
    SessionToken session_;
    NetworkConfig config_;
    int epoch_ = 0;
    SiteCounters counters_;
    Stack stack_;
    VarMap vars_;
    int current_ = -1;
    std::deque<Message> inbox_;
    std::deque<Message> control_;
    std::optional<Value> pending_return_;
    std::optional<BarrierPayload> pending_barrier_;
    std::optional<RecoverPayload> pending_recover_;
    std::optional<std::vector<Value>> pending_args_;
    bool args_bound_ = false;
    bool finished_ = false;
    bool crashed_ = false;
    bool halted_ = false;
    bool dormant_ = false;
    int drops_foreign_ = 0;
    int drops_stale_ = 0;

    enum class Flow { Next, Jump };

    const HandlerBlock& block() const { return program_->blocks[current_]; }

    int find_match(MsgType want, const EntryKind& e) const {
        for (size_t i = 0; i < inbox_.size(); ++i) {
            const Message& m = inbox_[i];
            if (m.type != want) continue;
            const CivToken& civ = *m.civ;
            if (civ.site == e.site && civ.sender == e.from && civ.epoch == epoch_) return static_cast<int>(i);
        }
        return -1;
    }

    bool runnable() const {
        const EntryKind& e = block().entry;
        switch (e.k) {
        case EntryKind::K::Start:
        case EntryKind::K::Plain: return true;
        case EntryKind::K::ReturnLanding: return pending_return_.has_value();
        case EntryKind::K::AwaitRecv: return find_match(MsgType::Chorex, e) >= 0;
        case EntryKind::K::AwaitChoice: return find_match(MsgType::Choice, e) >= 0;
        case EntryKind::K::AwaitBarrier:
            return pending_barrier_ && stack_ && stack_top(stack_).kind == Frame::Kind::Checkpoint &&
                   pending_barrier_->instance == stack_top(stack_).instance;
        }
        return false;
    }

    Value eval_local(const Expr& e) {
        try {
            return eval_expr(e, vars_, impl_);
        } catch (CrashSignal& c) {
            if (c.role.empty()) c.role = role_;
            throw;
        }
    }

    void bind_local(const Pattern& p, const Value& v) {
        try {
            match_or_crash(p, v, vars_);
        } catch (CrashSignal& c) {
            if (c.role.empty()) c.role = role_;
            throw;
        }
    }

    Value src_value(const ValueSource& s) {
        switch (s.kind) {
        case ValueSource::Kind::Nil: return Value::nil();
        case ValueSource::Kind::DollarV: {
            auto it = vars_.find(kValueVar);
            return it == vars_.end() ? Value::nil() : it->second;
        }
        case ValueSource::Kind::Expr: return eval_local(*s.expr);
        }
        return Value::nil();
    }

    void run_block(EffectSink& sink) {
        try {
            if (!enter_block(sink)) return;
            const auto& body = block().body;
            for (size_t i = 0; i < body.size(); ++i) {
                if (exec(body[i], sink) == Flow::Jump) break;
                if (finished_ || halted_) break;
            }
        } catch (const CrashSignal& c) {
            crashed_ = true;
            sink.effect_trace(role_, "crash", c.reason);
            sink.effect_crash(role_, c);
        }
    }

    bool enter_block(EffectSink& sink) {
        EntryKind e = block().entry; // copy: vars_ mutations below must not alias
        switch (e.k) {
        case EntryKind::K::Start:
            if (!args_bound_) bind_run_args(sink);
            return true;
        case EntryKind::K::Plain: return true;
        case EntryKind::K::ReturnLanding: {
            Value v = std::move(*pending_return_);
            pending_return_.reset();
            bind_local(*e.pattern, v);
            vars_[kValueVar] = std::move(v);
            return true;
        }
        case EntryKind::K::AwaitRecv: {
            int idx = find_match(MsgType::Chorex, e);
            Message m = std::move(inbox_[idx]);
            inbox_.erase(inbox_.begin() + idx);
            sink.effect_trace(role_, "recv", std::to_string(e.site) + "<" + e.from);
            bind_local(*e.pattern, m.value());
            vars_[kValueVar] = m.value();
            return true;
        }
        case EntryKind::K::AwaitChoice: {
            int idx = find_match(MsgType::Choice, e);
            Message m = std::move(inbox_[idx]);
            inbox_.erase(inbox_.begin() + idx);
            sink.effect_trace(role_, "recv-choice", std::to_string(e.site) + "<" + e.from);
            vars_[kChoiceVar] = m.value();
            return true;
        }
        case EntryKind::K::AwaitBarrier: {
            CkptInstance inst = stack_top(stack_).instance;
            stack_ = stack_pop(stack_);
            pending_barrier_.reset();
            sink.effect_trace(role_, "barrier", instance_text(inst));
            return true;
        }
        }
        return false;
    }

    void bind_run_args(EffectSink& sink) {
        args_bound_ = true;
        if (!pending_args_) return;
        std::vector<Value> args = std::move(*pending_args_);
        pending_args_.reset();
        const auto& ovs = program_->functions.at({"run", static_cast<int>(args.size())});
        const Overload& ov = ovs.front();
        for (size_t i = 0; i < args.size(); ++i) {
            const ParamSpec& p = ov.params[i];
            if (p.kind == ParamSpec::Kind::Mine) {
                bind_local(*p.pattern, args[i]);
            } else if (p.kind == ParamSpec::Kind::FuncParam) {
                if (!args[i].is_func()) {
                    CrashSignal c{"run argument " + std::to_string(i + 1) +
                                      " must be a function reference",
                                  {}, {}};
                    c.role = role_;
                    throw c;
                }
                vars_[p.name] = args[i];
            }
        }
        (void)sink;
    }

    static std::string instance_text(const CkptInstance& i) {
        return std::to_string(i.site) + ":" + std::to_string(i.seq);
    }

    Flow exec(const Instr& i, EffectSink& sink) {
        switch (i.op) {
        case Instr::Op::Eval: {
            Value v = eval_local(*i.expr);
            bind_local(*i.bind, v);
            return Flow::Next;
        }
        case Instr::Op::Send: {
            Value v = eval_local(*i.expr);
            CivToken civ{session_, i.site, epoch_, role_, i.dest};
            sink.effect_trace(role_, "send", std::to_string(i.site) + ">" + i.dest);
            sink.effect_send(addr_, lookup(i.dest), Message::chorex(civ, std::move(v)));
            return Flow::Next;
        }
        case Instr::Op::SendChoice: {
            bool taken = truthy(vars_.at(kCondVar));
            for (const auto& dest : i.dests) {
                CivToken civ{session_, i.site, epoch_, role_, dest};
                sink.effect_trace(role_, "send-choice", std::to_string(i.site) + ">" + dest);
                sink.effect_send(addr_, lookup(dest), Message::choice(civ, taken));
            }
            return Flow::Next;
        }
        case Instr::Op::BranchLocal:
            current_ = truthy(vars_.at(kCondVar)) ? i.then_tok : i.else_tok;
            return Flow::Jump;
        case Instr::Op::BranchOnChoice:
            current_ = vars_.at(kChoiceVar).as_bool() ? i.then_tok : i.else_tok;
            return Flow::Jump;
        case Instr::Op::CallFn:
        case Instr::Op::CallIndirect:
            do_call(i);
            return Flow::Jump;
        case Instr::Op::Return: {
            Value v = src_value(i.src);
            if (!stack_ || stack_top(stack_).kind != Frame::Kind::Return)
                crash("return without a call frame");
            Frame f = stack_top(stack_);
            stack_ = stack_pop(stack_);
            vars_ = std::move(f.saved_vars);
            pending_return_ = std::move(v);
            current_ = f.target;
            return Flow::Jump;
        }
        case Instr::Op::FinishRun: {
            Value v = src_value(i.src);
            if (stack_) { // every push must have been popped or unwound
                sink.effect_abort("finish with a non-empty control stack at " + role_);
                halted_ = true;
                return Flow::Jump;
            }
            finished_ = true;
            sink.effect_trace(role_, "finish", to_text(v));
            sink.effect_finish(role_, v);
            return Flow::Jump;
        }
        case Instr::Op::EnterCheckpoint: {
            int seq = counters_[i.site]++;
            CkptInstance inst{i.site, seq};
            Frame cf;
            cf.kind = Frame::Kind::Checkpoint;
            cf.target = i.rescue_tok;
            cf.exit_block = i.exit_tok;
            cf.saved_vars = vars_;
            cf.instance = inst;
            cf.saved_counters = counters_;
            stack_ = stack_push(stack_, std::move(cf));
            sink.effect_trace(role_, "ckpt-enter", instance_text(inst));
            sink.effect_checkpoint(role_, inst, Snapshot{stack_, vars_, counters_}, epoch_);
            if (pending_recover_ && pending_recover_->instance == inst) {
                RecoverPayload p = std::move(*pending_recover_);
                pending_recover_.reset();
                apply_recover(p, sink);
                return Flow::Jump;
            }
            return Flow::Next;
        }
        case Instr::Op::ExitCheckpoint: {
            if (!stack_ || stack_top(stack_).kind != Frame::Kind::Checkpoint) {
                sink.effect_abort("exit_ckpt without a checkpoint frame at " + role_);
                halted_ = true;
                return Flow::Jump;
            }
            sink.effect_trace(role_, "done", instance_text(stack_top(stack_).instance));
            sink.effect_done(role_, stack_top(stack_).instance, epoch_);
            return Flow::Next;
        }
        case Instr::Op::Goto:
        case Instr::Op::Await:
            current_ = i.target;
            return Flow::Jump;
        }
        return Flow::Next;
    }

    const Address& lookup(const RoleName& dest) {
        auto it = config_.find(dest);
        if (it == config_.end()) crash("no address for role " + dest);
        return it->second;
    }

    void do_call(const Instr& i) {
        std::vector<Value> argvals;
        argvals.reserve(i.args.size());
        for (const auto& a : i.args) {
            switch (a.kind) {
            case ArgSpec::Kind::Mine: argvals.push_back(eval_local(*a.expr)); break;
            case ArgSpec::Kind::FuncRefLit: argvals.push_back(Value::func(a.fname, a.arity)); break;
            case ArgSpec::Kind::FuncVar: {
                auto it = vars_.find(a.fname);
                if (it == vars_.end()) crash("unbound function-valued variable " + a.fname);
                argvals.push_back(it->second);
                break;
            }
            case ArgSpec::Kind::Dummy: argvals.push_back(Value::atom("unit")); break;
            }
        }
        std::string fname = i.fname;
        int arity = i.arity;
        if (i.op == Instr::Op::CallIndirect) {
            auto it = vars_.find(i.fname);
            if (it == vars_.end() || !it->second.is_func())
                crash("called value is not a function");
            fname = it->second.as_func().name;
            arity = it->second.as_func().arity;
            if (arity != static_cast<int>(i.args.size()))
                crash("arity mismatch calling @" + fname + "/" + std::to_string(arity));
        }
        auto fit = program_->functions.find({fname, arity});
        if (fit == program_->functions.end())
            crash("unknown choreography function " + fname + "/" + std::to_string(arity));

        const Overload* chosen = nullptr;
        for (const auto& ov : fit->second) {
            VarMap scratch;
            bool ok = true;
            for (size_t j = 0; j < ov.params.size(); ++j) {
                if (ov.params[j].kind != ParamSpec::Kind::Mine) continue;
                if (!match_pattern(*ov.params[j].pattern, argvals[j], scratch)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                chosen = &ov;
                break;
            }
        }
        if (!chosen)
            crash("no function clause matching " + fname + "/" + std::to_string(arity));

        Frame rf;
        rf.kind = Frame::Kind::Return;
        rf.target = i.return_tok;
        const auto& live = program_->blocks[i.return_tok].live_in;
        for (const auto& name : live) {
            auto it = vars_.find(name);
            if (it != vars_.end()) rf.saved_vars.emplace(name, it->second);
        }
        stack_ = stack_push(stack_, std::move(rf));

        VarMap fresh;
        for (size_t j = 0; j < chosen->params.size(); ++j) {
            const ParamSpec& p = chosen->params[j];
            if (p.kind == ParamSpec::Kind::Mine) {
                match_or_crash(*p.pattern, argvals[j], fresh);
            } else if (p.kind == ParamSpec::Kind::FuncParam) {
                if (!argvals[j].is_func()) crash("expected a function reference for " + p.name);
                fresh[p.name] = argvals[j];
            }
        }
        vars_ = std::move(fresh);
        current_ = chosen->entry_block;
    }

    void process_control(const Message& m, EffectSink& sink) {
        switch (m.type) {
        case MsgType::Revive: {
            const auto& p = std::get<RevivePayload>(m.payload);
            session_ = p.session;
            config_ = p.config;
            epoch_ = p.epoch;
            stack_ = p.snapshot.stack;
            vars_ = p.snapshot.vars;
            counters_ = p.snapshot.counters;
            dormant_ = false;
            sink.effect_trace(role_, "revive", instance_text(p.instance));
            RecoverPayload rp{config_, p.instance, p.epoch};
            apply_recover(rp, sink);
            break;
        }
        case MsgType::Recover: {
            const auto& p = std::get<RecoverPayload>(m.payload);
            if (p.epoch <= epoch_) break; // stale
            if (has_frame_for(p.instance)) {
                apply_recover(p, sink);
            } else {
                // not yet inside the failed checkpoint; unwind on entry
                pending_recover_ = p;
                sink.effect_trace(role_, "recover-deferred", instance_text(p.instance));
            }
            break;
        }
        case MsgType::Barrier: {
            const auto& p = std::get<BarrierPayload>(m.payload);
            if (p.epoch < epoch_) break; // stale
            pending_barrier_ = p;
            break;
        }
        default:
            break;
        }
    }

    bool has_frame_for(const CkptInstance& inst) const {
        for (Stack n = stack_; n; n = n->next)
            if (n->frame.kind == Frame::Kind::Checkpoint && n->frame.instance == inst) return true;
        return false;
    }

    /// Pop above the checkpoint frame, restore its saved state, resume at
    /// the rescue block, discard the failed attempt's in-flight traffic.
    void apply_recover(const RecoverPayload& p, EffectSink& sink) {
        while (stack_ && !(stack_top(stack_).kind == Frame::Kind::Checkpoint &&
                           stack_top(stack_).instance == p.instance))
            stack_ = stack_pop(stack_);
        if (!stack_) {
            sink.effect_abort("unwind target " + instance_text(p.instance) + " missing at " + role_);
            halted_ = true;
            return;
        }
        const Frame& cf = stack_top(stack_);
        vars_ = cf.saved_vars;
        counters_ = cf.saved_counters;
        current_ = cf.target;
        pending_return_.reset();
        pending_barrier_.reset();
        epoch_ = p.epoch;
        config_ = p.config;
        sink.effect_trace(role_, "epoch-bump", std::to_string(epoch_));
        for (auto it = inbox_.begin(); it != inbox_.end();) {
            if (it->civ && it->civ->epoch < epoch_) {
                ++drops_stale_;
                it = inbox_.erase(it);
            } else {
                ++it;
            }
        }
        sink.effect_trace(role_, "rescue-enter", instance_text(p.instance));
        sink.effect_rescue_entry(role_, p.instance, vars_);
    }
};

} // namespace chorex
