#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "chorex/interp.hpp"
#include "chorex/monitor.hpp"
#include "chorex/runtime.hpp"
#include "chorex/transport.hpp"

namespace chorex {

using EndpointMap = std::map<RoleName, std::shared_ptr<const EndpointProgram>>;

inline EndpointMap project_all(const ChorProgram& prog) {
    EndpointMap out;
    for (const auto& role : prog.roles)
        out[role] = std::make_shared<const EndpointProgram>(project(prog, role));
    return out;
}

struct SessionOptions {
    std::uint64_t seed = 0;
    bool collect_trace = false;
    bool deltas_enabled = true;
    bool use_tcp = false;
    std::size_t max_steps = 100'000'000;
    long timeout_ms = 60'000;
};

struct RescueCheck {
    RoleName role;
    CkptInstance instance;
    VarMap vars_at_entry;
    VarMap recorded_snapshot;
    bool has_recorded = false;
};

struct SessionResult {
    enum class Status { Ok, Aborted, Timeout };
    Status status = Status::Ok;
    std::map<RoleName, Value> results;
    std::string abort_reason;
    int recoveries = 0;
    int drops_foreign = 0;
    int drops_stale = 0;
    int drops_undeliverable = 0;
    long steps = 0;
    std::vector<TraceEvent> trace;
    std::vector<RescueCheck> rescue_checks;
    std::size_t monitor_peak_frames = 0;

    bool ok() const { return status == Status::Ok; }
};

/// One running choreography: the actors, their monitor/supervisor pair, and
/// a seeded scheduler that serializes every unit onto this thread. A step
/// runs one actor block, one monitor event, or one message delivery.
class Session final : public EffectSink, public MonitorSink {
public:
    Session(std::vector<RoleName> roles, EndpointMap endpoints, ImplRegistry impls,
            std::vector<Value> args, SessionOptions opts = {})
        : roles_(std::move(roles)), endpoints_(std::move(endpoints)), impls_(std::move(impls)),
          opts_(opts), rng_(opts.seed) {
        token_ = SessionToken::generate();
        transport_ = opts_.use_tcp ? std::unique_ptr<Transport>(new TcpTransport())
                                   : std::unique_ptr<Transport>(new MemTransport());

        for (const auto& role : roles_) {
            for (const auto& spec : endpoints_.at(role)->required) {
                if (!impls_.find(role, spec.name, spec.arity)) {
                    fail_early("missing impl function " + role + "." + spec.name + "/" +
                               std::to_string(spec.arity));
                    return;
                }
            }
        }
        const auto& fns = endpoints_.at(roles_.front())->functions;
        if (!fns.count({"run", static_cast<int>(args.size())})) {
            fail_early("run expects a different number of arguments");
            return;
        }

        for (size_t i = 0; i < roles_.size(); ++i)
            config_[roles_[i]] = transport_->make_address(static_cast<int>(i));
        for (size_t i = 0; i < roles_.size(); ++i) {
            const RoleName& role = roles_[i];
            auto actor = std::make_unique<Actor>(role, config_[role], endpoints_.at(role),
                                                 impls_.module_for(role), token_, config_);
            actor->set_run_args(args);
            role_slot_[role] = static_cast<int>(i);
            actors_.push_back(std::move(actor));
        }
        monitor_ = Monitor(token_, roles_, config_, opts_.deltas_enabled);
    }

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    // --- stepwise driving (tests interleave multiple sessions) ----------

    bool done() const {
        return aborted_ || results_.size() == roles_.size() || early_failure_.has_value();
    }

    bool step() {
        if (done() || steps_ >= static_cast<long>(opts_.max_steps)) return false;
        transport_->poll();

        actions_.clear();
        for (size_t i = 0; i < actors_.size(); ++i)
            if (actors_[i]->has_work()) actions_.push_back(Action{Action::K::ActorStep, i, 0});
        if (monitor_.has_work()) actions_.push_back(Action{Action::K::MonitorStep, 0, 0});
        for (std::uint64_t c : transport_->ready_channels(steps_))
            actions_.push_back(Action{Action::K::Deliver, 0, c});
        if (actions_.empty()) {
            if (transport_->has_undelivered()) {
                ++steps_; // idle tick: gated messages become deliverable later
                return true;
            }
            return false;
        }

        const Action& a = actions_[rng_() % actions_.size()];
        switch (a.k) {
        case Action::K::ActorStep: actors_[a.actor]->step(*this); break;
        case Action::K::MonitorStep:
            // the monitor is one serialized unit; its quantum drains the queue
            while (monitor_.has_work()) monitor_.step(*this);
            break;
        case Action::K::Deliver: deliver(transport_->take(a.chan)); break;
        }
        ++steps_;
        return true;
    }

    /// Drive to completion. A session that can make no more progress and is
    /// not finished is reported as timed out, as is exceeding the deadline.
    SessionResult run() {
        using clock = std::chrono::steady_clock;
        auto deadline = clock::now() + std::chrono::milliseconds(opts_.timeout_ms);
        while (!done()) {
            if (!step()) {
                if (opts_.use_tcp && retry_tcp()) continue;
                return result(SessionResult::Status::Timeout);
            }
            if ((steps_ & 0x3ff) == 0 && clock::now() > deadline)
                return result(SessionResult::Status::Timeout);
        }
        return result(aborted_ || early_failure_ ? SessionResult::Status::Aborted
                                                 : SessionResult::Status::Ok);
    }

    SessionResult result() {
        if (done())
            return result(aborted_ || early_failure_ ? SessionResult::Status::Aborted
                                                     : SessionResult::Status::Ok);
        return result(SessionResult::Status::Timeout);
    }

    // --- test hooks ------------------------------------------------------

    /// Called for every delivered message; used to mirror traffic into a
    /// second session for the integrity fuzz.
    void set_delivery_tap(std::function<void(const RoleName&, const Message&)> tap) {
        tap_ = std::move(tap);
    }

    /// Deliver an arbitrary message to a role's current actor, as the
    /// transport would.
    void inject(const RoleName& role, const Message& m) {
        auto it = role_slot_.find(role);
        if (it == role_slot_.end()) return;
        actors_[static_cast<size_t>(it->second)]->enqueue(m);
    }

    MemTransport* mem_transport() { return dynamic_cast<MemTransport*>(transport_.get()); }
    int initial_slot(const RoleName& role) const {
        for (size_t i = 0; i < roles_.size(); ++i)
            if (roles_[i] == role) return static_cast<int>(i);
        return -1;
    }
    const Monitor& monitor() const { return monitor_; }
    long steps() const { return steps_; }

private:
    struct Action {
        enum class K { ActorStep, MonitorStep, Deliver };
        K k;
        size_t actor;
        std::uint64_t chan;
    };

    std::vector<RoleName> roles_;
    EndpointMap endpoints_;
    ImplRegistry impls_;
    SessionOptions opts_;
    std::mt19937_64 rng_;
    SessionToken token_;
    std::unique_ptr<Transport> transport_;
    std::vector<std::unique_ptr<Actor>> actors_;
    std::map<RoleName, int> role_slot_; // live slot per role
    NetworkConfig config_;
    Monitor monitor_;
    Supervisor supervisor_;
    std::vector<Action> actions_;
    std::map<RoleName, Value> results_;
    bool aborted_ = false;
    std::string abort_reason_;
    std::optional<std::string> early_failure_;
    long steps_ = 0;
    int event_time_ = 0;
    std::vector<TraceEvent> trace_;
    std::vector<RescueCheck> rescue_checks_;
    std::function<void(const RoleName&, const Message&)> tap_;

    void fail_early(std::string reason) { early_failure_ = std::move(reason); }

    bool retry_tcp() {
        for (int i = 0; i < 100; ++i) {
            std::this_thread::sleep_for(std::chrono::microseconds(200));
            transport_->poll();
            if (!transport_->ready_channels(steps_).empty()) return true;
        }
        return false;
    }

    void deliver(Delivery d) {
        int slot = d.to_slot;
        if (slot < 0) {
            auto it = role_slot_.find(d.to_role);
            if (it == role_slot_.end()) return;
            slot = it->second;
        }
        if (slot < 0 || slot >= static_cast<int>(actors_.size())) return;
        Actor& a = *actors_[static_cast<size_t>(slot)];
        RoleName role = a.role();
        if (a.crashed()) return; // undeliverable: the role moved
        a.enqueue(d.msg);
        if (tap_) tap_(role, d.msg);
    }

    SessionResult result(SessionResult::Status status) {
        SessionResult r;
        r.status = status;
        if (early_failure_) {
            r.status = SessionResult::Status::Aborted;
            r.abort_reason = *early_failure_;
        } else {
            r.abort_reason = abort_reason_;
        }
        if (status == SessionResult::Status::Ok)
            for (const auto& role : roles_) r.results[role] = results_.at(role);
        r.recoveries = monitor_.recoveries();
        for (const auto& a : actors_) {
            r.drops_foreign += a->drops_foreign();
            r.drops_stale += a->drops_stale();
        }
        r.drops_undeliverable = transport_ ? transport_->undeliverable() : 0;
        r.steps = steps_;
        r.trace = trace_;
        r.rescue_checks = rescue_checks_;
        r.monitor_peak_frames = monitor_.peak_stored_frames();
        return r;
    }

    void abort_session(const std::string& reason) {
        if (aborted_) return;
        aborted_ = true;
        abort_reason_ = reason;
        trace_event("", "abort", reason);
        supervisor_.teardown(actors_);
    }

    void trace_event(const RoleName& role, const std::string& kind, const std::string& detail) {
        if (opts_.collect_trace) trace_.push_back(TraceEvent{event_time_, role, kind, detail});
        ++event_time_;
    }

    // --- EffectSink -------------------------------------------------------

    void effect_send(const Address& from, const Address& to, Message m) override {
        transport_->send(from, to, std::move(m), steps_);
    }
    void effect_checkpoint(const RoleName& role, const CkptInstance& inst, const Snapshot& snap,
                           int epoch) override {
        monitor_.push_checkpoint(role, inst, snap, epoch);
    }
    void effect_done(const RoleName& role, const CkptInstance& inst, int epoch) override {
        monitor_.push_done(role, inst, epoch);
    }
    void effect_crash(const RoleName& role, const CrashSignal& c) override {
        monitor_.push_crash(role, c.reason);
    }
    void effect_finish(const RoleName& role, const Value& v) override { results_[role] = v; }
    void effect_rescue_entry(const RoleName& role, const CkptInstance& inst,
                             const VarMap& vars) override {
        RescueCheck rc;
        rc.role = role;
        rc.instance = inst;
        rc.vars_at_entry = vars;
        if (auto recorded = monitor_.recorded_vars(role, inst)) {
            rc.recorded_snapshot = *recorded;
            rc.has_recorded = true;
        }
        rescue_checks_.push_back(std::move(rc));
    }
    void effect_trace(const RoleName& role, const std::string& kind,
                      const std::string& detail) override {
        trace_event(role, kind, detail);
    }
    void effect_abort(const std::string& reason) override { abort_session(reason); }

    // --- MonitorSink -------------------------------------------------------

    Address monitor_spawn_replacement(const RoleName& role) override {
        int slot = static_cast<int>(actors_.size());
        Address addr = transport_->make_address(slot);
        NetworkConfig cfg = update_route(config_, role, addr);
        config_ = cfg;
        auto actor = std::make_unique<Actor>(role, addr, endpoints_.at(role),
                                             impls_.module_for(role), token_, cfg);
        actor->make_dormant();
        actors_.push_back(std::move(actor));
        role_slot_[role] = slot;
        return addr;
    }
    void monitor_send_revive(const RoleName& role, RevivePayload p) override {
        actors_[static_cast<size_t>(role_slot_.at(role))]->enqueue_control(
            Message::revive(std::move(p)));
    }
    void monitor_broadcast_recover(const RoleName& crashed, RecoverPayload p) override {
        config_ = p.config;
        for (const auto& role : roles_) {
            if (role == crashed) continue;
            actors_[static_cast<size_t>(role_slot_.at(role))]->enqueue_control(Message::recover(p));
        }
    }
    void monitor_broadcast_barrier(const CkptInstance& inst, int epoch) override {
        for (const auto& role : roles_)
            actors_[static_cast<size_t>(role_slot_.at(role))]->enqueue_control(
                Message::barrier(inst, epoch));
    }
    void monitor_abort(const std::string& reason) override { abort_session(reason); }
    void monitor_trace(const RoleName& role, const std::string& kind,
                       const std::string& detail) override {
        trace_event(role, kind, detail);
    }
};

/// Convenience wrapper: compile once, then run with a given seed.
inline SessionResult run_session(const std::vector<RoleName>& roles, const EndpointMap& endpoints,
                                 const ImplRegistry& impls, const std::vector<Value>& args,
                                 SessionOptions opts = {}) {
    Session s(roles, endpoints, impls, args, opts);
    return s.run();
}

} // namespace chorex
