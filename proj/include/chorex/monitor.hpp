#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chorex/message.hpp"
#include "chorex/stack.hpp"

namespace chorex {

/// What the monitor asks of its surroundings when it reacts to events.
struct MonitorSink {
    virtual ~MonitorSink() = default;
    virtual Address monitor_spawn_replacement(const RoleName& role) = 0;
    virtual void monitor_send_revive(const RoleName& role, RevivePayload p) = 0;
    virtual void monitor_broadcast_recover(const RoleName& crashed, RecoverPayload p) = 0;
    virtual void monitor_broadcast_barrier(const CkptInstance& inst, int epoch) = 0;
    virtual void monitor_abort(const std::string& reason) = 0;
    virtual void monitor_trace(const RoleName& role, const std::string& kind,
                               const std::string& detail) = 0;
};

struct CheckpointRecord {
    CkptInstance instance;
    StackDelta delta;
    int epoch = 0;
    Snapshot recon; // reconstruction cache; tests cross-check it against the delta chain
};

/// Message-driven, serialized. Watches for crashes, keeps delta-compressed
/// checkpoint chains per role, revives actors and reconfigures the network.
class Monitor {
public:
    Monitor() = default;
    Monitor(SessionToken session, std::vector<RoleName> roles, NetworkConfig config,
            bool deltas_enabled)
        : session_(session), roles_(std::move(roles)), config_(std::move(config)),
          deltas_enabled_(deltas_enabled) {
        for (const auto& r : roles_) chains_[r];
    }

    void set_config(const RoleName& role, const Address& addr) { config_[role] = addr; }

    // --- inputs (queued; processed one per scheduler step) -------------

    void push_checkpoint(RoleName role, CkptInstance inst, Snapshot snap, int epoch) {
        inbox_.push_back(Input{Input::Kind::Checkpoint, std::move(role), inst, std::move(snap),
                               epoch, {}});
    }
    void push_done(RoleName role, CkptInstance inst, int epoch) {
        inbox_.push_back(Input{Input::Kind::Done, std::move(role), inst, {}, epoch, {}});
    }
    void push_crash(RoleName role, std::string reason) {
        inbox_.push_back(Input{Input::Kind::Crash, std::move(role), {}, {}, 0, std::move(reason)});
    }

    bool has_work() const { return !inbox_.empty() && !dead_; }

    void step(MonitorSink& sink) {
        if (inbox_.empty() || dead_) return;
        Input in = std::move(inbox_.front());
        inbox_.pop_front();
        switch (in.kind) {
        case Input::Kind::Checkpoint: on_checkpoint(in, sink); break;
        case Input::Kind::Done: on_done(in, sink); break;
        case Input::Kind::Crash: on_crash(in, sink); break;
        }
    }

    // --- stats & inspection ---------------------------------------------

    int epoch() const { return epoch_; }
    int recoveries() const { return recoveries_; }
    size_t stored_frames() const { return stored_frames_; }
    size_t peak_stored_frames() const { return peak_stored_frames_; }
    bool recovering() const { return recovering_; }
    const std::map<RoleName, std::vector<CheckpointRecord>>& chains() const { return chains_; }

    std::optional<VarMap> recorded_vars(const RoleName& role, const CkptInstance& inst) const {
        const auto& recs = chains_.at(role);
        for (auto it = recs.rbegin(); it != recs.rend(); ++it)
            if (it->instance == inst) return it->recon.vars;
        return std::nullopt;
    }

    /// Delta-chain integrity: replaying every role's deltas from the empty
    /// snapshot must land exactly on the cached reconstructions.
    bool verify_chains() const {
        for (const auto& [role, recs] : chains_) {
            Snapshot acc;
            for (const auto& rec : recs) {
                acc = apply_delta(acc, rec.delta);
                if (!(acc == rec.recon)) return false;
            }
        }
        return true;
    }

private:
    struct Input {
        enum class Kind { Checkpoint, Done, Crash };
        Kind kind;
        RoleName role;
        CkptInstance instance;
        Snapshot snapshot;
        int epoch = 0;
        std::string reason;
    };

    SessionToken session_;
    std::vector<RoleName> roles_;
    NetworkConfig config_;
    bool deltas_enabled_ = true;
    std::deque<Input> inbox_;
    std::map<RoleName, std::vector<CheckpointRecord>> chains_;
    std::map<CkptInstance, std::set<RoleName>> done_sets_;
    std::set<CkptInstance> rescued_;
    int epoch_ = 0;
    bool recovering_ = false;
    CkptInstance recovering_instance_;
    bool dead_ = false;
    int recoveries_ = 0;
    size_t stored_frames_ = 0;
    size_t peak_stored_frames_ = 0;

    void account(std::ptrdiff_t frames) {
        stored_frames_ = static_cast<size_t>(static_cast<std::ptrdiff_t>(stored_frames_) + frames);
        peak_stored_frames_ = std::max(peak_stored_frames_, stored_frames_);
    }

    void on_checkpoint(Input& in, MonitorSink& sink) {
        if (in.epoch < epoch_) {
            sink.monitor_trace(in.role, "drop-stale-record", instance_text(in.instance));
            return;
        }
        auto& recs = chains_[in.role];
        Snapshot prev = recs.empty() ? Snapshot{} : recs.back().recon;
        CheckpointRecord rec;
        rec.instance = in.instance;
        rec.delta = deltas_enabled_ ? compute_delta(prev, in.snapshot)
                                    : full_copy_delta(in.snapshot);
        rec.epoch = in.epoch;
        rec.recon = std::move(in.snapshot);
        account(static_cast<std::ptrdiff_t>(rec.delta.stored_frames()));
        recs.push_back(std::move(rec));
        done_sets_[in.instance]; // open the instance
        sink.monitor_trace(in.role, "record", instance_text(in.instance));
    }

    void on_done(Input& in, MonitorSink& sink) {
        if (in.epoch < epoch_) {
            sink.monitor_trace(in.role, "drop-stale-done", instance_text(in.instance));
            return;
        }
        auto it = done_sets_.find(in.instance);
        if (it == done_sets_.end()) {
            sink.monitor_trace(in.role, "drop-unknown-done", instance_text(in.instance));
            return;
        }
        it->second.insert(in.role);
        if (it->second.size() != roles_.size()) return;

        // all roles finished the block: release the barrier, drop checkpoints
        for (auto& [role, recs] : chains_) {
            if (!recs.empty() && recs.back().instance == in.instance) {
                account(-static_cast<std::ptrdiff_t>(recs.back().delta.stored_frames()));
                recs.pop_back();
            }
        }
        done_sets_.erase(it);
        rescued_.erase(in.instance);
        if (recovering_ && recovering_instance_ == in.instance) recovering_ = false;
        sink.monitor_trace("", "barrier-broadcast", instance_text(in.instance));
        sink.monitor_broadcast_barrier(in.instance, epoch_);
    }

    void on_crash(Input& in, MonitorSink& sink) {
        sink.monitor_trace(in.role, "crash-detected", in.reason);
        auto& recs = chains_[in.role];
        if (recs.empty()) {
            fail(sink, "crash outside any checkpoint at " + in.role + ": " + in.reason);
            return;
        }
        const CkptInstance target = recs.back().instance;
        if (rescued_.count(target)) {
            fail(sink, "crash at " + in.role + " in the rescue (or repeated crash) of an already "
                       "recovered checkpoint: " + in.reason);
            return;
        }
        if (recovering_) {
            fail(sink, "crash at " + in.role + " while a recovery is in progress: " + in.reason);
            return;
        }

        ++epoch_;
        ++recoveries_;
        recovering_ = true;
        recovering_instance_ = target;
        rescued_.insert(target);
        done_sets_[target].clear();

        // instances opened inside the failed attempt are abandoned
        for (auto& [role, chain] : chains_) {
            bool has_target = false;
            for (const auto& r : chain)
                if (r.instance == target) {
                    has_target = true;
                    break;
                }
            if (!has_target) continue;
            while (!chain.empty() && !(chain.back().instance == target)) {
                account(-static_cast<std::ptrdiff_t>(chain.back().delta.stored_frames()));
                done_sets_.erase(chain.back().instance);
                rescued_.erase(chain.back().instance);
                chain.pop_back();
            }
        }

        Address fresh = sink.monitor_spawn_replacement(in.role);
        config_[in.role] = fresh;
        sink.monitor_trace(in.role, "revive-spawned", instance_text(target));

        RevivePayload revive;
        revive.snapshot = recs.back().recon;
        revive.instance = target;
        revive.epoch = epoch_;
        revive.config = config_;
        revive.session = session_;
        sink.monitor_send_revive(in.role, std::move(revive));

        RecoverPayload recover{config_, target, epoch_};
        sink.monitor_trace("", "recover-broadcast", instance_text(target));
        sink.monitor_broadcast_recover(in.role, std::move(recover));
    }

    void fail(MonitorSink& sink, const std::string& reason) {
        dead_ = true;
        sink.monitor_abort(reason);
    }

    static std::string instance_text(const CkptInstance& i) {
        return std::to_string(i.site) + ":" + std::to_string(i.seq);
    }
};

/// Teardown half of the supervision pair. Caller, monitor, and supervisor
/// are fate-shared: one abort stops everything, idempotently.
class Supervisor {
public:
    bool torn_down() const { return torn_down_; }

    template <typename Actors>
    void teardown(Actors& actors) {
        if (torn_down_) return;
        torn_down_ = true;
        for (auto& a : actors) a->halt();
    }

private:
    bool torn_down_ = false;
};

} // namespace chorex
