#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chorex/ast.hpp"
#include "chorex/checks.hpp"
#include "chorex/pretty.hpp"

namespace chorex {

// Reserved dataflow names; user identifiers cannot contain '$'.
inline const std::string kValueVar = "$v";
inline const std::string kCondVar = "$c";
inline const std::string kChoiceVar = "$choice";

struct ContinuationToken {
    std::string fname;
    int arity = 0;
    int ordinal = 0; // depth-first numbering within the function

    std::string str() const {
        return fname + "/" + std::to_string(arity) + "#" + std::to_string(ordinal);
    }
    friend bool operator==(const ContinuationToken& a, const ContinuationToken& b) {
        return a.fname == b.fname && a.arity == b.arity && a.ordinal == b.ordinal;
    }
};

struct EntryKind {
    enum class K { Start, Plain, AwaitRecv, AwaitChoice, AwaitBarrier, ReturnLanding };
    K k = K::Start;
    int site = -1;      // AwaitRecv/AwaitChoice: send site; AwaitBarrier: checkpoint site
    RoleName from;      // AwaitRecv sender / AwaitChoice decider
    PatternPtr pattern; // AwaitRecv / ReturnLanding binding
};

struct ArgSpec {
    enum class Kind { Mine, FuncRefLit, FuncVar, Dummy };
    Kind kind = Kind::Dummy;
    ExprPtr expr;      // Mine
    std::string fname; // FuncRefLit name / FuncVar variable
    int arity = 0;     // FuncRefLit
};

struct ValueSource {
    enum class Kind { Nil, DollarV, Expr };
    Kind kind = Kind::Nil;
    ExprPtr expr;

    static ValueSource nil() { return {}; }
    static ValueSource dollar() { return ValueSource{Kind::DollarV, nullptr}; }
};

struct Instr {
    enum class Op {
        Eval,            // bind <- expr
        Send,            // evaluate expr, send to dest with site's civ token
        SendChoice,      // send $c to every role in dests
        BranchLocal,     // jump then_tok/else_tok on $c           (terminator)
        BranchOnChoice,  // jump then_tok/else_tok on $choice      (terminator)
        CallFn,          // call fname/arity, landing at return_tok (terminator)
        CallIndirect,    // call through funcref in variable fname  (terminator)
        Return,          // pop return frame, deliver src           (terminator)
        FinishRun,       // report src as this role's run result    (terminator)
        EnterCheckpoint, // push checkpoint frame, notify monitor
        ExitCheckpoint,  // notify monitor done; next block awaits the barrier
        Goto,            // fallthrough                              (terminator)
        Await,           // block until target's entry is satisfied  (terminator)
    };
    Op op = Op::Eval;
    PatternPtr bind;
    ExprPtr expr;
    int site = -1;
    RoleName dest;
    std::vector<RoleName> dests;
    int then_tok = -1;
    int else_tok = -1;
    std::string fname;
    int arity = 0;
    std::vector<ArgSpec> args;
    int return_tok = -1;
    int rescue_tok = -1;
    int exit_tok = -1;
    int target = -1;
    ValueSource src;
};

struct HandlerBlock {
    ContinuationToken token;
    EntryKind entry;
    std::vector<Instr> body; // ends in exactly one terminator
    std::set<std::string> live_in, live_out;
};

struct ParamSpec {
    enum class Kind { Mine, FuncParam, Other };
    Kind kind = Kind::Other;
    PatternPtr pattern; // Mine
    std::string name;   // FuncParam
};

struct Overload {
    int entry_block = -1;
    std::vector<ParamSpec> params;
};

struct SendSiteInfo {
    RoleName sender;
    std::vector<RoleName> receivers;
    SourceSpan span;
    bool choice = false;
};

struct EndpointProgram {
    RoleName role;
    std::vector<HandlerBlock> blocks;
    int entry = -1; // run's first block
    std::map<std::pair<std::string, int>, std::vector<Overload>> functions;
    std::map<int, std::vector<SendSiteInfo>> send_sites;
    std::set<FunctionSpec> required;
};

/// Branches differ for a role that is neither the decider nor notified.
struct MergeError {
    RoleName role;
    SourceSpan if_span;
    std::string detail;
};
using KocError = MergeError;

namespace detail {

inline bool argspec_equal(const ArgSpec& a, const ArgSpec& b) {
    if (a.kind != b.kind || a.fname != b.fname || a.arity != b.arity) return false;
    if (a.kind == ArgSpec::Kind::Mine) return expr_equal(*a.expr, *b.expr);
    return true;
}

inline bool valuesource_equal(const ValueSource& a, const ValueSource& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == ValueSource::Kind::Expr) return expr_equal(*a.expr, *b.expr);
    return true;
}

inline bool instr_equal(const Instr& a, const Instr& b) {
    if (a.op != b.op || a.site != b.site || a.dest != b.dest || a.dests != b.dests ||
        a.then_tok != b.then_tok || a.else_tok != b.else_tok || a.fname != b.fname ||
        a.arity != b.arity || a.return_tok != b.return_tok || a.rescue_tok != b.rescue_tok ||
        a.exit_tok != b.exit_tok || a.target != b.target)
        return false;
    if (static_cast<bool>(a.bind) != static_cast<bool>(b.bind)) return false;
    if (a.bind && !pattern_equal(*a.bind, *b.bind)) return false;
    if (static_cast<bool>(a.expr) != static_cast<bool>(b.expr)) return false;
    if (a.expr && !expr_equal(*a.expr, *b.expr)) return false;
    if (a.args.size() != b.args.size()) return false;
    for (size_t i = 0; i < a.args.size(); ++i)
        if (!argspec_equal(a.args[i], b.args[i])) return false;
    return valuesource_equal(a.src, b.src);
}

inline bool entry_equal(const EntryKind& a, const EntryKind& b) {
    if (a.k != b.k || a.site != b.site || a.from != b.from) return false;
    if (static_cast<bool>(a.pattern) != static_cast<bool>(b.pattern)) return false;
    if (a.pattern && !pattern_equal(*a.pattern, *b.pattern)) return false;
    return true;
}

} // namespace detail

class Projector {
public:
    Projector(const ChorProgram& prog, RoleName role) : prog_(prog), role_(std::move(role)) {}

    EndpointProgram project() {
        ep_.role = role_;
        collect_send_sites();
        ep_.required = required_functions(prog_, role_);
        for (const auto& fn : prog_.functions) project_function(fn);
        return std::move(ep_);
    }

private:
    const ChorProgram& prog_;
    RoleName role_;
    EndpointProgram ep_;
    int cur_ = -1;
    std::string fn_name_;
    int fn_arity_ = 0;
    int ordinal_ = 0;

    struct InstrRef {
        int block;
        int index;
    };

    void collect_send_sites() {
        struct Walker {
            EndpointProgram& ep;
            const ChorProgram& prog;
            void walk(const StmtList& stmts) {
                for (const auto& sp : stmts) {
                    const Statement& s = *sp;
                    switch (s.kind) {
                    case Statement::Kind::Delivery:
                        ep.send_sites[s.site].push_back(
                            SendSiteInfo{s.sender, {s.receiver}, s.span, false});
                        break;
                    case Statement::Kind::If: {
                        std::vector<RoleName> dests;
                        if (s.notify)
                            dests = *s.notify;
                        else
                            for (const auto& r : prog.roles)
                                if (r != s.decider) dests.push_back(r);
                        ep.send_sites[s.site].push_back(SendSiteInfo{s.decider, dests, s.span, true});
                        walk(s.then_branch);
                        walk(s.else_branch);
                        break;
                    }
                    case Statement::Kind::Checkpoint:
                        walk(s.body);
                        walk(s.rescue);
                        break;
                    case Statement::Kind::With:
                        walk(s.rest);
                        break;
                    default:
                        break;
                    }
                }
            }
        } w{ep_, prog_};
        for (const auto& fn : prog_.functions) w.walk(fn.body);
    }

    int new_block(EntryKind e) {
        HandlerBlock b;
        b.token = ContinuationToken{fn_name_, fn_arity_, ordinal_++};
        b.entry = std::move(e);
        ep_.blocks.push_back(std::move(b));
        return static_cast<int>(ep_.blocks.size()) - 1;
    }

    InstrRef emit(Instr i) {
        ep_.blocks[cur_].body.push_back(std::move(i));
        return InstrRef{cur_, static_cast<int>(ep_.blocks[cur_].body.size()) - 1};
    }

    Instr& at(InstrRef r) { return ep_.blocks[r.block].body[r.index]; }

    void project_function(const ChorFunction& fn) {
        fn_name_ = fn.name;
        fn_arity_ = fn.arity();
        ordinal_ = 0;
        int entry = new_block(EntryKind{EntryKind::K::Start, -1, {}, nullptr});
        Overload ov;
        ov.entry_block = entry;
        for (const auto& p : fn.params) {
            ParamSpec ps;
            if (p.kind == Param::Kind::Func) {
                ps.kind = ParamSpec::Kind::FuncParam;
                ps.name = p.name;
            } else if (p.role == role_) {
                ps.kind = ParamSpec::Kind::Mine;
                ps.pattern = p.pattern;
            } else {
                ps.kind = ParamSpec::Kind::Other;
            }
            ov.params.push_back(std::move(ps));
        }
        ep_.functions[{fn.name, fn.arity()}].push_back(std::move(ov));
        if (fn.name == "run" && ep_.entry < 0) ep_.entry = entry;

        cur_ = entry;
        ValueSource src = project_stmts(fn.body, true);
        Instr term;
        term.op = fn.name == "run" ? Instr::Op::FinishRun : Instr::Op::Return;
        term.src = src;
        emit(std::move(term));
    }

    /// Projects a statement list; when `value_pos`, the returned source
    /// describes where the list's value lives at this role.
    ValueSource project_stmts(const StmtList& stmts, bool value_pos) {
        if (stmts.empty()) return ValueSource::nil();
        for (size_t i = 0; i + 1 < stmts.size(); ++i) project_stmt(*stmts[i], false);
        return project_stmt(*stmts.back(), value_pos);
    }

    /// Emits Eval $v <- src when a compound construct needs the value in a
    /// variable (to survive block splits).
    void ensure_dollar_v(const ValueSource& src) {
        if (src.kind == ValueSource::Kind::DollarV) return;
        Instr i;
        i.op = Instr::Op::Eval;
        i.bind = make_pat_var(kValueVar);
        i.expr = src.kind == ValueSource::Kind::Expr ? src.expr : make_lit(Value::nil());
        emit(std::move(i));
    }

    ValueSource project_stmt(const Statement& s, bool value_pos) {
        switch (s.kind) {
        case Statement::Kind::Delivery: {
            if (s.sender == role_) {
                Instr i;
                i.op = Instr::Op::Send;
                i.site = s.site;
                i.dest = s.receiver;
                i.expr = s.expr;
                emit(std::move(i));
                return ValueSource::nil();
            }
            if (s.receiver == role_) {
                int nb = new_block(EntryKind{EntryKind::K::AwaitRecv, s.site, s.sender, s.pattern});
                Instr t;
                t.op = Instr::Op::Await;
                t.target = nb;
                emit(std::move(t));
                cur_ = nb;
                return ValueSource::dollar(); // the receive binds $v to the payload
            }
            return ValueSource::nil();
        }
        case Statement::Kind::LocalExpr: {
            if (s.role != role_) return ValueSource::nil();
            if (value_pos) return ValueSource{ValueSource::Kind::Expr, s.expr};
            Instr i;
            i.op = Instr::Op::Eval;
            i.bind = make_pat_wildcard();
            i.expr = s.expr;
            emit(std::move(i));
            return ValueSource::nil();
        }
        case Statement::Kind::If:
            return project_if(s, value_pos);
        case Statement::Kind::Checkpoint:
            return project_checkpoint(s, value_pos);
        case Statement::Kind::With: {
            if (s.with_call) {
                project_call(*s.with_call, s.role == role_ ? s.pattern : make_pat_wildcard());
            } else if (s.role == role_) {
                Instr i;
                i.op = Instr::Op::Eval;
                i.bind = s.pattern;
                i.expr = s.expr;
                emit(std::move(i));
            }
            return project_stmts(s.rest, value_pos);
        }
        case Statement::Kind::Call: {
            project_call(s, make_pat_wildcard());
            return value_pos ? ValueSource::dollar() : ValueSource::nil();
        }
        }
        return ValueSource::nil();
    }

    void project_call(const Statement& s, PatternPtr bind) {
        Instr c;
        c.op = s.indirect ? Instr::Op::CallIndirect : Instr::Op::CallFn;
        c.fname = s.fname;
        c.arity = static_cast<int>(s.args.size());
        for (const auto& a : s.args) {
            ArgSpec spec;
            switch (a.kind) {
            case CallArg::Kind::Located:
                if (a.role == role_) {
                    spec.kind = ArgSpec::Kind::Mine;
                    spec.expr = a.expr;
                } else {
                    spec.kind = ArgSpec::Kind::Dummy;
                }
                break;
            case CallArg::Kind::FuncRefLit:
                spec.kind = ArgSpec::Kind::FuncRefLit;
                spec.fname = a.fname;
                spec.arity = a.arity;
                break;
            case CallArg::Kind::FuncParam:
                spec.kind = ArgSpec::Kind::FuncVar;
                spec.fname = a.fname;
                break;
            }
            c.args.push_back(std::move(spec));
        }
        InstrRef ref = emit(std::move(c));
        int landing = new_block(EntryKind{EntryKind::K::ReturnLanding, -1, {}, std::move(bind)});
        at(ref).return_tok = landing;
        cur_ = landing;
    }

    std::vector<RoleName> notified_roles(const Statement& s) const {
        if (s.notify) return *s.notify;
        std::vector<RoleName> all;
        for (const auto& r : prog_.roles)
            if (r != s.decider) all.push_back(r);
        return all;
    }

    ValueSource project_if(const Statement& s, bool value_pos) {
        std::vector<RoleName> notified = notified_roles(s);
        bool am_notified =
            std::find(notified.begin(), notified.end(), role_) != notified.end();

        if (role_ == s.decider) {
            Instr ev;
            ev.op = Instr::Op::Eval;
            ev.bind = make_pat_var(kCondVar);
            ev.expr = s.expr;
            emit(std::move(ev));
            if (!notified.empty()) {
                Instr sc;
                sc.op = Instr::Op::SendChoice;
                sc.site = s.site;
                sc.dests = notified;
                emit(std::move(sc));
            }
            Instr br;
            br.op = Instr::Op::BranchLocal;
            InstrRef bref = emit(std::move(br));
            return project_branches(s, bref, value_pos);
        }
        if (am_notified) {
            int cb = new_block(EntryKind{EntryKind::K::AwaitChoice, s.site, s.decider, nullptr});
            Instr t;
            t.op = Instr::Op::Await;
            t.target = cb;
            emit(std::move(t));
            cur_ = cb;
            Instr br;
            br.op = Instr::Op::BranchOnChoice;
            br.site = s.site;
            InstrRef bref = emit(std::move(br));
            return project_branches(s, bref, value_pos);
        }
        return project_merged(s, value_pos);
    }

    ValueSource project_branches(const Statement& s, InstrRef branch, bool value_pos) {
        int tb = new_block(EntryKind{EntryKind::K::Plain, -1, {}, nullptr});
        cur_ = tb;
        ValueSource ts = project_stmts(s.then_branch, value_pos);
        if (value_pos) ensure_dollar_v(ts);
        Instr gt;
        gt.op = Instr::Op::Goto;
        InstrRef gtr = emit(std::move(gt));

        int eb = new_block(EntryKind{EntryKind::K::Plain, -1, {}, nullptr});
        cur_ = eb;
        ValueSource es = project_stmts(s.else_branch, value_pos);
        if (value_pos) ensure_dollar_v(es);
        Instr ge;
        ge.op = Instr::Op::Goto;
        InstrRef ger = emit(std::move(ge));

        int jb = new_block(EntryKind{EntryKind::K::Plain, -1, {}, nullptr});
        at(branch).then_tok = tb;
        at(branch).else_tok = eb;
        at(gtr).target = jb;
        at(ger).target = jb;
        cur_ = jb;
        return value_pos ? ValueSource::dollar() : ValueSource::nil();
    }

    /// A role that is not told the choice projects both branches from the
    /// same starting state; they must come out identical.
    ValueSource project_merged(const Statement& s, bool value_pos) {
        int pre_blocks = static_cast<int>(ep_.blocks.size());
        int pre_cur = cur_;
        int pre_len = static_cast<int>(ep_.blocks[cur_].body.size());
        int pre_ordinal = ordinal_;
        std::vector<HandlerBlock> saved_blocks = ep_.blocks;

        ValueSource ts = project_stmts(s.then_branch, value_pos);
        std::vector<HandlerBlock> then_blocks = std::move(ep_.blocks);
        int then_cur = cur_;
        int then_ordinal = ordinal_;

        ep_.blocks = std::move(saved_blocks);
        cur_ = pre_cur;
        ordinal_ = pre_ordinal;
        ValueSource es = project_stmts(s.else_branch, value_pos);

        // compare everything either projection added
        std::string diff = compare_projection(then_blocks, ep_.blocks, pre_blocks, pre_cur, pre_len);
        if (diff.empty() && !detail::valuesource_equal(ts, es))
            diff = "branch results differ";
        if (!diff.empty()) throw MergeError{role_, s.span, diff};

        // keep the else projection (identical to then); resume where it ended
        (void)then_cur;
        (void)then_ordinal;
        return ts;
    }

    std::string compare_projection(const std::vector<HandlerBlock>& a,
                                   const std::vector<HandlerBlock>& b, int pre_blocks, int pre_cur,
                                   int pre_len) const {
        if (a.size() != b.size()) return "branches split handler blocks differently";
        for (size_t bi = 0; bi < a.size(); ++bi) {
            const HandlerBlock& x = a[bi];
            const HandlerBlock& y = b[bi];
            bool is_new = static_cast<int>(bi) >= pre_blocks;
            if (!is_new && static_cast<int>(bi) != pre_cur) continue;
            if (is_new && !detail::entry_equal(x.entry, y.entry))
                return "handler entries differ at " + x.token.str();
            size_t start = static_cast<int>(bi) == pre_cur ? static_cast<size_t>(pre_len) : 0;
            if (x.body.size() != y.body.size())
                return "instruction counts differ at " + x.token.str();
            for (size_t ii = start; ii < x.body.size(); ++ii)
                if (!detail::instr_equal(x.body[ii], y.body[ii]))
                    return "instructions differ at " + x.token.str();
        }
        return {};
    }

    ValueSource project_checkpoint(const Statement& s, bool value_pos) {
        Instr en;
        en.op = Instr::Op::EnterCheckpoint;
        en.site = s.site;
        InstrRef enref = emit(std::move(en));

        ValueSource bs = project_stmts(s.body, value_pos);
        if (value_pos) ensure_dollar_v(bs);
        Instr ex;
        ex.op = Instr::Op::ExitCheckpoint;
        ex.site = s.site;
        emit(std::move(ex));
        int barrier = new_block(EntryKind{EntryKind::K::AwaitBarrier, s.site, {}, nullptr});
        Instr aw;
        aw.op = Instr::Op::Await;
        aw.target = barrier;
        emit(std::move(aw));

        int rescue = new_block(EntryKind{EntryKind::K::Plain, -1, {}, nullptr});
        cur_ = rescue;
        ValueSource rs = project_stmts(s.rescue, value_pos);
        if (value_pos) ensure_dollar_v(rs);
        Instr rex;
        rex.op = Instr::Op::ExitCheckpoint;
        rex.site = s.site;
        emit(std::move(rex));
        Instr raw;
        raw.op = Instr::Op::Await;
        raw.target = barrier;
        emit(std::move(raw));

        at(enref).rescue_tok = rescue;
        at(enref).exit_tok = barrier;
        cur_ = barrier;
        return value_pos ? ValueSource::dollar() : ValueSource::nil();
    }
};

/// Throws MergeError when a non-notified role's branches differ.
inline EndpointProgram project(const ChorProgram& prog, const RoleName& role);

// ---------------------------------------------------------------------------
// Live-variable analysis: backward dataflow to a fixpoint over each
// function's handler blocks.

namespace detail {

inline void expr_free_vars(const Expr& e, std::set<std::string>& out) {
    if (e.kind == Expr::Kind::Var) out.insert(e.name);
    for (const auto& a : e.args) expr_free_vars(*a, out);
}

struct DefUse {
    std::set<std::string> defs, uses;
};

inline DefUse instr_defuse(const Instr& i) {
    DefUse du;
    switch (i.op) {
    case Instr::Op::Eval: {
        expr_free_vars(*i.expr, du.uses);
        PatternVars pv = pattern_vars(*i.bind);
        du.uses.insert(pv.used.begin(), pv.used.end());
        du.defs.insert(pv.bound.begin(), pv.bound.end());
        break;
    }
    case Instr::Op::Send:
        expr_free_vars(*i.expr, du.uses);
        break;
    case Instr::Op::SendChoice:
    case Instr::Op::BranchLocal:
        du.uses.insert(kCondVar);
        break;
    case Instr::Op::BranchOnChoice:
        du.uses.insert(kChoiceVar);
        break;
    case Instr::Op::CallFn:
    case Instr::Op::CallIndirect:
        for (const auto& a : i.args) {
            if (a.kind == ArgSpec::Kind::Mine) expr_free_vars(*a.expr, du.uses);
            if (a.kind == ArgSpec::Kind::FuncVar) du.uses.insert(a.fname);
        }
        if (i.op == Instr::Op::CallIndirect) du.uses.insert(i.fname);
        break;
    case Instr::Op::Return:
    case Instr::Op::FinishRun:
        if (i.src.kind == ValueSource::Kind::DollarV) du.uses.insert(kValueVar);
        if (i.src.kind == ValueSource::Kind::Expr) expr_free_vars(*i.src.expr, du.uses);
        break;
    default:
        break;
    }
    return du;
}

inline DefUse entry_defuse(const EntryKind& e) {
    DefUse du;
    switch (e.k) {
    case EntryKind::K::AwaitRecv: {
        PatternVars pv = pattern_vars(*e.pattern);
        du.uses.insert(pv.used.begin(), pv.used.end());
        du.defs.insert(pv.bound.begin(), pv.bound.end());
        du.defs.insert(kValueVar);
        break;
    }
    case EntryKind::K::ReturnLanding: {
        PatternVars pv = pattern_vars(*e.pattern);
        du.uses.insert(pv.used.begin(), pv.used.end());
        du.defs.insert(pv.bound.begin(), pv.bound.end());
        du.defs.insert(kValueVar);
        break;
    }
    case EntryKind::K::AwaitChoice:
        du.defs.insert(kChoiceVar);
        break;
    default:
        break;
    }
    return du;
}

inline std::vector<int> successors(const Instr& term) {
    switch (term.op) {
    case Instr::Op::Goto:
    case Instr::Op::Await:
        return {term.target};
    case Instr::Op::BranchLocal:
    case Instr::Op::BranchOnChoice:
        return {term.then_tok, term.else_tok};
    case Instr::Op::CallFn:
    case Instr::Op::CallIndirect:
        return {term.return_tok}; // callee runs on fresh variables
    default:
        return {};
    }
}

} // namespace detail

inline void live_variables(EndpointProgram& ep) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (int bi = static_cast<int>(ep.blocks.size()) - 1; bi >= 0; --bi) {
            HandlerBlock& b = ep.blocks[bi];
            std::set<std::string> out;
            if (!b.body.empty())
                for (int succ : detail::successors(b.body.back()))
                    if (succ >= 0) {
                        const auto& li = ep.blocks[succ].live_in;
                        out.insert(li.begin(), li.end());
                    }
            std::set<std::string> live = out;
            for (int ii = static_cast<int>(b.body.size()) - 1; ii >= 0; --ii) {
                detail::DefUse du = detail::instr_defuse(b.body[ii]);
                for (const auto& d : du.defs) live.erase(d);
                live.insert(du.uses.begin(), du.uses.end());
            }
            detail::DefUse edu = detail::entry_defuse(b.entry);
            for (const auto& d : edu.defs) live.erase(d);
            live.insert(edu.uses.begin(), edu.uses.end());
            if (live != b.live_in || out != b.live_out) {
                b.live_in = std::move(live);
                b.live_out = std::move(out);
                changed = true;
            }
        }
    }
}

inline EndpointProgram project(const ChorProgram& prog, const RoleName& role) {
    Projector p(prog, role);
    EndpointProgram ep = p.project();
    live_variables(ep);
    return ep;
}

/// Empty result iff projection succeeds for every role.
inline std::vector<KocError> check_knowledge_of_choice(const ChorProgram& prog) {
    std::vector<KocError> errors;
    for (const auto& role : prog.roles) {
        try {
            Projector p(prog, role);
            (void)p.project();
        } catch (const MergeError& e) {
            errors.push_back(e);
        }
    }
    return errors;
}

// ---------------------------------------------------------------------------
// Deterministic textual listing (CLI `project`, golden tests).

namespace detail {

inline std::string token_ref(const EndpointProgram& ep, int idx) {
    return idx >= 0 && idx < static_cast<int>(ep.blocks.size()) ? ep.blocks[idx].token.str()
                                                                : "?";
}

inline std::string argspec_text(const ArgSpec& a) {
    switch (a.kind) {
    case ArgSpec::Kind::Mine: return expr_to_text(*a.expr);
    case ArgSpec::Kind::FuncRefLit: return "@" + a.fname + "/" + std::to_string(a.arity);
    case ArgSpec::Kind::FuncVar: return a.fname;
    case ArgSpec::Kind::Dummy: return "_";
    }
    return "?";
}

inline std::string src_text(const ValueSource& s) {
    switch (s.kind) {
    case ValueSource::Kind::Nil: return "nil";
    case ValueSource::Kind::DollarV: return kValueVar;
    case ValueSource::Kind::Expr: return expr_to_text(*s.expr);
    }
    return "?";
}

} // namespace detail

inline std::string print_endpoint(const EndpointProgram& ep) {
    std::ostringstream os;
    os << "role " << ep.role << "\n";
    os << "entry " << detail::token_ref(ep, ep.entry) << "\n";
    for (const auto& b : ep.blocks) {
        os << "block " << b.token.str() << " ";
        switch (b.entry.k) {
        case EntryKind::K::Start: os << "[start]"; break;
        case EntryKind::K::Plain: os << "[plain]"; break;
        case EntryKind::K::AwaitRecv:
            os << "[recv site=" << b.entry.site << " from=" << b.entry.from << " bind "
               << pattern_to_text(*b.entry.pattern) << "]";
            break;
        case EntryKind::K::AwaitChoice:
            os << "[choice site=" << b.entry.site << " from=" << b.entry.from << "]";
            break;
        case EntryKind::K::AwaitBarrier: os << "[barrier ckpt=" << b.entry.site << "]"; break;
        case EntryKind::K::ReturnLanding:
            os << "[landing bind " << pattern_to_text(*b.entry.pattern) << "]";
            break;
        }
        os << " live_in={";
        bool first = true;
        for (const auto& v : b.live_in) {
            if (!first) os << ", ";
            os << v;
            first = false;
        }
        os << "}\n";
        for (const auto& i : b.body) {
            os << "  ";
            switch (i.op) {
            case Instr::Op::Eval:
                os << "eval " << pattern_to_text(*i.bind) << " <- " << expr_to_text(*i.expr);
                break;
            case Instr::Op::Send:
                os << "send site=" << i.site << " to " << i.dest << ": " << expr_to_text(*i.expr);
                break;
            case Instr::Op::SendChoice: {
                os << "send_choice site=" << i.site << " to [";
                for (size_t d = 0; d < i.dests.size(); ++d)
                    os << (d ? ", " : "") << i.dests[d];
                os << "]";
                break;
            }
            case Instr::Op::BranchLocal:
                os << "branch " << kCondVar << " ? " << detail::token_ref(ep, i.then_tok) << " : "
                   << detail::token_ref(ep, i.else_tok);
                break;
            case Instr::Op::BranchOnChoice:
                os << "branch_choice site=" << i.site << " ? " << detail::token_ref(ep, i.then_tok)
                   << " : " << detail::token_ref(ep, i.else_tok);
                break;
            case Instr::Op::CallFn:
            case Instr::Op::CallIndirect: {
                os << (i.op == Instr::Op::CallFn ? "call " : "calli ") << i.fname;
                if (i.op == Instr::Op::CallFn) os << "/" << i.arity;
                os << "(";
                for (size_t a = 0; a < i.args.size(); ++a)
                    os << (a ? ", " : "") << detail::argspec_text(i.args[a]);
                os << ") ret=" << detail::token_ref(ep, i.return_tok);
                break;
            }
            case Instr::Op::Return: os << "return " << detail::src_text(i.src); break;
            case Instr::Op::FinishRun: os << "finish " << detail::src_text(i.src); break;
            case Instr::Op::EnterCheckpoint:
                os << "enter_ckpt site=" << i.site << " rescue=" << detail::token_ref(ep, i.rescue_tok)
                   << " exit=" << detail::token_ref(ep, i.exit_tok);
                break;
            case Instr::Op::ExitCheckpoint: os << "exit_ckpt site=" << i.site; break;
            case Instr::Op::Goto: os << "goto " << detail::token_ref(ep, i.target); break;
            case Instr::Op::Await: os << "await " << detail::token_ref(ep, i.target); break;
            }
            os << "\n";
        }
    }
    return os.str();
}

} // namespace chorex
