#include "ecalp/eca_daemon.hpp"

#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ecalp/parser.hpp"
#include "ecalp/updates.hpp"

namespace ecalp {

namespace {

struct StageAnswer {
    bool found = false;
    Substitution subst;
    std::vector<Intent> intents;
};

// One stage of a rule = a fresh solver over the same snapshot. The floor
// carries the fresh-variable counter across stages so bindings seeded from
// an earlier stage cannot be captured by this stage's clause renaming.
StageAnswer first_answer(const KnowledgeState& state, const BuiltinRegistry& reg,
                         const SolverOptions& sopts, const std::vector<Term>& goals,
                         const Substitution& seed, VarId& floor) {
    Solver solver(state, reg, sopts);
    solver.raise_var_floor(floor);
    StageAnswer out;
    solver.solve_seeded(goals, seed,
                        [&](const Substitution& s, const std::vector<Intent>& intents) {
                            out.found = true;
                            out.subst = s;
                            out.intents = intents;
                            return false;
                        });
    floor = solver.var_floor();
    return out;
}

struct Evaluation {
    RuleOutcome outcome;
    bool wants_commit = false;
    std::string stage;          // "action" or "else"
    std::vector<Intent> ops;    // winning branch intents, gate parts included
};

void append_intents(std::vector<Intent>& into, std::vector<Intent> from) {
    for (Intent& intent : from) into.push_back(std::move(intent));
}

// T ∧ E ∧ ((C ∧ A ∧ P) ∨ EL), read-only: decides what the rule wants to do
// without touching the store. Blank conjuncts succeed immediately; a blank
// else means the disjunct is absent, so an exhausted action branch succeeds
// vacuously but must not apply anything (a rule whose action fails does not
// consume its triggering events).
Evaluation evaluate_eca(const EcaRule& rule, const KnowledgeState& state,
                        const BuiltinRegistry& reg, const DaemonOptions& opts) {
    Evaluation ev;
    ev.outcome.rule_id = rule.id;
    if (is_blank(rule.action)) {
        ev.outcome.kind = RuleOutcome::Kind::Inert;
        return ev;
    }

    SolverOptions sopts;
    sopts.clock = opts.clock;
    sopts.timers = opts.timers;
    sopts.timer_scope = rule.id;

    Substitution theta;
    std::vector<Intent> gate;   // intents queued while proving T and E
    VarId floor = 0;

    const char* stage = "time";
    try {
        if (!is_blank(rule.time)) {
            StageAnswer t = first_answer(state, reg, sopts, {rule.time}, theta, floor);
            if (!t.found) {
                ev.outcome.kind = RuleOutcome::Kind::TimeNotDue;
                return ev;
            }
            theta = std::move(t.subst);
            append_intents(gate, std::move(t.intents));
        }

        stage = "event";
        if (!is_blank(rule.event)) {
            StageAnswer e = first_answer(state, reg, sopts, {rule.event}, theta, floor);
            if (!e.found) {
                ev.outcome.kind = RuleOutcome::Kind::EventAbsent;
                return ev;
            }
            theta = std::move(e.subst);
            append_intents(gate, std::move(e.intents));
        }

        stage = "action";
        std::vector<Term> branch;
        for (const Term* part : {&rule.condition, &rule.action, &rule.postcond})
            if (!is_blank(*part)) branch.push_back(*part);
        StageAnswer body = first_answer(state, reg, sopts, branch, theta, floor);
        if (body.found) {
            ev.outcome.kind = RuleOutcome::Kind::Fired;
            ev.wants_commit = true;
            ev.stage = "action";
            ev.ops = std::move(gate);
            append_intents(ev.ops, std::move(body.intents));
            return ev;
        }

        if (is_blank(rule.else_action)) {
            ev.outcome.kind = RuleOutcome::Kind::ElseFired;
            return ev;
        }

        stage = "else";
        StageAnswer alt = first_answer(state, reg, sopts, {rule.else_action}, theta, floor);
        if (!alt.found) {
            ev.outcome.kind = RuleOutcome::Kind::Failed;
            ev.outcome.stage = "else";
            ev.outcome.diagnostic = "else part exhausted";
            return ev;
        }
        ev.outcome.kind = RuleOutcome::Kind::ElseFired;
        ev.wants_commit = true;
        ev.stage = "else";
        ev.ops = std::move(gate);
        append_intents(ev.ops, std::move(alt.intents));
        return ev;
    } catch (const SolverError& err) {
        ev = Evaluation{};
        ev.outcome.rule_id = rule.id;
        ev.outcome.kind = RuleOutcome::Kind::Failed;
        ev.outcome.stage = stage;
        ev.outcome.diagnostic = err.what();
        return ev;
    }
}

std::string violation_summary(const TxResult& tx) {
    std::string out;
    auto add = [&](const std::string& piece) {
        if (!out.empty()) out += "; ";
        out += piece;
    };
    for (const ConstraintViolation& v : tx.violations)
        add("integrity " + format_term(v.constraint) + ": " + v.witness);
    for (const std::string& e : tx.errors) add(e);
    return out.empty() ? "transaction rolled back" : out;
}

// Commit the winning branch as one transaction; on rollback the outcome
// flips to failed(post) and the state stays as it was.
void apply_branch(ExecResult& r, Evaluation& ev, const BuiltinRegistry& reg) {
    std::uint64_t pre = r.state.state_index();
    TxResult tx = run_transaction(r.state, ev.ops, reg);
    if (!tx.committed()) {
        ev.outcome.kind = RuleOutcome::Kind::Failed;
        ev.outcome.stage = "post";
        ev.outcome.diagnostic = violation_summary(tx);
        r.outcome = ev.outcome;
        return;
    }
    r.state = *tx.state;
    r.outcome = ev.outcome;

    TransitionRecord tr;
    tr.pre_state_index = pre;
    tr.post_state_index = r.state.state_index();
    tr.rule_id = ev.outcome.rule_id;
    tr.stage = ev.stage;
    for (std::uint64_t i = pre; i < tr.post_state_index; ++i)
        tr.updates.push_back(r.state.history()[i]);
    r.transitions.push_back(std::move(tr));

    for (const auto& [recipient, message] : tx.messages)
        r.messages.push_back(DeliveredMessage{recipient, message});
}

}   // namespace

MessageSink default_message_sink() {
    return [](const Term& recipient, const Term& message) {
        std::cout << "NOTIFY " << format_term(recipient) << " " << format_term(message)
                  << std::endl;
    };
}

std::vector<EcaRule> collect_eca_rules(const KnowledgeState& state) {
    std::vector<EcaRule> rules;
    std::map<std::string, std::size_t> ordinal;
    const std::vector<Term>& facts = state.eca_rules();
    const std::vector<std::string>& oids = state.eca_rule_oids();
    for (std::size_t i = 0; i < facts.size(); ++i) {
        auto parts = facts[i].args();
        EcaRule rule{oids[i] + "#" + std::to_string(ordinal[oids[i]]++),
                     oids[i],
                     parts[0],
                     parts[1],
                     parts[2],
                     parts[3],
                     parts[4],
                     parts[5]};
        rules.push_back(std::move(rule));
    }
    return rules;
}

ExecResult execute_eca(const EcaRule& rule, const KnowledgeState& state,
                       const BuiltinRegistry& builtins, const DaemonOptions& opts) {
    Evaluation ev = evaluate_eca(rule, state, builtins, opts);
    ExecResult r{ev.outcome, state, {}, {}};
    if (ev.wants_commit) apply_branch(r, ev, builtins);
    return r;
}

CycleResult run_cycle(const KnowledgeState& state, const BuiltinRegistry& builtins,
                      const DaemonOptions& opts, std::uint64_t cycle_no) {
    CycleResult out;
    out.report.cycle_no = cycle_no;
    out.state = state;
    std::vector<EcaRule> rules = collect_eca_rules(state);

    auto deliver = [&](std::vector<DeliveredMessage> messages) {
        for (DeliveredMessage& m : messages) {
            if (opts.sink) opts.sink(m.recipient, m.message);
            out.report.messages.push_back(std::move(m));
        }
    };

    if (!opts.parallel) {
        for (const EcaRule& rule : rules) {
            ExecResult er = execute_eca(rule, out.state, builtins, opts);
            out.state = std::move(er.state);
            out.report.outcomes.push_back(er.outcome);
            for (TransitionRecord& tr : er.transitions)
                out.report.transitions.push_back(std::move(tr));
            deliver(std::move(er.messages));
        }
        return out;
    }

    // Every rule evaluates against the cycle's entry snapshot on its own
    // worker; the coordinator then commits firings in completion order.
    std::vector<Evaluation> evals(rules.size());
    std::vector<std::size_t> completion;
    std::mutex mu;
    std::vector<std::thread> workers;
    workers.reserve(rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i)
        workers.emplace_back([&, i] {
            Evaluation ev = evaluate_eca(rules[i], state, builtins, opts);
            std::lock_guard<std::mutex> lock(mu);
            evals[i] = std::move(ev);
            completion.push_back(i);
        });
    for (std::thread& w : workers) w.join();

    for (std::size_t i : completion) {
        Evaluation& ev = evals[i];
        if (!ev.wants_commit) continue;
        ExecResult r{ev.outcome, std::move(out.state), {}, {}};
        apply_branch(r, ev, builtins);
        ev.outcome = r.outcome;
        out.state = std::move(r.state);
        for (TransitionRecord& tr : r.transitions)
            out.report.transitions.push_back(std::move(tr));
        deliver(std::move(r.messages));
    }
    for (const Evaluation& ev : evals) out.report.outcomes.push_back(ev.outcome);
    return out;
}

DaemonResult run_daemon(const KnowledgeState& state, const BuiltinRegistry& builtins,
                        const DaemonOptions& opts, std::chrono::milliseconds tick,
                        std::optional<std::uint64_t> max_cycles, const std::atomic<bool>* stop) {
    if (tick.count() <= 0) throw std::invalid_argument("daemon tick must be positive");

    DaemonOptions local = opts;
    if (!local.clock) local.clock = std::make_shared<SystemClock>();
    if (!local.timers) local.timers = std::make_shared<TimerRegistry>();
    local.timers->arm(local.clock->now());
    auto* sim = dynamic_cast<SimulatedClock*>(local.clock.get());

    DaemonResult out{state, {}};
    long long carry_ms = 0;   // sub-second remainders, since sim time is whole seconds
    for (std::uint64_t cycle = 1; !max_cycles || cycle <= *max_cycles; ++cycle) {
        if (stop && stop->load()) break;
        CycleResult res = run_cycle(out.state, builtins, local, cycle);
        out.state = std::move(res.state);
        if (local.on_cycle) local.on_cycle(res.report);
        out.reports.push_back(std::move(res.report));
        bool more = !max_cycles || cycle < *max_cycles;
        if (!more || (stop && stop->load())) break;
        if (sim) {
            carry_ms += tick.count();
            sim->advance_seconds(carry_ms / 1000);
            carry_ms %= 1000;
        } else {
            std::this_thread::sleep_for(tick);
        }
    }
    return out;
}

std::string format_outcome(const RuleOutcome& outcome) {
    switch (outcome.kind) {
        case RuleOutcome::Kind::Fired: return "fired";
        case RuleOutcome::Kind::ElseFired: return "else_fired";
        case RuleOutcome::Kind::TimeNotDue: return "time_not_due";
        case RuleOutcome::Kind::EventAbsent: return "event_absent";
        case RuleOutcome::Kind::Inert: return "inert";
        case RuleOutcome::Kind::Failed:
            return "failed(" + outcome.stage +
                   (outcome.diagnostic.empty() ? "" : ": " + outcome.diagnostic) + ")";
    }
    return "unknown";
}

std::string format_cycle_report(const CycleReport& report) {
    std::ostringstream out;
    out << "cycle " << report.cycle_no << "\n";
    for (const RuleOutcome& o : report.outcomes)
        out << "  " << o.rule_id << "\t" << format_outcome(o) << "\n";
    for (const TransitionRecord& t : report.transitions) {
        out << "  transition " << t.pre_state_index << "->" << t.post_state_index << " "
            << t.rule_id << "/" << t.stage;
        for (const UpdateRecord& u : t.updates)
            out << " " << (u.positive ? "+" : "-") << u.oid
                << (u.positive ? "(" + std::to_string(u.clauses.size()) + ")" : "");
        out << "\n";
    }
    for (const DeliveredMessage& m : report.messages)
        out << "  notify " << format_term(m.recipient) << " " << format_term(m.message) << "\n";
    return out.str();
}

}   // namespace ecalp
