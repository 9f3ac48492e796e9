#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecalp/kb.hpp"
#include "ecalp/solver.hpp"
#include "ecalp/term.hpp"

namespace ecalp {

/// One reactive rule polled from an eca/6 fact. Parts are stored as written;
/// a blank part (the `_` marker) is satisfied immediately with no bindings.
struct EcaRule {
    std::string id;     // "<module>#<ordinal>", stable while the module keeps its shape
    std::string oid;    // module holding the fact
    Term time;
    Term event;
    Term condition;
    Term action;
    Term postcond;
    Term else_action;
};

struct RuleOutcome {
    enum class Kind { Fired, ElseFired, TimeNotDue, EventAbsent, Failed, Inert };

    Kind kind = Kind::Inert;
    std::string rule_id;
    std::string stage;        // Failed: which part ("time", "event", "action", "else", "post")
    std::string diagnostic;   // Failed: cause
};

/// One committed rule firing: the KB went from pre to post by applying
/// exactly the listed update records.
struct TransitionRecord {
    std::uint64_t pre_state_index = 0;
    std::uint64_t post_state_index = 0;
    std::string rule_id;
    std::string stage;   // "action" or "else"
    std::vector<UpdateRecord> updates;
};

struct DeliveredMessage {
    Term recipient;
    Term message;
};

struct CycleReport {
    std::uint64_t cycle_no = 0;
    std::vector<RuleOutcome> outcomes;          // one per polled rule, in rule order
    std::vector<TransitionRecord> transitions;  // in commit order
    std::vector<DeliveredMessage> messages;     // in delivery order
};

using MessageSink = std::function<void(const Term& recipient, const Term& message)>;

/// Writes "NOTIFY <recipient> <message>" lines to stdout.
MessageSink default_message_sink();

struct DaemonOptions {
    bool parallel = false;
    std::shared_ptr<Clock> clock;            // kept mutable so a simulated clock can advance
    std::shared_ptr<TimerRegistry> timers;   // shared across cycles; created when null
    MessageSink sink;                        // invoked by run_cycle per delivered message
    std::function<void(const CycleReport&)> on_cycle;   // run_daemon, after each cycle
};

/// Poll all eca/6 facts in module order. Repeated every cycle so rule
/// updates take effect on the next cycle.
std::vector<EcaRule> collect_eca_rules(const KnowledgeState& state);

struct ExecResult {
    RuleOutcome outcome;
    KnowledgeState state;
    std::vector<TransitionRecord> transitions;   // empty or one record
    std::vector<DeliveredMessage> messages;      // delivered only when a transaction commits
};

/// Evaluate one rule as T ∧ E ∧ ((C ∧ A ∧ P) ∨ EL) over the given snapshot:
/// first answer of T, first answer of E seeded with T's bindings, then the
/// condition-action-postcondition conjunction with full backtracking (and
/// cut), falling back to the else part on exhaustion. The winning branch's
/// queued intents are applied as one transaction; on integrity rollback the
/// outcome is Failed("post") and the state comes back unchanged.
ExecResult execute_eca(const EcaRule& rule, const KnowledgeState& state,
                       const BuiltinRegistry& builtins, const DaemonOptions& opts);

struct CycleResult {
    CycleReport report;
    KnowledgeState state;
};

/// Execute all polled rules once. Deterministic mode runs them sequentially
/// in module order, each seeing its predecessors' committed effects.
/// Parallel mode evaluates all rules concurrently against the cycle's entry
/// snapshot and commits their transactions in completion order.
CycleResult run_cycle(const KnowledgeState& state, const BuiltinRegistry& builtins,
                      const DaemonOptions& opts, std::uint64_t cycle_no = 1);

struct DaemonResult {
    KnowledgeState state;
    std::vector<CycleReport> reports;
};

/// Run cycles every tick until max_cycles (0 returns immediately) or until
/// stop becomes true, checked between cycles. A simulated clock is advanced
/// by the tick after each cycle; with a real clock the daemon sleeps.
DaemonResult run_daemon(const KnowledgeState& state, const BuiltinRegistry& builtins,
                        const DaemonOptions& opts, std::chrono::milliseconds tick,
                        std::optional<std::uint64_t> max_cycles,
                        const std::atomic<bool>* stop = nullptr);

std::string format_outcome(const RuleOutcome& outcome);
std::string format_cycle_report(const CycleReport& report);

}   // namespace ecalp
