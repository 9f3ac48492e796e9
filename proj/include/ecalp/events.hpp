#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecalp/kb.hpp"
#include "ecalp/solver.hpp"
#include "ecalp/term.hpp"

namespace ecalp {

/// Time interval spanned by an event; start/end are comparable scalars
/// (TimePoint or Number). Atomic occurrences have start == end.
struct EventInterval {
    Term start;
    Term end;
};

bool interval_equal(const EventInterval& a, const EventInterval& b);

/// One stored occurrence: an `occurs(E, T)` fact in an eis module.
struct Occurrence {
    Term event;
    EventInterval interval;
    std::uint64_t stamp = 0;     // arrival order tiebreak
    std::string module;          // owning eis module
};

/// Compiled event-algebra expression.
struct EventExpr {
    enum class Op {
        Leaf,
        Sequence,
        Conjunction,
        Or,
        Xor,
        Concurrent,
        Not,         // children: [negated, initiator, terminator]
        Any,         // any_n of children
        Aperiodic,   // children: [event, initiator, terminator]
        Periodic     // children: [initiator, terminator], period set
    };

    Op op = Op::Leaf;
    Term leaf;
    Term source;                 // original term, used for terminator pairs
    std::vector<EventExpr> children;
    int any_n = 0;
    TimeSpan period;
};

/// A detected instance: its interval plus the occurrences supporting it.
struct EventMatch {
    EventInterval interval;
    std::vector<Occurrence> support;
};

enum class ConsumePolicy { None, All, First, Last };

struct DetectionRule {
    Term name;   // the complex event type being defined
    EventExpr expr;
    std::vector<std::pair<Term, ConsumePolicy>> consumption;   // per leaf type
};

/// Compile the term form (sequence/or/xor/conjunction/concurrent/not/any/
/// aperiodic/periodic functors) into an expression; diagnoses ill-formed
/// operators (arity, zero period, bad child counts).
std::optional<EventExpr> compile_event_expr(const Term& t, std::string* error = nullptr);

/// All occurrences in the state, ordered by (start time, stamp).
std::vector<Occurrence> collect_occurrences(const KnowledgeState& state);

/// Record `occurs(event, time)` under the event's eis module
/// (eis(functor-of-event)). time is a scalar or a [start, end] list.
KnowledgeState record_occurrence(const KnowledgeState& state, const Term& event,
                                 const Term& time);

/// Enumerate matches of the expression over the snapshot, deterministically
/// ordered by (end, start, support stamps). Terminator declarations
/// (terminates/3 facts) break sequence links, restricted to the
/// expression's leaf types.
std::vector<EventMatch> match_event_expr(const EventExpr& expr, const KnowledgeState& state);

/// Intervals over which the pair [e1, e2] holds unbroken.
std::vector<EventInterval> holds_interval(const Term& e1, const Term& e2,
                                          const KnowledgeState& state);

/// Apply one consumption step to the state (negative or partial update of
/// the matching eis modules). target is eis(K) or an occurrence pattern.
KnowledgeState apply_consume(const KnowledgeState& state, const Term& target,
                             Intent::ConsumePolicy policy);

struct DetectResult {
    std::vector<EventMatch> detections;
    KnowledgeState state;
};

/// Detect the rule's complex event: record occurs(name, [s,e]) under
/// eis(name) for each match, then apply per-leaf consumption. With
/// consumption active, matching is greedy (earliest terminator first) and
/// re-evaluated after each step.
DetectResult detect(const DetectionRule& rule, const KnowledgeState& state);

/// event/2 plus consume/1..2 script builtins.
void register_event_builtins(BuiltinRegistry& reg);

/// Event Calculus axioms (holdsInterval/2..3, broken, brokenWithin,
/// memberOf) as an ordinary module; load it first so every program can
/// query them.
extern const char* const kEventPrelude;
extern const char* const kEventPreludeOid;

}   // namespace ecalp
