#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecalp/kb.hpp"
#include "ecalp/term.hpp"

namespace ecalp {

/// Injectable time source so periodic behavior is testable.
class Clock {
public:
    virtual ~Clock() = default;
    virtual TimePoint now() const = 0;
};

class SystemClock : public Clock {
public:
    TimePoint now() const override;
};

class SimulatedClock : public Clock {
public:
    explicit SimulatedClock(TimePoint start) : now_(start.to_seconds()) {}
    TimePoint now() const override { return TimePoint::from_seconds(now_); }
    void advance_seconds(long long s) { now_ += s; }
    void advance(const TimeSpan& by) { now_ += by.total_seconds(); }

private:
    long long now_;
};

/// Per-call-site periodic timers backing interval/2. When armed with a
/// baseline (daemon start), a timer first fires one full period after the
/// baseline; without one, the first call fires immediately. Safe to share
/// across worker threads.
class TimerRegistry {
public:
    void arm(TimePoint baseline) {
        std::lock_guard<std::mutex> lock(mutex_);
        baseline_ = baseline;
    }

    bool check(const std::string& key, const TimeSpan& period, TimePoint now);

private:
    std::mutex mutex_;
    std::optional<TimePoint> baseline_;
    std::map<std::string, long long> last_fire_;   // epoch seconds
};

/// Deferred KB effect queued during a proof and applied by the caller
/// (daemon writer or CLI) after the owning proof branch completes.
struct Intent {
    enum class Kind { Add, Remove, Transaction, Consume, Message };
    enum class ConsumePolicy { All, First, Last };

    Kind kind = Kind::Add;
    std::string oid;                    // Add, Remove
    std::string payload_text;           // Add: clause text, parsed at apply time
    std::vector<Term> payload_bindings; // Add: positional values for _0,_1,... placeholders
    std::vector<Intent> ops;            // Transaction
    Term consume_target;                // Consume: eis(K) or an occurrence pattern
    ConsumePolicy policy = ConsumePolicy::All;
    Term recipient;                     // Message
    Term message;                       // Message
};

struct SolverOptions {
    int max_depth = 10000;
    bool loop_check = true;
    bool occurs_check = true;
    std::optional<std::string> scope;         // restrict resolution to one module
    std::shared_ptr<const Clock> clock;       // defaults to the system clock
    std::shared_ptr<TimerRegistry> timers;    // shared across cycles by the daemon
    std::string timer_scope = "query";        // eca rule identity for timer keys
};

class SolverError : public std::runtime_error {
public:
    enum class Kind { Floundering, DepthExceeded, BadCall, UnknownBuiltin };

    SolverError(Kind kind, const std::string& message, Term literal)
        : std::runtime_error(message), kind(kind), literal(std::move(literal)) {}

    Kind kind;
    Term literal;
};

class Solver;

/// Where in the program the selected literal came from; stable across
/// cycles, so stateful builtins can key their state by call site.
struct CallSite {
    std::uint64_t clause_stamp = 0;
    std::size_t literal_index = 0;
};

/// Execution context handed to builtins.
class BuiltinContext {
public:
    BuiltinContext(Solver& solver, const CallSite& site) : solver_(solver), site_(site) {}

    const KnowledgeState& state() const;
    const SolverOptions& options() const;
    const Clock& clock() const;
    const CallSite& site() const { return site_; }

    void emit(Intent intent);
    VarId fresh_var();

    /// Prove goals in a nested run over an arbitrary state; intents from the
    /// nested run are discarded. yield returning false stops enumeration.
    bool prove(const KnowledgeState& state, const std::vector<Term>& goals,
               const Substitution& seed,
               const std::function<bool(const Substitution&)>& yield) const;

    /// Nested run over the current state with a scope override (partial/2).
    bool prove_scoped(const std::optional<std::string>& scope, const std::vector<Term>& goals,
                      const Substitution& seed,
                      const std::function<bool(const Substitution&)>& yield) const;

private:
    Solver& solver_;
    CallSite site_;
};

/// A builtin enumerates solutions by calling yield with extended
/// substitutions. Returning false from yield stops the enumeration and must
/// be propagated as the builtin's return value. A builtin that never yields
/// has failed. Errors are thrown as SolverError.
using BuiltinFn =
    std::function<bool(BuiltinContext& ctx, const Term& goal, const Substitution& input,
                       const std::function<bool(const Substitution&)>& yield)>;

/// Host-function registry: the portable replacement for reflective
/// procedural attachments.
class BuiltinRegistry {
public:
    void add(const std::string& name, std::size_t arity, BuiltinFn fn, bool effectful = false);
    const BuiltinFn* find(const std::string& name, std::size_t arity) const;
    bool is_effectful(const std::string& name, std::size_t arity) const;

    /// Comparisons, unification, arithmetic, sysTime, interval, partial.
    static BuiltinRegistry standard();

private:
    struct Entry {
        BuiltinFn fn;
        bool effectful;
    };
    std::map<std::pair<std::string, std::size_t>, Entry> entries_;
};

/// Invoke one registered builtin directly; unknown name/arity is an error.
bool call_builtin(Solver& solver, const Term& goal, const Substitution& input,
                  const std::function<bool(const Substitution&)>& yield);

using AnswerFn = std::function<bool(const Substitution&, const std::vector<Intent>&)>;

/// SLDNF resolution over one immutable snapshot: leftmost selection,
/// depth-first search in clause order, cut, negation as finite failure.
class Solver {
public:
    Solver(const KnowledgeState& state, const BuiltinRegistry& builtins, SolverOptions opts = {});

    /// Enumerate answers in derivation order. on_answer returning false
    /// stops the search. Intents passed to on_answer are the ones queued on
    /// the current proof branch, in emission order.
    void solve(const std::vector<Term>& goals, const AnswerFn& on_answer);
    void solve_seeded(const std::vector<Term>& goals, const Substitution& seed,
                      const AnswerFn& on_answer);

    std::optional<std::pair<Substitution, std::vector<Intent>>> solve_first(
        const std::vector<Term>& goals);
    bool provable(const std::vector<Term>& goals);
    std::vector<Substitution> solve_all(const std::vector<Term>& goals, std::size_t limit = 0);

    const KnowledgeState& state() const { return state_; }
    const SolverOptions& options() const { return opts_; }
    const BuiltinRegistry& builtins() const { return builtins_; }
    const Clock& clock() const;

    /// Fresh-variable floor, for callers that chain several solvers over one
    /// binding environment: renamed clause variables can leak into answers,
    /// so the next solver must start numbering above them.
    VarId var_floor() const { return var_counter_; }
    void raise_var_floor(VarId floor) {
        if (floor > var_counter_) var_counter_ = floor;
    }

private:
    friend class BuiltinContext;

    struct CutUnwind {
        int level;
    };

    /// A pending literal plus the cut barrier of the clause body it came
    /// from, so `!` prunes at the right choice point even after body and
    /// caller continuation are spliced into one goal list.
    struct Framed {
        Term lit;
        int cut_level;
        CallSite site;
    };

    bool solve_goals(const std::vector<Framed>& goals, std::size_t index, Substitution s,
                     int depth, std::vector<Term>& ancestors,
                     const std::function<bool(const Substitution&)>& yield);

    bool resolve_user_atom(const Term& atom, const std::vector<Framed>& goals, std::size_t index,
                           const Substitution& s, int depth, std::vector<Term>& ancestors,
                           const std::function<bool(const Substitution&)>& yield);

    bool negation_holds(const Term& literal, const Term& inner, const Substitution& s, int depth,
                        std::vector<Term>& ancestors);

    const KnowledgeState& state_;
    const BuiltinRegistry& builtins_;
    SolverOptions opts_;
    std::shared_ptr<const Clock> fallback_clock_;
    VarId var_counter_ = 1'000'000'000;   // above anything the parser hands out
    std::vector<Intent> trail_;
    int next_cut_level_ = 1;
    CallSite current_site_;
};

struct TermLess {
    bool operator()(const Term& a, const Term& b) const { return term_order(a, b) < 0; }
};
using TermSet = std::set<Term, TermLess>;

/// Three-valued well-founded model of a ground, function-free program,
/// computed by alternating-fixpoint iteration. Independent of the solver;
/// used as a validation oracle.
struct WfsModel {
    TermSet true_atoms;
    TermSet false_atoms;
    TermSet undefined_atoms;
};

/// Throws std::invalid_argument on non-ground input or reserved constructs
/// (cut, builtins).
WfsModel wfs_model(const std::vector<Clause>& program);

}   // namespace ecalp
