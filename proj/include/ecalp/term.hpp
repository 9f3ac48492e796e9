#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecalp {

using VarId = std::uint64_t;

/// Calendar date-time with one-second granularity. Totally ordered.
struct TimePoint {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;

    static bool valid(int y, int mo, int d, int h, int mi, int s);
    static std::optional<TimePoint> make(int y, int mo, int d, int h, int mi, int s);

    /// Seconds since 1970-01-01 00:00:00 (proleptic Gregorian).
    long long to_seconds() const;
    static TimePoint from_seconds(long long secs);

    friend bool operator==(const TimePoint&, const TimePoint&) = default;
};

/// Non-negative duration split into days/hours/minutes/seconds.
struct TimeSpan {
    int days = 0;
    int hours = 0;
    int minutes = 0;
    int seconds = 0;

    long long total_seconds() const {
        return ((static_cast<long long>(days) * 24 + hours) * 60 + minutes) * 60 + seconds;
    }

    friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

enum class Ordering { Less, Equal, Greater };

Ordering compare(const TimePoint& a, const TimePoint& b);
Ordering compare(const TimeSpan& a, const TimeSpan& b);

/// Thrown when values of incomparable kinds meet in an ordering context.
class TypeClashError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable first-order term. Cheap to copy (shared payload); values are
/// safe to share across threads once constructed.
class Term {
public:
    enum class Kind : std::uint8_t {
        Constant,
        Number,
        Text,
        Variable,
        Compound,
        List,
        TimePoint,
        TimeSpan,
    };

    Term() : Term(constant("[]")) {}

    static Term constant(std::string name);
    static Term number(long long value);
    static Term text(std::string value);
    static Term variable(std::string name, VarId id);
    /// A 0-ary compound degenerates to a Constant.
    static Term compound(std::string functor, std::vector<Term> args);
    static Term list(std::vector<Term> items, std::optional<Term> tail = std::nullopt);
    static Term time_point(TimePoint tp);
    static Term time_span(TimeSpan ts);

    Kind kind() const { return rep_->kind; }
    bool is(Kind k) const { return rep_->kind == k; }

    /// Constant name, Text payload, Variable print name, or Compound functor.
    const std::string& symbol() const { return rep_->symbol; }
    long long number_value() const { return rep_->number; }
    VarId var_id() const { return rep_->var; }
    std::span<const Term> args() const { return rep_->args; }   // compound args / list items
    bool has_tail() const { return rep_->tail != nullptr; }
    const Term& tail() const { return *rep_->tail; }
    const TimePoint& time_point_value() const { return rep_->tp; }
    const TimeSpan& time_span_value() const { return rep_->ts; }

    /// (functor, arity) of a callable atom; Constants have arity 0.
    std::pair<std::string, std::size_t> predicate_key() const;

    bool is_atom_like() const { return is(Kind::Constant) || is(Kind::Compound); }

    bool operator==(const Term& other) const { return equals(*this, other); }
    bool operator!=(const Term& other) const { return !equals(*this, other); }

private:
    struct Rep {
        Kind kind;
        std::string symbol;
        long long number = 0;
        VarId var = 0;
        std::vector<Term> args;
        std::shared_ptr<const Term> tail;   // set only for partial lists
        TimePoint tp;
        TimeSpan ts;
    };

    explicit Term(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
    static bool equals(const Term& a, const Term& b);

    std::shared_ptr<const Rep> rep_;
};

bool is_ground(const Term& t);
void collect_variables(const Term& t, std::vector<VarId>& out);

/// Structural equality modulo a consistent renaming of variables.
bool variant_equal(const Term& a, const Term& b);

/// Total order on terms; used only to obtain deterministic containers.
int term_order(const Term& a, const Term& b);

/// Finite idempotent map Variable -> Term.
class Substitution {
public:
    Substitution() = default;

    bool empty() const { return bindings_.empty(); }
    std::size_t size() const { return bindings_.size(); }

    std::optional<Term> lookup(VarId v) const;

    /// Extend with one binding; the caller guarantees v is unbound.
    Substitution bind(VarId v, Term t) const;

    /// Dereference a variable chain one level at a time until an unbound
    /// variable or a non-variable term is reached.
    Term walk(const Term& t) const;

    /// Replace every bound variable transitively, to a fixed point.
    Term apply(const Term& t) const;

    const std::map<VarId, Term>& bindings() const { return bindings_; }

private:
    std::map<VarId, Term> bindings_;
};

/// Most general unifier of t1 and t2 extending s, or nullopt.
/// Fails (rather than building an infinite term) when occurs_check is on.
std::optional<Substitution> unify(const Term& t1, const Term& t2, const Substitution& s,
                                  bool occurs_check = true);

/// Source position of a parsed clause, for diagnostics.
struct SourceSpan {
    int line = 0;
    int column = 0;
};

/// Head plus ordered body literals; an empty body makes a fact.
struct Clause {
    Term head;
    std::vector<Term> body;
    SourceSpan span;
    std::uint64_t stamp = 0;    // global insertion order, assigned by the KB

    bool is_fact() const { return body.empty(); }
};

bool clause_equal(const Clause& a, const Clause& b);

/// Fresh-variable renaming: every variable gets a new id above `counter`.
/// `counter` advances past all ids handed out.
Clause rename_apart(const Clause& clause, VarId& counter);
Term rename_apart(const Term& t, VarId& counter);

/// compare_time per problem contract: same-kind TimePoint/TimeSpan (Numbers
/// are admitted as plain scalars too); kind mismatch throws TypeClashError.
Ordering compare_time(const Term& a, const Term& b);

}   // namespace ecalp
