#include "ecalp/solver.hpp"

#include <algorithm>
#include <ctime>

#include "ecalp/parser.hpp"

namespace ecalp {

TimePoint SystemClock::now() const {
    return TimePoint::from_seconds(static_cast<long long>(std::time(nullptr)));
}

bool TimerRegistry::check(const std::string& key, const TimeSpan& period, TimePoint now) {
    std::lock_guard<std::mutex> lock(mutex_);
    long long p = period.total_seconds();
    long long t = now.to_seconds();
    auto it = last_fire_.find(key);
    if (it != last_fire_.end()) {
        if (t >= it->second + p) {
            it->second = t;
            return true;
        }
        return false;
    }
    if (baseline_) {
        if (t >= baseline_->to_seconds() + p) {
            last_fire_[key] = t;
            return true;
        }
        return false;
    }
    last_fire_[key] = t;   // unarmed: first call fires immediately
    return true;
}

// ---------------------------------------------------------------------------
// Builtin registry

void BuiltinRegistry::add(const std::string& name, std::size_t arity, BuiltinFn fn,
                          bool effectful) {
    entries_[{name, arity}] = Entry{std::move(fn), effectful};
}

const BuiltinFn* BuiltinRegistry::find(const std::string& name, std::size_t arity) const {
    auto it = entries_.find({name, arity});
    return it == entries_.end() ? nullptr : &it->second.fn;
}

bool BuiltinRegistry::is_effectful(const std::string& name, std::size_t arity) const {
    auto it = entries_.find({name, arity});
    return it != entries_.end() && it->second.effectful;
}

namespace {

[[noreturn]] void bad_call(const Term& goal, const std::string& why) {
    throw SolverError(SolverError::Kind::BadCall, why + ": " + format_term(goal), goal);
}

// Scalar or 2-element-list time comparison. Intervals compare end-of-first
// against start-of-second; a scalar stands for the point interval.
bool eval_relop(const std::string& op, const Term& lhs, const Term& rhs, const Term& goal) {
    auto bounds = [&](const Term& t) -> std::pair<Term, Term> {
        if (t.is(Term::Kind::List)) {
            if (t.args().size() != 2 || t.has_tail())
                bad_call(goal, "comparison over a list needs exactly two elements");
            return {t.args()[0], t.args()[1]};
        }
        return {t, t};
    };
    if (!is_ground(lhs) || !is_ground(rhs)) bad_call(goal, "comparison on unbound arguments");
    Term a, b;
    if (lhs.is(Term::Kind::List) || rhs.is(Term::Kind::List)) {
        if (op == "<" || op == "<=") {
            a = bounds(lhs).second;
            b = bounds(rhs).first;
        } else {
            a = bounds(lhs).first;
            b = bounds(rhs).second;
        }
    } else {
        a = lhs;
        b = rhs;
    }
    Ordering ord;
    try {
        ord = compare_time(a, b);
    } catch (const TypeClashError& e) {
        bad_call(goal, e.what());
    }
    if (op == "<") return ord == Ordering::Less;
    if (op == "<=") return ord != Ordering::Greater;
    if (op == ">") return ord == Ordering::Greater;
    if (op == ">=") return ord != Ordering::Less;
    bad_call(goal, "unknown comparison");
}

TimeSpan span_from_seconds(long long secs, const Term& goal) {
    if (secs < 0) bad_call(goal, "negative duration");
    TimeSpan ts;
    ts.days = static_cast<int>(secs / 86400);
    secs %= 86400;
    ts.hours = static_cast<int>(secs / 3600);
    secs %= 3600;
    ts.minutes = static_cast<int>(secs / 60);
    ts.seconds = static_cast<int>(secs % 60);
    return ts;
}

Term eval_arith(const Term& t, const Term& goal) {
    switch (t.kind()) {
        case Term::Kind::Number:
        case Term::Kind::TimePoint:
        case Term::Kind::TimeSpan: return t;
        case Term::Kind::Compound: break;
        default: bad_call(goal, "not an arithmetic expression");
    }
    if (t.args().size() != 2) bad_call(goal, "not an arithmetic expression");
    Term a = eval_arith(t.args()[0], goal);
    Term b = eval_arith(t.args()[1], goal);
    const std::string& f = t.symbol();
    auto num = [&](const Term& x) {
        if (!x.is(Term::Kind::Number)) bad_call(goal, "number expected");
        return x.number_value();
    };
    if (f == "plus") {
        if (a.is(Term::Kind::Number)) return Term::number(num(a) + num(b));
        if (a.is(Term::Kind::TimePoint) && b.is(Term::Kind::TimeSpan))
            return Term::time_point(
                TimePoint::from_seconds(a.time_point_value().to_seconds() +
                                        b.time_span_value().total_seconds()));
        if (a.is(Term::Kind::TimeSpan) && b.is(Term::Kind::TimePoint))
            return Term::time_point(
                TimePoint::from_seconds(b.time_point_value().to_seconds() +
                                        a.time_span_value().total_seconds()));
        if (a.is(Term::Kind::TimeSpan) && b.is(Term::Kind::TimeSpan))
            return Term::time_span(span_from_seconds(
                a.time_span_value().total_seconds() + b.time_span_value().total_seconds(), goal));
        bad_call(goal, "incompatible operands for plus");
    }
    if (f == "minus") {
        if (a.is(Term::Kind::Number)) return Term::number(num(a) - num(b));
        if (a.is(Term::Kind::TimePoint) && b.is(Term::Kind::TimeSpan))
            return Term::time_point(
                TimePoint::from_seconds(a.time_point_value().to_seconds() -
                                        b.time_span_value().total_seconds()));
        if (a.is(Term::Kind::TimePoint) && b.is(Term::Kind::TimePoint))
            return Term::time_span(span_from_seconds(
                a.time_point_value().to_seconds() - b.time_point_value().to_seconds(), goal));
        if (a.is(Term::Kind::TimeSpan) && b.is(Term::Kind::TimeSpan))
            return Term::time_span(span_from_seconds(
                a.time_span_value().total_seconds() - b.time_span_value().total_seconds(), goal));
        bad_call(goal, "incompatible operands for minus");
    }
    if (f == "times") return Term::number(num(a) * num(b));
    if (f == "div") {
        if (num(b) == 0) bad_call(goal, "division by zero");
        return Term::number(num(a) / num(b));
    }
    if (f == "mod") {
        if (num(b) == 0) bad_call(goal, "division by zero");
        return Term::number(num(a) % num(b));
    }
    bad_call(goal, "unknown arithmetic functor");
}

}   // namespace

BuiltinRegistry BuiltinRegistry::standard() {
    BuiltinRegistry reg;

    for (const char* op : {"<", "<=", ">", ">="}) {
        reg.add(op, 2,
                [op = std::string(op)](BuiltinContext&, const Term& goal, const Substitution& s,
                                       const std::function<bool(const Substitution&)>& yield) {
                    Term lhs = s.apply(goal.args()[0]);
                    Term rhs = s.apply(goal.args()[1]);
                    return eval_relop(op, lhs, rhs, goal) ? yield(s) : true;
                });
    }

    reg.add("=", 2,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& s,
               const std::function<bool(const Substitution&)>& yield) {
                auto u = unify(goal.args()[0], goal.args()[1], s, ctx.options().occurs_check);
                return u ? yield(*u) : true;
            });

    reg.add("!=", 2,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& s,
               const std::function<bool(const Substitution&)>& yield) {
                auto u = unify(goal.args()[0], goal.args()[1], s, ctx.options().occurs_check);
                return u ? true : yield(s);
            });

    reg.add("is", 2,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& s,
               const std::function<bool(const Substitution&)>& yield) {
                Term value = eval_arith(s.apply(goal.args()[1]), goal);
                auto u = unify(goal.args()[0], value, s, ctx.options().occurs_check);
                return u ? yield(*u) : true;
            });

    reg.add("sysTime", 1,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& s,
               const std::function<bool(const Substitution&)>& yield) {
                auto u = unify(goal.args()[0], Term::time_point(ctx.clock().now()), s,
                               ctx.options().occurs_check);
                return u ? yield(*u) : true;
            });

    reg.add("interval", 2,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& s,
               const std::function<bool(const Substitution&)>& yield) {
                Term span = s.apply(goal.args()[0]);
                Term at = s.apply(goal.args()[1]);
                if (!span.is(Term::Kind::TimeSpan)) bad_call(goal, "timespan expected");
                if (span.time_span_value().total_seconds() <= 0)
                    bad_call(goal, "period must be positive");
                if (!at.is(Term::Kind::TimePoint)) bad_call(goal, "timepoint expected");
                std::string key = ctx.options().timer_scope + "@" +
                                  std::to_string(ctx.site().clause_stamp) + ":" +
                                  std::to_string(ctx.site().literal_index);
                std::shared_ptr<TimerRegistry> timers = ctx.options().timers;
                static thread_local TimerRegistry fallback;   // standalone queries
                TimerRegistry& reg2 = timers ? *timers : fallback;
                return reg2.check(key, span.time_span_value(), at.time_point_value()) ? yield(s)
                                                                                      : true;
            });

    reg.add("partial", 2,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& s,
               const std::function<bool(const Substitution&)>& yield) {
                Term where = s.apply(goal.args()[1]);
                if (!where.is(Term::Kind::Constant) && !where.is(Term::Kind::Text))
                    bad_call(goal, "module id expected");
                return ctx.prove_scoped(where.symbol(), {goal.args()[0]}, s, yield);
            });

    return reg;
}

// ---------------------------------------------------------------------------
// Builtin context

const KnowledgeState& BuiltinContext::state() const { return solver_.state_; }
const SolverOptions& BuiltinContext::options() const { return solver_.opts_; }
const Clock& BuiltinContext::clock() const { return solver_.clock(); }
void BuiltinContext::emit(Intent intent) { solver_.trail_.push_back(std::move(intent)); }
VarId BuiltinContext::fresh_var() { return ++solver_.var_counter_; }

bool BuiltinContext::prove(const KnowledgeState& state, const std::vector<Term>& goals,
                           const Substitution& seed,
                           const std::function<bool(const Substitution&)>& yield) const {
    SolverOptions opts = solver_.opts_;
    opts.scope.reset();
    Solver sub(state, solver_.builtins_, opts);
    sub.var_counter_ = solver_.var_counter_;
    bool stopped = false;
    sub.solve_seeded(goals, seed, [&](const Substitution& answer, const std::vector<Intent>&) {
        bool keep = yield(answer);
        if (!keep) stopped = true;
        return keep;
    });
    solver_.var_counter_ = sub.var_counter_;
    return !stopped;
}

bool BuiltinContext::prove_scoped(const std::optional<std::string>& scope,
                                  const std::vector<Term>& goals, const Substitution& seed,
                                  const std::function<bool(const Substitution&)>& yield) const {
    SolverOptions opts = solver_.opts_;
    opts.scope = scope;
    Solver sub(solver_.state_, solver_.builtins_, opts);
    sub.var_counter_ = solver_.var_counter_;
    bool stopped = false;
    sub.solve_seeded(goals, seed, [&](const Substitution& answer, const std::vector<Intent>&) {
        bool keep = yield(answer);
        if (!keep) stopped = true;
        return keep;
    });
    solver_.var_counter_ = sub.var_counter_;
    return !stopped;
}

bool call_builtin(Solver& solver, const Term& goal, const Substitution& input,
                  const std::function<bool(const Substitution&)>& yield) {
    auto [name, arity] = goal.predicate_key();
    const BuiltinFn* fn = solver.builtins().find(name, arity);
    if (!fn)
        throw SolverError(SolverError::Kind::UnknownBuiltin,
                          "unknown builtin: " + name + "/" + std::to_string(arity), goal);
    BuiltinContext ctx(solver, CallSite{});
    return (*fn)(ctx, goal, input, yield);
}

// ---------------------------------------------------------------------------
// Solver

Solver::Solver(const KnowledgeState& state, const BuiltinRegistry& builtins, SolverOptions opts)
    : state_(state), builtins_(builtins), opts_(std::move(opts)) {
    if (!opts_.clock) {
        fallback_clock_ = std::make_shared<SystemClock>();
        opts_.clock = fallback_clock_;
    }
}

const Clock& Solver::clock() const { return *opts_.clock; }

void Solver::solve(const std::vector<Term>& goals, const AnswerFn& on_answer) {
    solve_seeded(goals, Substitution{}, on_answer);
}

void Solver::solve_seeded(const std::vector<Term>& goals, const Substitution& seed,
                          const AnswerFn& on_answer) {
    trail_.clear();
    std::vector<Framed> framed;
    framed.reserve(goals.size());
    for (std::size_t i = 0; i < goals.size(); ++i)
        framed.push_back(Framed{goals[i], 0, CallSite{0, i}});
    std::vector<Term> ancestors;
    try {
        solve_goals(framed, 0, seed, 0, ancestors,
                    [&](const Substitution& s) { return on_answer(s, trail_); });
    } catch (const CutUnwind& cu) {
        if (cu.level != 0) throw;
    }
}

std::optional<std::pair<Substitution, std::vector<Intent>>> Solver::solve_first(
    const std::vector<Term>& goals) {
    std::optional<std::pair<Substitution, std::vector<Intent>>> out;
    solve(goals, [&](const Substitution& s, const std::vector<Intent>& intents) {
        out.emplace(s, intents);
        return false;
    });
    return out;
}

bool Solver::provable(const std::vector<Term>& goals) { return solve_first(goals).has_value(); }

std::vector<Substitution> Solver::solve_all(const std::vector<Term>& goals, std::size_t limit) {
    std::vector<Substitution> out;
    solve(goals, [&](const Substitution& s, const std::vector<Intent>&) {
        out.push_back(s);
        return limit == 0 || out.size() < limit;
    });
    return out;
}

bool Solver::solve_goals(const std::vector<Framed>& goals, std::size_t index, Substitution s,
                         int depth, std::vector<Term>& ancestors,
                         const std::function<bool(const Substitution&)>& yield) {
    if (index == goals.size()) return yield(s);
    if (depth > opts_.max_depth)
        throw SolverError(SolverError::Kind::DepthExceeded,
                          "proof depth exceeded " + std::to_string(opts_.max_depth) +
                              " (possible nontermination)",
                          goals[index].lit);

    const Framed& frame = goals[index];
    Term lit = s.walk(frame.lit);

    switch (lit.kind()) {
        case Term::Kind::Variable:
            throw SolverError(SolverError::Kind::BadCall, "unbound goal", frame.lit);
        case Term::Kind::Number:
        case Term::Kind::Text:
        case Term::Kind::List:
        case Term::Kind::TimePoint:
        case Term::Kind::TimeSpan:
            throw SolverError(SolverError::Kind::BadCall,
                              "goal is not callable: " + format_term(lit), lit);
        default: break;
    }

    const std::string& f = lit.symbol();
    std::size_t arity = lit.is(Term::Kind::Compound) ? lit.args().size() : 0;

    if (arity == 0) {
        if (f == "!") {
            bool cont = solve_goals(goals, index + 1, s, depth, ancestors, yield);
            if (!cont) return false;
            throw CutUnwind{frame.cut_level};
        }
        if (f == "true") return solve_goals(goals, index + 1, s, depth, ancestors, yield);
        if (f == "fail" || f == "false") return true;
    }

    if (f == "not" && arity == 1) {
        if (!negation_holds(lit, lit.args()[0], s, depth, ancestors)) return true;
        return solve_goals(goals, index + 1, s, depth, ancestors, yield);
    }

    if (const BuiltinFn* fn = builtins_.find(f, arity)) {
        BuiltinContext ctx(*this, frame.site);
        std::size_t mark = trail_.size();
        bool cont = (*fn)(ctx, lit, s, [&](const Substitution& s2) {
            bool keep = solve_goals(goals, index + 1, s2, depth, ancestors, yield);
            if (!keep) return false;
            trail_.resize(mark);   // discard this solution's intents before the next
            return true;
        });
        if (cont) trail_.resize(mark);
        return cont;
    }

    return resolve_user_atom(lit, goals, index, s, depth, ancestors, yield);
}

bool Solver::resolve_user_atom(const Term& atom, const std::vector<Framed>& goals,
                               std::size_t index, const Substitution& s, int depth,
                               std::vector<Term>& ancestors,
                               const std::function<bool(const Substitution&)>& yield) {
    if (opts_.loop_check) {
        Term applied = s.apply(atom);
        for (const Term& anc : ancestors)
            if (variant_equal(s.apply(anc), applied)) return true;   // loop: fail this branch
    }

    auto [functor, arity] = atom.predicate_key();
    std::vector<Clause> clauses = state_.clauses_for(functor, arity, opts_.scope);

    // Exception-safe ancestor stack edits: a cut unwind may pass through
    // any of these frames.
    struct Push {
        std::vector<Term>& stack;
        Push(std::vector<Term>& st, Term t) : stack(st) { stack.push_back(std::move(t)); }
        ~Push() { stack.pop_back(); }
    };
    struct PopTemporarily {
        std::vector<Term>& stack;
        Term saved;
        explicit PopTemporarily(std::vector<Term>& st) : stack(st), saved(std::move(st.back())) {
            stack.pop_back();
        }
        ~PopTemporarily() { stack.push_back(std::move(saved)); }
    };

    int my_level = next_cut_level_++;
    Push push_guard(ancestors, atom);
    // The loop check must only see the proof subtree of this atom, so the
    // caller's remaining goals run inside the body's success continuation
    // with the atom popped off the ancestor stack.
    auto continue_rest = [&](const Substitution& s2) {
        PopTemporarily pop_guard(ancestors);
        return solve_goals(goals, index + 1, s2, depth, ancestors, yield);
    };
    try {
        for (const Clause& c : clauses) {
            Clause rc = rename_apart(c, var_counter_);
            auto u = unify(atom, rc.head, s, opts_.occurs_check);
            if (!u) continue;
            std::size_t mark = trail_.size();
            std::vector<Framed> body;
            body.reserve(rc.body.size());
            for (std::size_t i = 0; i < rc.body.size(); ++i)
                body.push_back(Framed{rc.body[i], my_level, CallSite{rc.stamp, i}});
            if (!solve_goals(body, 0, *u, depth + 1, ancestors, continue_rest)) return false;
            trail_.resize(mark);
        }
    } catch (const CutUnwind& cu) {
        if (cu.level == my_level) return true;   // cut: stop trying clause alternatives
        throw;
    }
    return true;
}

bool Solver::negation_holds(const Term& literal, const Term& inner, const Substitution& s,
                            int depth, std::vector<Term>& ancestors) {
    Term applied = s.apply(inner);
    if (!is_ground(applied))
        throw SolverError(SolverError::Kind::Floundering,
                          "floundering: non-ground negation not(" + format_term(applied) + ")",
                          literal);
    std::size_t mark = trail_.size();
    int barrier = next_cut_level_++;
    bool found = false;
    std::vector<Framed> sub = {Framed{applied, barrier, CallSite{0, 0}}};
    try {
        solve_goals(sub, 0, s, depth + 1, ancestors, [&](const Substitution&) {
            found = true;
            return false;
        });
    } catch (const CutUnwind& cu) {
        if (cu.level != barrier) {
            trail_.resize(mark);
            throw;
        }
    }
    trail_.resize(mark);   // a naf subproof is hypothetical: discard its intents
    return !found;
}

// ---------------------------------------------------------------------------
// Well-founded model oracle (alternating fixpoint)

namespace {

struct GroundClause {
    Term head;
    std::vector<Term> pos;
    std::vector<Term> naf;
};

bool reserved_atom(const Term& t) {
    static const std::set<std::string> reserved = {"!",  "true", "fail", "false", "=",
                                                   "!=", "<",    "<=",   ">",     ">=",
                                                   "is", "not",  "sysTime", "interval"};
    return reserved.count(t.symbol()) != 0;
}

}   // namespace

WfsModel wfs_model(const std::vector<Clause>& program) {
    std::vector<GroundClause> rules;
    TermSet base;
    for (const Clause& c : program) {
        if (!is_ground(c.head)) throw std::invalid_argument("wfs_model: non-ground head");
        if (!c.head.is_atom_like() || reserved_atom(c.head))
            throw std::invalid_argument("wfs_model: head is not a plain atom");
        GroundClause gc;
        gc.head = c.head;
        base.insert(c.head);
        for (const Term& lit : c.body) {
            if (lit.is(Term::Kind::Compound) && lit.symbol() == "not" && lit.args().size() == 1) {
                const Term& a = lit.args()[0];
                if (!is_ground(a) || !a.is_atom_like() || reserved_atom(a))
                    throw std::invalid_argument("wfs_model: bad negated literal");
                gc.naf.push_back(a);
                base.insert(a);
                continue;
            }
            if (!is_ground(lit) || !lit.is_atom_like() || reserved_atom(lit))
                throw std::invalid_argument("wfs_model: bad body literal");
            gc.pos.push_back(lit);
            base.insert(lit);
        }
        rules.push_back(std::move(gc));
    }

    // gamma(S) = least model of the program with "not b" read as b ∉ S.
    auto gamma = [&](const TermSet& s) {
        TermSet model;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const GroundClause& r : rules) {
                if (model.count(r.head)) continue;
                bool ok = true;
                for (const Term& a : r.pos)
                    if (!model.count(a)) {
                        ok = false;
                        break;
                    }
                if (ok)
                    for (const Term& b : r.naf)
                        if (s.count(b)) {
                            ok = false;
                            break;
                        }
                if (ok) {
                    model.insert(r.head);
                    changed = true;
                }
            }
        }
        return model;
    };

    TermSet t;   // lfp of gamma∘gamma starting from ∅
    while (true) {
        TermSet next = gamma(gamma(t));
        if (next == t) break;
        t = std::move(next);
    }
    TermSet upper = gamma(t);

    WfsModel out;
    out.true_atoms = t;
    for (const Term& a : base) {
        if (out.true_atoms.count(a)) continue;
        if (upper.count(a))
            out.undefined_atoms.insert(a);
        else
            out.false_atoms.insert(a);
    }
    return out;
}

}   // namespace ecalp
