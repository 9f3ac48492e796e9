#include "ecalp/events.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

#include "ecalp/parser.hpp"

namespace ecalp {

namespace {

std::optional<Ordering> cmp_time(const Term& a, const Term& b) {
    try {
        return compare_time(a, b);
    } catch (const TypeClashError&) {
        return std::nullopt;
    }
}

bool time_le(const Term& a, const Term& b) {
    auto o = cmp_time(a, b);
    return o.has_value() && *o != Ordering::Greater;
}

bool time_lt(const Term& a, const Term& b) {
    auto o = cmp_time(a, b);
    return o.has_value() && *o == Ordering::Less;
}

/// Time order where comparable; falls back to the structural order so sorts
/// stay total when kinds mix.
int time_first_order(const Term& a, const Term& b) {
    if (auto o = cmp_time(a, b)) {
        if (*o == Ordering::Less) return -1;
        if (*o == Ordering::Greater) return 1;
        return 0;
    }
    return term_order(a, b);
}

[[noreturn]] void bad_call(const Term& goal, const std::string& message) {
    throw SolverError(SolverError::Kind::BadCall, message, goal);
}

bool unifiable(const Term& a, const Term& b) {
    return unify(a, b, Substitution{}).has_value();
}

std::vector<std::uint64_t> support_stamps(const EventMatch& m) {
    std::vector<std::uint64_t> out;
    out.reserve(m.support.size());
    for (const Occurrence& o : m.support) out.push_back(o.stamp);
    std::sort(out.begin(), out.end());
    return out;
}

bool match_less(const EventMatch& x, const EventMatch& y) {
    if (int c = time_first_order(x.interval.end, y.interval.end)) return c < 0;
    if (int c = time_first_order(x.interval.start, y.interval.start)) return c < 0;
    return support_stamps(x) < support_stamps(y);
}

bool match_equal(const EventMatch& x, const EventMatch& y) {
    return interval_equal(x.interval, y.interval) && support_stamps(x) == support_stamps(y);
}

std::vector<Occurrence> merge_support(const std::vector<Occurrence>& a,
                                      const std::vector<Occurrence>& b) {
    std::vector<Occurrence> out = a;
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end(),
              [](const Occurrence& l, const Occurrence& r) { return l.stamp < r.stamp; });
    return out;
}

bool is_pair_list(const Term& t) {
    return t.is(Term::Kind::List) && !t.has_tail() && t.args().size() == 2;
}

const char* const kCombinators[] = {"sequence", "conjunction", "or", "xor", "concurrent"};

bool is_combinator(const std::string& f, EventExpr::Op& op) {
    if (f == "sequence") op = EventExpr::Op::Sequence;
    else if (f == "conjunction") op = EventExpr::Op::Conjunction;
    else if (f == "or") op = EventExpr::Op::Or;
    else if (f == "xor") op = EventExpr::Op::Xor;
    else if (f == "concurrent") op = EventExpr::Op::Concurrent;
    else return false;
    return true;
}

bool is_algebra_term(const Term& t) {
    if (!t.is(Term::Kind::Compound)) return false;
    const std::string& f = t.symbol();
    for (const char* c : kCombinators)
        if (f == c) return true;
    if (t.args().size() == 2 && (f == "not" || f == "any" || f == "aperiodic" || f == "periodic"))
        return true;
    return false;
}

void collect_leaves(const EventExpr& e, std::vector<Term>& out) {
    if (e.op == EventExpr::Op::Leaf) {
        for (const Term& seen : out)
            if (seen == e.leaf) return;
        out.push_back(e.leaf);
        return;
    }
    for (const EventExpr& c : e.children) collect_leaves(c, out);
}

/// Shared inputs of one matching run over a fixed snapshot.
struct MatchCtx {
    std::vector<Occurrence> occs;
    std::vector<Clause> terminates;   // terminates/3 facts
    std::vector<Term> leaves;
    VarId counter = 3'000'000'000ULL;
};

/// A terminator of the pair [a, b] occurred strictly inside (t1, t2).
/// Only the expression's own leaf types count as terminators.
bool broken_between(MatchCtx& ctx, const Term& a, const Term& b, const Term& t1,
                    const Term& t2) {
    Term pair = Term::list({a, b});
    Term gap = Term::list({t1, t2});
    for (const Clause& fact : ctx.terminates) {
        Clause fresh = rename_apart(fact, ctx.counter);
        Term who = Term::variable("Who", ++ctx.counter);
        Term query = Term::compound("terminates", {who, pair, gap});
        auto s = unify(fresh.head, query, Substitution{});
        if (!s) continue;
        Term terminator = s->apply(who);
        for (const Occurrence& occ : ctx.occs) {
            if (!unify(terminator, occ.event, *s)) continue;
            bool in_context = false;
            for (const Term& leaf : ctx.leaves)
                if (unifiable(occ.event, leaf)) { in_context = true; break; }
            if (!in_context) continue;
            if (time_lt(t1, occ.interval.start) && time_lt(occ.interval.end, t2)) return true;
        }
    }
    return false;
}

std::optional<EventInterval> hull(const EventInterval& a, const EventInterval& b) {
    auto s = cmp_time(a.start, b.start);
    auto e = cmp_time(a.end, b.end);
    if (!s || !e) return std::nullopt;
    return EventInterval{*s == Ordering::Greater ? b.start : a.start,
                         *e == Ordering::Less ? b.end : a.end};
}

Term shift_time(const Term& base, long long seconds) {
    if (base.is(Term::Kind::Number)) return Term::number(base.number_value() + seconds);
    if (base.is(Term::Kind::TimePoint))
        return Term::time_point(TimePoint::from_seconds(base.time_point_value().to_seconds() + seconds));
    return base;
}

std::vector<EventMatch> eval_expr(const EventExpr& e, MatchCtx& ctx);

/// Left fold: each next child must start at or after the previous child's
/// end, with no terminator of that adjacent pair strictly inside the gap.
std::vector<EventMatch> seq_children(const std::vector<EventExpr>& children, MatchCtx& ctx) {
    std::vector<EventMatch> acc;
    std::vector<Term> acc_src;   // source of the last child in each partial match
    bool first = true;
    for (const EventExpr& child : children) {
        std::vector<EventMatch> next = eval_expr(child, ctx);
        if (first) {
            acc = std::move(next);
            acc_src.assign(acc.size(), child.source);
            first = false;
            continue;
        }
        std::vector<EventMatch> combined;
        std::vector<Term> combined_src;
        for (std::size_t i = 0; i < acc.size(); ++i) {
            for (const EventMatch& n : next) {
                const EventMatch& m = acc[i];
                if (!time_le(m.interval.end, n.interval.start)) continue;
                if (broken_between(ctx, acc_src[i], child.source, m.interval.end,
                                   n.interval.start))
                    continue;
                combined.push_back({{m.interval.start, n.interval.end},
                                    merge_support(m.support, n.support)});
                combined_src.push_back(child.source);
            }
        }
        acc = std::move(combined);
        acc_src = std::move(combined_src);
    }
    return acc;
}

/// One match per child in any order. With require_overlap all picks must
/// share a common instant: max(starts) <= min(ends). The result interval is
/// the hull of the picks.
std::vector<EventMatch> odo_children(const std::vector<EventExpr>& children, MatchCtx& ctx,
                                     bool require_overlap) {
    std::vector<std::vector<EventMatch>> lists;
    lists.reserve(children.size());
    for (const EventExpr& child : children) {
        lists.push_back(eval_expr(child, ctx));
        if (lists.back().empty()) return {};
    }
    std::vector<EventMatch> out;
    std::vector<std::size_t> pick(lists.size(), 0);
    for (;;) {
        bool ok = true;
        EventInterval span = lists[0][pick[0]].interval;
        Term late_start = span.start;
        Term early_end = span.end;
        std::vector<Occurrence> support = lists[0][pick[0]].support;
        for (std::size_t i = 1; i < lists.size() && ok; ++i) {
            const EventMatch& m = lists[i][pick[i]];
            auto h = hull(span, m.interval);
            if (!h) {
                ok = false;
                break;
            }
            span = *h;
            if (time_lt(late_start, m.interval.start)) late_start = m.interval.start;
            if (time_lt(m.interval.end, early_end)) early_end = m.interval.end;
            support = merge_support(support, m.support);
        }
        if (ok && require_overlap && !time_le(late_start, early_end)) ok = false;
        if (ok) out.push_back({span, std::move(support)});
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == lists[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    return out;
}

std::vector<EventMatch> eval_expr(const EventExpr& e, MatchCtx& ctx) {
    std::vector<EventMatch> out;
    switch (e.op) {
        case EventExpr::Op::Leaf:
            for (const Occurrence& occ : ctx.occs)
                if (unifiable(e.leaf, occ.event)) out.push_back({occ.interval, {occ}});
            break;
        case EventExpr::Op::Sequence:
            out = seq_children(e.children, ctx);
            break;
        case EventExpr::Op::Conjunction:
            out = odo_children(e.children, ctx, false);
            break;
        case EventExpr::Op::Concurrent:
            out = odo_children(e.children, ctx, true);
            break;
        case EventExpr::Op::Or:
            for (const EventExpr& c : e.children) {
                std::vector<EventMatch> ms = eval_expr(c, ctx);
                out.insert(out.end(), ms.begin(), ms.end());
            }
            break;
        case EventExpr::Op::Xor: {
            std::vector<EventMatch> only;
            int hits = 0;
            for (const EventExpr& c : e.children) {
                std::vector<EventMatch> ms = eval_expr(c, ctx);
                if (ms.empty()) continue;
                ++hits;
                only = std::move(ms);
            }
            if (hits == 1) out = std::move(only);
            break;
        }
        case EventExpr::Op::Not: {
            std::vector<EventMatch> neg = eval_expr(e.children[0], ctx);
            std::vector<EventMatch> init = eval_expr(e.children[1], ctx);
            std::vector<EventMatch> fin = eval_expr(e.children[2], ctx);
            for (const EventMatch& mi : init) {
                for (const EventMatch& mj : fin) {
                    if (!time_le(mi.interval.end, mj.interval.start)) continue;
                    bool blocked = false;
                    for (const EventMatch& mn : neg) {
                        if (time_lt(mi.interval.end, mn.interval.start) &&
                            time_lt(mn.interval.end, mj.interval.start)) {
                            blocked = true;
                            break;
                        }
                    }
                    if (blocked) continue;
                    out.push_back({{mi.interval.start, mj.interval.end},
                                   merge_support(mi.support, mj.support)});
                }
            }
            break;
        }
        case EventExpr::Op::Any: {
            std::size_t n = static_cast<std::size_t>(e.any_n);
            std::vector<EventExpr> chosen;
            auto combine = [&](auto&& self, std::size_t from, std::size_t depth) -> void {
                if (depth == n) {
                    std::vector<EventMatch> ms = odo_children(chosen, ctx, false);
                    out.insert(out.end(), ms.begin(), ms.end());
                    return;
                }
                for (std::size_t i = from; i + (n - depth) <= e.children.size(); ++i) {
                    chosen.push_back(e.children[i]);
                    self(self, i + 1, depth + 1);
                    chosen.pop_back();
                }
            };
            combine(combine, 0, 0);
            break;
        }
        case EventExpr::Op::Aperiodic: {
            std::vector<EventMatch> ev = eval_expr(e.children[0], ctx);
            std::vector<EventMatch> init = eval_expr(e.children[1], ctx);
            std::vector<EventMatch> fin = eval_expr(e.children[2], ctx);
            for (const EventMatch& mi : init)
                for (const EventMatch& mj : fin) {
                    if (!time_le(mi.interval.end, mj.interval.start)) continue;
                    for (const EventMatch& me : ev)
                        if (time_lt(mi.interval.end, me.interval.start) &&
                            time_lt(me.interval.end, mj.interval.start))
                            out.push_back({me.interval,
                                           merge_support(me.support,
                                                         merge_support(mi.support, mj.support))});
                }
            break;
        }
        case EventExpr::Op::Periodic: {
            std::vector<EventMatch> init = eval_expr(e.children[0], ctx);
            std::vector<EventMatch> fin = eval_expr(e.children[1], ctx);
            long long step = e.period.total_seconds();
            for (const EventMatch& mi : init)
                for (const EventMatch& mj : fin) {
                    if (!time_le(mi.interval.end, mj.interval.start)) continue;
                    if (!mi.interval.end.is(Term::Kind::Number) &&
                        !mi.interval.end.is(Term::Kind::TimePoint))
                        continue;
                    std::vector<Occurrence> sup = merge_support(mi.support, mj.support);
                    for (long long k = 1;; ++k) {
                        Term t = shift_time(mi.interval.end, k * step);
                        if (!time_lt(t, mj.interval.start)) break;
                        out.push_back({{t, t}, sup});
                    }
                }
            break;
        }
    }
    std::sort(out.begin(), out.end(), match_less);
    out.erase(std::unique(out.begin(), out.end(), match_equal), out.end());
    return out;
}

Term eis_key_term(const Term& event) {
    Term inner = event.is(Term::Kind::Compound) ? Term::constant(event.symbol()) : event;
    return Term::compound("eis", {inner});
}

Intent::ConsumePolicy to_intent_policy(ConsumePolicy p) {
    switch (p) {
        case ConsumePolicy::First: return Intent::ConsumePolicy::First;
        case ConsumePolicy::Last: return Intent::ConsumePolicy::Last;
        default: return Intent::ConsumePolicy::All;
    }
}

std::optional<EventInterval> occurrence_interval(const Term& t) {
    if (is_pair_list(t)) return EventInterval{t.args()[0], t.args()[1]};
    if (t.is(Term::Kind::Number) || t.is(Term::Kind::TimePoint)) return EventInterval{t, t};
    return std::nullopt;
}

}   // namespace

bool interval_equal(const EventInterval& a, const EventInterval& b) {
    auto s = cmp_time(a.start, b.start);
    auto e = cmp_time(a.end, b.end);
    return s && e && *s == Ordering::Equal && *e == Ordering::Equal;
}

std::optional<EventExpr> compile_event_expr(const Term& t, std::string* error) {
    auto fail = [&](const std::string& msg) -> std::optional<EventExpr> {
        if (error) *error = msg;
        return std::nullopt;
    };
    EventExpr e;
    e.source = t;
    EventExpr::Op comb;
    if (t.is(Term::Kind::Compound) && is_combinator(t.symbol(), comb)) {
        e.op = comb;
        for (const Term& arg : t.args()) {
            auto c = compile_event_expr(arg, error);
            if (!c) return std::nullopt;
            e.children.push_back(std::move(*c));
        }
        return e;
    }
    if (t.is(Term::Kind::Compound) && t.args().size() == 2 &&
        (t.symbol() == "not" || t.symbol() == "aperiodic" || t.symbol() == "periodic" ||
         t.symbol() == "any")) {
        const Term& a0 = t.args()[0];
        const Term& a1 = t.args()[1];
        if (t.symbol() == "any") {
            if (!a0.is(Term::Kind::Number) || a0.number_value() < 1)
                return fail("any/2 needs a positive count");
            if (!a1.is(Term::Kind::List) || a1.has_tail() || a1.args().empty())
                return fail("any/2 needs a proper list of alternatives");
            if (static_cast<std::size_t>(a0.number_value()) > a1.args().size())
                return fail("any/2 count exceeds the number of alternatives");
            e.op = EventExpr::Op::Any;
            e.any_n = static_cast<int>(a0.number_value());
            for (const Term& arg : a1.args()) {
                auto c = compile_event_expr(arg, error);
                if (!c) return std::nullopt;
                e.children.push_back(std::move(*c));
            }
            return e;
        }
        if (!is_pair_list(a1))
            return fail(t.symbol() + "/2 needs an [initiator, terminator] pair");
        std::vector<Term> parts;
        if (t.symbol() == "periodic") {
            if (!a0.is(Term::Kind::TimeSpan) || a0.time_span_value().total_seconds() <= 0)
                return fail("periodic/2 needs a positive timespan");
            e.op = EventExpr::Op::Periodic;
            e.period = a0.time_span_value();
        } else {
            e.op = t.symbol() == "not" ? EventExpr::Op::Not : EventExpr::Op::Aperiodic;
            parts.push_back(a0);
        }
        parts.push_back(a1.args()[0]);
        parts.push_back(a1.args()[1]);
        for (const Term& arg : parts) {
            auto c = compile_event_expr(arg, error);
            if (!c) return std::nullopt;
            e.children.push_back(std::move(*c));
        }
        return e;
    }
    if (t.is(Term::Kind::List)) return fail("a list is not an event expression");
    e.op = EventExpr::Op::Leaf;
    e.leaf = t;
    return e;
}

std::vector<Occurrence> collect_occurrences(const KnowledgeState& state) {
    std::vector<Occurrence> out;
    for (const std::string& oid : state.module_order()) {
        const std::vector<Clause>* clauses = state.module(oid);
        if (!clauses) continue;
        for (const Clause& c : *clauses) {
            if (!c.is_fact() || !c.head.is(Term::Kind::Compound)) continue;
            if (c.head.symbol() != "occurs" || c.head.args().size() != 2) continue;
            auto iv = occurrence_interval(c.head.args()[1]);
            if (!iv) continue;
            out.push_back({c.head.args()[0], *iv, c.stamp, oid});
        }
    }
    std::sort(out.begin(), out.end(), [](const Occurrence& a, const Occurrence& b) {
        if (int c = time_first_order(a.interval.start, b.interval.start)) return c < 0;
        return a.stamp < b.stamp;
    });
    return out;
}

KnowledgeState record_occurrence(const KnowledgeState& state, const Term& event,
                                 const Term& time) {
    std::string oid = format_term(eis_key_term(event));
    Clause fact;
    fact.head = Term::compound("occurs", {event, time});
    return state.add_module(oid, {fact});
}

std::vector<EventMatch> match_event_expr(const EventExpr& expr, const KnowledgeState& state) {
    MatchCtx ctx;
    ctx.occs = collect_occurrences(state);
    for (const Clause& c : state.clauses_for("terminates", 3))
        if (c.is_fact()) ctx.terminates.push_back(c);
    collect_leaves(expr, ctx.leaves);
    return eval_expr(expr, ctx);
}

std::vector<EventInterval> holds_interval(const Term& e1, const Term& e2,
                                          const KnowledgeState& state) {
    std::vector<Occurrence> occs = collect_occurrences(state);
    std::vector<Clause> terminates;
    for (const Clause& c : state.clauses_for("terminates", 3))
        if (c.is_fact()) terminates.push_back(c);
    Term pair = Term::list({e1, e2});
    VarId counter = 3'000'000'000ULL;

    auto broken = [&](const Term& t1, const Term& t2) {
        Term gap = Term::list({t1, t2});
        for (const Clause& fact : terminates) {
            Clause fresh = rename_apart(fact, counter);
            Term who = Term::variable("Who", ++counter);
            auto s = unify(fresh.head, Term::compound("terminates", {who, pair, gap}),
                           Substitution{});
            if (!s) continue;
            Term terminator = s->apply(who);
            for (const Occurrence& occ : occs)
                if (unify(terminator, occ.event, *s) && time_lt(t1, occ.interval.start) &&
                    time_lt(occ.interval.end, t2))
                    return true;
        }
        return false;
    };

    std::vector<EventInterval> out;
    for (const Occurrence& o1 : occs) {
        if (!unifiable(e1, o1.event)) continue;
        for (const Occurrence& o2 : occs) {
            if (!unifiable(e2, o2.event)) continue;
            if (!time_le(o1.interval.end, o2.interval.start)) continue;
            if (broken(o1.interval.end, o2.interval.start)) continue;
            EventInterval iv{o1.interval.start, o2.interval.end};
            bool dup = false;
            for (const EventInterval& seen : out)
                if (interval_equal(seen, iv)) { dup = true; break; }
            if (!dup) out.push_back(iv);
        }
    }
    return out;
}

KnowledgeState apply_consume(const KnowledgeState& state, const Term& target,
                             Intent::ConsumePolicy policy) {
    auto rebuild = [](KnowledgeState s, const std::string& oid,
                      const std::vector<Clause>& keep) {
        s = s.remove_module(oid);
        if (!keep.empty()) s = s.add_module(oid, keep);
        return s;
    };

    if (target.is(Term::Kind::Compound) && target.symbol() == "eis" &&
        target.args().size() == 1) {
        std::string oid = format_term(target);
        const std::vector<Clause>* clauses = state.module(oid);
        if (!clauses) return state;
        if (policy == Intent::ConsumePolicy::All) return state.remove_module(oid);
        std::vector<std::size_t> occ_idx;
        for (std::size_t i = 0; i < clauses->size(); ++i) {
            const Clause& c = (*clauses)[i];
            if (c.is_fact() && c.head.is(Term::Kind::Compound) && c.head.symbol() == "occurs" &&
                c.head.args().size() == 2 && occurrence_interval(c.head.args()[1]))
                occ_idx.push_back(i);
        }
        if (occ_idx.empty()) return state;
        auto starts_before = [&](std::size_t a, std::size_t b) {
            auto ia = occurrence_interval((*clauses)[a].head.args()[1]);
            auto ib = occurrence_interval((*clauses)[b].head.args()[1]);
            if (int c = time_first_order(ia->start, ib->start)) return c < 0;
            return (*clauses)[a].stamp < (*clauses)[b].stamp;
        };
        std::size_t victim = occ_idx.front();
        for (std::size_t i : occ_idx)
            if (policy == Intent::ConsumePolicy::First ? starts_before(i, victim)
                                                       : starts_before(victim, i))
                victim = i;
        std::vector<Clause> keep;
        for (std::size_t i = 0; i < clauses->size(); ++i)
            if (i != victim) keep.push_back((*clauses)[i]);
        return rebuild(state, oid, keep);
    }

    std::vector<Occurrence> candidates;
    for (const Occurrence& o : collect_occurrences(state))
        if (unifiable(target, o.event)) candidates.push_back(o);
    if (candidates.empty()) return state;

    std::set<std::uint64_t> victims;
    if (policy == Intent::ConsumePolicy::All) {
        for (const Occurrence& o : candidates) victims.insert(o.stamp);
    } else {
        victims.insert(policy == Intent::ConsumePolicy::First ? candidates.front().stamp
                                                              : candidates.back().stamp);
    }

    KnowledgeState next = state;
    std::vector<std::string> order = state.module_order();
    for (const std::string& oid : order) {
        const std::vector<Clause>* clauses = state.module(oid);
        if (!clauses) continue;
        bool touched = false;
        std::vector<Clause> keep;
        for (const Clause& c : *clauses) {
            if (victims.count(c.stamp)) {
                touched = true;
                continue;
            }
            keep.push_back(c);
        }
        if (touched) next = rebuild(next, oid, keep);
    }
    return next;
}

DetectResult detect(const DetectionRule& rule, const KnowledgeState& state) {
    DetectResult result{{}, state};
    bool consuming = false;
    for (const auto& entry : rule.consumption)
        if (entry.second != ConsumePolicy::None) consuming = true;

    std::string name_oid = format_term(eis_key_term(rule.name));
    auto already_recorded = [&](const EventInterval& iv) {
        const std::vector<Clause>* clauses = result.state.module(name_oid);
        if (!clauses) return false;
        for (const Clause& c : *clauses) {
            if (!c.is_fact() || !c.head.is(Term::Kind::Compound) ||
                c.head.symbol() != "occurs" || c.head.args().size() != 2)
                continue;
            auto have = occurrence_interval(c.head.args()[1]);
            if (have && interval_equal(*have, iv)) return true;
        }
        return false;
    };
    auto record = [&](const EventMatch& m) {
        result.detections.push_back(m);
        if (!already_recorded(m.interval))
            result.state = record_occurrence(
                result.state, rule.name,
                Term::list({m.interval.start, m.interval.end}));
    };

    if (!consuming) {
        for (const EventMatch& m : match_event_expr(rule.expr, state)) record(m);
        return result;
    }

    std::set<std::pair<std::vector<std::uint64_t>, std::string>> seen;
    for (;;) {
        std::vector<EventMatch> ms = match_event_expr(rule.expr, result.state);
        const EventMatch* chosen = nullptr;
        for (const EventMatch& m : ms) {
            auto key = std::make_pair(support_stamps(m), format_term(Term::list({m.interval.start,
                                                                                 m.interval.end})));
            if (seen.insert(key).second) {
                chosen = &m;
                break;
            }
        }
        if (!chosen) break;
        record(*chosen);
        for (const auto& entry : rule.consumption) {
            if (entry.second == ConsumePolicy::None) continue;
            result.state = apply_consume(result.state, eis_key_term(entry.first),
                                         to_intent_policy(entry.second));
        }
    }
    return result;
}

void register_event_builtins(BuiltinRegistry& reg) {
    reg.add("event", 2,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& input,
               const std::function<bool(const Substitution&)>& yield) {
                Term espec = input.apply(goal.args()[0]);
                const Term& tout = goal.args()[1];
                const KnowledgeState& st = ctx.state();

                auto atomic = [&](const Term& pattern) {
                    for (const Occurrence& occ : collect_occurrences(st)) {
                        auto s1 = unify(pattern, occ.event, input, ctx.options().occurs_check);
                        if (!s1) continue;
                        auto s2 = unify(tout, Term::list({occ.interval.start, occ.interval.end}),
                                        *s1, ctx.options().occurs_check);
                        if (s2 && !yield(*s2)) return false;
                    }
                    return true;
                };

                if (espec.is(Term::Kind::List)) {
                    if (espec.has_tail() || espec.args().size() != 1)
                        bad_call(goal, "event/2 takes an event term or a one-element list");
                    return atomic(espec.args()[0]);
                }
                if (is_algebra_term(espec)) {
                    std::string err;
                    auto expr = compile_event_expr(espec, &err);
                    if (!expr) bad_call(goal, "event/2: " + err);
                    for (const EventMatch& m : match_event_expr(*expr, st)) {
                        auto s = unify(tout, Term::list({m.interval.start, m.interval.end}),
                                       input, ctx.options().occurs_check);
                        if (s && !yield(*s)) return false;
                    }
                    return true;
                }
                return atomic(espec);
            });

    auto consume_fn = [](BuiltinContext& ctx, const Term& goal, const Substitution& input,
                         const std::function<bool(const Substitution&)>& yield) {
        Intent intent;
        intent.kind = Intent::Kind::Consume;
        intent.consume_target = input.apply(goal.args()[0]);
        intent.policy = Intent::ConsumePolicy::All;
        if (goal.args().size() == 2) {
            Term p = input.apply(goal.args()[1]);
            if (p == Term::constant("all")) intent.policy = Intent::ConsumePolicy::All;
            else if (p == Term::constant("first")) intent.policy = Intent::ConsumePolicy::First;
            else if (p == Term::constant("last")) intent.policy = Intent::ConsumePolicy::Last;
            else bad_call(goal, "consume/2 policy must be all, first or last");
        }
        ctx.emit(std::move(intent));
        return yield(input);
    };
    reg.add("consume", 1, consume_fn, true);
    reg.add("consume", 2, consume_fn, true);
}

const char* const kEventPreludeOid = "prelude";

const char* const kEventPrelude = R"(% interval event calculus over the occurrence store
holdsInterval([E1, E2], [T11, T22]) :-
    event([E1], [T11, T12]),
    event([E2], [T21, T22]),
    [T11, T12] <= [T21, T22],
    not(broken(T12, [E1, E2], T21)).

holdsInterval([E1, E2], [T11, T22], Context) :-
    event([E1], [T11, T12]),
    event([E2], [T21, T22]),
    [T11, T12] <= [T21, T22],
    not(brokenWithin(T12, [E1, E2], T21, Context)).

broken(T1, Interval, T2) :-
    terminates(Terminator, Interval, [T1, T2]),
    event([Terminator], [T11, T12]),
    T1 < T11,
    T12 < T2.

brokenWithin(T1, Interval, T2, Context) :-
    terminates(Terminator, Interval, [T1, T2]),
    memberOf(Terminator, Context),
    event([Terminator], [T11, T12]),
    T1 < T11,
    T12 < T2.

memberOf(X, [X | _]).
memberOf(X, [_ | Rest]) :- memberOf(X, Rest).
)";

}   // namespace ecalp
