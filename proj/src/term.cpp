#include "ecalp/term.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace ecalp {

namespace {

int days_in_month(int y, int m) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[m - 1];
}

// Howard Hinnant's civil-date algorithms.
long long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long yy = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

Ordering from_cmp(long long a, long long b) {
    if (a < b) return Ordering::Less;
    if (a > b) return Ordering::Greater;
    return Ordering::Equal;
}

}   // namespace

bool TimePoint::valid(int y, int mo, int d, int h, int mi, int s) {
    return mo >= 1 && mo <= 12 && d >= 1 && d <= days_in_month(y, mo) && h >= 0 && h <= 23 &&
           mi >= 0 && mi <= 59 && s >= 0 && s <= 59;
}

std::optional<TimePoint> TimePoint::make(int y, int mo, int d, int h, int mi, int s) {
    if (!valid(y, mo, d, h, mi, s)) return std::nullopt;
    return TimePoint{y, mo, d, h, mi, s};
}

long long TimePoint::to_seconds() const {
    return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400LL +
           hour * 3600LL + minute * 60LL + second;
}

TimePoint TimePoint::from_seconds(long long secs) {
    long long days = secs / 86400;
    long long rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    return TimePoint{y, static_cast<int>(m), static_cast<int>(d), static_cast<int>(rem / 3600),
                     static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60)};
}

Ordering compare(const TimePoint& a, const TimePoint& b) {
    return from_cmp(a.to_seconds(), b.to_seconds());
}

Ordering compare(const TimeSpan& a, const TimeSpan& b) {
    return from_cmp(a.total_seconds(), b.total_seconds());
}

Term Term::constant(std::string name) {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Constant;
    rep->symbol = std::move(name);
    return Term(std::move(rep));
}

Term Term::number(long long value) {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Number;
    rep->number = value;
    return Term(std::move(rep));
}

Term Term::text(std::string value) {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Text;
    rep->symbol = std::move(value);
    return Term(std::move(rep));
}

Term Term::variable(std::string name, VarId id) {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Variable;
    rep->symbol = std::move(name);
    rep->var = id;
    return Term(std::move(rep));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) return constant(std::move(functor));
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::Compound;
    rep->symbol = std::move(functor);
    rep->args = std::move(args);
    return Term(std::move(rep));
}

Term Term::list(std::vector<Term> items, std::optional<Term> tail) {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::List;
    rep->args = std::move(items);
    if (tail) rep->tail = std::make_shared<const Term>(std::move(*tail));
    return Term(std::move(rep));
}

Term Term::time_point(TimePoint tp) {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::TimePoint;
    rep->tp = tp;
    return Term(std::move(rep));
}

Term Term::time_span(TimeSpan ts) {
    auto rep = std::make_shared<Rep>();
    rep->kind = Kind::TimeSpan;
    rep->ts = ts;
    return Term(std::move(rep));
}

std::pair<std::string, std::size_t> Term::predicate_key() const {
    if (is(Kind::Compound)) return {symbol(), args().size()};
    if (is(Kind::Constant)) return {symbol(), 0};
    return {"", 0};
}

bool Term::equals(const Term& a, const Term& b) {
    if (a.rep_ == b.rep_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Kind::Constant:
        case Kind::Text: return a.symbol() == b.symbol();
        case Kind::Number: return a.number_value() == b.number_value();
        case Kind::Variable: return a.var_id() == b.var_id();
        case Kind::TimePoint: return a.time_point_value() == b.time_point_value();
        case Kind::TimeSpan:
            // durations are values: 60 minutes equals 1 hour
            return a.time_span_value().total_seconds() == b.time_span_value().total_seconds();
        case Kind::Compound: {
            if (a.symbol() != b.symbol() || a.args().size() != b.args().size()) return false;
            for (std::size_t i = 0; i < a.args().size(); ++i)
                if (!equals(a.args()[i], b.args()[i])) return false;
            return true;
        }
        case Kind::List: {
            if (a.args().size() != b.args().size() || a.has_tail() != b.has_tail()) return false;
            for (std::size_t i = 0; i < a.args().size(); ++i)
                if (!equals(a.args()[i], b.args()[i])) return false;
            return !a.has_tail() || equals(a.tail(), b.tail());
        }
    }
    return false;
}

bool is_ground(const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Variable: return false;
        case Term::Kind::Compound:
        case Term::Kind::List: {
            for (const Term& a : t.args())
                if (!is_ground(a)) return false;
            return !t.has_tail() || is_ground(t.tail());
        }
        default: return true;
    }
}

void collect_variables(const Term& t, std::vector<VarId>& out) {
    switch (t.kind()) {
        case Term::Kind::Variable: out.push_back(t.var_id()); break;
        case Term::Kind::Compound:
        case Term::Kind::List: {
            for (const Term& a : t.args()) collect_variables(a, out);
            if (t.has_tail()) collect_variables(t.tail(), out);
            break;
        }
        default: break;
    }
}

namespace {

bool variant_rec(const Term& a, const Term& b, std::unordered_map<VarId, VarId>& fwd,
                 std::unordered_map<VarId, VarId>& bwd) {
    if (a.kind() != b.kind()) return false;
    if (a.kind() == Term::Kind::Variable) {
        auto f = fwd.find(a.var_id());
        auto g = bwd.find(b.var_id());
        if (f == fwd.end() && g == bwd.end()) {
            fwd[a.var_id()] = b.var_id();
            bwd[b.var_id()] = a.var_id();
            return true;
        }
        return f != fwd.end() && g != bwd.end() && f->second == b.var_id() &&
               g->second == a.var_id();
    }
    switch (a.kind()) {
        case Term::Kind::Constant:
        case Term::Kind::Text: return a.symbol() == b.symbol();
        case Term::Kind::Number: return a.number_value() == b.number_value();
        case Term::Kind::TimePoint: return a.time_point_value() == b.time_point_value();
        case Term::Kind::TimeSpan:
            return a.time_span_value().total_seconds() == b.time_span_value().total_seconds();
        case Term::Kind::Compound:
        case Term::Kind::List: {
            if (a.kind() == Term::Kind::Compound && a.symbol() != b.symbol()) return false;
            if (a.args().size() != b.args().size() || a.has_tail() != b.has_tail()) return false;
            for (std::size_t i = 0; i < a.args().size(); ++i)
                if (!variant_rec(a.args()[i], b.args()[i], fwd, bwd)) return false;
            return !a.has_tail() || variant_rec(a.tail(), b.tail(), fwd, bwd);
        }
        default: return false;
    }
}

}   // namespace

bool variant_equal(const Term& a, const Term& b) {
    std::unordered_map<VarId, VarId> fwd, bwd;
    return variant_rec(a, b, fwd, bwd);
}

int term_order(const Term& a, const Term& b) {
    if (a.kind() != b.kind())
        return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    auto cmp3 = [](auto x, auto y) { return x < y ? -1 : (y < x ? 1 : 0); };
    switch (a.kind()) {
        case Term::Kind::Constant:
        case Term::Kind::Text: return cmp3(a.symbol(), b.symbol());
        case Term::Kind::Number: return cmp3(a.number_value(), b.number_value());
        case Term::Kind::Variable: return cmp3(a.var_id(), b.var_id());
        case Term::Kind::TimePoint:
            return cmp3(a.time_point_value().to_seconds(), b.time_point_value().to_seconds());
        case Term::Kind::TimeSpan:
            return cmp3(a.time_span_value().total_seconds(), b.time_span_value().total_seconds());
        case Term::Kind::Compound:
        case Term::Kind::List: {
            if (a.kind() == Term::Kind::Compound)
                if (int c = cmp3(a.symbol(), b.symbol()); c != 0) return c;
            if (int c = cmp3(a.args().size(), b.args().size()); c != 0) return c;
            for (std::size_t i = 0; i < a.args().size(); ++i)
                if (int c = term_order(a.args()[i], b.args()[i]); c != 0) return c;
            if (int c = cmp3(a.has_tail(), b.has_tail()); c != 0) return c;
            return a.has_tail() ? term_order(a.tail(), b.tail()) : 0;
        }
    }
    return 0;
}

std::optional<Term> Substitution::lookup(VarId v) const {
    auto it = bindings_.find(v);
    if (it == bindings_.end()) return std::nullopt;
    return it->second;
}

Substitution Substitution::bind(VarId v, Term t) const {
    Substitution out = *this;
    out.bindings_.insert_or_assign(v, std::move(t));
    return out;
}

Term Substitution::walk(const Term& t) const {
    Term cur = t;
    while (cur.is(Term::Kind::Variable)) {
        auto bound = lookup(cur.var_id());
        if (!bound) return cur;
        cur = *bound;
    }
    return cur;
}

Term Substitution::apply(const Term& t) const {
    Term cur = walk(t);
    switch (cur.kind()) {
        case Term::Kind::Compound: {
            std::vector<Term> args;
            args.reserve(cur.args().size());
            for (const Term& a : cur.args()) args.push_back(apply(a));
            return Term::compound(cur.symbol(), std::move(args));
        }
        case Term::Kind::List: {
            std::vector<Term> items;
            items.reserve(cur.args().size());
            for (const Term& a : cur.args()) items.push_back(apply(a));
            if (!cur.has_tail()) return Term::list(std::move(items));
            Term tail = apply(cur.tail());
            // flatten a resolved list tail so [1|T]{T->[2]} prints as [1,2]
            if (tail.is(Term::Kind::List)) {
                for (const Term& a : tail.args()) items.push_back(a);
                return Term::list(std::move(items),
                                  tail.has_tail() ? std::optional<Term>(tail.tail()) : std::nullopt);
            }
            return Term::list(std::move(items), tail);
        }
        default: return cur;
    }
}

namespace {

bool occurs_in(VarId v, const Term& t, const Substitution& s) {
    Term cur = s.walk(t);
    switch (cur.kind()) {
        case Term::Kind::Variable: return cur.var_id() == v;
        case Term::Kind::Compound:
        case Term::Kind::List: {
            for (const Term& a : cur.args())
                if (occurs_in(v, a, s)) return true;
            return cur.has_tail() && occurs_in(v, cur.tail(), s);
        }
        default: return false;
    }
}

struct ListView {
    enum class K { Nil, Cons, Var } k;
    Term head;    // Cons
    Term rest;    // Cons: remaining list; Var: the variable
};

ListView peel(const Term& list, const Substitution& s) {
    Term cur = s.walk(list);
    if (cur.is(Term::Kind::Variable)) return {ListView::K::Var, Term(), cur};
    // callers guarantee cur is a List
    if (!cur.args().empty()) {
        std::vector<Term> rest(cur.args().begin() + 1, cur.args().end());
        Term rem = Term::list(std::move(rest),
                              cur.has_tail() ? std::optional<Term>(cur.tail()) : std::nullopt);
        return {ListView::K::Cons, cur.args()[0], rem};
    }
    if (cur.has_tail()) return peel(cur.tail(), s);
    return {ListView::K::Nil, Term(), Term()};
}

std::optional<Substitution> unify_rec(const Term& a, const Term& b, Substitution s, bool occ);

std::optional<Substitution> unify_lists(const Term& a, const Term& b, Substitution s, bool occ) {
    ListView va = peel(a, s);
    ListView vb = peel(b, s);
    if (va.k == ListView::K::Var || vb.k == ListView::K::Var) {
        const Term& var = va.k == ListView::K::Var ? va.rest : vb.rest;
        const Term& other = va.k == ListView::K::Var ? b : a;
        return unify_rec(var, other, std::move(s), occ);
    }
    if (va.k == ListView::K::Nil && vb.k == ListView::K::Nil) return s;
    if (va.k != ListView::K::Cons || vb.k != ListView::K::Cons) return std::nullopt;
    auto s1 = unify_rec(va.head, vb.head, std::move(s), occ);
    if (!s1) return std::nullopt;
    return unify_lists(va.rest, vb.rest, std::move(*s1), occ);
}

std::optional<Substitution> unify_rec(const Term& a, const Term& b, Substitution s, bool occ) {
    Term x = s.walk(a);
    Term y = s.walk(b);
    if (x.is(Term::Kind::Variable)) {
        if (y.is(Term::Kind::Variable) && y.var_id() == x.var_id()) return s;
        if (occ && occurs_in(x.var_id(), y, s)) return std::nullopt;
        return s.bind(x.var_id(), y);
    }
    if (y.is(Term::Kind::Variable)) {
        if (occ && occurs_in(y.var_id(), x, s)) return std::nullopt;
        return s.bind(y.var_id(), x);
    }
    if (x.kind() == Term::Kind::List && y.kind() == Term::Kind::List)
        return unify_lists(x, y, std::move(s), occ);
    if (x.kind() != y.kind()) return std::nullopt;
    switch (x.kind()) {
        case Term::Kind::Constant:
        case Term::Kind::Text:
            return x.symbol() == y.symbol() ? std::optional<Substitution>(std::move(s))
                                            : std::nullopt;
        case Term::Kind::Number:
            return x.number_value() == y.number_value()
                       ? std::optional<Substitution>(std::move(s))
                       : std::nullopt;
        case Term::Kind::TimePoint:
            return x.time_point_value() == y.time_point_value()
                       ? std::optional<Substitution>(std::move(s))
                       : std::nullopt;
        case Term::Kind::TimeSpan:
            return x.time_span_value().total_seconds() == y.time_span_value().total_seconds()
                       ? std::optional<Substitution>(std::move(s))
                       : std::nullopt;
        case Term::Kind::Compound: {
            if (x.symbol() != y.symbol() || x.args().size() != y.args().size())
                return std::nullopt;
            std::optional<Substitution> cur = std::move(s);
            for (std::size_t i = 0; i < x.args().size(); ++i) {
                cur = unify_rec(x.args()[i], y.args()[i], std::move(*cur), occ);
                if (!cur) return std::nullopt;
            }
            return cur;
        }
        default: return std::nullopt;
    }
}

}   // namespace

std::optional<Substitution> unify(const Term& t1, const Term& t2, const Substitution& s,
                                  bool occurs_check) {
    return unify_rec(t1, t2, s, occurs_check);
}

bool clause_equal(const Clause& a, const Clause& b) {
    if (!(a.head == b.head) || a.body.size() != b.body.size()) return false;
    for (std::size_t i = 0; i < a.body.size(); ++i)
        if (!(a.body[i] == b.body[i])) return false;
    return true;
}

namespace {

Term rename_rec(const Term& t, VarId& counter, std::unordered_map<VarId, Term>& seen) {
    switch (t.kind()) {
        case Term::Kind::Variable: {
            auto it = seen.find(t.var_id());
            if (it != seen.end()) return it->second;
            Term fresh = Term::variable(t.symbol(), ++counter);
            seen.emplace(t.var_id(), fresh);
            return fresh;
        }
        case Term::Kind::Compound: {
            std::vector<Term> args;
            args.reserve(t.args().size());
            for (const Term& a : t.args()) args.push_back(rename_rec(a, counter, seen));
            return Term::compound(t.symbol(), std::move(args));
        }
        case Term::Kind::List: {
            std::vector<Term> items;
            items.reserve(t.args().size());
            for (const Term& a : t.args()) items.push_back(rename_rec(a, counter, seen));
            std::optional<Term> tail;
            if (t.has_tail()) tail = rename_rec(t.tail(), counter, seen);
            return Term::list(std::move(items), std::move(tail));
        }
        default: return t;
    }
}

}   // namespace

Term rename_apart(const Term& t, VarId& counter) {
    std::unordered_map<VarId, Term> seen;
    return rename_rec(t, counter, seen);
}

Clause rename_apart(const Clause& clause, VarId& counter) {
    std::unordered_map<VarId, Term> seen;
    Clause out;
    out.head = rename_rec(clause.head, counter, seen);
    out.body.reserve(clause.body.size());
    for (const Term& lit : clause.body) out.body.push_back(rename_rec(lit, counter, seen));
    out.span = clause.span;
    out.stamp = clause.stamp;
    return out;
}

Ordering compare_time(const Term& a, const Term& b) {
    if (a.is(Term::Kind::TimePoint) && b.is(Term::Kind::TimePoint))
        return compare(a.time_point_value(), b.time_point_value());
    if (a.is(Term::Kind::TimeSpan) && b.is(Term::Kind::TimeSpan))
        return compare(a.time_span_value(), b.time_span_value());
    if (a.is(Term::Kind::Number) && b.is(Term::Kind::Number)) {
        long long x = a.number_value(), y = b.number_value();
        return x < y ? Ordering::Less : (x > y ? Ordering::Greater : Ordering::Equal);
    }
    throw TypeClashError("compare_time: incomparable kinds");
}

}   // namespace ecalp
