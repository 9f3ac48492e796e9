#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "ecalp/term.hpp"

using namespace ecalp;

TEST_CASE("time point validity and epoch round trip") {
    CHECK(TimePoint::valid(2012, 2, 29, 0, 0, 0));
    CHECK_FALSE(TimePoint::valid(2013, 2, 29, 0, 0, 0));
    CHECK_FALSE(TimePoint::valid(2013, 13, 1, 0, 0, 0));
    CHECK_FALSE(TimePoint::valid(2013, 4, 31, 0, 0, 0));
    CHECK_FALSE(TimePoint::valid(2013, 4, 30, 24, 0, 0));

    std::mt19937_64 rng(20240517);
    std::uniform_int_distribution<long long> secs(-4'000'000'000LL, 8'000'000'000LL);
    for (int i = 0; i < 2000; ++i) {
        long long s = secs(rng);
        TimePoint tp = TimePoint::from_seconds(s);
        CHECK(tp.to_seconds() == s);
        CHECK(TimePoint::valid(tp.year, tp.month, tp.day, tp.hour, tp.minute, tp.second));
    }
    TimePoint epoch{1970, 1, 1, 0, 0, 0};
    CHECK(epoch.to_seconds() == 0);
}

TEST_CASE("time comparison") {
    TimePoint a{2013, 5, 2, 20, 0, 0};
    TimePoint b{2013, 5, 2, 21, 30, 0};
    CHECK(compare(a, b) == Ordering::Less);
    CHECK(compare(b, a) == Ordering::Greater);
    CHECK(compare(a, a) == Ordering::Equal);

    TimeSpan s1{0, 1, 0, 0};
    TimeSpan s2{0, 0, 59, 59};
    CHECK(compare(s2, s1) == Ordering::Less);
    CHECK(compare(s1, TimeSpan{0, 0, 60, 0}) == Ordering::Equal);

    CHECK(compare_time(Term::number(3), Term::number(7)) == Ordering::Less);
    CHECK(compare_time(Term::time_point(a), Term::time_point(b)) == Ordering::Less);
    CHECK_THROWS_AS(compare_time(Term::number(3), Term::time_point(a)), TypeClashError);
    CHECK_THROWS_AS(compare_time(Term::time_span(s1), Term::time_point(a)), TypeClashError);
}

TEST_CASE("term construction and structural equality") {
    Term c = Term::constant("foo");
    CHECK(c.is(Term::Kind::Constant));
    CHECK(c.predicate_key() == std::pair<std::string, std::size_t>{"foo", 0});

    Term zeroary = Term::compound("bar", {});
    CHECK(zeroary.is(Term::Kind::Constant));

    Term f = Term::compound("f", {Term::number(1), Term::constant("a")});
    CHECK(f.predicate_key() == std::pair<std::string, std::size_t>{"f", 2});
    CHECK(f == Term::compound("f", {Term::number(1), Term::constant("a")}));
    CHECK(f != Term::compound("f", {Term::number(2), Term::constant("a")}));
    CHECK(f != Term::compound("g", {Term::number(1), Term::constant("a")}));

    Term x = Term::variable("X", 1);
    Term y = Term::variable("Y", 2);
    CHECK(x != y);
    CHECK(x == Term::variable("Xrenamed", 1));   // identity is the id, not the print name

    Term l = Term::list({Term::number(1), Term::number(2)});
    CHECK(l.args().size() == 2);
    CHECK_FALSE(l.has_tail());
    Term lt = Term::list({Term::number(1)}, x);
    CHECK(lt.has_tail());
    CHECK(lt.tail() == x);
    CHECK(l != lt);
}

TEST_CASE("groundness and variable collection") {
    Term x = Term::variable("X", 1);
    Term g = Term::compound("f", {Term::number(1), Term::list({Term::constant("a")})});
    CHECK(is_ground(g));
    Term ng = Term::compound("f", {x, Term::list({Term::constant("a")}, x)});
    CHECK_FALSE(is_ground(ng));
    std::vector<VarId> vars;
    collect_variables(ng, vars);
    CHECK(std::count(vars.begin(), vars.end(), 1) >= 1);
}

TEST_CASE("variant equality is renaming-closed") {
    Term x = Term::variable("X", 1);
    Term y = Term::variable("Y", 2);
    Term a = Term::compound("f", {x, y, x});
    Term b = Term::compound("f", {y, x, y});
    CHECK(variant_equal(a, b));
    Term c = Term::compound("f", {x, y, y});
    CHECK_FALSE(variant_equal(a, c));
    CHECK(variant_equal(Term::constant("a"), Term::constant("a")));
    CHECK_FALSE(variant_equal(Term::constant("a"), Term::constant("b")));
}

TEST_CASE("substitution walk and apply") {
    Term x = Term::variable("X", 1);
    Term y = Term::variable("Y", 2);
    Substitution s;
    s = s.bind(1, y);
    s = s.bind(2, Term::number(42));
    CHECK(s.walk(x) == Term::number(42));
    CHECK(s.apply(Term::compound("f", {x, y})) ==
          Term::compound("f", {Term::number(42), Term::number(42)}));

    // List tails resolved by the substitution flatten away.
    Substitution s2;
    Term t = Term::variable("T", 3);
    s2 = s2.bind(3, Term::list({Term::number(2)}));
    Term partial = Term::list({Term::number(1)}, t);
    Term whole = s2.apply(partial);
    CHECK(whole == Term::list({Term::number(1), Term::number(2)}));
    CHECK_FALSE(whole.has_tail());
}

TEST_CASE("unification basics") {
    Term x = Term::variable("X", 1);
    Term y = Term::variable("Y", 2);
    Substitution empty;

    auto r = unify(Term::compound("f", {x, Term::number(2)}),
                   Term::compound("f", {Term::number(1), y}), empty);
    REQUIRE(r.has_value());
    CHECK(r->apply(x) == Term::number(1));
    CHECK(r->apply(y) == Term::number(2));

    CHECK_FALSE(unify(Term::constant("a"), Term::constant("b"), empty).has_value());
    CHECK_FALSE(unify(Term::compound("f", {x}), Term::compound("g", {x}), empty).has_value());
    CHECK_FALSE(unify(Term::number(1), Term::constant("1"), empty).has_value());
    CHECK_FALSE(unify(Term::text("a"), Term::constant("a"), empty).has_value());

    // Occurs check blocks cyclic bindings.
    CHECK_FALSE(unify(x, Term::compound("f", {x}), empty).has_value());
    CHECK(unify(x, Term::compound("f", {x}), empty, false).has_value());
}

TEST_CASE("unification over lists with tails") {
    Term x = Term::variable("X", 1);
    Term rest = Term::variable("Rest", 2);
    Substitution empty;

    auto r = unify(Term::list({x}, rest),
                   Term::list({Term::number(1), Term::number(2), Term::number(3)}), empty);
    REQUIRE(r.has_value());
    CHECK(r->apply(x) == Term::number(1));
    CHECK(r->apply(rest) == Term::list({Term::number(2), Term::number(3)}));

    auto r2 = unify(Term::list({Term::number(1)}, rest), Term::list({Term::number(1)}), empty);
    REQUIRE(r2.has_value());
    CHECK(r2->apply(rest) == Term::list({}));

    CHECK_FALSE(
        unify(Term::list({Term::number(1), Term::number(2)}), Term::list({Term::number(1)}), empty)
            .has_value());

    // [1|T1] vs [X|T2] unifies head and tail variables.
    Term t1 = Term::variable("T1", 3);
    Term t2 = Term::variable("T2", 4);
    auto r3 = unify(Term::list({Term::number(1)}, t1), Term::list({x}, t2), empty);
    REQUIRE(r3.has_value());
    CHECK(r3->apply(x) == Term::number(1));
}

TEST_CASE("unify respects time values") {
    TimePoint a{2013, 5, 2, 20, 0, 0};
    Substitution empty;
    CHECK(unify(Term::time_point(a), Term::time_point(a), empty).has_value());
    CHECK_FALSE(
        unify(Term::time_point(a), Term::time_point(TimePoint{2013, 5, 2, 20, 0, 1}), empty)
            .has_value());
    CHECK(unify(Term::time_span(TimeSpan{0, 1, 0, 0}), Term::time_span(TimeSpan{0, 0, 60, 0}),
                empty)
              .has_value());   // equal durations unify
}

TEST_CASE("rename apart produces variants with fresh ids") {
    Term x = Term::variable("X", 1);
    Term y = Term::variable("Y", 2);
    Clause c{Term::compound("p", {x, y}), {Term::compound("q", {y, x})}, {}, 0};
    VarId counter = 100;
    Clause r = rename_apart(c, counter);
    CHECK(counter > 100);
    CHECK(variant_equal(r.head, c.head));
    std::vector<VarId> vars;
    collect_variables(r.head, vars);
    for (VarId v : vars) CHECK(v > 100);
    // Shared variables stay shared after renaming.
    auto u = unify(r.head, Term::compound("p", {Term::number(1), Term::number(2)}), {});
    REQUIRE(u.has_value());
    CHECK(u->apply(r.body[0]) ==
          Term::compound("q", {Term::number(2), Term::number(1)}));
}

TEST_CASE("unification is a most general unifier (random probes)") {
    std::mt19937_64 rng(987654321);

    // Random ground term over a tiny signature.
    auto ground = [&](auto&& self, int depth) -> Term {
        std::uniform_int_distribution<int> pick(0, depth > 0 ? 4 : 2);
        switch (pick(rng)) {
            case 0: return Term::constant("a");
            case 1: return Term::constant("b");
            case 2: return Term::number(std::uniform_int_distribution<int>(0, 5)(rng));
            case 3:
                return Term::compound("f", {self(self, depth - 1), self(self, depth - 1)});
            default: return Term::list({self(self, depth - 1)});
        }
    };
    // Random pattern: ground term with some leaves replaced by variables.
    auto pattern = [&](auto&& self, int depth, VarId& next) -> Term {
        std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 3);
        switch (pick(rng)) {
            case 0: return Term::constant("a");
            case 1: return Term::constant("b");
            case 2: return Term::number(std::uniform_int_distribution<int>(0, 5)(rng));
            case 3: return Term::variable("V", next++ % 4 + 1);   // few ids => sharing
            case 4:
                return Term::compound("f", {self(self, depth - 1, next), self(self, depth - 1, next)});
            default: return Term::list({self(self, depth - 1, next)});
        }
    };

    for (int i = 0; i < 500; ++i) {
        VarId next = 1;
        Term p = pattern(pattern, 3, next);
        Term g = ground(ground, 3);
        auto r = unify(p, g, {});
        if (r) {
            CHECK(r->apply(p) == g);   // unifier really equates the two
        }
        // Unification with itself always succeeds and binds nothing new.
        auto self = unify(p, p, {});
        REQUIRE(self.has_value());
        CHECK(self->apply(p) == p);
    }
}

TEST_CASE("term order is a strict weak total order on samples") {
    std::vector<Term> ts = {
        Term::constant("a"),    Term::constant("b"),
        Term::number(-1),       Term::number(3),
        Term::text("a"),        Term::variable("X", 1),
        Term::variable("Y", 2), Term::compound("f", {Term::number(1)}),
        Term::compound("f", {Term::number(1), Term::number(2)}),
        Term::list({Term::number(1)}),
        Term::time_point(TimePoint{2013, 1, 1, 0, 0, 0}),
        Term::time_span(TimeSpan{1, 0, 0, 0}),
    };
    for (const Term& a : ts)
        for (const Term& b : ts) {
            int ab = term_order(a, b);
            int ba = term_order(b, a);
            CHECK(((ab == 0) == (ba == 0)));
            if (ab != 0) CHECK(ab == -ba);
            CHECK((ab == 0) == (a == b));
        }
}
