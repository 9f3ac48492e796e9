#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ecalp/parser.hpp"

using namespace ecalp;

TEST_CASE("facts rules and comments") {
    auto r = parse_program(R"(
% flights on file
flight(paris, f1).
flight(paris, f2).
route(X, Y) :- flight(X, Y).
)");
    REQUIRE(r.ok());
    REQUIRE(r.program->clauses.size() == 3);
    CHECK(r.program->clauses[0].is_fact());
    CHECK(r.program->clauses[0].head ==
          Term::compound("flight", {Term::constant("paris"), Term::constant("f1")}));
    const Clause& rule = r.program->clauses[2];
    CHECK(rule.body.size() == 1);
    CHECK(variant_equal(rule.head, Term::compound("route", {Term::variable("A", 1),
                                                            Term::variable("B", 2)})));
}

TEST_CASE("variables scope per clause") {
    auto r = parse_program("p(X) :- q(X).\nr(X).\n");
    REQUIRE(r.ok());
    const Clause& c0 = r.program->clauses[0];
    const Clause& c1 = r.program->clauses[1];
    CHECK(c0.head.args()[0].var_id() == c0.body[0].args()[0].var_id());
    CHECK(c0.head.args()[0].var_id() != c1.head.args()[0].var_id());
}

TEST_CASE("anonymous variables are all distinct") {
    auto r = parse_program("p(_, _) :- q(_).\n");
    REQUIRE(r.ok());
    const Clause& c = r.program->clauses[0];
    std::vector<VarId> vars;
    collect_variables(c.head, vars);
    collect_variables(c.body[0], vars);
    REQUIRE(vars.size() == 3);
    CHECK(vars[0] != vars[1]);
    CHECK(vars[1] != vars[2]);
}

TEST_CASE("negative numbers strings and escapes") {
    auto t = parse_term_text("f(-3, \"a\\\"b\\n\", [])");
    REQUIRE(t.has_value());
    CHECK(t->args()[0] == Term::number(-3));
    CHECK(t->args()[1] == Term::text("a\"b\n"));
    CHECK(t->args()[2] == Term::list({}));
}

TEST_CASE("lists with tails") {
    auto t = parse_term_text("[1, 2 | T]");
    REQUIRE(t.has_value());
    REQUIRE(t->is(Term::Kind::List));
    CHECK(t->args().size() == 2);
    REQUIRE(t->has_tail());
    CHECK(t->tail().is(Term::Kind::Variable));

    auto e = parse_term_text("[]");
    REQUIRE(e.has_value());
    CHECK(e->is(Term::Kind::List));
    CHECK(e->args().empty());
}

TEST_CASE("datetime and timespan literals fold into values") {
    auto t = parse_term_text("datetime(2013, 5, 2, 20, 0, 0)");
    REQUIRE(t.has_value());
    REQUIRE(t->is(Term::Kind::TimePoint));
    CHECK(t->time_point_value() == TimePoint{2013, 5, 2, 20, 0, 0});

    auto s = parse_term_text("timespan(0, 0, 0, 10)");
    REQUIRE(s.has_value());
    REQUIRE(s->is(Term::Kind::TimeSpan));
    CHECK(s->time_span_value() == TimeSpan{0, 0, 0, 10});

    // Non-literal arguments leave it a plain compound.
    auto v = parse_term_text("datetime(Y, 5, 2, 20, 0, 0)");
    REQUIRE(v.has_value());
    CHECK(v->is(Term::Kind::Compound));
}

TEST_CASE("invalid datetime is a parse error with position") {
    auto r = parse_program("p :- q(datetime(2013, 2, 29, 0, 0, 0)).\n");
    REQUIRE_FALSE(r.ok());
    CHECK(r.error->line == 1);
    CHECK(r.error->message.find("calendar") != std::string::npos);

    auto r2 = parse_program("p(timespan(0, 0, -1, 0)).\n");
    REQUIRE_FALSE(r2.ok());
}

TEST_CASE("comparison operators parse infix") {
    auto r = parse_query("T1 <= T2, X != Y, A < B, C >= D?");
    REQUIRE(r.ok());
    REQUIRE(r.literals->size() == 4);
    CHECK((*r.literals)[0].symbol() == "<=");
    CHECK((*r.literals)[1].symbol() == "!=");
    CHECK((*r.literals)[2].symbol() == "<");
    CHECK((*r.literals)[3].symbol() == ">=");
    CHECK(r.named_vars.size() == 8);
    CHECK(r.named_vars[0].first == "T1");
}

TEST_CASE("cut parses as a body literal") {
    auto r = parse_program("p(X) :- q(X), !, r(X).\n");
    REQUIRE(r.ok());
    CHECK(r.program->clauses[0].body[1] == Term::constant("!"));
}

TEST_CASE("not in clause head is rejected") {
    auto r = parse_program("not(p(X)) :- q(X).\n");
    REQUIRE_FALSE(r.ok());
    CHECK(r.error->line >= 1);
}

TEST_CASE("neg heads are accepted") {
    auto r = parse_program("neg(p(x)).\nneg(q(X)) :- r(X).\n");
    REQUIRE(r.ok());
    CHECK(r.program->clauses[0].head.symbol() == "neg");
}

TEST_CASE("eca facts normalize to six parts") {
    auto r = parse_program(R"(
eca(condition(c), action(a)).
eca(event(e), condition(c), action(a)).
eca(time(t), event(e), condition(c), action(a), post(p), else(l)).
eca(_, event(e), condition(c), action(a), _, _).
)");
    REQUIRE(r.ok());
    REQUIRE(r.program->eca_rules.size() == 4);

    const Term& two = r.program->eca_rules[0];
    REQUIRE(two.args().size() == 6);
    CHECK(is_blank(two.args()[0]));
    CHECK(is_blank(two.args()[1]));
    CHECK(two.args()[2] == Term::compound("condition", {Term::constant("c")}));
    CHECK(two.args()[3] == Term::compound("action", {Term::constant("a")}));
    CHECK(is_blank(two.args()[4]));
    CHECK(is_blank(two.args()[5]));

    const Term& three = r.program->eca_rules[1];
    CHECK(is_blank(three.args()[0]));
    CHECK(three.args()[1] == Term::compound("event", {Term::constant("e")}));

    const Term& six = r.program->eca_rules[2];
    CHECK(six.args()[0] == Term::compound("time", {Term::constant("t")}));
    CHECK(six.args()[5] == Term::compound("else", {Term::constant("l")}));

    const Term& blanks = r.program->eca_rules[3];
    CHECK(is_blank(blanks.args()[0]));
    CHECK(is_blank(blanks.args()[4]));
    CHECK(is_blank(blanks.args()[5]));
}

TEST_CASE("eca facts with bad arity are rejected") {
    auto r = parse_program("eca(action(a)).\n");
    REQUIRE_FALSE(r.ok());
    auto r2 = parse_program("eca(a, b, c, d, e, f, g).\n");
    REQUIRE_FALSE(r2.ok());
}

TEST_CASE("integrity constraints are collected") {
    auto r = parse_program(R"(
integrity(xor(p(x), neg(p(x)))).
integrity(mutex(a, b)).
p(x).
)");
    REQUIRE(r.ok());
    REQUIRE(r.program->integrity_constraints.size() == 2);
    CHECK(r.program->integrity_constraints[0].symbol() == "xor");
    CHECK(r.program->integrity_constraints[1].symbol() == "mutex");
}

TEST_CASE("directives are collected in order") {
    auto r = parse_program(":- add(id1, \"p(a).\").\n:- detect(e1).\n");
    REQUIRE(r.ok());
    REQUIRE(r.program->directives.size() == 2);
    CHECK((*r.program).directives[0][0].symbol() == "add");
    CHECK((*r.program).directives[1][0].symbol() == "detect");
}

TEST_CASE("queries accept ? and . terminators") {
    auto q1 = parse_query("flight(paris, F)?");
    REQUIRE(q1.ok());
    CHECK(q1.named_vars.size() == 1);
    CHECK(q1.named_vars[0].first == "F");

    auto q2 = parse_query("flight(paris, F).");
    REQUIRE(q2.ok());

    auto q3 = parse_query("flight(paris, F)");
    REQUIRE_FALSE(q3.ok());
}

TEST_CASE("parse errors carry position and expectation") {
    auto r = parse_program("p(a) :- .\n");
    REQUIRE_FALSE(r.ok());
    CHECK(r.error->line == 1);
    CHECK(r.error->column >= 9);
    CHECK_FALSE(r.error->expected.empty());

    auto r2 = parse_program("p(a.\n");
    REQUIRE_FALSE(r2.ok());

    auto r3 = parse_program("p(a)\nq(b).\n");
    REQUIRE_FALSE(r3.ok());
    CHECK(r3.error->line == 2);
}

TEST_CASE("format and reparse round trips") {
    const char* samples[] = {
        "f(a, -3, \"x y\", [1, 2 | T], g(X, X))",
        "[ ]",
        "[a]",
        "datetime(2013, 5, 2, 20, 0, 0)",
        "timespan(0, 1, 30, 0)",
        "holdsInterval([e1, e2], [T11, T22])",
    };
    for (const char* s : samples) {
        auto t = parse_term_text(s);
        REQUIRE(t.has_value());
        auto back = parse_term_text(format_term(*t));
        REQUIRE(back.has_value());
        CHECK(variant_equal(*t, *back));
    }
}

TEST_CASE("format clause renders rules") {
    auto r = parse_program("p(X) :- q(X), X <= 3, !.\n");
    REQUIRE(r.ok());
    std::string s = format_clause(r.program->clauses[0]);
    auto back = parse_program(s);
    REQUIRE(back.ok());
    CHECK(variant_equal(back.program->clauses[0].head, r.program->clauses[0].head));
    REQUIRE(back.program->clauses[0].body.size() == 3);
    CHECK(back.program->clauses[0].body[2] == Term::constant("!"));
}

TEST_CASE("format disambiguates same-named distinct variables") {
    // Construct a term where two distinct ids share a print name.
    Term t = Term::compound("f", {Term::variable("X", 1), Term::variable("X", 2)});
    auto back = parse_term_text(format_term(t));
    REQUIRE(back.has_value());
    CHECK(variant_equal(t, *back));
}

namespace {

Term random_term(std::mt19937_64& rng, int depth, VarId& vnext) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 6 : 3);
    switch (pick(rng)) {
        case 0: return Term::constant("c" + std::to_string(rng() % 4));
        case 1: return Term::number(static_cast<long long>(rng() % 2001) - 1000);
        case 2: return Term::text("s" + std::to_string(rng() % 4));
        case 3: return Term::variable("V" + std::to_string(vnext), ++vnext);
        case 4: {
            std::vector<Term> args;
            std::size_t n = 1 + rng() % 3;
            for (std::size_t i = 0; i < n; ++i)
                args.push_back(random_term(rng, depth - 1, vnext));
            return Term::compound("g" + std::to_string(rng() % 3), std::move(args));
        }
        case 5: {
            std::vector<Term> items;
            std::size_t n = rng() % 3;
            for (std::size_t i = 0; i < n; ++i)
                items.push_back(random_term(rng, depth - 1, vnext));
            std::optional<Term> tail;
            if (!items.empty() && rng() % 3 == 0)
                tail = Term::variable("T" + std::to_string(vnext), ++vnext);
            return Term::list(std::move(items), std::move(tail));
        }
        default:
            return rng() % 2 ? Term::time_point(TimePoint::from_seconds(
                                   static_cast<long long>(rng() % 4'000'000'000ULL)))
                             : Term::time_span(TimeSpan{static_cast<int>(rng() % 30),
                                                        static_cast<int>(rng() % 24),
                                                        static_cast<int>(rng() % 60),
                                                        static_cast<int>(rng() % 60)});
    }
}

}   // namespace

TEST_CASE("random terms round trip through format") {
    std::mt19937_64 rng(424242);
    for (int i = 0; i < 500; ++i) {
        VarId vnext = 0;
        Term t = random_term(rng, 4, vnext);
        auto back = parse_term_text(format_term(t));
        REQUIRE(back.has_value());
        CHECK(variant_equal(t, *back));
    }
}

TEST_CASE("fuzzed input never crashes the parser") {
    std::mt19937_64 rng(777);
    const std::string alphabet = "pqXY_09(),[]|.?!:-<=>\"\\ \n\t%abc";
    for (int i = 0; i < 3000; ++i) {
        std::string s;
        std::size_t n = rng() % 40;
        for (std::size_t j = 0; j < n; ++j) s.push_back(alphabet[rng() % alphabet.size()]);
        auto r = parse_program(s);           // must either parse or diagnose
        if (!r.ok()) CHECK(r.error->line >= 1);
        auto q = parse_query(s);
        (void)q;
    }
}
