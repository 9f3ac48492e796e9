#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ecalp/eca_daemon.hpp"
#include "ecalp/events.hpp"
#include "ecalp/parser.hpp"
#include "ecalp/ruleml.hpp"
#include "ecalp/updates.hpp"

using namespace ecalp;

namespace {

using RK = RulemlKind;

std::string fixture(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/ruleml/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const std::vector<std::string>& corpus() {
    static const std::vector<std::string> docs = {
        "01_minimal",   "02_flight",    "03_timer",     "04_sequence",      "05_orxor",
        "06_not_window", "07_any",      "08_aperiodic", "09_holdsinterval", "10_occurs",
        "11_happens",   "12_planned",   "13_initially", "14_initiates",     "15_terminates",
        "16_holdsat",   "17_valueat"};
    return docs;
}

RulemlNode parsed_doc(const std::string& stem) {
    RulemlParse p = parse_eca_ruleml(slurp(fixture(stem + ".xml")));
    REQUIRE_MESSAGE(p.ok(), stem << ": " << (p.errors.empty() ? "?" : p.errors.front()));
    return *p.root;
}

const BuiltinRegistry& reg() {
    static BuiltinRegistry r = default_builtins();
    return r;
}

// Booking backend for the travel-agent document: f1 is always full, any
// other flight books and leaves a booked/2 fact behind.
const BuiltinRegistry& booking_reg() {
    static BuiltinRegistry r = [] {
        BuiltinRegistry b = default_builtins();
        b.add("bookFlight", 2,
              [](BuiltinContext& ctx, const Term& goal, const Substitution& input,
                 const std::function<bool(const Substitution&)>& yield) {
                  Term who = input.apply(goal.args()[0]);
                  Term flight = input.apply(goal.args()[1]);
                  if (flight == Term::constant("f1")) return true;
                  Intent intent;
                  intent.kind = Intent::Kind::Add;
                  intent.payload_text =
                      format_term(Term::compound("booked", {who, flight})) + ".";
                  ctx.emit(intent);
                  return yield(input);
              },
              true);
        return b;
      }();
    return r;
}

bool proves(const KnowledgeState& state, const std::string& query) {
    QueryResult q = parse_query(query);
    REQUIRE(q.ok());
    Solver solver(state, reg());
    return solver.provable(*q.literals);
}

std::multiset<std::string> clause_set(const KnowledgeState& state) {
    std::multiset<std::string> out;
    for (const Clause& c : state.all_clauses()) out.insert(format_clause(c));
    return out;
}

struct SetupModule {
    std::string oid;
    std::string file;
};

struct Scenario {
    std::string doc;
    std::vector<SetupModule> setup;
    std::vector<std::pair<std::string, long long>> occurrences;
    std::uint64_t cycles = 1;
    bool daemon = false;
    bool booking = false;
};

struct RunResult {
    std::string log;
    KnowledgeState state;
};

RunResult run_rules(const Scenario& sc, const std::string& rules_text) {
    KnowledgeState state;
    for (const SetupModule& m : sc.setup) {
        ModuleLoad load = load_module_text(state, m.oid, slurp(fixture(m.file)));
        REQUIRE(load.ok());
        state = *load.state;
    }
    ModuleLoad rules = load_module_text(state, "rules", rules_text);
    REQUIRE_MESSAGE(rules.ok(), sc.doc << ": " << rules.error->to_string());
    state = *rules.state;
    for (const auto& [event, at] : sc.occurrences)
        state = record_occurrence(state, *parse_term_text(event), Term::number(at));

    const BuiltinRegistry& r = sc.booking ? booking_reg() : reg();
    DaemonOptions opts;
    opts.clock = std::make_shared<SimulatedClock>(TimePoint::from_seconds(0));
    opts.timers = std::make_shared<TimerRegistry>();
    opts.sink = [](const Term&, const Term&) {};

    std::string log;
    if (sc.daemon) {
        DaemonResult res =
            run_daemon(state, r, opts, std::chrono::milliseconds(1000), sc.cycles);
        for (const CycleReport& rep : res.reports) log += format_cycle_report(rep);
        return {log, res.state};
    }
    for (std::uint64_t c = 1; c <= sc.cycles; ++c) {
        CycleResult cr = run_cycle(state, r, opts, c);
        log += format_cycle_report(cr.report);
        state = cr.state;
    }
    return {log, std::move(state)};
}

// Runs the translated document and the hand-written fixture side by side and
// demands identical reports and identical final clause sets.
RunResult check_equivalent(const Scenario& sc) {
    RulemlNode root = parsed_doc(sc.doc);
    std::string error;
    auto tr = translate_to_ecalp(root, &error);
    REQUIRE_MESSAGE(tr, sc.doc << ": " << error);

    RunResult translated = run_rules(sc, tr->program);
    RunResult handwritten = run_rules(sc, slurp(fixture(sc.doc + ".ecalp")));
    CHECK(translated.log == handwritten.log);
    CHECK(clause_set(translated.state) == clause_set(handwritten.state));
    return translated;
}

}   // namespace

TEST_CASE("every kind maps to a distinct tag name") {
    std::set<std::string> seen;
    for (int k = 0; k <= static_cast<int>(RK::Oid); ++k) {
        std::string name = ruleml_kind_name(static_cast<RK>(k));
        CHECK(name != "?");
        CHECK(seen.insert(name).second);
    }
}

TEST_CASE("builders compare structurally") {
    RulemlNode a = ruleml_node(RK::Plex, {ruleml_leaf(RK::Ind, "x")});
    RulemlNode b = ruleml_node(RK::Plex, {ruleml_leaf(RK::Ind, "x")});
    CHECK(a == b);
    b.children[0].text = "y";
    CHECK_FALSE(a == b);
}

TEST_CASE("xml reader reports malformed documents") {
    auto first_error = [](const std::string& xml) {
        RulemlParse p = parse_eca_ruleml(xml);
        REQUIRE_FALSE(p.ok());
        REQUIRE_FALSE(p.errors.empty());
        return p.errors.front();
    };

    CHECK(first_error("<Ind>a").find("unterminated") != std::string::npos);
    CHECK(first_error("<Ind>a</Var>").find("mismatched") != std::string::npos);
    CHECK(first_error("<Ind>a&nope;</Ind>").find("entity") != std::string::npos);
    CHECK(first_error("<Ind>a</Ind><Ind>b</Ind>").find("after the root") != std::string::npos);
    CHECK(first_error("<Plex>text<Ind>a</Ind></Plex>").find("mixes text") != std::string::npos);
    CHECK(first_error("<Banana/>").find("unknown element") != std::string::npos);
    CHECK(first_error("").find("empty") != std::string::npos);
}

TEST_CASE("entities and attributes survive a round trip") {
    std::string xml = "<Cterm scope=\"a&amp;b\">\n"
                      "  <Ind>f</Ind>\n"
                      "  <Data>1 &lt; 2</Data>\n"
                      "</Cterm>\n";
    RulemlParse p = parse_eca_ruleml(xml);
    REQUIRE(p.ok());
    CHECK(p.root->attrs == decltype(p.root->attrs){{"scope", "a&b"}});
    CHECK(p.root->children[1].text == "1 < 2");
    CHECK(emit_eca_ruleml(*p.root) == xml);
}

TEST_CASE("grammar violations name the offending production") {
    auto errors_of = [](const RulemlNode& n) { return validate_ruleml(n).errors; };
    auto has = [](const std::vector<std::string>& errs, const std::string& needle) {
        return std::any_of(errs.begin(), errs.end(), [&](const std::string& e) {
            return e.find(needle) != std::string::npos;
        });
    };

    SUBCASE("action part is mandatory") {
        RulemlNode eca = ruleml_node(
            RK::ECA, {ruleml_node(RK::Condition, {ruleml_node(RK::Cterm,
                                                              {ruleml_leaf(RK::Ind, "c")})})});
        CHECK(has(errors_of(eca), "ECA: action part is mandatory"));
        CHECK_FALSE(emit_eca_ruleml(eca).has_value());
    }
    SUBCASE("repetition operators need at least two children") {
        RulemlNode seq = ruleml_node(
            RK::Sequence, {ruleml_node(RK::Cterm, {ruleml_leaf(RK::Ind, "a")})});
        CHECK(has(errors_of(seq), "Sequence: at least two children"));
        CHECK(has(errors_of(ruleml_node(RK::Or)), "Or: at least two children"));
    }
    SUBCASE("periodic needs its interval") {
        RulemlNode p = ruleml_node(RK::Periodic,
                                   {ruleml_node(RK::Cterm, {ruleml_leaf(RK::Ind, "hourly")})});
        CHECK(has(errors_of(p), "Periodic"));
    }
    SUBCASE("retract takes exactly one oid") {
        CHECK(has(errors_of(ruleml_node(RK::Retract)), "Retract"));
        RulemlNode bad = ruleml_node(RK::Retract,
                                     {ruleml_node(RK::Cterm, {ruleml_leaf(RK::Ind, "x")})});
        CHECK(has(errors_of(bad), "Retract"));
    }
    SUBCASE("naf children outside the subset are rejected") {
        RulemlNode naf = ruleml_node(RK::Naf, {ruleml_leaf(RK::Ind, "p")});
        CHECK(has(errors_of(naf), "Naf"));
    }
    SUBCASE("duplicate or misordered eca parts are rejected") {
        RulemlNode act = ruleml_node(RK::Action,
                                     {ruleml_node(RK::Cterm, {ruleml_leaf(RK::Ind, "a")})});
        RulemlNode cond = ruleml_node(RK::Condition,
                                      {ruleml_node(RK::Cterm, {ruleml_leaf(RK::Ind, "c")})});
        RulemlNode eca = ruleml_node(RK::ECA, {act, cond});
        CHECK(has(errors_of(eca), "out-of-order"));
    }
    SUBCASE("grammar errors flow through parse_eca_ruleml") {
        RulemlParse p = parse_eca_ruleml("<Sequence>\n  <Cterm>\n    <Ind>a</Ind>\n"
                                         "  </Cterm>\n</Sequence>\n");
        REQUIRE(p.root.has_value());
        CHECK_FALSE(p.ok());
        CHECK(has(p.errors, "Sequence: at least two children"));
    }
}

TEST_CASE("corpus documents round-trip byte for byte") {
    for (const std::string& stem : corpus()) {
        CAPTURE(stem);
        std::string xml = slurp(fixture(stem + ".xml"));
        RulemlNode root = parsed_doc(stem);
        std::string error;
        auto emitted = emit_eca_ruleml(root, &error);
        REQUIRE_MESSAGE(emitted, stem << ": " << error);
        CHECK(*emitted == xml);

        RulemlParse again = parse_eca_ruleml(*emitted);
        REQUIRE(again.ok());
        CHECK(*again.root == root);
    }
}

TEST_CASE("every corpus translation loads as a module") {
    for (const std::string& stem : corpus()) {
        CAPTURE(stem);
        std::string error;
        auto tr = translate_to_ecalp(parsed_doc(stem), &error);
        REQUIRE_MESSAGE(tr, stem << ": " << error);
        ModuleLoad load = load_module_text(KnowledgeState{}, "rules", tr->program);
        CHECK_MESSAGE(load.ok(), stem << ": " << load.error->to_string());
    }
}

TEST_CASE("translation produces the expected clauses") {
    SUBCASE("minimal eca rule") {
        auto tr = translate_to_ecalp(parsed_doc("01_minimal"));
        REQUIRE(tr);
        CHECK(tr->program == "eca(_,occurs(ping,T),_,add(oid1,\"ponged(1).\"),_,_).\n");
        CHECK(tr->warnings.empty());
    }
    SUBCASE("flight rule maps attachment, cut and else") {
        auto tr = translate_to_ecalp(parsed_doc("02_flight"));
        REQUIRE(tr);
        CHECK(tr->program ==
              "eca(_,occurs(requestFlight(Customer),T),flight(Flight),"
              "bookFlight(Customer,Flight),!,sendMessage(Customer,bookedUp)).\n");
        REQUIRE(tr->warnings.size() == 1);
        CHECK(tr->warnings[0].find("Attachment") != std::string::npos);
        CHECK(tr->warnings[0].find("bookingService") != std::string::npos);
    }
    SUBCASE("algebra events run through the event matcher") {
        auto tr = translate_to_ecalp(parsed_doc("04_sequence"));
        REQUIRE(tr);
        CHECK(tr->program ==
              "eca(_,event(sequence(login,concurrent(swipe,pin)),DetectedAt),_,"
              "add(oid1,\"granted(door).\"),_,_).\n");
    }
    SUBCASE("plain facts for the event-calculus layer") {
        auto tr = translate_to_ecalp(parsed_doc("15_terminates"));
        REQUIRE(tr);
        CHECK(tr->program == "terminates(cancel,[orderPlaced,orderShipped],Gap).\n");
        CHECK(tr->warnings.empty());

        auto holds = translate_to_ecalp(parsed_doc("09_holdsinterval"));
        REQUIRE(holds);
        CHECK(holds->program ==
              "holdsInterval(periodic(everyHour,[sessionStart,sessionEnd]),"
              "[datetime(2026,1,15,9,0,0),datetime(2026,1,15,17,0,0)]).\n");
        CHECK(holds->warnings.empty());
    }
    SUBCASE("constructs without runtime semantics warn") {
        for (const char* stem : {"11_happens", "12_planned", "13_initially", "14_initiates",
                                 "16_holdsat", "17_valueat"}) {
            CAPTURE(stem);
            auto tr = translate_to_ecalp(parsed_doc(stem));
            REQUIRE(tr);
            REQUIRE(tr->warnings.size() == 1);
            CHECK(tr->warnings[0].find("out of scope") != std::string::npos);
        }
        auto tr = translate_to_ecalp(parsed_doc("16_holdsat"));
        REQUIRE(tr);
        CHECK(tr->program == "holdsAt(loggedIn(alice),12).\n");
    }
    SUBCASE("slots and skolems become argument terms") {
        auto tr = translate_to_ecalp(parsed_doc("12_planned"));
        REQUIRE(tr);
        CHECK(tr->program == "planned(delivery(recipient(skolem(k1)),parcel(42)),When).\n");
    }
    SUBCASE("assert oids are generated deterministically") {
        auto once = translate_to_ecalp(parsed_doc("01_minimal"));
        auto twice = translate_to_ecalp(parsed_doc("01_minimal"));
        REQUIRE(once);
        REQUIRE(twice);
        CHECK(once->program == twice->program);
    }
}

TEST_CASE("fact documents load to the same clauses as their fixtures") {
    for (const char* stem : {"09_holdsinterval", "10_occurs", "11_happens", "12_planned",
                             "13_initially", "14_initiates", "15_terminates", "16_holdsat",
                             "17_valueat"}) {
        CAPTURE(stem);
        auto tr = translate_to_ecalp(parsed_doc(stem));
        REQUIRE(tr);
        ModuleLoad a = load_module_text(KnowledgeState{}, "rules", tr->program);
        ModuleLoad b = load_module_text(KnowledgeState{}, "rules",
                                        slurp(fixture(std::string(stem) + ".ecalp")));
        REQUIRE(a.ok());
        REQUIRE(b.ok());
        CHECK(clause_set(*a.state) == clause_set(*b.state));
    }
}

TEST_CASE("translated rules behave exactly like their hand-written fixtures") {
    SUBCASE("minimal: occurrence triggers an assert") {
        RunResult r = check_equivalent({.doc = "01_minimal",
                                        .occurrences = {{"ping", 0}}});
        CHECK(r.log.find("fired") != std::string::npos);
        CHECK(proves(r.state, "ponged(1)?"));
    }
    SUBCASE("flight: backtracks over full flights, books the free one") {
        RunResult r = check_equivalent({.doc = "02_flight",
                                        .setup = {{"setup", "02_flight.setup.ecalp"}},
                                        .occurrences = {{"requestFlight(alice)", 0}},
                                        .booking = true});
        CHECK(proves(r.state, "booked(alice, f2)?"));
        CHECK_FALSE(proves(r.state, "booked(alice, f1)?"));
        CHECK(r.log.find("notify") == std::string::npos);
    }
    SUBCASE("flight: with no flights the else part answers booked up") {
        RunResult r = check_equivalent({.doc = "02_flight",
                                        .occurrences = {{"requestFlight(alice)", 0}},
                                        .booking = true});
        CHECK(r.log.find("else_fired") != std::string::npos);
        CHECK(r.log.find("notify alice bookedUp") != std::string::npos);
        CHECK_FALSE(proves(r.state, "booked(alice, Flight)?"));
    }
    SUBCASE("timer: interval rule fires once over twelve cycles") {
        RunResult r = check_equivalent({.doc = "03_timer",
                                        .setup = {{"setup", "03_timer.setup.ecalp"}},
                                        .cycles = 12,
                                        .daemon = true});
        std::size_t first = r.log.find("notify ops digestReady");
        REQUIRE(first != std::string::npos);
        CHECK(r.log.find("notify ops digestReady", first + 1) == std::string::npos);
        CHECK(r.log.find("cycle 11") < first);
    }
    SUBCASE("sequence with a concurrent tail") {
        RunResult r = check_equivalent({.doc = "04_sequence",
                                        .occurrences = {{"login", 1}, {"swipe", 3}, {"pin", 3}}});
        CHECK(proves(r.state, "granted(door)?"));
    }
    SUBCASE("xor over or and conjunction, guarded by naf") {
        RunResult r = check_equivalent({.doc = "05_orxor", .occurrences = {{"alarmA", 2}}});
        CHECK(proves(r.state, "alerted(ops)?"));
    }
    SUBCASE("negative event window with a strong-negation guard") {
        RunResult r = check_equivalent({.doc = "06_not_window",
                                        .setup = {{"setup", "06_not_window.setup.ecalp"}},
                                        .occurrences = {{"watchStart", 1}, {"watchEnd", 5}}});
        CHECK(proves(r.state, "escalated(pager)?"));
    }
    SUBCASE("any two of three sensors") {
        RunResult r = check_equivalent({.doc = "07_any",
                                        .occurrences = {{"sensorA", 1}, {"sensorC", 4}}});
        CHECK(proves(r.state, "quorum(sensors)?"));
    }
    SUBCASE("aperiodic spike retracts the junk module") {
        Scenario sc{.doc = "08_aperiodic",
                    .setup = {{"junk", "08_aperiodic.setup.ecalp"}},
                    .occurrences = {{"shiftStart", 0}, {"tempSpike", 2}, {"shiftEnd", 5}}};
        KnowledgeState before;
        {
            ModuleLoad load = load_module_text(before, "junk",
                                               slurp(fixture("08_aperiodic.setup.ecalp")));
            REQUIRE(load.ok());
            CHECK(proves(*load.state, "stale(1)?"));
        }
        RunResult r = check_equivalent(sc);
        CHECK_FALSE(proves(r.state, "stale(1)?"));
    }
}
