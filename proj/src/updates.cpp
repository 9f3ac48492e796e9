#include "ecalp/updates.hpp"

#include <functional>
#include <map>
#include <regex>

#include "ecalp/events.hpp"
#include "ecalp/parser.hpp"

namespace ecalp {

namespace {

[[noreturn]] void bad_call(const Term& goal, const std::string& message) {
    throw SolverError(SolverError::Kind::BadCall, message, goal);
}

/// Proof oracle shared between the free functions (own Solver) and the
/// builtin (nested ctx.prove): first answer of a goal list, formatted.
using Prover = std::function<bool(const std::vector<Term>& goals, std::string* witness)>;

Prover solver_prover(const KnowledgeState& state, const BuiltinRegistry& reg) {
    return [&state, &reg](const std::vector<Term>& goals, std::string* witness) {
        Solver solver(state, reg);
        bool found = false;
        solver.solve(goals, [&](const Substitution& s, const std::vector<Intent>&) {
            found = true;
            if (witness) {
                std::string text;
                for (const Term& g : goals) {
                    if (!text.empty()) text += ", ";
                    text += format_term(s.apply(g));
                }
                *witness = text;
            }
            return false;
        });
        return found;
    };
}

bool violated_by(const IntegrityConstraint& ic, const Prover& prove, std::string* witness) {
    try {
        switch (ic.kind) {
            case IntegrityConstraint::Kind::Xor:
                if (prove({ic.parts[0], ic.parts[1]}, witness)) return true;
                return prove({Term::compound("not", {ic.parts[0]}),
                              Term::compound("not", {ic.parts[1]})},
                             witness);
            case IntegrityConstraint::Kind::Mutex:
                return prove({ic.parts[0], ic.parts[1]}, witness);
            case IntegrityConstraint::Kind::Forbidden:
            case IntegrityConstraint::Kind::Custom:
                return prove({ic.parts[0]}, witness);
        }
    } catch (const SolverError& e) {
        if (witness) *witness = std::string("error: ") + e.what();
        return true;
    }
    return false;
}

std::vector<ConstraintViolation> violations_for(const std::vector<Term>& payloads,
                                                const Prover& prove) {
    std::vector<ConstraintViolation> out;
    for (const Term& payload : payloads) {
        IntegrityConstraint ic = classify_constraint(payload);
        std::string witness;
        if (violated_by(ic, prove, &witness)) out.push_back({payload, witness});
    }
    return out;
}

KnowledgeState with_hypothesis(const KnowledgeState& state, const Term& lit, Polarity polarity) {
    if (polarity == Polarity::Add) {
        Clause fact;
        fact.head = lit;
        return state.add_module("$hypothesis", {fact});
    }
    KnowledgeState hypo;
    for (const std::string& oid : state.module_order()) {
        const std::vector<Clause>* clauses = state.module(oid);
        if (!clauses) continue;
        std::vector<Clause> keep;
        for (const Clause& c : *clauses)
            if (!(c.is_fact() && unify(c.head, lit, Substitution{}).has_value()))
                keep.push_back(c);
        if (!keep.empty()) hypo = hypo.add_module(oid, keep);
    }
    return hypo;
}

std::string auto_oid(const KnowledgeState& state) {
    std::uint64_t n = state.state_index() + 1;
    std::string oid = "$m" + std::to_string(n);
    while (state.has_module(oid)) oid = "$m" + std::to_string(++n);
    return oid;
}

/// Apply one op to the working state; errors and messages accumulate in the
/// caller's result. Nested transaction ops join the same atomic batch.
bool apply_op(KnowledgeState& working, const Intent& op, std::vector<std::string>& errors,
              std::vector<std::pair<Term, Term>>& messages) {
    switch (op.kind) {
        case Intent::Kind::Add: {
            std::string err;
            auto clauses = instantiate_payload(op.payload_text, op.payload_bindings, &err);
            if (!clauses) {
                errors.push_back("add " + (op.oid.empty() ? "<auto>" : op.oid) + ": " + err);
                return false;
            }
            working = working.add_module(op.oid.empty() ? auto_oid(working) : op.oid,
                                         std::move(*clauses));
            return true;
        }
        case Intent::Kind::Remove:
            working = working.remove_module(op.oid);
            return true;
        case Intent::Kind::Consume:
            working = apply_consume(working, op.consume_target, op.policy);
            return true;
        case Intent::Kind::Message:
            messages.emplace_back(op.recipient, op.message);
            return true;
        case Intent::Kind::Transaction:
            for (const Intent& inner : op.ops)
                if (!apply_op(working, inner, errors, messages)) return false;
            return true;
    }
    return true;
}

std::string oid_text(const Term& t) {
    if (t.is(Term::Kind::Text) || t.is(Term::Kind::Constant)) return t.symbol();
    return format_term(t);
}

std::optional<Intent> make_add_intent(const Term& goal, std::span<const Term> args,
                                      const Substitution& input) {
    Intent intent;
    intent.kind = Intent::Kind::Add;
    std::size_t payload_at = 0;
    if (args.size() >= 2) {
        intent.oid = oid_text(input.apply(args[0]));
        payload_at = 1;
    }
    Term payload = input.apply(args[payload_at]);
    if (payload.is(Term::Kind::Variable)) return std::nullopt;
    intent.payload_text =
        payload.is(Term::Kind::Text) ? payload.symbol() : format_term(payload) + ".";
    if (args.size() == 3) {
        Term bindings = input.apply(args[2]);
        if (!bindings.is(Term::Kind::List) || bindings.has_tail()) return std::nullopt;
        intent.payload_bindings.assign(bindings.args().begin(), bindings.args().end());
    }
    (void)goal;
    return intent;
}

std::optional<Intent> term_to_intent(const Term& t, const Substitution& input);

std::optional<std::vector<Intent>> terms_to_intents(std::span<const Term> items,
                                                    const Substitution& input) {
    std::vector<Intent> ops;
    for (const Term& item : items) {
        auto op = term_to_intent(item, input);
        if (!op) return std::nullopt;
        ops.push_back(std::move(*op));
    }
    return ops;
}

std::optional<Intent> term_to_intent(const Term& t, const Substitution& input) {
    if (!t.is(Term::Kind::Compound)) return std::nullopt;
    const std::string& f = t.symbol();
    std::size_t n = t.args().size();
    if ((f == "add" && n >= 1 && n <= 3) || (f == "update" && (n == 2 || n == 3)))
        return make_add_intent(t, t.args(), input);
    if (f == "remove" && n == 1) {
        Intent intent;
        intent.kind = Intent::Kind::Remove;
        intent.oid = oid_text(input.apply(t.args()[0]));
        return intent;
    }
    if (f == "consume" && (n == 1 || n == 2)) {
        Intent intent;
        intent.kind = Intent::Kind::Consume;
        intent.consume_target = input.apply(t.args()[0]);
        if (n == 2) {
            Term p = input.apply(t.args()[1]);
            if (p == Term::constant("first")) intent.policy = Intent::ConsumePolicy::First;
            else if (p == Term::constant("last")) intent.policy = Intent::ConsumePolicy::Last;
            else if (p != Term::constant("all")) return std::nullopt;
        }
        return intent;
    }
    if (f == "sendMessage" && n == 2) {
        Intent intent;
        intent.kind = Intent::Kind::Message;
        intent.recipient = input.apply(t.args()[0]);
        intent.message = input.apply(t.args()[1]);
        return intent;
    }
    if (f == "transaction" && n == 1) {
        Term body = input.apply(t.args()[0]);
        Intent intent;
        intent.kind = Intent::Kind::Transaction;
        std::optional<std::vector<Intent>> ops;
        if (body.is(Term::Kind::List) && !body.has_tail())
            ops = terms_to_intents(body.args(), input);
        else
            ops = terms_to_intents(std::span<const Term>(&body, 1), input);
        if (!ops) return std::nullopt;
        intent.ops = std::move(*ops);
        return intent;
    }
    return std::nullopt;
}

}   // namespace

IntegrityConstraint classify_constraint(const Term& payload) {
    IntegrityConstraint ic;
    ic.payload = payload;
    if (payload.is(Term::Kind::Compound) && payload.args().size() == 2 &&
        (payload.symbol() == "xor" || payload.symbol() == "mutex")) {
        ic.kind = payload.symbol() == "xor" ? IntegrityConstraint::Kind::Xor
                                            : IntegrityConstraint::Kind::Mutex;
        ic.parts.assign(payload.args().begin(), payload.args().end());
        return ic;
    }
    if (payload.is(Term::Kind::Compound) && payload.args().size() == 1 &&
        payload.symbol() == "forbidden") {
        ic.kind = IntegrityConstraint::Kind::Forbidden;
        ic.parts.push_back(payload.args()[0]);
        return ic;
    }
    ic.kind = IntegrityConstraint::Kind::Custom;
    ic.parts.push_back(payload);
    return ic;
}

bool constraint_violated(const IntegrityConstraint& ic, const KnowledgeState& state,
                         const BuiltinRegistry& reg, std::string* witness) {
    return violated_by(ic, solver_prover(state, reg), witness);
}

std::vector<ConstraintViolation> test_integrity(const KnowledgeState& state,
                                                const BuiltinRegistry& reg,
                                                const std::vector<Term>& extra) {
    std::vector<Term> payloads = state.integrity_constraints();
    payloads.insert(payloads.end(), extra.begin(), extra.end());
    return violations_for(payloads, solver_prover(state, reg));
}

std::vector<ConstraintViolation> test_integrity_hypothetical(const KnowledgeState& state,
                                                             const Term& lit,
                                                             const BuiltinRegistry& reg,
                                                             Polarity polarity) {
    KnowledgeState hypo = with_hypothesis(state, lit, polarity);
    return test_integrity(hypo, reg);
}

TxResult run_transaction(const KnowledgeState& state, const std::vector<Intent>& ops,
                         const BuiltinRegistry& reg,
                         const std::vector<Term>& extra_constraints) {
    TxResult result;
    KnowledgeState working = state;
    std::vector<std::pair<Term, Term>> messages;
    for (const Intent& op : ops)
        if (!apply_op(working, op, result.errors, messages)) return result;
    std::vector<Term> payloads = working.integrity_constraints();
    payloads.insert(payloads.end(), extra_constraints.begin(), extra_constraints.end());
    result.violations = violations_for(payloads, solver_prover(working, reg));
    if (!result.violations.empty()) return result;
    result.state = std::move(working);
    result.messages = std::move(messages);
    return result;
}

ApplyResult apply_intents(const KnowledgeState& state, const std::vector<Intent>& intents,
                          const BuiltinRegistry& reg) {
    ApplyResult result{state, {}, {}, {}};
    for (const Intent& intent : intents) {
        if (intent.kind == Intent::Kind::Transaction) {
            TxResult tx = run_transaction(result.state, intent.ops, reg);
            if (tx.committed()) {
                result.state = *tx.state;
                result.messages.insert(result.messages.end(), tx.messages.begin(),
                                       tx.messages.end());
            }
            result.transactions.push_back(std::move(tx));
            continue;
        }
        apply_op(result.state, intent, result.errors, result.messages);
    }
    return result;
}

std::optional<std::vector<Clause>> instantiate_payload(const std::string& text,
                                                       const std::vector<Term>& bindings,
                                                       std::string* error) {
    ParseResult parsed = parse_program(text);
    if (!parsed.ok()) {
        if (error) *error = parsed.error->to_string();
        return std::nullopt;
    }
    std::vector<Clause> clauses = std::move(parsed.program->clauses);
    if (bindings.empty()) return clauses;

    // Collect distinct variables in first-occurrence order, with their names.
    std::vector<std::pair<VarId, std::string>> vars;
    std::function<void(const Term&)> scan = [&](const Term& t) {
        if (t.is(Term::Kind::Variable)) {
            for (const auto& [id, name] : vars)
                if (id == t.var_id()) return;
            vars.emplace_back(t.var_id(), t.symbol());
            return;
        }
        for (const Term& a : t.args()) scan(a);
        if (t.has_tail()) scan(t.tail());
    };
    for (const Clause& c : clauses) {
        scan(c.head);
        for (const Term& b : c.body) scan(b);
    }

    static const std::regex placeholder("^_([0-9]+)$");
    bool indexed = false;
    for (const auto& [id, name] : vars)
        if (std::regex_match(name, placeholder)) indexed = true;

    Substitution grounding;
    if (indexed) {
        // Same index means the same value, even across clauses.
        for (const auto& [id, name] : vars) {
            std::smatch m;
            if (!std::regex_match(name, m, placeholder) || m[1].str().size() > 9) continue;
            std::size_t k = static_cast<std::size_t>(std::stoull(m[1].str()));
            if (k < bindings.size() && !grounding.lookup(id))
                grounding = grounding.bind(id, bindings[k]);
        }
    } else {
        std::size_t next = 0;
        for (const auto& [id, name] : vars) {
            if (next >= bindings.size()) break;
            grounding = grounding.bind(id, bindings[next++]);
        }
    }

    for (Clause& c : clauses) {
        c.head = grounding.apply(c.head);
        for (Term& b : c.body) b = grounding.apply(b);
    }
    return clauses;
}

void register_update_builtins(BuiltinRegistry& reg) {
    auto add_fn = [](BuiltinContext& ctx, const Term& goal, const Substitution& input,
                     const std::function<bool(const Substitution&)>& yield) {
        auto intent = make_add_intent(goal, goal.args(), input);
        if (!intent) bad_call(goal, "add/update needs a payload string and a bindings list");
        ctx.emit(std::move(*intent));
        return yield(input);
    };
    reg.add("add", 1, add_fn, true);
    reg.add("add", 2, add_fn, true);
    reg.add("add", 3, add_fn, true);
    reg.add("update", 2, add_fn, true);
    reg.add("update", 3, add_fn, true);

    reg.add("remove", 1,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& input,
               const std::function<bool(const Substitution&)>& yield) {
                Intent intent;
                intent.kind = Intent::Kind::Remove;
                intent.oid = oid_text(input.apply(goal.args()[0]));
                ctx.emit(std::move(intent));
                return yield(input);
            },
            true);

    reg.add("transaction", 1,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& input,
               const std::function<bool(const Substitution&)>& yield) {
                Term body = input.apply(goal.args()[0]);
                Intent intent;
                intent.kind = Intent::Kind::Transaction;
                std::optional<std::vector<Intent>> ops;
                if (body.is(Term::Kind::List) && !body.has_tail())
                    ops = terms_to_intents(body.args(), input);
                else
                    ops = terms_to_intents(std::span<const Term>(&body, 1), input);
                if (!ops) bad_call(goal, "transaction/1 takes update ops or a list of them");
                intent.ops = std::move(*ops);
                ctx.emit(std::move(intent));
                return yield(input);
            },
            true);

    reg.add("sendMessage", 2,
            [](BuiltinContext& ctx, const Term& goal, const Substitution& input,
               const std::function<bool(const Substitution&)>& yield) {
                Intent intent;
                intent.kind = Intent::Kind::Message;
                intent.recipient = input.apply(goal.args()[0]);
                intent.message = input.apply(goal.args()[1]);
                ctx.emit(std::move(intent));
                return yield(input);
            },
            true);

    auto integrity_fn = [](BuiltinContext& ctx, const Term& goal, const Substitution& input,
                           const std::function<bool(const Substitution&)>& yield) {
        KnowledgeState checked = ctx.state();
        if (goal.args().size() == 1) {
            Term lit = input.apply(goal.args()[0]);
            if (!lit.is_atom_like()) bad_call(goal, "testIntegrity/1 needs an atom");
            checked = with_hypothesis(checked, lit, Polarity::Add);
        }
        Prover prove = [&](const std::vector<Term>& goals, std::string* witness) {
            bool found = false;
            ctx.prove(checked, goals, Substitution{}, [&](const Substitution& s) {
                found = true;
                if (witness) {
                    std::string text;
                    for (const Term& g : goals) {
                        if (!text.empty()) text += ", ";
                        text += format_term(s.apply(g));
                    }
                    *witness = text;
                }
                return false;
            });
            return found;
        };
        for (const Term& payload : checked.integrity_constraints())
            if (violated_by(classify_constraint(payload), prove, nullptr)) return true;
        return yield(input);
    };
    reg.add("testIntegrity", 0, integrity_fn);
    reg.add("testIntegrity", 1, integrity_fn);
}

BuiltinRegistry default_builtins() {
    BuiltinRegistry reg = BuiltinRegistry::standard();
    register_event_builtins(reg);
    register_update_builtins(reg);
    return reg;
}

}   // namespace ecalp
