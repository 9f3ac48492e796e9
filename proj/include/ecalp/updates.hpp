#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecalp/kb.hpp"
#include "ecalp/solver.hpp"
#include "ecalp/term.hpp"

namespace ecalp {

/// Classified integrity/1 payload.
struct IntegrityConstraint {
    enum class Kind { Xor, Mutex, Forbidden, Custom };

    Kind kind = Kind::Custom;
    Term payload;              // the original integrity/1 argument
    std::vector<Term> parts;   // xor/mutex: both literals; forbidden/custom: the goal
};

IntegrityConstraint classify_constraint(const Term& payload);

struct ConstraintViolation {
    Term constraint;
    std::string witness;   // first violating instance, formatted; may be an error note
};

/// A constraint is violated when its violation goal has at least one answer:
/// xor(a,b) on (a and b) or (neither), mutex(a,b) on (a and b),
/// forbidden(g) and custom goals on g itself. Evaluation errors (e.g. a
/// floundering constraint) count as violations and carry the error text.
bool constraint_violated(const IntegrityConstraint& ic, const KnowledgeState& state,
                         const BuiltinRegistry& reg, std::string* witness = nullptr);

/// Evaluate every integrity/1 payload of the state plus extras.
std::vector<ConstraintViolation> test_integrity(const KnowledgeState& state,
                                                const BuiltinRegistry& reg,
                                                const std::vector<Term>& extra = {});

enum class Polarity { Add, Remove };

/// Integrity against a hypothetical state with `lit` added as a fact (or
/// every fact matching it removed). The hypothesis is never published and
/// the input state is untouched.
std::vector<ConstraintViolation> test_integrity_hypothetical(const KnowledgeState& state,
                                                             const Term& lit,
                                                             const BuiltinRegistry& reg,
                                                             Polarity polarity = Polarity::Add);

struct TxResult {
    std::optional<KnowledgeState> state;            // nullopt: rolled back
    std::vector<ConstraintViolation> violations;
    std::vector<std::string> errors;                // payload parse failures
    std::vector<std::pair<Term, Term>> messages;    // (recipient, message), on commit only

    bool committed() const { return state.has_value(); }
};

/// Apply ops in order to a hypothetical copy, then gate on all integrity
/// constraints of the result plus extra_constraints. Any violation or
/// payload error rolls the whole transaction back; the input state is
/// returned untouched in that case.
TxResult run_transaction(const KnowledgeState& state, const std::vector<Intent>& ops,
                         const BuiltinRegistry& reg,
                         const std::vector<Term>& extra_constraints = {});

/// Outcome of applying one intent trail from an answered query.
struct ApplyResult {
    KnowledgeState state;
    std::vector<TxResult> transactions;   // one entry per transaction intent
    std::vector<std::pair<Term, Term>> messages;
    std::vector<std::string> errors;
};

/// Plain adds/removes/consumes apply directly, transaction intents gate
/// individually, messages are collected for the caller's sink.
ApplyResult apply_intents(const KnowledgeState& state, const std::vector<Intent>& intents,
                          const BuiltinRegistry& reg);

/// Parse an add payload and ground its placeholders from `bindings`:
/// variables named _0, _1, ... take the binding at their index; if no such
/// placeholders occur, distinct variables are bound in first-occurrence
/// order instead. Extra bindings are ignored, missing ones leave variables.
std::optional<std::vector<Clause>> instantiate_payload(const std::string& text,
                                                       const std::vector<Term>& bindings,
                                                       std::string* error = nullptr);

/// add/1..3, update/2..3, remove/1, transaction/1, testIntegrity/0..1,
/// sendMessage/2. All except testIntegrity queue intents; nothing mutates
/// the KB mid-proof.
void register_update_builtins(BuiltinRegistry& reg);

/// Standard builtins plus the event and update families.
BuiltinRegistry default_builtins();

}   // namespace ecalp
