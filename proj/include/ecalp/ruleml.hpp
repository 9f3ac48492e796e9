#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ecalp {

/// AST node kinds, one per grammar production. Capitalized kinds are XML
/// elements in their own right; lowercase ones (time, event, condition,
/// action, postcondition, else, slot, oid) are role edges.
enum class RulemlKind {
    ECA,
    Time,
    Event,
    Condition,
    Action,
    Postcondition,
    Else,
    Assert,
    Retract,
    Naf,
    Neg,
    Cterm,
    Attachment,
    Happens,
    Planned,
    Occurs,
    Initially,
    Initiates,
    Terminates,
    HoldsAt,
    ValueAt,
    HoldsInterval,
    Interval,
    Sequence,
    Or,
    Xor,
    Conjunction,
    Concurrent,
    Not,
    Any,
    Aperiodic,
    Periodic,
    Ind,
    Data,
    Var,
    Plex,
    Skolem,
    Slot,
    Oid,
};

/// The XML tag for a kind ("ECA", "time", "slot", ...).
const char* ruleml_kind_name(RulemlKind kind);

struct RulemlNode {
    RulemlKind kind = RulemlKind::Ind;
    std::string text;   // leaf payload (Ind/Data/Var/Skolem/oid) or Assert clause text
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<RulemlNode> children;

    bool operator==(const RulemlNode& other) const;
};

RulemlNode ruleml_node(RulemlKind kind, std::vector<RulemlNode> children = {});
RulemlNode ruleml_leaf(RulemlKind kind, std::string text);

struct RulemlValidation {
    std::vector<std::string> errors;     // grammar violations, naming the production
    std::vector<std::string> warnings;
};

/// Check the node tree against the grammar (child kinds, multiplicities,
/// mandatory parts).
RulemlValidation validate_ruleml(const RulemlNode& node);

struct RulemlParse {
    std::optional<RulemlNode> root;   // present whenever the XML itself was well formed
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return root.has_value() && errors.empty(); }
};

/// XML document -> validated AST. Errors cover both malformed XML and
/// grammar violations.
RulemlParse parse_eca_ruleml(const std::string& xml);

/// AST -> canonical XML (two-space indent, one element per line). Invalid
/// nodes are rejected. Output reparses to an equal AST.
std::optional<std::string> emit_eca_ruleml(const RulemlNode& node, std::string* error = nullptr);

struct TranslationResult {
    std::string program;                 // parses cleanly as an ECA-LP module
    std::vector<std::string> warnings;   // constructs mapped with caveats
};

/// AST -> executable ECA-LP source. ECA roots become 6-slot eca facts;
/// event-layer and algebra constructs map onto the engine's predicates and
/// event functors. Constructs without runtime semantics (Happens, Planned,
/// Initially, Initiates, HoldsAt, ValueAt) translate with a warning.
std::optional<TranslationResult> translate_to_ecalp(const RulemlNode& node,
                                                    std::string* error = nullptr);

}   // namespace ecalp
