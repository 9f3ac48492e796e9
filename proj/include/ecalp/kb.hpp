#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ecalp/parser.hpp"
#include "ecalp/term.hpp"

namespace ecalp {

/// One ID-based update: positive records carry the added clauses, negative
/// records carry none and mean "drop everything labeled oid".
struct UpdateRecord {
    std::string oid;
    bool positive = true;
    std::vector<Clause> clauses;
};

/// Immutable snapshot of the knowledge base. Updates return a new value;
/// existing snapshots are never touched, so they can be shared freely
/// across threads.
class KnowledgeState {
public:
    KnowledgeState() = default;

    std::uint64_t state_index() const { return static_cast<std::uint64_t>(history_.size()); }

    const std::vector<std::string>& module_order() const { return order_; }
    bool has_module(const std::string& oid) const { return modules_.count(oid) != 0; }
    const std::vector<Clause>* module(const std::string& oid) const;

    /// Matching clauses in global order: module insertion order, then
    /// intra-module order. A scope restricts to one module; an unknown
    /// scope yields an empty result.
    std::vector<Clause> clauses_for(const std::string& functor, std::size_t arity,
                                    const std::optional<std::string>& scope = std::nullopt) const;

    std::vector<Clause> all_clauses() const;

    const std::vector<UpdateRecord>& history() const { return history_; }

    /// Derived views, rebuilt per snapshot.
    const std::vector<Term>& eca_rules() const { return eca_rules_; }
    const std::vector<Term>& integrity_constraints() const { return integrity_constraints_; }
    /// Module holding each eca rule, aligned with eca_rules().
    const std::vector<std::string>& eca_rule_oids() const { return eca_rule_oids_; }

    KnowledgeState add_module(const std::string& oid, std::vector<Clause> clauses) const;
    KnowledgeState remove_module(const std::string& oid) const;

    bool operator==(const KnowledgeState& other) const;

private:
    void reindex();

    std::vector<std::string> order_;                      // oids, first-add order
    std::map<std::string, std::vector<Clause>> modules_;
    std::vector<UpdateRecord> history_;
    std::uint64_t next_stamp_ = 0;

    std::map<std::pair<std::string, std::size_t>, std::vector<Clause>> predicate_index_;
    std::vector<Term> eca_rules_;
    std::vector<std::string> eca_rule_oids_;
    std::vector<Term> integrity_constraints_;
};

/// Rebuild a state from scratch by applying records in order.
KnowledgeState replay_history(const std::vector<UpdateRecord>& records);

/// Loading a script is itself an update: the whole text becomes one module.
struct ModuleLoad {
    std::optional<KnowledgeState> state;
    std::optional<Diagnostic> error;
    std::vector<std::vector<Term>> directives;   // load-time goals, caller runs them

    bool ok() const { return state.has_value(); }
};

ModuleLoad load_module_text(const KnowledgeState& base, const std::string& oid,
                            std::string_view text);
ModuleLoad load_module_file(const KnowledgeState& base, const std::string& path);

/// Single-writer store publishing immutable snapshots. Readers take a
/// snapshot and never block the writer.
class KbStore {
public:
    KbStore() : current_(std::make_shared<const KnowledgeState>()) {}
    explicit KbStore(KnowledgeState initial)
        : current_(std::make_shared<const KnowledgeState>(std::move(initial))) {}

    std::shared_ptr<const KnowledgeState> snapshot() const;

    /// Run fn against the latest state under the writer lock; if fn returns
    /// a new state it is published. Returns the snapshot after the call.
    std::shared_ptr<const KnowledgeState> apply(
        const std::function<std::optional<KnowledgeState>(const KnowledgeState&)>& fn);

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const KnowledgeState> current_;
};

}   // namespace ecalp
