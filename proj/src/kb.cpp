#include "ecalp/kb.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ecalp {

const std::vector<Clause>* KnowledgeState::module(const std::string& oid) const {
    auto it = modules_.find(oid);
    return it == modules_.end() ? nullptr : &it->second;
}

std::vector<Clause> KnowledgeState::clauses_for(const std::string& functor, std::size_t arity,
                                                const std::optional<std::string>& scope) const {
    if (scope) {
        std::vector<Clause> out;
        const std::vector<Clause>* m = module(*scope);
        if (!m) return out;
        for (const Clause& c : *m)
            if (c.head.predicate_key() == std::make_pair(functor, arity)) out.push_back(c);
        return out;
    }
    auto it = predicate_index_.find({functor, arity});
    return it == predicate_index_.end() ? std::vector<Clause>{} : it->second;
}

std::vector<Clause> KnowledgeState::all_clauses() const {
    std::vector<Clause> out;
    for (const std::string& oid : order_)
        for (const Clause& c : modules_.at(oid)) out.push_back(c);
    return out;
}

KnowledgeState KnowledgeState::add_module(const std::string& oid,
                                          std::vector<Clause> clauses) const {
    if (clauses.empty()) return *this;   // nothing to apply, no record
    KnowledgeState next = *this;
    for (Clause& c : clauses) c.stamp = next.next_stamp_++;
    auto [it, inserted] = next.modules_.try_emplace(oid);
    if (inserted) next.order_.push_back(oid);
    it->second.insert(it->second.end(), clauses.begin(), clauses.end());
    next.history_.push_back(UpdateRecord{oid, true, std::move(clauses)});
    next.reindex();
    return next;
}

KnowledgeState KnowledgeState::remove_module(const std::string& oid) const {
    KnowledgeState next = *this;
    auto it = next.modules_.find(oid);
    if (it != next.modules_.end()) {
        next.modules_.erase(it);
        next.order_.erase(std::find(next.order_.begin(), next.order_.end(), oid));
    }
    next.history_.push_back(UpdateRecord{oid, false, {}});
    next.reindex();
    return next;
}

void KnowledgeState::reindex() {
    predicate_index_.clear();
    eca_rules_.clear();
    eca_rule_oids_.clear();
    integrity_constraints_.clear();
    for (const std::string& oid : order_) {
        for (const Clause& c : modules_.at(oid)) {
            predicate_index_[c.head.predicate_key()].push_back(c);
            if (c.is_fact() && c.head.is(Term::Kind::Compound)) {
                if (c.head.symbol() == "eca" && c.head.args().size() == 6) {
                    eca_rules_.push_back(c.head);
                    eca_rule_oids_.push_back(oid);
                } else if (c.head.symbol() == "integrity" && c.head.args().size() == 1) {
                    integrity_constraints_.push_back(c.head.args()[0]);
                }
            }
        }
    }
}

bool KnowledgeState::operator==(const KnowledgeState& other) const {
    if (order_ != other.order_ || history_.size() != other.history_.size() ||
        next_stamp_ != other.next_stamp_)
        return false;
    for (const std::string& oid : order_) {
        const auto& a = modules_.at(oid);
        const auto& b = other.modules_.at(oid);
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].stamp != b[i].stamp || !clause_equal(a[i], b[i])) return false;
    }
    return true;
}

KnowledgeState replay_history(const std::vector<UpdateRecord>& records) {
    KnowledgeState state;
    for (const UpdateRecord& r : records)
        state = r.positive ? state.add_module(r.oid, r.clauses) : state.remove_module(r.oid);
    return state;
}

ModuleLoad load_module_text(const KnowledgeState& base, const std::string& oid,
                            std::string_view text) {
    ParseResult parsed = parse_program(text);
    if (!parsed.ok()) return ModuleLoad{std::nullopt, parsed.error, {}};
    ModuleLoad out;
    out.state = base.add_module(oid, std::move(parsed.program->clauses));
    out.directives = std::move(parsed.program->directives);
    return out;
}

ModuleLoad load_module_file(const KnowledgeState& base, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        Diagnostic d;
        d.message = "cannot open module file: " + path;
        return ModuleLoad{std::nullopt, d, {}};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_module_text(base, path, buf.str());
}

std::shared_ptr<const KnowledgeState> KbStore::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return current_;
}

std::shared_ptr<const KnowledgeState> KbStore::apply(
    const std::function<std::optional<KnowledgeState>(const KnowledgeState&)>& fn) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto next = fn(*current_))
        current_ = std::make_shared<const KnowledgeState>(std::move(*next));
    return current_;
}

}   // namespace ecalp
