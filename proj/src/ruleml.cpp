#include "ecalp/ruleml.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>

#include "ecalp/parser.hpp"
#include "ecalp/term.hpp"

namespace ecalp {

namespace {

using K = RulemlKind;

const std::map<std::string, K>& tag_table() {
    static const std::map<std::string, K> table = {
        {"ECA", K::ECA},
        {"time", K::Time},
        {"event", K::Event},
        {"condition", K::Condition},
        {"action", K::Action},
        {"postcondition", K::Postcondition},
        {"else", K::Else},
        {"Assert", K::Assert},
        {"Retract", K::Retract},
        {"Naf", K::Naf},
        {"Neg", K::Neg},
        {"Cterm", K::Cterm},
        {"Attachment", K::Attachment},
        {"Happens", K::Happens},
        {"Planned", K::Planned},
        {"Occurs", K::Occurs},
        {"Initially", K::Initially},
        {"Initiates", K::Initiates},
        {"Terminates", K::Terminates},
        {"HoldsAt", K::HoldsAt},
        {"ValueAt", K::ValueAt},
        {"HoldsInterval", K::HoldsInterval},
        {"Interval", K::Interval},
        {"Sequence", K::Sequence},
        {"Or", K::Or},
        {"Xor", K::Xor},
        {"Conjunction", K::Conjunction},
        {"Concurrent", K::Concurrent},
        {"Not", K::Not},
        {"Any", K::Any},
        {"Aperiodic", K::Aperiodic},
        {"Periodic", K::Periodic},
        {"Ind", K::Ind},
        {"Data", K::Data},
        {"Var", K::Var},
        {"Plex", K::Plex},
        {"Skolem", K::Skolem},
        {"slot", K::Slot},
        {"oid", K::Oid},
    };
    return table;
}

// ---------------------------------------------------------------------------
// Minimal XML reader: elements, attributes, character data, comments,
// processing instructions, the five predefined entities. No CDATA, no DTDs.

struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::string text;
    std::vector<XmlNode> children;
};

struct XmlReader {
    const std::string& s;
    std::size_t i = 0;
    std::string error;

    explicit XmlReader(const std::string& text) : s(text) {}

    bool fail(const std::string& what) {
        if (!error.empty()) return false;
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k < i && k < s.size(); ++k) {
            if (s[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        error = "xml: line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                what;
        return false;
    }

    bool eof() const { return i >= s.size(); }
    char peek() const { return i < s.size() ? s[i] : '\0'; }
    bool starts_with(const char* lit) const { return s.compare(i, std::strlen(lit), lit) == 0; }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }

    bool skip_until(const char* lit, const std::string& what) {
        std::size_t at = s.find(lit, i);
        if (at == std::string::npos) return fail("unterminated " + what);
        i = at + std::strlen(lit);
        return true;
    }

    bool skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<!--")) {
                if (!skip_until("-->", "comment")) return false;
            } else if (starts_with("<?")) {
                if (!skip_until("?>", "processing instruction")) return false;
            } else if (starts_with("<!")) {
                if (!skip_until(">", "declaration")) return false;
            } else {
                return true;
            }
        }
    }

    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
               c == ':';
    }

    std::string read_name() {
        std::size_t start = i;
        while (!eof() && name_char(s[i])) ++i;
        return s.substr(start, i - start);
    }

    bool decode_entity(std::string& out) {
        static const std::pair<const char*, char> entities[] = {
            {"&lt;", '<'}, {"&gt;", '>'}, {"&amp;", '&'}, {"&quot;", '"'}, {"&apos;", '\''}};
        for (const auto& [lit, ch] : entities) {
            if (starts_with(lit)) {
                out.push_back(ch);
                i += std::strlen(lit);
                return true;
            }
        }
        return fail("unknown entity reference");
    }

    bool read_attr_value(std::string& out) {
        char quote = peek();
        if (quote != '"' && quote != '\'') return fail("attribute value must be quoted");
        ++i;
        while (!eof() && s[i] != quote) {
            if (s[i] == '&') {
                if (!decode_entity(out)) return false;
            } else if (s[i] == '<') {
                return fail("'<' in attribute value");
            } else {
                out.push_back(s[i++]);
            }
        }
        if (eof()) return fail("unterminated attribute value");
        ++i;
        return true;
    }

    bool parse_element(XmlNode& node) {
        if (peek() != '<') return fail("expected element");
        ++i;
        node.name = read_name();
        if (node.name.empty()) return fail("expected element name");
        for (;;) {
            skip_ws();
            if (starts_with("/>")) {
                i += 2;
                return true;
            }
            if (peek() == '>') {
                ++i;
                break;
            }
            std::string attr = read_name();
            if (attr.empty()) return fail("expected attribute name");
            skip_ws();
            if (peek() != '=') return fail("expected '=' after attribute name");
            ++i;
            skip_ws();
            std::string value;
            if (!read_attr_value(value)) return false;
            node.attrs.emplace_back(std::move(attr), std::move(value));
        }

        std::string text;
        for (;;) {
            if (eof()) return fail("unterminated element <" + node.name + ">");
            if (peek() == '<') {
                if (starts_with("</")) {
                    i += 2;
                    std::string close = read_name();
                    skip_ws();
                    if (peek() != '>') return fail("malformed closing tag");
                    ++i;
                    if (close != node.name)
                        return fail("mismatched closing tag </" + close + "> for <" + node.name +
                                    ">");
                    break;
                }
                if (starts_with("<!--")) {
                    if (!skip_until("-->", "comment")) return false;
                    continue;
                }
                XmlNode child;
                if (!parse_element(child)) return false;
                node.children.push_back(std::move(child));
            } else if (peek() == '&') {
                if (!decode_entity(text)) return false;
            } else {
                text.push_back(s[i++]);
            }
        }

        // trim surrounding whitespace; mixed content is not in the grammar
        std::size_t b = text.find_first_not_of(" \t\r\n");
        std::size_t e = text.find_last_not_of(" \t\r\n");
        node.text = b == std::string::npos ? "" : text.substr(b, e - b + 1);
        if (!node.text.empty() && !node.children.empty())
            return fail("<" + node.name + "> mixes text and child elements");
        return true;
    }

    bool parse_document(XmlNode& root) {
        if (!skip_misc()) return false;
        if (eof()) return fail("empty document");
        if (!parse_element(root)) return false;
        if (!skip_misc()) return false;
        if (!eof()) return fail("content after the root element");
        return true;
    }
};

// ---------------------------------------------------------------------------
// XML -> AST

bool leaf_kind(K k) {
    return k == K::Ind || k == K::Data || k == K::Var || k == K::Skolem || k == K::Oid;
}

bool build_node(const XmlNode& xml, RulemlNode& out, std::vector<std::string>& errors) {
    auto it = tag_table().find(xml.name);
    if (it == tag_table().end()) {
        errors.push_back("unknown element <" + xml.name + ">");
        return false;
    }
    out.kind = it->second;
    out.attrs = xml.attrs;

    if (out.kind == K::Assert) {
        if (xml.children.size() == 1 && xml.children[0].name == "content" &&
            xml.children[0].children.empty()) {
            out.text = xml.children[0].text;
            return true;
        }
        if (xml.children.size() == 1 && xml.children[0].name == "And") {
            errors.push_back("Assert: And payloads are not supported; use content");
            return false;
        }
        errors.push_back("Assert: exactly one content child required");
        return false;
    }

    if (leaf_kind(out.kind)) {
        if (!xml.children.empty()) {
            errors.push_back(std::string(ruleml_kind_name(out.kind)) +
                             ": element does not take children");
            return false;
        }
        out.text = xml.text;
        return true;
    }

    if (!xml.text.empty()) {
        errors.push_back(std::string(ruleml_kind_name(out.kind)) +
                         ": element does not take text");
        return false;
    }
    bool ok = true;
    for (const XmlNode& child : xml.children) {
        RulemlNode built;
        if (build_node(child, built, errors))
            out.children.push_back(std::move(built));
        else
            ok = false;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// Grammar validation

const std::set<K>& term_set() {
    static const std::set<K> set = {K::Ind, K::Var, K::Cterm};
    return set;
}

const std::set<K>& operator_set() {
    static const std::set<K> set = {K::Sequence, K::Or,  K::Xor,       K::Conjunction,
                                    K::Concurrent, K::Not, K::Aperiodic, K::Any,
                                    K::Periodic};
    return set;
}

std::set<K> join(const std::set<K>& a, std::initializer_list<K> extra) {
    std::set<K> out = a;
    out.insert(extra.begin(), extra.end());
    return out;
}

struct Checker {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    void err(K production, const std::string& what) {
        errors.push_back(std::string(ruleml_kind_name(production)) + ": " + what);
    }

    // Children after an optional leading oid.
    static std::vector<const RulemlNode*> operands(const RulemlNode& n) {
        std::vector<const RulemlNode*> out;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i == 0 && n.children[0].kind == K::Oid) continue;
            out.push_back(&n.children[i]);
        }
        return out;
    }

    bool allow(K production, const RulemlNode& child, const std::set<K>& allowed) {
        if (allowed.count(child.kind)) return true;
        err(production, std::string("child <") + ruleml_kind_name(child.kind) +
                            "> not allowed here");
        return false;
    }

    void fixed_slots(const RulemlNode& n, const std::vector<const std::set<K>*>& slots,
                     std::size_t optional_tail = 0) {
        auto ops = operands(n);
        if (ops.size() + optional_tail < slots.size() || ops.size() > slots.size()) {
            err(n.kind, "expected " + std::to_string(slots.size() - optional_tail) +
                            (optional_tail ? ".." + std::to_string(slots.size()) : "") +
                            " children, got " + std::to_string(ops.size()));
            return;
        }
        for (std::size_t i = 0; i < ops.size(); ++i) allow(n.kind, *ops[i], *slots[i]);
    }

    void check(const RulemlNode& n) {
        for (const RulemlNode& c : n.children) check(c);

        static const std::set<K> goal = {K::Naf, K::Neg, K::Cterm};
        static const std::set<K> event_child = join(goal, {K::Sequence, K::Or, K::Xor,
                                                           K::Conjunction, K::Concurrent, K::Not,
                                                           K::Any, K::Aperiodic});
        static const std::set<K> action_child = {K::Cterm,       K::Assert, K::Retract,
                                                 K::Sequence,    K::Or,     K::Xor,
                                                 K::Conjunction, K::Concurrent, K::Not,
                                                 K::Any,         K::Aperiodic};
        static const std::set<K> operand = join(operator_set(), {K::Ind, K::Var, K::Cterm});
        static const std::set<K> window = {K::Interval, K::Plex, K::Var};
        static const std::set<K> plex_item = {K::Ind,  K::Data, K::Var,     K::Cterm,
                                              K::Plex, K::Skolem, K::Interval};

        switch (n.kind) {
            case K::ECA: {
                // [oid,] [time,] [event,] [condition,] action [postcondition] [else]
                static const std::vector<K> order = {K::Oid,    K::Time,          K::Event,
                                                     K::Condition, K::Action,
                                                     K::Postcondition, K::Else};
                std::size_t at = 0;
                bool has_action = false;
                for (const RulemlNode& c : n.children) {
                    auto pos = std::find(order.begin() + at, order.end(), c.kind);
                    if (pos == order.end()) {
                        bool known = std::find(order.begin(), order.end(), c.kind) != order.end();
                        err(K::ECA, known ? std::string("duplicate or out-of-order part <") +
                                                ruleml_kind_name(c.kind) + ">"
                                          : std::string("child <") + ruleml_kind_name(c.kind) +
                                                "> not allowed here");
                        continue;
                    }
                    at = static_cast<std::size_t>(pos - order.begin()) + 1;
                    if (c.kind == K::Action) has_action = true;
                }
                if (!has_action) err(K::ECA, "action part is mandatory");
                break;
            }
            case K::Time:
            case K::Condition:
            case K::Postcondition:
                if (n.children.size() != 1)
                    err(n.kind, "exactly one child required");
                else
                    allow(n.kind, n.children[0], goal);
                break;
            case K::Event:
                if (n.children.size() != 1)
                    err(n.kind, "exactly one child required");
                else
                    allow(n.kind, n.children[0], event_child);
                break;
            case K::Action:
            case K::Else:
                if (n.children.size() != 1)
                    err(n.kind, "exactly one child required");
                else
                    allow(n.kind, n.children[0], action_child);
                break;
            case K::Assert:
                if (!n.children.empty()) err(K::Assert, "element does not take children");
                if (n.text.empty()) err(K::Assert, "content is empty");
                break;
            case K::Retract:
                if (n.children.size() != 1 || n.children[0].kind != K::Oid)
                    err(K::Retract, "exactly one oid child required");
                break;
            case K::Naf:
            case K::Neg: {
                auto ops = operands(n);
                if (ops.size() != 1)
                    err(n.kind, "exactly one child required");
                else if (ops[0]->kind != K::Cterm)
                    err(n.kind, std::string("child <") + ruleml_kind_name(ops[0]->kind) +
                                    "> not supported (hornlog layer is out of scope)");
                break;
            }
            case K::Cterm: {
                auto ops = operands(n);
                if (ops.empty()) {
                    err(K::Cterm, "constructor required");
                    break;
                }
                if (ops[0]->kind != K::Ind && ops[0]->kind != K::Attachment)
                    err(K::Cterm, "constructor must be Ind or Attachment");
                static const std::set<K> arg = {K::Ind,  K::Data,   K::Skolem, K::Var,
                                                K::Cterm, K::Plex, K::Slot};
                for (std::size_t i = 1; i < ops.size(); ++i) allow(K::Cterm, *ops[i], arg);
                break;
            }
            case K::Attachment: {
                static const std::set<K> target = {K::Ind, K::Var, K::Cterm};
                static const std::set<K> method = {K::Ind};
                fixed_slots(n, {&target, &method});
                break;
            }
            case K::Slot: {
                if (n.children.size() != 2 || n.children[0].kind != K::Ind) {
                    err(K::Slot, "expected a name Ind and a filler");
                    break;
                }
                allow(K::Slot, n.children[1], plex_item);
                break;
            }
            case K::Plex:
                for (const RulemlNode& c : n.children) allow(K::Plex, c, plex_item);
                break;
            case K::Sequence:
            case K::Or:
            case K::Xor:
            case K::Conjunction:
            case K::Concurrent: {
                auto ops = operands(n);
                if (ops.size() < 2)
                    err(n.kind, "at least two children required");
                for (const RulemlNode* c : ops) allow(n.kind, *c, operand);
                break;
            }
            case K::Not:
            case K::Aperiodic: {
                static const std::set<K> win = {K::Interval, K::Plex, K::Var};
                fixed_slots(n, {&operand, &win});
                break;
            }
            case K::Any: {
                static const std::set<K> count = {K::Ind, K::Data, K::Var};
                static const std::set<K> alt = join(operator_set(),
                                                    {K::Ind, K::Var, K::Cterm, K::Plex});
                fixed_slots(n, {&count, &alt});
                break;
            }
            case K::Periodic: {
                static const std::set<K> timeish = {K::Ind, K::Var, K::Cterm};
                fixed_slots(n, {&timeish, &window});
                break;
            }
            case K::Interval:
                fixed_slots(n, {&operand, &operand});
                break;
            case K::Happens:
            case K::Planned:
            case K::HoldsAt:
                fixed_slots(n, {&term_set(), &term_set()});
                break;
            case K::Occurs:
                fixed_slots(n, {&term_set(), &window});
                break;
            case K::Initially:
                fixed_slots(n, {&term_set()});
                break;
            case K::Initiates:
                fixed_slots(n, {&term_set(), &term_set(), &term_set()});
                break;
            case K::Terminates: {
                static const std::set<K> pairish = join(term_set(), {K::Interval, K::Plex});
                fixed_slots(n, {&term_set(), &pairish, &pairish}, 1);
                break;
            }
            case K::ValueAt: {
                static const std::set<K> value = join(term_set(), {K::Data});
                fixed_slots(n, {&term_set(), &term_set(), &value});
                break;
            }
            case K::HoldsInterval: {
                static const std::set<K> first =
                    join(operator_set(), {K::Interval, K::Plex, K::Cterm});
                fixed_slots(n, {&first, &window});
                break;
            }
            case K::Ind:
            case K::Var:
            case K::Oid:
                if (n.text.empty()) err(n.kind, "text content required");
                break;
            case K::Data:
            case K::Skolem:
                break;
        }
    }
};

// ---------------------------------------------------------------------------
// Canonical emission

void xml_escape(std::ostringstream& os, const std::string& s, bool attr) {
    for (char c : s) {
        switch (c) {
            case '<': os << "&lt;"; break;
            case '>': os << "&gt;"; break;
            case '&': os << "&amp;"; break;
            case '"':
                if (attr)
                    os << "&quot;";
                else
                    os << c;
                break;
            default: os << c;
        }
    }
}

void emit_node(std::ostringstream& os, const RulemlNode& n, int depth) {
    std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    os << pad << '<' << ruleml_kind_name(n.kind);
    for (const auto& [name, value] : n.attrs) {
        os << ' ' << name << "=\"";
        xml_escape(os, value, true);
        os << '"';
    }
    if (n.kind == K::Assert) {
        os << ">\n" << pad << "  <content>";
        xml_escape(os, n.text, false);
        os << "</content>\n" << pad << "</Assert>\n";
        return;
    }
    if (n.children.empty() && n.text.empty()) {
        os << "/>\n";
        return;
    }
    if (n.children.empty()) {
        os << '>';
        xml_escape(os, n.text, false);
        os << "</" << ruleml_kind_name(n.kind) << ">\n";
        return;
    }
    os << ">\n";
    for (const RulemlNode& c : n.children) emit_node(os, c, depth + 1);
    os << pad << "</" << ruleml_kind_name(n.kind) << ">\n";
}

// ---------------------------------------------------------------------------
// Translation to ECA-LP

struct Xlate {
    std::vector<std::string> warnings;
    std::map<std::string, VarId> vars;
    VarId next_var = 0;
    int next_oid = 0;
    std::string error;

    Term fail(const std::string& what) {
        if (error.empty()) error = what;
        return Term::constant("error");
    }

    void warn(const std::string& what) { warnings.push_back(what); }
};

bool integer_text(const std::string& s) {
    if (s.empty()) return false;
    std::size_t k = s[0] == '-' ? 1 : 0;
    if (k == s.size()) return false;
    for (; k < s.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    return true;
}

bool constant_text(const std::string& s) {
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

Term atom_term(const std::string& text) {
    if (integer_text(text)) return Term::number(std::stoll(text));
    if (constant_text(text)) return Term::constant(text);
    return Term::text(text);
}

Term var_term(const std::string& text, Xlate& x) {
    std::string name = text;
    bool ok = !name.empty() &&
              (std::isupper(static_cast<unsigned char>(name[0])) || name[0] == '_');
    for (char& c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
            c = '_';
            ok = false;
        }
    if (!ok) name = "V" + name;
    auto [it, inserted] = x.vars.emplace(name, x.next_var + 1);
    if (inserted) ++x.next_var;
    return Term::variable(name, it->second);
}

Term node_term(const RulemlNode& n, Xlate& x);

std::vector<const RulemlNode*> skip_oid(const RulemlNode& n) {
    return Checker::operands(n);
}

Term functor_call(const RulemlNode& n, const std::string& name, Xlate& x, std::size_t from) {
    auto ops = skip_oid(n);
    std::vector<Term> args;
    for (std::size_t i = from; i < ops.size(); ++i) args.push_back(node_term(*ops[i], x));
    if (args.empty()) return Term::constant(name);
    return Term::compound(name, std::move(args));
}

Term cterm_term(const RulemlNode& n, Xlate& x) {
    auto ops = skip_oid(n);
    const RulemlNode& ctor = *ops[0];
    std::vector<Term> args;
    std::string name;
    if (ctor.kind == K::Attachment) {
        // host-function call: the method Ind names the registered builtin;
        // the target slot has no engine counterpart and is dropped
        auto att = skip_oid(ctor);
        name = att[1]->text;
        x.warn("Attachment: target '" +
               (att[0]->kind == K::Ind ? att[0]->text : std::string(ruleml_kind_name(
                                                            att[0]->kind))) +
               "' dropped; '" + name + "' resolves against the host-function registry");
    } else {
        name = ctor.text;
    }
    if (!constant_text(name) && name != "!")
        return x.fail("Cterm: constructor '" + name + "' is not a usable functor name");
    for (std::size_t i = 1; i < ops.size(); ++i) {
        const RulemlNode& a = *ops[i];
        if (a.kind == K::Slot) {
            const std::string& slot_name = a.children[0].text;
            if (!constant_text(slot_name))
                return x.fail("slot: name '" + slot_name + "' is not a usable functor name");
            args.push_back(Term::compound(slot_name, {node_term(a.children[1], x)}));
        } else {
            args.push_back(node_term(a, x));
        }
    }
    if (args.empty()) return Term::constant(name);
    return Term::compound(name, std::move(args));
}

Term node_term(const RulemlNode& n, Xlate& x) {
    auto ops = skip_oid(n);
    switch (n.kind) {
        case K::Ind:
        case K::Data: return atom_term(n.text);
        case K::Var: return var_term(n.text, x);
        case K::Skolem:
            return Term::compound("skolem",
                                  {n.text.empty() ? Term::constant("anon") : atom_term(n.text)});
        case K::Plex: {
            std::vector<Term> items;
            for (const RulemlNode& c : n.children) items.push_back(node_term(c, x));
            return Term::list(std::move(items));
        }
        case K::Interval:
            return Term::list({node_term(*ops[0], x), node_term(*ops[1], x)});
        case K::Cterm: return cterm_term(n, x);
        case K::Naf: return Term::compound("not", {node_term(*ops[0], x)});
        case K::Neg: return Term::compound("neg", {node_term(*ops[0], x)});
        case K::Assert: {
            std::string payload = n.text;
            if (!payload.empty() && payload.back() != '.') payload += '.';
            std::string oid = "oid" + std::to_string(++x.next_oid);
            return Term::compound("add", {Term::constant(oid), Term::text(payload)});
        }
        case K::Retract: return Term::compound("remove", {atom_term(n.children[0].text)});
        case K::Sequence: return functor_call(n, "sequence", x, 0);
        case K::Or: return functor_call(n, "or", x, 0);
        case K::Xor: return functor_call(n, "xor", x, 0);
        case K::Conjunction: return functor_call(n, "conjunction", x, 0);
        case K::Concurrent: return functor_call(n, "concurrent", x, 0);
        case K::Not:
            return Term::compound("not", {node_term(*ops[0], x), node_term(*ops[1], x)});
        case K::Aperiodic:
            return Term::compound("aperiodic", {node_term(*ops[0], x), node_term(*ops[1], x)});
        case K::Periodic:
            return Term::compound("periodic", {node_term(*ops[0], x), node_term(*ops[1], x)});
        case K::Any: {
            Term alts = ops[1]->kind == K::Plex ? node_term(*ops[1], x)
                                                : Term::list({node_term(*ops[1], x)});
            return Term::compound("any", {node_term(*ops[0], x), std::move(alts)});
        }
        case K::Occurs:
            return Term::compound("occurs", {node_term(*ops[0], x), node_term(*ops[1], x)});
        case K::Terminates: {
            std::vector<Term> args;
            for (const RulemlNode* c : ops) args.push_back(node_term(*c, x));
            return Term::compound("terminates", std::move(args));
        }
        case K::HoldsInterval:
            return Term::compound("holdsInterval",
                                  {node_term(*ops[0], x), node_term(*ops[1], x)});
        case K::Happens:
        case K::Planned:
        case K::Initially:
        case K::Initiates:
        case K::HoldsAt:
        case K::ValueAt: {
            static const std::map<K, std::string> names = {
                {K::Happens, "happens"},   {K::Planned, "planned"}, {K::Initially, "initially"},
                {K::Initiates, "initiates"}, {K::HoldsAt, "holdsAt"}, {K::ValueAt, "valueAt"}};
            const std::string& name = names.at(n.kind);
            x.warn(std::string(ruleml_kind_name(n.kind)) + ": translated to " + name +
                   "/" + std::to_string(ops.size()) + "; execution support is out of scope");
            std::vector<Term> args;
            for (const RulemlNode* c : ops) args.push_back(node_term(*c, x));
            return Term::compound(name, std::move(args));
        }
        default:
            return x.fail(std::string("cannot translate <") + ruleml_kind_name(n.kind) + ">");
    }
}

bool algebra_kind(K k) {
    return k == K::Sequence || k == K::Or || k == K::Xor || k == K::Conjunction ||
           k == K::Concurrent || k == K::Not || k == K::Any || k == K::Aperiodic ||
           k == K::Periodic;
}

Term fresh_detect_var(Xlate& x) {
    std::string name = "DetectedAt";
    while (x.vars.count(name)) name += "_";
    return var_term(name, x);
}

std::string eca_program(const RulemlNode& n, Xlate& x) {
    Term blank = Term::constant("_");
    Term slots[6] = {blank, blank, blank, blank, blank, blank};
    for (const RulemlNode& part : n.children) {
        if (part.kind == K::Oid) continue;
        const RulemlNode& child = part.children[0];
        Term value = node_term(child, x);
        switch (part.kind) {
            case K::Time: slots[0] = value; break;
            case K::Event:
                // algebra events only fire through the event/2 matcher
                slots[1] = algebra_kind(child.kind)
                               ? Term::compound("event", {value, fresh_detect_var(x)})
                               : value;
                break;
            case K::Condition: slots[2] = value; break;
            case K::Action: slots[3] = value; break;
            case K::Postcondition: slots[4] = value; break;
            case K::Else: slots[5] = value; break;
            default: break;
        }
    }
    std::vector<Term> args(slots, slots + 6);
    return format_term(Term::compound("eca", std::move(args))) + ".\n";
}

}   // namespace

// ---------------------------------------------------------------------------

const char* ruleml_kind_name(RulemlKind kind) {
    for (const auto& [name, k] : tag_table())
        if (k == kind) return name.c_str();
    return "?";
}

bool RulemlNode::operator==(const RulemlNode& other) const {
    return kind == other.kind && text == other.text && attrs == other.attrs &&
           children == other.children;
}

RulemlNode ruleml_node(RulemlKind kind, std::vector<RulemlNode> children) {
    RulemlNode n;
    n.kind = kind;
    n.children = std::move(children);
    return n;
}

RulemlNode ruleml_leaf(RulemlKind kind, std::string text) {
    RulemlNode n;
    n.kind = kind;
    n.text = std::move(text);
    return n;
}

RulemlValidation validate_ruleml(const RulemlNode& node) {
    Checker c;
    c.check(node);
    return RulemlValidation{std::move(c.errors), std::move(c.warnings)};
}

RulemlParse parse_eca_ruleml(const std::string& xml) {
    RulemlParse out;
    XmlReader reader(xml);
    XmlNode doc;
    if (!reader.parse_document(doc)) {
        out.errors.push_back(reader.error);
        return out;
    }
    RulemlNode root;
    if (!build_node(doc, root, out.errors)) return out;
    RulemlValidation v = validate_ruleml(root);
    out.errors.insert(out.errors.end(), v.errors.begin(), v.errors.end());
    out.warnings = std::move(v.warnings);
    out.root = std::move(root);
    return out;
}

std::optional<std::string> emit_eca_ruleml(const RulemlNode& node, std::string* error) {
    RulemlValidation v = validate_ruleml(node);
    if (!v.errors.empty()) {
        if (error) *error = v.errors.front();
        return std::nullopt;
    }
    std::ostringstream os;
    emit_node(os, node, 0);
    return os.str();
}

std::optional<TranslationResult> translate_to_ecalp(const RulemlNode& node, std::string* error) {
    RulemlValidation v = validate_ruleml(node);
    if (!v.errors.empty()) {
        if (error) *error = v.errors.front();
        return std::nullopt;
    }
    Xlate x;
    TranslationResult out;
    if (node.kind == K::ECA) {
        out.program = eca_program(node, x);
    } else {
        Term t = node_term(node, x);
        if (x.error.empty()) out.program = format_term(t) + ".\n";
    }
    if (!x.error.empty()) {
        if (error) *error = x.error;
        return std::nullopt;
    }
    out.warnings = std::move(x.warnings);
    return out;
}

}   // namespace ecalp
