#include "ecalp/parser.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace ecalp {

namespace {

enum class Tok {
    Atom,
    Var,
    Number,
    String,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    Dot,
    Question,
    Cut,       // !
    Implies,   // :-
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Neq,
    End,
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::Atom: return "atom";
        case Tok::Var: return "variable";
        case Tok::Number: return "number";
        case Tok::String: return "string";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Comma: return "','";
        case Tok::Bar: return "'|'";
        case Tok::Dot: return "'.'";
        case Tok::Question: return "'?'";
        case Tok::Cut: return "'!'";
        case Tok::Implies: return "':-'";
        case Tok::Lt: return "'<'";
        case Tok::Le: return "'<='";
        case Tok::Gt: return "'>'";
        case Tok::Ge: return "'>='";
        case Tok::Eq: return "'='";
        case Tok::Neq: return "'!='";
        case Tok::End: return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind = Tok::End;
    std::string text;
    long long number = 0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident(t);
        if (std::isdigit(static_cast<unsigned char>(c))) return number(t, false);
        if (c == '-' && pos_ + 1 < src_.size() &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            advance();
            return number(t, true);
        }
        if (c == '"') return string_lit(t);
        advance();
        switch (c) {
            case '(': t.kind = Tok::LParen; return t;
            case ')': t.kind = Tok::RParen; return t;
            case '[': t.kind = Tok::LBracket; return t;
            case ']': t.kind = Tok::RBracket; return t;
            case ',': t.kind = Tok::Comma; return t;
            case '|': t.kind = Tok::Bar; return t;
            case '.': t.kind = Tok::Dot; return t;
            case '?': t.kind = Tok::Question; return t;
            case '=': t.kind = Tok::Eq; return t;
            case '!':
                if (peek() == '=') {
                    advance();
                    t.kind = Tok::Neq;
                } else {
                    t.kind = Tok::Cut;
                }
                return t;
            case '<':
                if (peek() == '=') {
                    advance();
                    t.kind = Tok::Le;
                } else {
                    t.kind = Tok::Lt;
                }
                return t;
            case '>':
                if (peek() == '=') {
                    advance();
                    t.kind = Tok::Ge;
                } else {
                    t.kind = Tok::Gt;
                }
                return t;
            case ':':
                if (peek() == '-') {
                    advance();
                    t.kind = Tok::Implies;
                    return t;
                }
                break;
            default: break;
        }
        throw LexError{t.line, t.col, std::string("unexpected character '") + c + "'"};
    }

    struct LexError {
        int line;
        int col;
        std::string message;
    };

private:
    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

    void advance() {
        if (pos_ < src_.size()) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    Token ident(Token t) {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            advance();
        t.text = std::string(src_.substr(start, pos_ - start));
        char first = t.text[0];
        t.kind = (std::isupper(static_cast<unsigned char>(first)) || first == '_') ? Tok::Var
                                                                                   : Tok::Atom;
        return t;
    }

    Token number(Token t, bool negative) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            advance();
        long long v = 0;
        auto sv = src_.substr(start, pos_ - start);
        std::from_chars(sv.data(), sv.data() + sv.size(), v);
        t.kind = Tok::Number;
        t.number = negative ? -v : v;
        return t;
    }

    Token string_lit(Token t) {
        advance();   // opening quote
        std::string out;
        while (true) {
            if (pos_ >= src_.size())
                throw LexError{t.line, t.col, "unterminated string literal"};
            char c = src_[pos_];
            advance();
            if (c == '"') break;
            if (c == '\\') {
                if (pos_ >= src_.size())
                    throw LexError{t.line, t.col, "unterminated escape in string"};
                char e = src_[pos_];
                advance();
                switch (e) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case '\\': out.push_back('\\'); break;
                    case '"': out.push_back('"'); break;
                    default:
                        throw LexError{t.line, t.col,
                                       std::string("unknown escape '\\") + e + "'"};
                }
            } else {
                out.push_back(c);
            }
        }
        t.kind = Tok::String;
        t.text = std::move(out);
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

struct ParseError {
    Diagnostic diag;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { shift(); }

    ParsedProgram program() {
        ParsedProgram out;
        while (cur_.kind != Tok::End) {
            if (cur_.kind == Tok::Implies) {
                shift();
                std::vector<Term> goals = literal_list();
                expect(Tok::Dot);
                out.directives.push_back(std::move(goals));
                continue;
            }
            Clause c = clause();
            finish_clause(out, std::move(c));
        }
        return out;
    }

    std::vector<Term> query(std::vector<std::pair<std::string, VarId>>& named) {
        std::vector<Term> goals = literal_list();
        if (cur_.kind == Tok::Question || cur_.kind == Tok::Dot)
            shift();
        else
            fail("'?' or '.'");
        if (cur_.kind != Tok::End) fail("end of query");
        for (const auto& [name, id] : var_order_)
            if (name != "_") named.emplace_back(name, id);
        return goals;
    }

    Term single_term() {
        Term t = term();
        if (cur_.kind != Tok::End) fail("end of input");
        return t;
    }

private:
    void shift() {
        try {
            cur_ = lex_.next();
        } catch (const Lexer::LexError& e) {
            throw ParseError{Diagnostic{e.line, e.col, e.message, {}}};
        }
    }

    [[noreturn]] void fail(const std::string& expected) {
        Diagnostic d;
        d.line = cur_.line;
        d.column = cur_.col;
        d.message = std::string("unexpected ") + tok_name(cur_.kind);
        d.expected = {expected};
        throw ParseError{std::move(d)};
    }

    void expect(Tok k) {
        if (cur_.kind != k) fail(tok_name(k));
        shift();
    }

    Clause clause() {
        Clause c;
        c.span = {cur_.line, cur_.col};
        clause_vars_.clear();
        var_order_.clear();
        c.head = term();
        check_head(c.head);
        if (cur_.kind == Tok::Implies) {
            shift();
            c.body = literal_list();
        }
        expect(Tok::Dot);
        return c;
    }

    void check_head(const Term& head) {
        if (!head.is_atom_like()) fail("clause head (atom)");
        if (head.is(Term::Kind::Compound) && head.symbol() == "not")
            fail("clause head without default negation");
        if (head.is(Term::Kind::Compound) && head.symbol() == "neg") {
            if (head.args().size() != 1 || !head.args()[0].is_atom_like())
                fail("neg/1 wrapping a single atom");
        }
    }

    std::vector<Term> literal_list() {
        std::vector<Term> lits;
        lits.push_back(literal());
        while (cur_.kind == Tok::Comma) {
            shift();
            lits.push_back(literal());
        }
        return lits;
    }

    Term literal() {
        if (cur_.kind == Tok::Cut) {
            shift();
            return Term::constant("!");
        }
        Term lhs = term();
        const char* op = nullptr;
        switch (cur_.kind) {
            case Tok::Lt: op = "<"; break;
            case Tok::Le: op = "<="; break;
            case Tok::Gt: op = ">"; break;
            case Tok::Ge: op = ">="; break;
            case Tok::Eq: op = "="; break;
            case Tok::Neq: op = "!="; break;
            case Tok::Atom:
                if (cur_.text == "is") op = "is";
                break;
            default: break;
        }
        if (!op) return lhs;
        shift();
        Term rhs = term();
        return Term::compound(op, {lhs, rhs});
    }

    Term term() {
        switch (cur_.kind) {
            case Tok::Var: {
                Term v = make_var(cur_.text);
                shift();
                return v;
            }
            case Tok::Number: {
                Term n = Term::number(cur_.number);
                shift();
                return n;
            }
            case Tok::String: {
                Term s = Term::text(cur_.text);
                shift();
                return s;
            }
            case Tok::Cut: {
                shift();
                return Term::constant("!");
            }
            case Tok::LBracket: return list();
            case Tok::Atom: {
                std::string name = cur_.text;
                int line = cur_.line, col = cur_.col;
                shift();
                if (cur_.kind != Tok::LParen) return Term::constant(std::move(name));
                shift();
                std::vector<Term> args;
                if (cur_.kind != Tok::RParen) {
                    args.push_back(term());
                    while (cur_.kind == Tok::Comma) {
                        shift();
                        args.push_back(term());
                    }
                }
                expect(Tok::RParen);
                return finish_compound(std::move(name), std::move(args), line, col);
            }
            default: fail("term");
        }
    }

    Term finish_compound(std::string name, std::vector<Term> args, int line, int col) {
        auto all_numbers = [&] {
            for (const Term& a : args)
                if (!a.is(Term::Kind::Number)) return false;
            return true;
        };
        if (name == "datetime" && args.size() == 6 && all_numbers()) {
            auto tp = TimePoint::make(
                static_cast<int>(args[0].number_value()), static_cast<int>(args[1].number_value()),
                static_cast<int>(args[2].number_value()), static_cast<int>(args[3].number_value()),
                static_cast<int>(args[4].number_value()), static_cast<int>(args[5].number_value()));
            if (!tp) throw ParseError{Diagnostic{line, col, "invalid calendar date-time", {}}};
            return Term::time_point(*tp);
        }
        if (name == "timespan" && args.size() == 4 && all_numbers()) {
            for (const Term& a : args)
                if (a.number_value() < 0)
                    throw ParseError{Diagnostic{line, col, "negative timespan component", {}}};
            return Term::time_span(TimeSpan{
                static_cast<int>(args[0].number_value()), static_cast<int>(args[1].number_value()),
                static_cast<int>(args[2].number_value()),
                static_cast<int>(args[3].number_value())});
        }
        return Term::compound(std::move(name), std::move(args));
    }

    Term list() {
        expect(Tok::LBracket);
        std::vector<Term> items;
        std::optional<Term> tail;
        if (cur_.kind != Tok::RBracket) {
            items.push_back(term());
            while (cur_.kind == Tok::Comma) {
                shift();
                items.push_back(term());
            }
            if (cur_.kind == Tok::Bar) {
                shift();
                tail = term();
            }
        }
        expect(Tok::RBracket);
        return Term::list(std::move(items), std::move(tail));
    }

    Term make_var(const std::string& name) {
        if (name == "_") return Term::variable("_", ++var_counter_);
        auto it = clause_vars_.find(name);
        if (it != clause_vars_.end()) return it->second;
        Term v = Term::variable(name, ++var_counter_);
        clause_vars_.emplace(name, v);
        var_order_.emplace_back(name, v.var_id());
        return v;
    }

    // Recognize eca/2..6 and integrity/1 facts; normalize eca to six parts.
    void finish_clause(ParsedProgram& out, Clause c) {
        if (c.is_fact() && c.head.is(Term::Kind::Compound) && c.head.symbol() == "eca") {
            std::size_t n = c.head.args().size();
            if (n < 2 || n > 6)
                throw ParseError{Diagnostic{c.span.line, c.span.column,
                                            "eca fact must have 2..6 parts", {}}};
            std::vector<Term> parts;
            for (const Term& a : c.head.args())
                parts.push_back(a.is(Term::Kind::Variable) && a.symbol() == "_" ? blank_marker()
                                                                                : a);
            Term b = blank_marker();
            std::vector<Term> six;
            switch (n) {
                case 2: six = {b, b, parts[0], parts[1], b, b}; break;
                case 3: six = {b, parts[0], parts[1], parts[2], b, b}; break;
                case 4: six = {b, parts[0], parts[1], parts[2], parts[3], b}; break;
                case 5: six = {parts[0], parts[1], parts[2], parts[3], parts[4], b}; break;
                default: six = std::move(parts); break;
            }
            c.head = Term::compound("eca", std::move(six));
            out.eca_rules.push_back(c.head);
        }
        if (c.is_fact() && c.head.is(Term::Kind::Compound) && c.head.symbol() == "integrity" &&
            c.head.args().size() == 1)
            out.integrity_constraints.push_back(c.head.args()[0]);
        out.clauses.push_back(std::move(c));
    }

    Lexer lex_;
    Token cur_;
    VarId var_counter_ = 0;
    std::map<std::string, Term> clause_vars_;
    std::vector<std::pair<std::string, VarId>> var_order_;
};

bool needs_quotes(const std::string& s) {
    if (s.empty()) return true;
    if (s == "!" || s == "_" || s == "[]") return false;
    if (!std::islower(static_cast<unsigned char>(s[0]))) return true;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return true;
    return false;
}

void escape_into(std::ostringstream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
        switch (c) {
            case '"': os << "\\\""; break;
            case '\\': os << "\\\\"; break;
            case '\n': os << "\\n"; break;
            case '\t': os << "\\t"; break;
            default: os << c;
        }
    }
    os << '"';
}

bool is_relop(const std::string& s) {
    return s == "<" || s == "<=" || s == ">" || s == ">=" || s == "=" || s == "!=" || s == "is";
}

// Names shared by distinct variable ids within one printed term get an id
// suffix so the output reparses to a variant of the input.
void scan_var_names(const Term& t, std::map<std::string, std::set<VarId>>& names) {
    switch (t.kind()) {
        case Term::Kind::Variable: names[t.symbol()].insert(t.var_id()); break;
        case Term::Kind::Compound:
        case Term::Kind::List:
            for (const Term& a : t.args()) scan_var_names(a, names);
            if (t.has_tail()) scan_var_names(t.tail(), names);
            break;
        default: break;
    }
}

void format_rec(std::ostringstream& os, const Term& t,
                const std::map<std::string, std::set<VarId>>& names) {
    switch (t.kind()) {
        case Term::Kind::Constant:
            if (needs_quotes(t.symbol()))
                escape_into(os, t.symbol());   // degrades gracefully to a Text literal
            else
                os << t.symbol();
            break;
        case Term::Kind::Number: os << t.number_value(); break;
        case Term::Kind::Text: escape_into(os, t.symbol()); break;
        case Term::Kind::Variable: {
            auto it = names.find(t.symbol());
            bool ambiguous = it != names.end() && it->second.size() > 1;
            if (t.symbol() == "_" && ambiguous)
                os << "_G" << t.var_id();
            else if (ambiguous)
                os << t.symbol() << '_' << t.var_id();
            else
                os << t.symbol();
            break;
        }
        case Term::Kind::Compound: {
            if (is_relop(t.symbol()) && t.args().size() == 2) {
                format_rec(os, t.args()[0], names);
                os << ' ' << t.symbol() << ' ';
                format_rec(os, t.args()[1], names);
                break;
            }
            os << t.symbol() << '(';
            for (std::size_t i = 0; i < t.args().size(); ++i) {
                if (i) os << ',';
                format_rec(os, t.args()[i], names);
            }
            os << ')';
            break;
        }
        case Term::Kind::List: {
            os << '[';
            for (std::size_t i = 0; i < t.args().size(); ++i) {
                if (i) os << ',';
                format_rec(os, t.args()[i], names);
            }
            if (t.has_tail()) {
                os << '|';
                format_rec(os, t.tail(), names);
            }
            os << ']';
            break;
        }
        case Term::Kind::TimePoint: {
            const TimePoint& tp = t.time_point_value();
            os << "datetime(" << tp.year << ',' << tp.month << ',' << tp.day << ',' << tp.hour
               << ',' << tp.minute << ',' << tp.second << ')';
            break;
        }
        case Term::Kind::TimeSpan: {
            const TimeSpan& ts = t.time_span_value();
            os << "timespan(" << ts.days << ',' << ts.hours << ',' << ts.minutes << ','
               << ts.seconds << ')';
            break;
        }
    }
}

}   // namespace

std::string Diagnostic::to_string() const {
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << message;
    if (!expected.empty()) {
        os << " (expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) os << " or ";
            os << expected[i];
        }
        os << ')';
    }
    return os.str();
}

ParseResult parse_program(std::string_view text) {
    try {
        Parser p(text);
        return ParseResult{p.program(), std::nullopt};
    } catch (const ParseError& e) {
        return ParseResult{std::nullopt, e.diag};
    }
}

QueryResult parse_query(std::string_view text) {
    try {
        Parser p(text);
        QueryResult r;
        std::vector<std::pair<std::string, VarId>> named;
        r.literals = p.query(named);
        r.named_vars = std::move(named);
        return r;
    } catch (const ParseError& e) {
        return QueryResult{std::nullopt, e.diag, {}};
    }
}

std::optional<Term> parse_term_text(std::string_view text) {
    try {
        Parser p(text);
        return p.single_term();
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

std::string format_term(const Term& t) {
    std::map<std::string, std::set<VarId>> names;
    scan_var_names(t, names);
    std::ostringstream os;
    format_rec(os, t, names);
    return os.str();
}

std::string format_clause(const Clause& c) {
    std::map<std::string, std::set<VarId>> names;
    scan_var_names(c.head, names);
    for (const Term& lit : c.body) scan_var_names(lit, names);
    std::ostringstream os;
    format_rec(os, c.head, names);
    if (!c.body.empty()) {
        os << " :- ";
        for (std::size_t i = 0; i < c.body.size(); ++i) {
            if (i) os << ", ";
            format_rec(os, c.body[i], names);
        }
    }
    os << '.';
    return os.str();
}

Term blank_marker() { return Term::constant("_"); }

bool is_blank(const Term& t) {
    return t.is(Term::Kind::Constant) && t.symbol() == "_";
}

}   // namespace ecalp
