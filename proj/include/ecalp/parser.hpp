#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecalp/term.hpp"

namespace ecalp {

struct Diagnostic {
    int line = 0;
    int column = 0;
    std::string message;
    std::vector<std::string> expected;

    std::string to_string() const;
};

/// Result of parsing one script: all clauses in textual order, plus derived
/// views of the reactive rules and integrity constraints found among them.
struct ParsedProgram {
    std::vector<Clause> clauses;
    std::vector<Term> eca_rules;                // normalized 6-ary eca(...) facts
    std::vector<Term> integrity_constraints;    // the integrity/1 payloads
    std::vector<std::vector<Term>> directives;  // goals to run at load time
};

struct ParseResult {
    std::optional<ParsedProgram> program;
    std::optional<Diagnostic> error;

    bool ok() const { return program.has_value(); }
};

struct QueryResult {
    std::optional<std::vector<Term>> literals;
    std::optional<Diagnostic> error;
    /// Named (non-anonymous) query variables in order of first occurrence.
    std::vector<std::pair<std::string, VarId>> named_vars;

    bool ok() const { return literals.has_value(); }
};

/// Parse an ECA-LP script. Clause order is preserved; eca facts of arity 2..6
/// are normalized to six parts with explicit blanks ("_" constants).
ParseResult parse_program(std::string_view text);

/// Parse a goal: comma-separated literals terminated by `?` or `.`.
QueryResult parse_query(std::string_view text);

/// Parse a single term followed by end of input (test and tooling helper).
std::optional<Term> parse_term_text(std::string_view text);

std::string format_term(const Term& t);
std::string format_clause(const Clause& c);

/// The blank marker used for omitted ECA rule parts.
Term blank_marker();
bool is_blank(const Term& t);

}   // namespace ecalp
