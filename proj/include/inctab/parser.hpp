#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "inctab/program.hpp"
#include "inctab/term.hpp"

namespace inctab {

struct ReadTerm {
    Term term;
    /// Named (non-anonymous) variables in order of first appearance.
    std::vector<std::pair<std::string, VarId>> var_names;
    int line = 0;
    int column = 0;
};

/// Reads '.'-terminated terms of the supported Prolog subset.
class Parser {
public:
    explicit Parser(std::string_view text, std::string source = "<input>");

    /// Next clause or directive; false at end of input. Syntax errors throw
    /// with "source:line:column".
    bool next(ReadTerm& out);

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

/// Parses exactly one term (a trailing '.' is optional).
ReadTerm parse_term(std::string_view text);

/// All terms in `text`.
std::vector<ReadTerm> parse_all(std::string_view text, const std::string& source = "<input>");

/// A parsed `:- table ...` or `:- dynamic ...` directive.
std::vector<PredicateDecl> parse_declaration(const Term& directive_body);

} // namespace inctab
