#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dptk/lang/ast.hpp"

namespace dptk {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Parses a formula of the grammar documented in docs/grammar.md. Free variable sorts are
/// inferred from context (arguments of ord/ac are VF, sides of '<' are VG, ring operations
/// and atoms join equal sorts) or given explicitly with a `name:SORT` annotation.
/// Constant valued-field subterms are folded into a single VFConst node.
/// Throws ParseError on syntax errors and SortError on sort mismatches.
FormulaPtr parse_formula(std::string_view text);
/// As above, with the sorts of some free variables given.
FormulaPtr parse_formula(std::string_view text, const std::map<std::string, Sort>& vars);

/// Parses a single term. `expected` fixes the sort of the whole term; `vars` supplies the
/// sorts of variables that are not annotated inline.
TermPtr parse_term(std::string_view text, std::optional<Sort> expected = std::nullopt,
                   const std::map<std::string, Sort>& vars = {});

std::string print_formula(const FormulaPtr& f);
std::string print_term(const TermPtr& t);

struct FreeVariables {
    std::vector<std::string> vf, rf, vg;
    bool empty() const { return vf.empty() && rf.empty() && vg.empty(); }
    std::vector<std::string>& of(Sort s);
    const std::vector<std::string>& of(Sort s) const;
    friend bool operator==(const FreeVariables&, const FreeVariables&) = default;
};

/// Variables with at least one free occurrence, partitioned by sort, in first-occurrence order.
FreeVariables free_variables(const FormulaPtr& f);
FreeVariables free_variables(const TermPtr& t);

/// Validates every sort invariant of an AST (including ASTs not built by the parser).
/// Throws SortError naming the offending node.
void sort_check(const FormulaPtr& f);
void sort_check(const TermPtr& t);

}  // namespace dptk
