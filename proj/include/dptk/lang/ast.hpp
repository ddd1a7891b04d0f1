#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "dptk/lang/zpoly.hpp"

namespace dptk {

/// The three sorts of the Denef-Pas language.
enum class Sort { ValuedField, ResidueField, ValueGroup };

std::string_view sort_name(Sort s);  // "VF", "RF", "VG"
std::optional<Sort> sort_from_name(std::string_view s);

class SortError : public std::runtime_error {
public:
    SortError(const std::string& what, std::string node)
        : std::runtime_error(what), node_(std::move(node)) {}
    const std::string& node() const { return node_; }

private:
    std::string node_;
};

enum class TermKind { Var, VFConst, RFConst, VGConst, Add, Sub, Mul, Neg, Pow, Ord, Ac };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

/// Immutable term node. Children are shared; a term tree is never mutated after construction.
struct Term {
    TermKind kind;
    Sort sort;
    std::string name;          // Var
    ZPoly poly;                // VFConst numerator
    std::int64_t denom = 1;    // VFConst: value is poly / denom, denom > 0
    std::int64_t value = 0;    // RFConst, VGConst; exponent for Pow
    TermPtr lhs, rhs;          // Add/Sub/Mul use both; Neg/Pow/Ord/Ac use lhs
};

namespace term {
TermPtr var(std::string name, Sort s);
/// VF constant poly/denom, reduced so that gcd(content(poly), denom) == 1.
TermPtr vf_const(ZPoly poly, std::int64_t denom = 1);
TermPtr rf_const(std::int64_t v);
TermPtr vg_const(std::int64_t v);
TermPtr add(TermPtr a, TermPtr b);
TermPtr sub(TermPtr a, TermPtr b);
TermPtr mul(TermPtr a, TermPtr b);
TermPtr neg(TermPtr a);
TermPtr pow(TermPtr a, std::int64_t n);
TermPtr ord(TermPtr a);
TermPtr ac(TermPtr a);
}  // namespace term

bool structurally_equal(const TermPtr& a, const TermPtr& b);
bool contains_variable(const TermPtr& t);

/// Quantifier bound annotation. For VF quantifiers a minimum valuation; for VG an
/// integer interval. RF quantifiers range over the full residue field.
struct BoundAnnotation {
    std::optional<std::int64_t> min_ord;
    std::optional<std::pair<std::int64_t, std::int64_t>> interval;
    friend bool operator==(const BoundAnnotation&, const BoundAnnotation&) = default;
};

enum class FormulaKind { Eq, Lt, Not, And, Or, Implies, Iff, Forall, Exists };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FormulaKind kind;
    TermPtr lhs, rhs;                  // atoms
    FormulaPtr a, b;                   // connectives; Not/quantifiers use a
    std::string var;                   // quantifiers
    Sort var_sort = Sort::ValuedField;
    std::optional<BoundAnnotation> bound;
};

namespace fml {
FormulaPtr eq(TermPtr l, TermPtr r);
FormulaPtr lt(TermPtr l, TermPtr r);
FormulaPtr le(TermPtr l, TermPtr r);  // sugar: not (r < l)
FormulaPtr ne(TermPtr l, TermPtr r);  // sugar: not (l = r)
FormulaPtr neg(FormulaPtr f);
FormulaPtr conj(FormulaPtr x, FormulaPtr y);
FormulaPtr disj(FormulaPtr x, FormulaPtr y);
FormulaPtr implies(FormulaPtr x, FormulaPtr y);
FormulaPtr iff(FormulaPtr x, FormulaPtr y);
FormulaPtr forall(std::string v, Sort s, FormulaPtr body, std::optional<BoundAnnotation> bound = {});
FormulaPtr exists(std::string v, Sort s, FormulaPtr body, std::optional<BoundAnnotation> bound = {});
FormulaPtr truth();      // 0 = 0
FormulaPtr falsity();    // 0 = 1
}  // namespace fml

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b);
bool is_atom(const Formula& f);
bool is_quantifier(const Formula& f);

}  // namespace dptk
