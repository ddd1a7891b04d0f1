#include "dptk/lang/ast.hpp"

#include <numeric>

namespace dptk {

std::string_view sort_name(Sort s) {
    switch (s) {
        case Sort::ValuedField: return "VF";
        case Sort::ResidueField: return "RF";
        case Sort::ValueGroup: return "VG";
    }
    return "?";
}

std::optional<Sort> sort_from_name(std::string_view s) {
    if (s == "VF") return Sort::ValuedField;
    if (s == "RF") return Sort::ResidueField;
    if (s == "VG") return Sort::ValueGroup;
    return std::nullopt;
}

namespace {

TermPtr make(Term t) { return std::make_shared<const Term>(std::move(t)); }

void require_same(const TermPtr& a, const TermPtr& b, const char* op) {
    if (a->sort != b->sort)
        throw SortError(std::string("operands of '") + op + "' have sorts " + std::string(sort_name(a->sort)) +
                            " and " + std::string(sort_name(b->sort)),
                        op);
}

TermPtr binary(TermKind k, TermPtr a, TermPtr b, const char* op) {
    require_same(a, b, op);
    Term t{k, a->sort};
    t.lhs = std::move(a);
    t.rhs = std::move(b);
    return make(std::move(t));
}

}  // namespace

namespace term {

TermPtr var(std::string name, Sort s) {
    Term t{TermKind::Var, s};
    t.name = std::move(name);
    return make(std::move(t));
}

TermPtr vf_const(ZPoly poly, std::int64_t denom) {
    if (denom == 0) throw std::invalid_argument("VF constant with zero denominator");
    if (denom < 0) {
        poly = -poly;
        denom = -denom;
    }
    std::int64_t g = std::gcd(poly.content(), denom);
    if (poly.is_zero()) g = denom;
    if (g > 1) {
        poly = poly.exact_div(g);
        denom /= g;
    }
    Term t{TermKind::VFConst, Sort::ValuedField};
    t.poly = std::move(poly);
    t.denom = denom;
    return make(std::move(t));
}

TermPtr rf_const(std::int64_t v) {
    Term t{TermKind::RFConst, Sort::ResidueField};
    t.value = v;
    return make(std::move(t));
}

TermPtr vg_const(std::int64_t v) {
    Term t{TermKind::VGConst, Sort::ValueGroup};
    t.value = v;
    return make(std::move(t));
}

TermPtr add(TermPtr a, TermPtr b) { return binary(TermKind::Add, std::move(a), std::move(b), "+"); }
TermPtr sub(TermPtr a, TermPtr b) { return binary(TermKind::Sub, std::move(a), std::move(b), "-"); }
TermPtr mul(TermPtr a, TermPtr b) { return binary(TermKind::Mul, std::move(a), std::move(b), "*"); }

TermPtr neg(TermPtr a) {
    Term t{TermKind::Neg, a->sort};
    t.lhs = std::move(a);
    return make(std::move(t));
}

TermPtr pow(TermPtr a, std::int64_t n) {
    if (n < 0) throw SortError("negative exponent", "^");
    Term t{TermKind::Pow, a->sort};
    t.value = n;
    t.lhs = std::move(a);
    return make(std::move(t));
}

TermPtr ord(TermPtr a) {
    if (a->sort != Sort::ValuedField) throw SortError("ord expects a valued-field argument", "ord");
    Term t{TermKind::Ord, Sort::ValueGroup};
    t.lhs = std::move(a);
    return make(std::move(t));
}

TermPtr ac(TermPtr a) {
    if (a->sort != Sort::ValuedField) throw SortError("ac expects a valued-field argument", "ac");
    Term t{TermKind::Ac, Sort::ResidueField};
    t.lhs = std::move(a);
    return make(std::move(t));
}

}  // namespace term

bool structurally_equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind || a->sort != b->sort) return false;
    switch (a->kind) {
        case TermKind::Var: return a->name == b->name;
        case TermKind::VFConst: return a->poly == b->poly && a->denom == b->denom;
        case TermKind::RFConst:
        case TermKind::VGConst: return a->value == b->value;
        case TermKind::Pow: return a->value == b->value && structurally_equal(a->lhs, b->lhs);
        case TermKind::Neg:
        case TermKind::Ord:
        case TermKind::Ac: return structurally_equal(a->lhs, b->lhs);
        default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    }
}

bool contains_variable(const TermPtr& t) {
    if (!t) return false;
    if (t->kind == TermKind::Var) return true;
    return contains_variable(t->lhs) || contains_variable(t->rhs);
}

namespace fml {

namespace {
FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
}  // namespace

FormulaPtr eq(TermPtr l, TermPtr r) {
    if (l->sort != r->sort) throw SortError("equality between different sorts", "=");
    Formula f{FormulaKind::Eq, std::move(l), std::move(r)};
    return make(std::move(f));
}

FormulaPtr lt(TermPtr l, TermPtr r) {
    if (l->sort != Sort::ValueGroup || r->sort != Sort::ValueGroup)
        throw SortError("'<' is only defined on the value group", "<");
    Formula f{FormulaKind::Lt, std::move(l), std::move(r)};
    return make(std::move(f));
}

FormulaPtr le(TermPtr l, TermPtr r) { return neg(lt(std::move(r), std::move(l))); }
FormulaPtr ne(TermPtr l, TermPtr r) { return neg(eq(std::move(l), std::move(r))); }

FormulaPtr neg(FormulaPtr x) {
    Formula f{FormulaKind::Not};
    f.a = std::move(x);
    return make(std::move(f));
}

static FormulaPtr binary(FormulaKind k, FormulaPtr x, FormulaPtr y) {
    Formula f{k};
    f.a = std::move(x);
    f.b = std::move(y);
    return make(std::move(f));
}

FormulaPtr conj(FormulaPtr x, FormulaPtr y) { return binary(FormulaKind::And, std::move(x), std::move(y)); }
FormulaPtr disj(FormulaPtr x, FormulaPtr y) { return binary(FormulaKind::Or, std::move(x), std::move(y)); }
FormulaPtr implies(FormulaPtr x, FormulaPtr y) { return binary(FormulaKind::Implies, std::move(x), std::move(y)); }
FormulaPtr iff(FormulaPtr x, FormulaPtr y) { return binary(FormulaKind::Iff, std::move(x), std::move(y)); }

static FormulaPtr quant(FormulaKind k, std::string v, Sort s, FormulaPtr body, std::optional<BoundAnnotation> bound) {
    if (bound) {
        if (s == Sort::ResidueField) throw SortError("residue-field quantifiers take no bound", v);
        if (s == Sort::ValuedField && (!bound->min_ord || bound->interval))
            throw SortError("valued-field bound must be a minimum valuation", v);
        if (s == Sort::ValueGroup && (!bound->interval || bound->min_ord))
            throw SortError("value-group bound must be an interval", v);
    }
    Formula f{k};
    f.var = std::move(v);
    f.var_sort = s;
    f.a = std::move(body);
    f.bound = std::move(bound);
    return make(std::move(f));
}

FormulaPtr forall(std::string v, Sort s, FormulaPtr body, std::optional<BoundAnnotation> bound) {
    return quant(FormulaKind::Forall, std::move(v), s, std::move(body), std::move(bound));
}
FormulaPtr exists(std::string v, Sort s, FormulaPtr body, std::optional<BoundAnnotation> bound) {
    return quant(FormulaKind::Exists, std::move(v), s, std::move(body), std::move(bound));
}

FormulaPtr truth() { return eq(term::vf_const(ZPoly(0)), term::vf_const(ZPoly(0))); }
FormulaPtr falsity() { return eq(term::vf_const(ZPoly(0)), term::vf_const(ZPoly(1))); }

}  // namespace fml

bool is_atom(const Formula& f) { return f.kind == FormulaKind::Eq || f.kind == FormulaKind::Lt; }
bool is_quantifier(const Formula& f) { return f.kind == FormulaKind::Forall || f.kind == FormulaKind::Exists; }

bool structurally_equal(const FormulaPtr& x, const FormulaPtr& y) {
    if (x == y) return true;
    if (!x || !y) return false;
    if (x->kind != y->kind) return false;
    switch (x->kind) {
        case FormulaKind::Eq:
        case FormulaKind::Lt: return structurally_equal(x->lhs, y->lhs) && structurally_equal(x->rhs, y->rhs);
        case FormulaKind::Not: return structurally_equal(x->a, y->a);
        case FormulaKind::Forall:
        case FormulaKind::Exists:
            return x->var == y->var && x->var_sort == y->var_sort && x->bound == y->bound &&
                   structurally_equal(x->a, y->a);
        default: return structurally_equal(x->a, y->a) && structurally_equal(x->b, y->b);
    }
}

}  // namespace dptk
