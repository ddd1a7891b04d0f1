#include "dptk/eval/evaluator.hpp"

#include <algorithm>
#include <functional>

#include "dptk/lang/parser.hpp"

namespace dptk {

Truth t_not(Truth a) {
    if (a == Truth::Unknown) return a;
    return a == Truth::True ? Truth::False : Truth::True;
}

Truth t_and(Truth a, Truth b) {
    if (a == Truth::False || b == Truth::False) return Truth::False;
    if (a == Truth::True && b == Truth::True) return Truth::True;
    return Truth::Unknown;
}

Truth t_or(Truth a, Truth b) {
    if (a == Truth::True || b == Truth::True) return Truth::True;
    if (a == Truth::False && b == Truth::False) return Truth::False;
    return Truth::Unknown;
}

Truth t_implies(Truth a, Truth b) { return t_or(t_not(a), b); }

Truth t_iff(Truth a, Truth b) {
    if (a == Truth::Unknown || b == Truth::Unknown) return Truth::Unknown;
    return a == b ? Truth::True : Truth::False;
}

std::string to_string(Truth t) {
    switch (t) {
        case Truth::True: return "true";
        case Truth::False: return "false";
        case Truth::Unknown: return "unknown";
    }
    return "?";
}

std::string ExtInt::to_string() const {
    if (kind == Kind::PosInf) return "inf";
    if (kind == Kind::NegInf) return "-inf";
    return std::to_string(value);
}

bool operator<(const ExtInt& a, const ExtInt& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.is_finite() && a.value < b.value;
}

std::string VGValue::to_string() const {
    if (determined()) return lo.to_string();
    return "[" + lo.to_string() + ", " + hi.to_string() + "]";
}

Assignment& Assignment::set_vf(const std::string& name, const FieldElement& e) {
    values[name] = e;
    return *this;
}
Assignment& Assignment::set_rf(const std::string& name, std::uint32_t r) {
    values[name] = RFValue(r);
    return *this;
}
Assignment& Assignment::set_vg(const std::string& name, std::int64_t v) {
    values[name] = VGValue::exact(v);
    return *this;
}
const Value* Assignment::find(const std::string& name) const {
    auto it = values.find(name);
    return it == values.end() ? nullptr : &it->second;
}

Structure::Structure(FieldConfig field) : field_(field) {}

FieldElement Structure::constant(const Term& c) const {
    FieldElement num = FieldElement::from_poly(field_, c.poly);
    if (c.denom == 1) return num;
    return num * FieldElement::inverse_of_int(field_, c.denom);
}

namespace {

ExtInt ext_add_lo(ExtInt a, ExtInt b) {
    if (a.kind == ExtInt::Kind::NegInf || b.kind == ExtInt::Kind::NegInf) return ExtInt::neg_inf();
    if (a.kind == ExtInt::Kind::PosInf || b.kind == ExtInt::Kind::PosInf) return ExtInt::pos_inf();
    return ExtInt::finite(checked::add(a.value, b.value));
}

ExtInt ext_add_hi(ExtInt a, ExtInt b) {
    if (a.kind == ExtInt::Kind::PosInf || b.kind == ExtInt::Kind::PosInf) return ExtInt::pos_inf();
    if (a.kind == ExtInt::Kind::NegInf || b.kind == ExtInt::Kind::NegInf) return ExtInt::neg_inf();
    return ExtInt::finite(checked::add(a.value, b.value));
}

ExtInt ext_neg(ExtInt a) {
    if (a.kind == ExtInt::Kind::PosInf) return ExtInt::neg_inf();
    if (a.kind == ExtInt::Kind::NegInf) return ExtInt::pos_inf();
    return ExtInt::finite(-a.value);
}

int ext_sign(ExtInt a) {
    if (a.kind == ExtInt::Kind::PosInf) return 1;
    if (a.kind == ExtInt::Kind::NegInf) return -1;
    return a.value > 0 ? 1 : (a.value < 0 ? -1 : 0);
}

// nullopt for 0 * inf.
std::optional<ExtInt> ext_mul(ExtInt a, ExtInt b) {
    if (a.is_finite() && b.is_finite()) return ExtInt::finite(checked::mul(a.value, b.value));
    int s = ext_sign(a) * ext_sign(b);
    if (s == 0) return std::nullopt;
    return s > 0 ? ExtInt::pos_inf() : ExtInt::neg_inf();
}

VGValue vg_add(const VGValue& a, const VGValue& b) { return {ext_add_lo(a.lo, b.lo), ext_add_hi(a.hi, b.hi)}; }
VGValue vg_neg(const VGValue& a) { return {ext_neg(a.hi), ext_neg(a.lo)}; }

VGValue vg_mul(const VGValue& a, const VGValue& b) {
    std::vector<ExtInt> prods;
    for (auto x : {a.lo, a.hi})
        for (auto y : {b.lo, b.hi}) {
            auto m = ext_mul(x, y);
            if (!m) return {ExtInt::neg_inf(), ExtInt::pos_inf()};
            prods.push_back(*m);
        }
    return {*std::min_element(prods.begin(), prods.end()), *std::max_element(prods.begin(), prods.end())};
}

bool mentions(const TermPtr& t, const std::string& var) {
    if (!t) return false;
    if (t->kind == TermKind::Var) return t->name == var;
    return mentions(t->lhs, var) || mentions(t->rhs, var);
}

using Poly = std::vector<FieldElement>;

Poly poly_add(const Poly& a, const Poly& b, const FieldConfig& cfg) {
    Poly c(std::max(a.size(), b.size()), FieldElement::zero(cfg));
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i < a.size()) c[i] = c[i] + a[i];
        if (i < b.size()) c[i] = c[i] + b[i];
    }
    return c;
}

Poly poly_neg(const Poly& a) {
    Poly c;
    for (const auto& x : a) c.push_back(-x);
    return c;
}

Poly poly_mul(const Poly& a, const Poly& b, const FieldConfig& cfg) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, FieldElement::zero(cfg));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_exact_zero()) continue;
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = c[i + j] + a[i] * b[j];
    }
    return c;
}

std::int64_t binomial(std::int64_t n, std::int64_t k) {
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

struct Evaluator::Scope {
    const Assignment* base;
    const Box* box;
    std::vector<std::pair<std::string, Value>> bound;

    const Value* lookup(const std::string& name) const {
        for (auto it = bound.rbegin(); it != bound.rend(); ++it)
            if (it->first == name) return &it->second;
        return base->find(name);
    }
};

Evaluator::Evaluator(Structure s, EvalOptions opts) : s_(std::move(s)), opts_(opts) {}

std::uint32_t Evaluator::digits() const { return opts_.digits ? opts_.digits : s_.field().precision; }

void Evaluator::diag(const std::string& msg) {
    if (std::find(diagnostics_.begin(), diagnostics_.end(), msg) == diagnostics_.end()) diagnostics_.push_back(msg);
}

Value Evaluator::eval_term(const TermPtr& t, const Assignment& asg) {
    Box box;
    Scope sc{&asg, &box, {}};
    return term(t, sc);
}

Truth Evaluator::eval_formula(const FormulaPtr& f, const Assignment& asg, const Box& box) {
    Scope sc{&asg, &box, {}};
    return formula(f, sc);
}

Value Evaluator::term(const TermPtr& t, Scope& sc) {
    const FieldConfig& cfg = s_.field();
    const std::uint32_t p = cfg.p;
    switch (t->kind) {
        case TermKind::Var: {
            const Value* v = sc.lookup(t->name);
            if (!v) throw EvalError("variable '" + t->name + "' is not assigned");
            bool ok = (t->sort == Sort::ValuedField && std::holds_alternative<FieldElement>(*v)) ||
                      (t->sort == Sort::ResidueField && std::holds_alternative<RFValue>(*v)) ||
                      (t->sort == Sort::ValueGroup && std::holds_alternative<VGValue>(*v));
            if (!ok) throw EvalError("variable '" + t->name + "' is assigned a value of the wrong sort");
            if (t->sort == Sort::ResidueField) {
                auto r = std::get<RFValue>(*v);
                if (r) return RFValue(*r % p);
            }
            return *v;
        }
        case TermKind::VFConst: {
            auto key = std::make_pair(t->poly, t->denom);
            auto it = const_cache_.find(key);
            if (it != const_cache_.end()) return it->second;
            FieldElement c;
            try {
                c = s_.constant(*t);
            } catch (const FieldError& e) {
                throw EvalError(e.what());
            }
            const_cache_.emplace(std::move(key), c);
            return c;
        }
        case TermKind::RFConst: return RFValue(reduce_mod(t->value, p));
        case TermKind::VGConst: return VGValue::exact(t->value);
        case TermKind::Ord: {
            auto x = std::get<FieldElement>(term(t->lhs, sc));
            auto o = x.ord();
            if (o.is_infinite()) return VGValue::infinity();
            if (o.is_unknown()) return VGValue{ExtInt::finite(o.value), ExtInt::pos_inf()};
            return VGValue::exact(o.value);
        }
        case TermKind::Ac: {
            auto x = std::get<FieldElement>(term(t->lhs, sc));
            if (x.is_exhausted()) return RFValue();
            return RFValue(x.ac());
        }
        default: break;
    }
    if (t->sort == Sort::ValuedField) {
        auto a = std::get<FieldElement>(term(t->lhs, sc));
        switch (t->kind) {
            case TermKind::Neg: return -a;
            case TermKind::Pow: return a.pow(static_cast<unsigned>(t->value));
            case TermKind::Add: return a + std::get<FieldElement>(term(t->rhs, sc));
            case TermKind::Sub: return a - std::get<FieldElement>(term(t->rhs, sc));
            case TermKind::Mul: return a * std::get<FieldElement>(term(t->rhs, sc));
            default: break;
        }
    }
    if (t->sort == Sort::ResidueField) {
        auto a = std::get<RFValue>(term(t->lhs, sc));
        if (t->kind == TermKind::Neg) return a ? RFValue((p - *a) % p) : a;
        if (t->kind == TermKind::Pow) {
            if (t->value == 0) return RFValue(1u % p);
            return a ? RFValue(mod_pow(*a, static_cast<std::uint64_t>(t->value), p)) : a;
        }
        auto b = std::get<RFValue>(term(t->rhs, sc));
        if (t->kind == TermKind::Mul) {
            if ((a && *a == 0) || (b && *b == 0)) return RFValue(0u);
            if (!a || !b) return RFValue();
            return RFValue(static_cast<std::uint32_t>(std::uint64_t(*a) * *b % p));
        }
        if (!a || !b) return RFValue();
        if (t->kind == TermKind::Add) return RFValue((*a + *b) % p);
        return RFValue((*a + p - *b) % p);
    }
    auto a = std::get<VGValue>(term(t->lhs, sc));
    switch (t->kind) {
        case TermKind::Neg: return vg_neg(a);
        case TermKind::Pow: {
            VGValue r = VGValue::exact(1);
            for (std::int64_t i = 0; i < t->value; ++i) r = vg_mul(r, a);
            return r;
        }
        case TermKind::Add: return vg_add(a, std::get<VGValue>(term(t->rhs, sc)));
        case TermKind::Sub: return vg_add(a, vg_neg(std::get<VGValue>(term(t->rhs, sc))));
        case TermKind::Mul: return vg_mul(a, std::get<VGValue>(term(t->rhs, sc)));
        default: break;
    }
    throw EvalError("unsupported term");
}

Truth Evaluator::formula(const FormulaPtr& f, Scope& sc) {
    switch (f->kind) {
        case FormulaKind::Eq:
        case FormulaKind::Lt: {
            if (!forced_.empty()) {
                auto it = forced_.find(f.get());
                if (it != forced_.end()) return it->second;
            }
            Value l = term(f->lhs, sc), r = term(f->rhs, sc);
            if (f->kind == FormulaKind::Lt) {
                const auto& a = std::get<VGValue>(l);
                const auto& b = std::get<VGValue>(r);
                if (a.hi < b.lo) return Truth::True;
                if (!(a.lo < b.hi)) return Truth::False;
                return Truth::Unknown;
            }
            switch (f->lhs->sort) {
                case Sort::ValuedField: {
                    auto d = std::get<FieldElement>(l) - std::get<FieldElement>(r);
                    if (d.is_exact_zero()) return Truth::True;
                    return d.is_exhausted() ? Truth::Unknown : Truth::False;
                }
                case Sort::ResidueField: {
                    auto a = std::get<RFValue>(l), b = std::get<RFValue>(r);
                    if (!a || !b) return Truth::Unknown;
                    return *a == *b ? Truth::True : Truth::False;
                }
                case Sort::ValueGroup: {
                    const auto& a = std::get<VGValue>(l);
                    const auto& b = std::get<VGValue>(r);
                    if (a.determined() && b.determined()) return a.lo == b.lo ? Truth::True : Truth::False;
                    if (a.hi < b.lo || b.hi < a.lo) return Truth::False;
                    return Truth::Unknown;
                }
            }
            return Truth::Unknown;
        }
        case FormulaKind::Not: return t_not(formula(f->a, sc));
        case FormulaKind::And: {
            Truth a = formula(f->a, sc);
            if (a == Truth::False) return a;
            return t_and(a, formula(f->b, sc));
        }
        case FormulaKind::Or: {
            Truth a = formula(f->a, sc);
            if (a == Truth::True) return a;
            return t_or(a, formula(f->b, sc));
        }
        case FormulaKind::Implies: {
            Truth a = formula(f->a, sc);
            if (a == Truth::False) return Truth::True;
            return t_implies(a, formula(f->b, sc));
        }
        case FormulaKind::Iff: return t_iff(formula(f->a, sc), formula(f->b, sc));
        case FormulaKind::Forall:
        case FormulaKind::Exists: return quantifier(f, sc);
    }
    return Truth::Unknown;
}

Truth Evaluator::quantifier(const FormulaPtr& f, Scope& sc) {
    const bool exists = f->kind == FormulaKind::Exists;
    const Truth decisive = exists ? Truth::True : Truth::False;
    bool unknown = false;
    auto visit = [&](Value v) -> bool {
        sc.bound.emplace_back(f->var, std::move(v));
        Truth r = formula(f->a, sc);
        sc.bound.pop_back();
        if (r == Truth::Unknown) unknown = true;
        return r == decisive;
    };
    switch (f->var_sort) {
        case Sort::ResidueField:
            for (std::uint32_t r = 0; r < s_.field().p; ++r)
                if (visit(RFValue(r))) return decisive;
            break;
        case Sort::ValueGroup: {
            std::optional<std::pair<std::int64_t, std::int64_t>> range;
            if (f->bound && f->bound->interval) range = f->bound->interval;
            else if (auto it = sc.box->vg.find(f->var); it != sc.box->vg.end()) range = it->second;
            if (!range) {
                diag("value-group quantifier over '" + f->var + "' has no bound; result Unknown");
                return Truth::Unknown;
            }
            for (std::int64_t w = range->first; w <= range->second; ++w)
                if (visit(VGValue::exact(w))) return decisive;
            break;
        }
        case Sort::ValuedField: {
            std::optional<std::int64_t> v0;
            if (f->bound && f->bound->min_ord) v0 = f->bound->min_ord;
            else if (auto it = sc.box->vf_min_ord.find(f->var); it != sc.box->vf_min_ord.end()) v0 = it->second;
            if (!v0) {
                diag("valued-field quantifier over '" + f->var + "' has no bound; result Unknown");
                return Truth::Unknown;
            }
            return vf_quantifier(f, sc, *v0);
        }
    }
    return unknown ? Truth::Unknown : t_not(decisive);
}

FieldElement ball_representative(const FieldConfig& cfg, std::int64_t v0, const std::vector<std::uint32_t>& digits) {
    if (digits.empty()) return FieldElement::exhausted(cfg, v0);
    return FieldElement::from_digits(cfg, v0, digits, false);
}

Truth Evaluator::vf_quantifier(const FormulaPtr& f, Scope& sc, std::int64_t v0) {
    const bool exists = f->kind == FormulaKind::Exists;
    const Truth decisive = exists ? Truth::True : Truth::False;
    const std::uint32_t p = s_.field().p;
    const std::size_t max_digits = digits();
    bool unknown = false;
    std::vector<std::vector<std::uint32_t>> stack{{}};
    while (!stack.empty()) {
        std::vector<std::uint32_t> prefix = std::move(stack.back());
        stack.pop_back();
        ++balls_;
        sc.bound.emplace_back(f->var, ball_representative(s_.field(), v0, prefix));
        Truth r = formula(f->a, sc);
        sc.bound.pop_back();
        if (r == decisive) return decisive;
        if (r != Truth::Unknown) continue;
        if (opts_.certify) {
            auto c = certify_ball(f, sc, v0, prefix);
            if (c && *c == decisive) return decisive;
            if (c) continue;
        }
        if (prefix.size() < max_digits) {
            for (std::uint32_t d = p; d-- > 0;) {
                auto child = prefix;
                child.push_back(d);
                stack.push_back(std::move(child));
            }
        } else {
            unknown = true;
        }
    }
    return unknown ? Truth::Unknown : t_not(decisive);
}

void Evaluator::collect_candidate_atoms(const FormulaPtr& body, const std::string& var, Scope& sc,
                                        std::vector<const Formula*>& out) {
    switch (body->kind) {
        case FormulaKind::Eq:
            if (body->lhs->sort == Sort::ValuedField && (mentions(body->lhs, var) || mentions(body->rhs, var)) &&
                !forced_.count(body.get()) && formula(body, sc) == Truth::Unknown &&
                std::find(out.begin(), out.end(), body.get()) == out.end())
                out.push_back(body.get());
            return;
        case FormulaKind::Lt:
        case FormulaKind::Forall:
        case FormulaKind::Exists: return;
        case FormulaKind::Not: collect_candidate_atoms(body->a, var, sc, out); return;
        default:
            collect_candidate_atoms(body->a, var, sc, out);
            collect_candidate_atoms(body->b, var, sc, out);
            return;
    }
}

std::optional<std::vector<FieldElement>> Evaluator::as_polynomial(const TermPtr& t, const std::string& var, Scope& sc) {
    const FieldConfig& cfg = s_.field();
    switch (t->kind) {
        case TermKind::Var:
            if (t->name == var) return Poly{FieldElement::zero(cfg), FieldElement::from_int(cfg, 1)};
            return Poly{std::get<FieldElement>(term(t, sc))};
        case TermKind::VFConst: return Poly{std::get<FieldElement>(term(t, sc))};
        case TermKind::Neg: {
            auto a = as_polynomial(t->lhs, var, sc);
            if (!a) return a;
            return poly_neg(*a);
        }
        case TermKind::Pow: {
            auto a = as_polynomial(t->lhs, var, sc);
            if (!a) return a;
            if (static_cast<std::int64_t>(a->size() - 1) * t->value > 64) return std::nullopt;
            Poly r{FieldElement::from_int(cfg, 1)};
            for (std::int64_t i = 0; i < t->value; ++i) r = poly_mul(r, *a, cfg);
            return r;
        }
        case TermKind::Add:
        case TermKind::Sub:
        case TermKind::Mul: {
            auto a = as_polynomial(t->lhs, var, sc);
            auto b = as_polynomial(t->rhs, var, sc);
            if (!a || !b) return std::nullopt;
            if (t->kind == TermKind::Add) return poly_add(*a, *b, cfg);
            if (t->kind == TermKind::Sub) return poly_add(*a, poly_neg(*b), cfg);
            if (a->size() + b->size() > 66) return std::nullopt;
            return poly_mul(*a, *b, cfg);
        }
        default: return std::nullopt;
    }
}

std::optional<Truth> Evaluator::certify_ball(const FormulaPtr& f, Scope& sc, std::int64_t v0,
                                             const std::vector<std::uint32_t>& prefix) {
    const FieldConfig& cfg = s_.field();
    const bool exists = f->kind == FormulaKind::Exists;
    const Truth target = exists ? Truth::True : Truth::False;
    const std::string& var = f->var;
    FieldElement ball = ball_representative(cfg, v0, prefix);

    auto eval_at = [&](const FieldElement& x) {
        sc.bound.emplace_back(var, x);
        Truth r = formula(f->a, sc);
        sc.bound.pop_back();
        return r;
    };

    std::vector<const Formula*> atoms;
    sc.bound.emplace_back(var, ball);
    collect_candidate_atoms(f->a, var, sc, atoms);
    sc.bound.pop_back();

    for (const Formula* atom : atoms) {
        // Case split: the body may not depend on the undecided atom.
        forced_[atom] = Truth::True;
        Truth when_true = eval_at(ball);
        forced_[atom] = Truth::False;
        Truth when_false = eval_at(ball);
        forced_.erase(atom);
        if (when_true == when_false && when_true != Truth::Unknown) return when_true;
        if (when_true != target) continue;

        // Hensel: a root of lhs - rhs inside the ball makes the atom true there.
        std::optional<Poly> poly;
        sc.bound.emplace_back(var, ball);
        try {
            auto l = as_polynomial(atom->lhs, var, sc);
            auto r = as_polynomial(atom->rhs, var, sc);
            if (l && r) poly = poly_add(*l, poly_neg(*r), cfg);
        } catch (const FieldError&) {
        }
        sc.bound.pop_back();
        if (!poly || poly->size() < 2) continue;

        FieldElement center = FieldElement::from_digits(cfg, v0, prefix, true);
        if (prefix.empty()) center = FieldElement::zero(cfg);
        const std::size_t n = poly->size();
        Poly shifted(n, FieldElement::zero(cfg));
        std::vector<FieldElement> center_pow{FieldElement::from_int(cfg, 1)};
        for (std::size_t i = 1; i < n; ++i) center_pow.push_back(center_pow.back() * center);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = k; j < n; ++j) {
                if ((*poly)[j].is_exact_zero()) continue;
                shifted[k] = shifted[k] +
                             (*poly)[j] * center_pow[j - k] *
                                 FieldElement::from_int(cfg, binomial(static_cast<std::int64_t>(j), static_cast<std::int64_t>(k)));
            }

        FieldElement root_ball;
        if (shifted[0].is_exact_zero()) {
            root_ball = center;
        } else {
            // Newton: y -> -(c0 + sum_{k>=2} c_k y^k) / c1 contracts pi^delta O when
            // ord c_k + (k-1) delta > ord c1 for k >= 2, with delta = ord c0 - ord c1.
            auto o1 = shifted[1].ord();
            if (!o1.is_finite()) continue;
            const std::int64_t e1 = o1.value;
            const std::int64_t delta = shifted[0].ord().value - e1;
            if (delta < v0) continue;
            bool ok = true;
            for (std::size_t k = 2; k < n && ok; ++k) {
                if (shifted[k].is_exact_zero()) continue;
                ok = shifted[k].ord().value + static_cast<std::int64_t>(k - 1) * delta > e1;
            }
            if (!ok) continue;
            root_ball = center.is_exact_zero() ? FieldElement::exhausted(cfg, delta) : center.truncated(delta);
        }
        forced_[atom] = Truth::True;
        Truth w = eval_at(root_ball);
        forced_.erase(atom);
        if (w == target) return target;
    }
    return std::nullopt;
}

Value eval_term(const Structure& s, const TermPtr& t, const Assignment& asg) {
    Evaluator ev(s);
    return ev.eval_term(t, asg);
}

Truth eval_formula(const Structure& s, const FormulaPtr& f, const Assignment& asg, const Box& box, std::uint32_t digits) {
    Evaluator ev(s, EvalOptions{digits, true});
    return ev.eval_formula(f, asg, box);
}

EnumerationResult enumerate_points(const Structure& s, const FormulaPtr& f, const Box& box, std::uint32_t M,
                                   bool keep_points) {
    const FieldConfig& cfg = s.field();
    auto fv = free_variables(f);
    for (const auto& v : fv.vf)
        if (!box.vf_min_ord.count(v)) throw EvalError("free VF variable '" + v + "' has no box entry");
    for (const auto& v : fv.vg)
        if (!box.vg.count(v)) throw EvalError("free VG variable '" + v + "' has no box entry");

    // Odometer over all coordinates: M digits per VF variable, one residue per RF variable,
    // one integer per VG variable.
    struct Coord {
        std::uint64_t radix;
        std::int64_t offset;
    };
    std::vector<Coord> coords;
    for (std::size_t i = 0; i < fv.vf.size(); ++i)
        for (std::uint32_t d = 0; d < M; ++d) coords.push_back({cfg.p, 0});
    for (std::size_t i = 0; i < fv.rf.size(); ++i) coords.push_back({cfg.p, 0});
    for (const auto& v : fv.vg) {
        auto [lo, hi] = box.vg.at(v);
        if (hi < lo) return {};
        coords.push_back({static_cast<std::uint64_t>(hi - lo + 1), lo});
    }
    Evaluator ev(s, EvalOptions{M, true});
    EnumerationResult out;
    std::vector<std::uint64_t> idx(coords.size(), 0);
    while (true) {
        Assignment asg;
        std::size_t c = 0;
        for (const auto& v : fv.vf) {
            std::vector<std::uint32_t> d;
            for (std::uint32_t k = 0; k < M; ++k) d.push_back(static_cast<std::uint32_t>(idx[c++]));
            asg.set_vf(v, ball_representative(cfg, box.vf_min_ord.at(v), d));
        }
        for (const auto& v : fv.rf) asg.set_rf(v, static_cast<std::uint32_t>(idx[c++]));
        for (const auto& v : fv.vg) {
            asg.set_vg(v, static_cast<std::int64_t>(idx[c]) + coords[c].offset);
            ++c;
        }
        Truth t = ev.eval_formula(f, asg, box);
        ++out.total;
        if (t == Truth::True && keep_points) out.points.push_back(asg);
        if (t == Truth::True && !keep_points) out.points.emplace_back();
        if (t == Truth::Unknown) out.unknown_points.push_back(asg);
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == coords[k].radix) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    return out;
}

PointCount count_mod(const Structure& s, const FormulaPtr& f, const Box& box, std::uint32_t M) {
    auto r = enumerate_points(s, f, box, M, false);
    return {r.points.size(), r.unknown_points.size(), r.total};
}

}  // namespace dptk
