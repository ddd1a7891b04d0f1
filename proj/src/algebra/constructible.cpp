#include "dptk/algebra/constructible.hpp"

#include <algorithm>
#include <set>

namespace dptk {

namespace {

TermPtr rename(const TermPtr& t, const std::string& from, const std::string& to) {
    if (!t) return t;
    if (t->kind == TermKind::Var) {
        if (t->name != from) return t;
        auto r = std::make_shared<Term>(*t);
        r->name = to;
        return r;
    }
    auto l = rename(t->lhs, from, to), r = rename(t->rhs, from, to);
    if (l == t->lhs && r == t->rhs) return t;
    auto n = std::make_shared<Term>(*t);
    n->lhs = l;
    n->rhs = r;
    return n;
}

FormulaPtr rename(const FormulaPtr& f, const std::string& from, const std::string& to) {
    if (!f) return f;
    if (is_quantifier(*f) && f->var == from) return f;
    auto n = std::make_shared<Formula>(*f);
    n->lhs = rename(f->lhs, from, to);
    n->rhs = rename(f->rhs, from, to);
    n->a = rename(f->a, from, to);
    n->b = rename(f->b, from, to);
    return n;
}

std::int64_t exact_vg(const Value& v, const char* what) {
    const auto& g = std::get<VGValue>(v);
    if (!g.determined() || !g.lo.is_finite())
        throw SpecializationError(std::string(what) + " is not a determined finite integer at this point");
    return g.lo.value;
}

mpq_class q_power(std::uint32_t q, std::int64_t e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), q, static_cast<unsigned long>(e >= 0 ? e : -e));
    return e >= 0 ? mpq_class(r) : mpq_class(1, r);
}

// Calls visit(assignment) for every fiber point of the term over x.
template <typename Visit>
void for_each_fiber_point(const ConstructibleTerm& term, Evaluator& ev, const Assignment& x, Visit visit) {
    const std::uint32_t p = ev.structure().field().p;
    std::vector<std::uint32_t> idx(term.fiber_vars.size(), 0);
    while (true) {
        Assignment asg = x;
        for (std::size_t i = 0; i < idx.size(); ++i) asg.set_rf(term.fiber_vars[i], idx[i]);
        Truth in_fiber = term.fiber ? ev.eval_formula(term.fiber, asg) : Truth::True;
        if (in_fiber == Truth::Unknown) throw SpecializationError("fiber membership is Unknown at this point");
        if (in_fiber == Truth::True) visit(asg);
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == p) idx[k++] = 0;
        if (k == idx.size()) break;
    }
}

mpq_class point_weight(const ConstructibleTerm& term, Evaluator& ev, const Assignment& asg, const mpq_class& coeff) {
    const std::uint32_t q = ev.structure().q();
    std::int64_t exponent = 0;
    for (const auto& a : term.exponents) exponent = checked::add(exponent, exact_vg(ev.eval_term(a, asg), "exponent"));
    mpq_class w = coeff * q_power(q, exponent);
    for (const auto& a : term.factors) w *= exact_vg(ev.eval_term(a, asg), "factor");
    return w;
}

}  // namespace

ConstructibleFn ConstructibleFn::constant(const AElem& c) {
    ConstructibleFn f;
    f.terms.push_back(ConstructibleTerm{nullptr, {}, c, {}, {}});
    return f;
}

ConstructibleFn operator+(const ConstructibleFn& a, const ConstructibleFn& b) {
    ConstructibleFn r = a;
    r.terms.insert(r.terms.end(), b.terms.begin(), b.terms.end());
    return r;
}

ConstructibleFn operator*(const ConstructibleFn& a, const ConstructibleFn& b) {
    ConstructibleFn r;
    for (const auto& s : a.terms)
        for (auto t : b.terms) {
            std::set<std::string> taken(s.fiber_vars.begin(), s.fiber_vars.end());
            for (auto& v : t.fiber_vars) {
                if (!taken.count(v)) {
                    taken.insert(v);
                    continue;
                }
                std::string fresh = v;
                while (taken.count(fresh) || std::count(t.fiber_vars.begin(), t.fiber_vars.end(), fresh)) fresh += "'";
                t.fiber = rename(t.fiber, v, fresh);
                for (auto& e : t.exponents) e = rename(e, v, fresh);
                for (auto& e : t.factors) e = rename(e, v, fresh);
                v = fresh;
                taken.insert(fresh);
            }
            ConstructibleTerm m;
            if (s.fiber && t.fiber) m.fiber = fml::conj(s.fiber, t.fiber);
            else m.fiber = s.fiber ? s.fiber : t.fiber;
            m.fiber_vars = s.fiber_vars;
            m.fiber_vars.insert(m.fiber_vars.end(), t.fiber_vars.begin(), t.fiber_vars.end());
            m.coefficient = s.coefficient * t.coefficient;
            m.exponents = s.exponents;
            m.exponents.insert(m.exponents.end(), t.exponents.begin(), t.exponents.end());
            m.factors = s.factors;
            m.factors.insert(m.factors.end(), t.factors.begin(), t.factors.end());
            r.terms.push_back(std::move(m));
        }
    return r;
}

CycloValue residue_character(std::uint32_t p, std::uint32_t r) { return CycloValue::zeta(p, 1, r % p); }

namespace {

CycloValue psi0(const CharacterConfig& chi, const FieldElement& x) {
    const FieldConfig& cfg = x.config();
    const std::uint32_t p = cfg.p;
    if (x.is_exact_zero()) return CycloValue(p, 1);
    const std::int64_t top = -chi.shift;  // the highest digit psi depends on
    if (x.absolute_precision() <= top)
        throw PrecisionError("psi needs the digit at position " + std::to_string(top));
    if (cfg.characteristic == Characteristic::Positive) return residue_character(p, *x.digit(top));
    // exp(2 pi i frac(pi^(shift-1) x)): digits at positions val..top contribute m / p^e.
    if (x.val() > top) return CycloValue(p, 1);
    const auto level = static_cast<std::uint32_t>(top - x.val() + 1);
    mpz_class m = 0, place = 1;
    if (level > 8) throw FieldError("psi value needs a root of unity of order p^" + std::to_string(level));
    for (std::int64_t k = x.val(); k <= top; ++k) {
        m += place * *x.digit(k);
        place *= p;
    }
    mpz_class n = place;
    m %= n;
    return CycloValue::zeta(p, level, m.get_si()).reduced();
}

}  // namespace

CycloValue psi(const CharacterConfig& chi, const FieldElement& x) {
    CycloValue v = psi0(chi, x);
    return chi.conjugate ? v.conj() : v;
}

mpq_class specialize_fn(const ConstructibleFn& phi, const Structure& K, const Assignment& x) {
    Evaluator ev(K);
    return specialize_fn(phi, ev, x);
}

mpq_class specialize_fn(const ConstructibleFn& phi, Evaluator& ev, const Assignment& x) {
    mpq_class total = 0;
    const mpq_class q(ev.structure().q());
    for (const auto& term : phi.terms) {
        mpq_class coeff = theta_q(term.coefficient, q);
        for_each_fiber_point(term, ev, x, [&](const Assignment& asg) { total += point_weight(term, ev, asg, coeff); });
    }
    total.canonicalize();
    return total;
}

CycloValue specialize_exp_fn(const ExpConstructibleFn& phi, const Structure& K, const CharacterConfig& chi,
                             const Assignment& x) {
    Evaluator ev(K);
    return specialize_exp_fn(phi, ev, chi, x);
}

CycloValue specialize_exp_fn(const ExpConstructibleFn& phi, Evaluator& ev, const CharacterConfig& chi,
                             const Assignment& x) {
    const std::uint32_t p = ev.structure().field().p;
    CycloValue total(p, 0);
    const mpq_class q(ev.structure().q());
    for (const auto& term : phi.terms) {
        mpq_class coeff = theta_q(term.base.coefficient, q);
        for_each_fiber_point(term.base, ev, x, [&](const Assignment& asg) {
            CycloValue v(p, point_weight(term.base, ev, asg, coeff));
            if (term.g) v *= psi(chi, std::get<FieldElement>(ev.eval_term(term.g, asg)));
            if (term.xi) {
                auto r = std::get<RFValue>(ev.eval_term(term.xi, asg));
                if (!r) throw SpecializationError("xi is Unknown at this point");
                v *= chi.conjugate ? residue_character(p, *r).conj() : residue_character(p, *r);
            }
            total += v;
        });
    }
    return total.reduced();
}

}  // namespace dptk
