#include "dptk/measure/volume.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dptk {

namespace {

mpq_class q_power(std::uint32_t q, std::int64_t e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), q, static_cast<unsigned long>(e >= 0 ? e : -e));
    return e >= 0 ? mpq_class(r) : mpq_class(1, r);
}

// r != c conjuncts per parameter, or nullopt when the condition has another shape.
std::optional<std::map<std::string, std::set<std::int64_t>>> excluded_values(const FormulaPtr& f) {
    std::map<std::string, std::set<std::int64_t>> out;
    if (!f) return out;
    std::vector<const Formula*> stack{f.get()};
    while (!stack.empty()) {
        const Formula* g = stack.back();
        stack.pop_back();
        if (g->kind == FormulaKind::And) {
            stack.push_back(g->a.get());
            stack.push_back(g->b.get());
            continue;
        }
        if (g->kind != FormulaKind::Not || g->a->kind != FormulaKind::Eq) return std::nullopt;
        const auto& l = g->a->lhs;
        const auto& r = g->a->rhs;
        if (l->kind == TermKind::Var && r->kind == TermKind::RFConst && r->value != 0) out[l->name].insert(r->value);
        else if (r->kind == TermKind::Var && l->kind == TermKind::RFConst && l->value != 0) out[r->name].insert(l->value);
        else return std::nullopt;
    }
    return out;
}

using Visit = std::function<bool(const Assignment&, const mpq_class& mass)>;

struct Refiner {
    const FieldConfig& cfg;
    std::vector<std::string> vars;
    std::vector<std::int64_t> v0;
    std::uint32_t max_digits;
    Assignment base;
    const Visit& visit;
    mpq_class unknown = 0;
    std::uint64_t balls = 0;
    std::vector<std::vector<std::uint32_t>> digits;

    void run() {
        digits.assign(vars.size(), {});
        std::int64_t e = 0;
        for (auto v : v0) e += v;
        step(q_power(cfg.p, -e));
    }

    void step(const mpq_class& mass) {
        ++balls;
        Assignment asg = base;
        for (std::size_t i = 0; i < vars.size(); ++i)
            asg.set_vf(vars[i], ball_representative(cfg, v0[i], digits[i]));
        if (visit(asg, mass)) return;
        std::size_t pick = 0;
        for (std::size_t i = 1; i < vars.size(); ++i)
            if (digits[i].size() < digits[pick].size()) pick = i;
        if (vars.empty() || digits[pick].size() >= max_digits) {
            unknown += mass;
            return;
        }
        const mpq_class child = mass / cfg.p;
        for (std::uint32_t d = 0; d < cfg.p; ++d) {
            digits[pick].push_back(d);
            step(child);
            digits[pick].pop_back();
        }
    }
};

void split_box(const Box& box, std::vector<std::string>& vars, std::vector<std::int64_t>& v0) {
    for (const auto& [name, m] : box.vf_min_ord) {
        vars.push_back(name);
        v0.push_back(m);
    }
}

// Runs depth 1, 2, ... until a run leaves no Unknown mass; returns the last run.
template <typename Run>
auto sweep(std::uint32_t max_digits, Run run) {
    for (std::uint32_t M = 0;; ++M) {
        auto r = run(M);
        if (r.unknown_mass == 0) {
            r.stabilized_at = M;
            return r;
        }
        if (M >= max_digits) return r;
    }
}

}  // namespace

MotivicVolume cell_volume(const Cell& cell) {
    MotivicVolume out;
    if (cell.is_point()) {
        out.exact = AElem(0);
        return out;
    }
    std::int64_t B = static_cast<std::int64_t>(cell.components.size());
    std::map<std::string, std::int64_t> step;
    for (const auto& c : cell.components) {
        AffineForm f = affine_form(c.order);
        B = checked::add(B, f.constant);
        for (const auto& [k, a] : f.coeffs) step[k] += a;
    }
    AElem coeff = AElem::L_pow(-B);
    for (const auto& v : cell.vg_params) {
        const std::int64_t a = step.count(v.name) ? step.at(v.name) : 0;
        if (!v.hi && a <= 0) throw CellError("value-group parameter " + v.name + " has a non-summable range");
        coeff *= geom_sum(a, 0, v.lo, v.hi);
    }

    std::set<std::string> angular_params;
    bool plain_angulars = true;
    for (const auto& c : cell.components) {
        if (c.angular->kind == TermKind::Var) angular_params.insert(c.angular->name);
        else if (c.angular->kind != TermKind::RFConst || c.angular->value == 0) plain_angulars = false;
    }
    auto excluded = excluded_values(cell.rf_condition);
    if (plain_angulars && excluded) {
        AElem cls = 1;
        for (const auto& r : cell.rf_params) {
            const auto n = static_cast<std::int64_t>(excluded->count(r) ? excluded->at(r).size() : 0);
            cls *= AElem::L() - AElem(angular_params.count(r) ? 1 + n : n);
        }
        out.exact = cls * coeff;
        out.fn = ConstructibleFn::constant(*out.exact);
        return out;
    }
    ConstructibleTerm t;
    t.fiber = cell.rf_condition;
    for (const auto& c : cell.components) {
        auto nz = fml::ne(c.angular, term::rf_const(0));
        t.fiber = t.fiber ? fml::conj(t.fiber, nz) : nz;
    }
    t.fiber_vars = cell.rf_params;
    t.coefficient = coeff;
    out.fn.terms.push_back(std::move(t));
    return out;
}

MotivicVolume motivic_volume(const CellComplex& cx) {
    MotivicVolume out;
    out.exact = AElem(0);
    for (const auto& c : cx.cells) {
        if (c.is_point()) continue;
        MotivicVolume v = cell_volume(c);
        out.fn = out.fn + v.fn;
        if (out.exact && v.exact) *out.exact += *v.exact;
        else out.exact.reset();
    }
    return out;
}

PadicVolume padic_volume(const Structure& K, const FormulaPtr& f, const Box& box, std::uint32_t max_digits) {
    Evaluator ev(K);
    std::vector<std::string> vars;
    std::vector<std::int64_t> v0;
    split_box(box, vars, v0);
    return sweep(max_digits, [&](std::uint32_t M) {
        PadicVolume r;
        r.digits = M;
        Visit visit = [&](const Assignment& asg, const mpq_class& mass) {
            Truth t = ev.eval_formula(f, asg, box);
            if (t == Truth::True) r.value += mass;
            return t != Truth::Unknown;
        };
        Refiner ref{K.field(), vars, v0, M, {}, visit};
        ref.run();
        r.unknown_mass = ref.unknown;
        r.balls = ref.balls;
        return r;
    });
}

PadicVolume padic_volume_uniform(const Structure& K, const FormulaPtr& f, const Box& box, std::uint32_t M) {
    PointCount c = count_mod(K, f, box, M);
    std::int64_t e = 0;
    for (const auto& [name, m] : box.vf_min_ord) e += m + M;
    PadicVolume r;
    r.digits = M;
    r.value = mpq_class(c.true_count) * q_power(K.q(), -e);
    r.unknown_mass = mpq_class(c.unknown_count) * q_power(K.q(), -e);
    if (c.unknown_count == 0) r.stabilized_at = M;
    r.balls = c.total;
    return r;
}

Integral integrate_constructible(const Structure& K, const ConstructibleFn& phi, const Box& box,
                                 std::uint32_t max_digits) {
    std::vector<std::string> vars;
    std::vector<std::int64_t> v0;
    split_box(box, vars, v0);
    Evaluator ev(K);
    return sweep(max_digits, [&](std::uint32_t M) {
        Integral r;
        Visit visit = [&](const Assignment& asg, const mpq_class& mass) {
            try {
                r.value += specialize_fn(phi, ev, asg) * mass;
                return true;
            } catch (const SpecializationError&) {
            } catch (const FieldError&) {
            } catch (const EvalError&) {
            }
            return false;
        };
        Refiner ref{K.field(), vars, v0, M, {}, visit};
        ref.run();
        r.unknown_mass = ref.unknown;
        return r;
    });
}

ExpIntegral integrate_constructible(const Structure& K, const ExpConstructibleFn& phi, const CharacterConfig& chi,
                                    const Box& box, std::uint32_t max_digits) {
    std::vector<std::string> vars;
    std::vector<std::int64_t> v0;
    split_box(box, vars, v0);
    const std::uint32_t p = K.field().p;
    Evaluator ev(K);
    return sweep(max_digits, [&](std::uint32_t M) {
        ExpIntegral r{CycloValue(p, 0), 0, std::nullopt};
        Visit visit = [&](const Assignment& asg, const mpq_class& mass) {
            try {
                r.value += specialize_exp_fn(phi, ev, chi, asg).scaled(mass);
                return true;
            } catch (const SpecializationError&) {
            } catch (const FieldError&) {
            } catch (const EvalError&) {
            }
            return false;
        };
        Refiner ref{K.field(), vars, v0, M, {}, visit};
        ref.run();
        r.value = r.value.reduced();
        r.unknown_mass = ref.unknown;
        return r;
    });
}

bool VolumeReport::all_equal() const {
    return std::all_of(entries.begin(), entries.end(), [](const VolumeEntry& e) { return e.skipped || e.equal == true; });
}

VolumeReport check_specialization(const CellComplex& cx, const std::vector<Structure>& fields,
                                  std::uint32_t max_digits) {
    VolumeReport rep;
    rep.complex = cx.name;
    rep.motivic = motivic_volume(cx);
    if (rep.motivic.exact) rep.positive = is_in_A_plus(*rep.motivic.exact);
    const std::int64_t cap = *std::max_element(cx.box_min_ord.begin(), cx.box_min_ord.end()) + max_digits + 2;
    FormulaPtr f = cx.ambient ? cx.ambient : union_formula(cx, cap, true);
    for (const auto& K : fields) {
        VolumeEntry e;
        e.field = K.describe();
        if (!cx.valid_for(K.field().p)) {
            e.skipped = true;
            rep.entries.push_back(e);
            continue;
        }
        e.specialized = rep.motivic.exact ? theta_q(*rep.motivic.exact, mpq_class(K.q()))
                                          : specialize_fn(rep.motivic.fn, K, Assignment{});
        e.padic = padic_volume(K, f, cx.box(), max_digits);
        if (e.padic.stabilized()) e.equal = e.padic.value == e.specialized;
        rep.entries.push_back(e);
    }
    return rep;
}

ChangeOfVariablesReport affine_change_of_variables_check(const ZPoly& u, const ZPoly& v, const FormulaPtr& f,
                                                         const std::string& var, std::int64_t v0,
                                                         const Structure& K, std::uint32_t max_digits) {
    if (u.is_zero() || u.low_coeff() % static_cast<std::int64_t>(K.q()) == 0)
        throw CellError("ac(u) vanishes mod " + std::to_string(K.q()));
    AffineImage img = affine_image(f, var, v0, u, v);
    ChangeOfVariablesReport rep;
    Box src, dst;
    src.vf_min_ord[var] = v0;
    dst.vf_min_ord[var] = img.box_min_ord;
    rep.source = padic_volume(K, f, src, max_digits);
    rep.image = padic_volume(K, img.formula, dst, max_digits + static_cast<std::uint32_t>(v0 - img.box_min_ord) +
                                                     static_cast<std::uint32_t>(u.low_order()));
    rep.jacobian_factor = q_power(K.q(), -u.low_order());
    if (rep.source.stabilized() && rep.image.stabilized())
        rep.holds = rep.image.value == rep.jacobian_factor * rep.source.value;
    return rep;
}

namespace {

Integral iterated(const Structure& K, Evaluator& ev, const FormulaPtr& f, const std::string& outer,
                  const std::string& inner, const Box& box, std::uint32_t max_digits) {
    const auto& cfg = K.field();
    const std::vector<std::int64_t> v0_out{box.vf_min_ord.at(outer)}, v0_in{box.vf_min_ord.at(inner)};
    return sweep(max_digits, [&](std::uint32_t M) {
        Integral r;
        Visit outer_visit = [&](const Assignment& x, const mpq_class& mass) {
            mpq_class section = 0;
            Visit inner_visit = [&](const Assignment& asg, const mpq_class& m) {
                Truth t = ev.eval_formula(f, asg, box);
                if (t == Truth::True) section += m;
                return t != Truth::Unknown;
            };
            Refiner in{cfg, {inner}, v0_in, M, x, inner_visit};
            in.run();
            if (in.unknown != 0) return false;
            r.value += section * mass;
            return true;
        };
        Refiner out{cfg, {outer}, v0_out, M, {}, outer_visit};
        out.run();
        r.unknown_mass = out.unknown;
        return r;
    });
}

}  // namespace

FubiniReport fubini_check(const Structure& K, const FormulaPtr& f, const std::vector<std::string>& vars,
                          const Box& box, std::uint32_t max_digits) {
    if (vars.size() != 2) throw CellError("fubini_check needs two variables");
    Evaluator ev(K);
    FubiniReport rep;
    rep.first_outer = iterated(K, ev, f, vars[0], vars[1], box, max_digits);
    rep.second_outer = iterated(K, ev, f, vars[1], vars[0], box, max_digits);
    rep.joint = padic_volume(K, f, box, max_digits);
    if (rep.first_outer.stabilized_at && rep.second_outer.stabilized_at)
        rep.holds = rep.first_outer.value == rep.second_outer.value;
    return rep;
}

}  // namespace dptk
