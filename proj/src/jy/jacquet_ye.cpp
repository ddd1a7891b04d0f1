#include "dptk/jy/jacquet_ye.hpp"

#include <algorithm>

#include "dptk/measure/volume.hpp"

namespace dptk {

namespace {

void require_n2(const DiagParam& a) {
    if (a.n() != 2) throw JYError("only n = 2 is implemented, got n = " + std::to_string(a.n()));
}

TermPtr vf(const std::string& name) { return term::var(name, Sort::ValuedField); }

// ord(a1 * q + a2) >= 0 scaled by t^s so both constants lie in Z[t].
FormulaPtr integrality(const DiagParam& a, const TermPtr& q) {
    const auto& e1 = a.entries[0];
    const auto& e2 = a.entries[1];
    const std::int64_t s = std::max<std::int64_t>(0, -e2.k);
    auto c1 = term::vf_const(e1.unit * ZPoly::t_power(static_cast<int>(e1.k + s)));
    auto c2 = term::vf_const(e2.unit * ZPoly::t_power(static_cast<int>(e2.k + s)));
    return fml::le(term::vg_const(s), term::ord(term::add(term::mul(c1, q), c2)));
}

Box box_of(const SupportBox& sb, const std::string& u, const std::string& v) {
    Box b;
    b.vf_min_ord[u] = sb.min_ord.at(0);
    b.vf_min_ord[v] = sb.min_ord.at(1);
    return b;
}

JYIntegral run(const Structure& K, const ExpConstructibleFn& phi, const Box& box, const JYConfig& cfg) {
    auto r = integrate_constructible(K, phi, cfg.chi, box, cfg.max_digits);
    return {r.value, r.stabilized_at, r.unknown_mass};
}

}  // namespace

std::string DiagParam::to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) s += ", ";
        s += "(" + entries[i].unit.to_string() + ")*t^" + std::to_string(entries[i].k);
    }
    return s + ")";
}

int eta(const FieldElement& x) {
    Valuation v = x.ord();
    if (v.kind != Valuation::Kind::Finite) throw JYError("eta needs a determined finite valuation");
    return v.value % 2 == 0 ? 1 : -1;
}

int gamma_factor(const DiagParam& a) {
    int g = 1;
    std::int64_t k = 0;
    for (std::size_t i = 0; i + 1 < a.n(); ++i) {
        k += a.entries[i].k;
        if (k % 2 != 0) g = -g;
    }
    return g;
}

SupportBox support_bounds(const DiagParam& a) {
    require_n2(a);
    SupportBox sb;
    const std::int64_t k1 = a.entries[0].k;
    if (k1 < 0) {
        sb.empty = true;
        return sb;
    }
    // a1 x, a1 y in O
    sb.min_ord = {-k1, -k1};
    return sb;
}

std::int64_t nonsquare_unit(std::uint32_t p) {
    if (p == 2) throw JYError("p must be odd");
    return find_irreducible_kummer_unit(p, 2);
}

ExpConstructibleFn I_integrand(const DiagParam& a) {
    require_n2(a);
    ExpConstructibleTerm t;
    t.base.fiber = integrality(a, term::mul(vf("x"), vf("y")));
    t.g = term::add(vf("x"), vf("y"));
    return ExpConstructibleFn{{t}};
}

ExpConstructibleFn J_integrand(const DiagParam& a, std::int64_t A) {
    require_n2(a);
    // z = z0 + z1 sqrt(A): Norm z = z0^2 - A z1^2, Tr z = 2 z0
    auto norm = term::sub(term::pow(vf("z0"), 2), term::mul(term::vf_const(ZPoly(A)), term::pow(vf("z1"), 2)));
    ExpConstructibleTerm t;
    t.base.fiber = integrality(a, norm);
    t.g = term::mul(term::vf_const(ZPoly(2)), vf("z0"));
    return ExpConstructibleFn{{t}};
}

JYIntegral I_integral(const Structure& K, const DiagParam& a, const JYConfig& cfg) {
    SupportBox sb = support_bounds(a);
    if (sb.empty) return {CycloValue(K.q(), 0), 0, 0};
    return run(K, I_integrand(a), box_of(sb, "x", "y"), cfg);
}

JYIntegral J_integral(const Structure& K, const DiagParam& a, const JYConfig& cfg) {
    SupportBox sb = support_bounds(a);
    if (sb.empty) return {CycloValue(K.q(), 0), 0, 0};
    const std::int64_t A = nonsquare_unit(K.q());
    make_extension(K.field(), 2, A, false);
    return run(K, J_integrand(a, A), box_of(sb, "z0", "z1"), cfg);
}

JYResult check_identity(const DiagParam& a, const Structure& K, const JYConfig& cfg) {
    JYResult r{K.describe(), a.to_string(), CycloValue(K.q(), 0), CycloValue(K.q(), 0)};
    auto I = I_integral(K, a, cfg);
    auto J = J_integral(K, a, cfg);
    r.I = I.value;
    r.J = J.value;
    r.gamma = gamma_factor(a);
    r.I_depth = I.stabilized_at;
    r.J_depth = J.stabilized_at;
    r.stabilized = I.stabilized_at && J.stabilized_at;
    r.holds = r.stabilized && r.I == r.J.scaled(r.gamma);
    r.max_digits = cfg.max_digits;
    return r;
}

}  // namespace dptk
