#include <random>
#include <sstream>

#include "doctest.h"
#include "dptk/eval/ake_suite.hpp"
#include "dptk/eval/evaluator.hpp"
#include "dptk/lang/parser.hpp"

using namespace dptk;

namespace dptk {
std::ostream& operator<<(std::ostream& os, Truth t) { return os << to_string(t); }
}  // namespace dptk

namespace {

FieldElement el(const FieldConfig& cfg, std::vector<std::int64_t> coeffs) {
    return FieldElement::from_poly(cfg, ZPoly(std::move(coeffs)));
}

Truth decide(const FieldConfig& cfg, const std::string& text, std::uint32_t digits = 0) {
    return eval_formula(Structure(cfg), parse_formula(text), {}, {}, digits);
}

// Polynomial in x with coefficients a_i + b_i t.
struct CongruencePoly {
    std::vector<std::pair<std::int64_t, std::int64_t>> coeffs;

    std::string render() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            if (i) os << " + ";
            os << "(" << coeffs[i].first << " + " << coeffs[i].second << "*t)";
            if (i) os << "*x^" << i;
        }
        return os.str();
    }
};

CongruencePoly random_poly(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> deg(1, 3), c(-3, 3);
    CongruencePoly P;
    int d = deg(rng);
    for (int i = 0; i <= d; ++i) P.coeffs.emplace_back(c(rng), c(rng));
    return P;
}

// Residues mod pi^k as coefficient vectors (characteristic p) or as an integer mod p^k.
class Truncated {
public:
    Truncated(const FieldConfig& cfg, int k) : cfg_(cfg), k_(k) {
        mod_ = 1;
        for (int i = 0; i < k; ++i) mod_ *= cfg.p;
    }

    std::vector<std::int64_t> from_digits(std::int64_t x) const {
        // x enumerates residues 0..p^k-1 by base-p digits.
        std::vector<std::int64_t> d;
        for (int i = 0; i < k_; ++i) {
            d.push_back(x % cfg_.p);
            x /= cfg_.p;
        }
        return d;
    }

    // Value of P(x) as digit-free residue; returns true when it vanishes mod pi^k.
    bool vanishes(const CongruencePoly& P, std::int64_t x_index) const {
        const std::int64_t p = cfg_.p;
        if (cfg_.characteristic == Characteristic::Zero) {
            std::int64_t x = x_index % mod_;
            std::int64_t acc = 0, xp = 1;
            for (auto [a, b] : P.coeffs) {
                std::int64_t coeff = ((a + b * p) % mod_ + mod_) % mod_;
                acc = (acc + coeff * xp) % mod_;
                xp = xp * x % mod_;
            }
            return acc == 0;
        }
        auto x = from_digits(x_index);
        std::vector<std::int64_t> acc(k_, 0), xp(k_, 0);
        xp[0] = 1;
        for (auto [a, b] : P.coeffs) {
            std::vector<std::int64_t> coeff(k_, 0);
            coeff[0] = ((a % p) + p) % p;
            if (k_ > 1) coeff[1] = ((b % p) + p) % p;
            auto prod = mul(coeff, xp);
            for (int i = 0; i < k_; ++i) acc[i] = (acc[i] + prod[i]) % p;
            xp = mul(xp, x);
        }
        for (auto v : acc)
            if (v) return false;
        return true;
    }

    std::int64_t size() const { return mod_; }

private:
    std::vector<std::int64_t> mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) const {
        std::vector<std::int64_t> c(k_, 0);
        for (int i = 0; i < k_; ++i)
            for (int j = 0; i + j < k_; ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % cfg_.p;
        return c;
    }

    FieldConfig cfg_;
    int k_;
    std::int64_t mod_;
};

}  // namespace

TEST_CASE("term evaluation") {
    auto f5 = FieldConfig::laurent(5);
    Structure s(f5);
    Assignment asg;
    asg.set_vf("x", el(f5, {0, 1})).set_vf("y", el(f5, {1}));
    auto v = eval_term(s, parse_term("ord(x^2 + (1+t^3)*y)"), asg);
    CHECK(std::get<VGValue>(v) == VGValue::exact(0));

    Assignment w;
    w.set_vg("w", 3);
    CHECK(std::get<VGValue>(eval_term(s, parse_term("2*w+1", Sort::ValueGroup), w)) == VGValue::exact(7));

    Assignment zero;
    zero.set_vf("x", FieldElement::zero(f5));
    CHECK(std::get<RFValue>(eval_term(s, parse_term("ac(x)"), zero)) == RFValue(0u));
    CHECK(std::get<VGValue>(eval_term(s, parse_term("ord(x)"), zero)) == VGValue::infinity());

    // Residue arithmetic and reduction of literals.
    Assignment r;
    r.set_rf("r", 3);
    CHECK(std::get<RFValue>(eval_term(s, parse_term("r*r + 7", Sort::ResidueField), r)) == RFValue(1u));
    CHECK(std::get<RFValue>(eval_term(s, parse_term("ac(3*t^2 + t^3)"), {})) == RFValue(3u));

    // 1/N needs p not dividing N.
    CHECK_THROWS_AS(eval_term(s, parse_term("1/5"), {}), EvalError);
    CHECK(std::get<FieldElement>(eval_term(s, parse_term("1/2"), {})).ord() == Valuation::finite(0));

    CHECK_THROWS_AS(eval_term(s, parse_term("x + 1", Sort::ValuedField), {}), EvalError);
}

TEST_CASE("unknowns propagate") {
    auto q5 = FieldConfig::padic(5, 4);
    Structure s(q5);
    Assignment asg;
    asg.set_vf("x", FieldElement::exhausted(q5, 2));
    CHECK(std::get<VGValue>(eval_term(s, parse_term("ord(x)"), asg)).lo == ExtInt::finite(2));
    CHECK(std::get<VGValue>(eval_term(s, parse_term("ord(x)"), asg)).hi == ExtInt::pos_inf());
    CHECK_FALSE(std::get<RFValue>(eval_term(s, parse_term("ac(x)"), asg)).has_value());

    Evaluator ev(s);
    CHECK(ev.eval_formula(parse_formula("ord(x) >= 2"), asg) == Truth::True);
    CHECK(ev.eval_formula(parse_formula("ord(x) < 1"), asg) == Truth::False);
    CHECK(ev.eval_formula(parse_formula("ord(x) = 3"), asg) == Truth::Unknown);
    CHECK(ev.eval_formula(parse_formula("x = 0"), asg) == Truth::Unknown);
    CHECK(ev.eval_formula(parse_formula("x = 1"), asg) == Truth::False);
    CHECK(ev.eval_formula(parse_formula("x = 0 or ord(x) >= 0"), asg) == Truth::True);
    CHECK(ev.eval_formula(parse_formula("x = 0 and ord(x) < 0"), asg) == Truth::False);
    CHECK(ev.eval_formula(parse_formula("ac(x) = 0:RF"), asg) == Truth::Unknown);
    CHECK(ev.eval_formula(parse_formula("ac(x)*0:RF = 0"), asg) == Truth::True);
}

TEST_CASE("kleene laws") {
    const Truth all[] = {Truth::False, Truth::True, Truth::Unknown};
    for (Truth a : all)
        for (Truth b : all) {
            CHECK(t_and(a, b) == t_and(b, a));
            CHECK(t_or(a, b) == t_or(b, a));
            CHECK(t_not(t_and(a, b)) == t_or(t_not(a), t_not(b)));
            CHECK(t_or(a, t_and(a, b)) == a);
            for (Truth c : all) CHECK(t_and(a, t_or(b, c)) == t_or(t_and(a, b), t_and(a, c)));
        }
    CHECK(t_not(Truth::Unknown) == Truth::Unknown);
    CHECK(t_implies(Truth::False, Truth::Unknown) == Truth::True);
}

TEST_CASE("sentences") {
    for (auto cfg : {FieldConfig::laurent(5), FieldConfig::padic(5)}) {
        CAPTURE(cfg.describe());
        CHECK(decide(cfg, "exists x:VF[ord>=0] x^2 = 1+t") == Truth::True);
        CHECK(decide(cfg, "exists w:VG[0..10] ord(t^3) = 2*w+1") == Truth::True);
        CHECK(decide(cfg, "exists x:VF[ord>=0] x^2 = t") == Truth::False);
        CHECK(decide(cfg, "exists x:VF[ord>=0] x^2 = 2") == Truth::False);
        CHECK(decide(cfg, "exists x:VF[ord>=0] x^2 = -1") == Truth::True);
        CHECK(decide(cfg, "forall x:VF[ord>=0] (x = 0 or ord(x^2) != 1)") == Truth::True);
        CHECK(decide(cfg, "forall r:RF (r = 0 or exists x:VF[ord>=0] ac(x) = r)") == Truth::True);
        CHECK(decide(cfg, "exists x:VF[ord>=1] x^2 = 1+t") == Truth::False);
    }
}

TEST_CASE("unbounded quantifiers give unknown with a diagnostic") {
    Evaluator ev(Structure(FieldConfig::laurent(3)));
    CHECK(ev.eval_formula(parse_formula("exists x:VF x = 1"), {}) == Truth::Unknown);
    REQUIRE(ev.diagnostics().size() == 1);
    CHECK(ev.eval_formula(parse_formula("exists w:VG w = 1"), {}) == Truth::Unknown);
    CHECK(ev.diagnostics().size() == 2);

    Box box;
    box.vf_min_ord["x"] = 0;
    box.vg["w"] = {0, 3};
    CHECK(ev.eval_formula(parse_formula("exists x:VF x = 1"), {}, box) == Truth::True);
    CHECK(ev.eval_formula(parse_formula("exists w:VG w = 1"), {}, box) == Truth::True);
}

TEST_CASE("point enumeration") {
    auto f3 = FieldConfig::laurent(3);
    Box box;
    box.vf_min_ord["z"] = 0;
    auto r = enumerate_points(Structure(f3), parse_formula("ord(z) >= 1"), box, 2);
    CHECK(r.points.size() == 3);
    CHECK(r.total == 9);
    CHECK(r.unknown_points.empty());
    CHECK(count_mod(Structure(f3), parse_formula("ord(z) >= 1"), box, 2).true_count == 3);

    CHECK(count_mod(Structure(FieldConfig::laurent(5)), parse_formula("ac(z) = 1 and ord(z) = 0"), box, 1).true_count == 1);
    CHECK(count_mod(Structure(f3), parse_formula("0 = 1 and ord(z) >= 0"), box, 2).true_count == 0);
    CHECK(count_mod(Structure(FieldConfig::padic(5)), parse_formula("ord(z*(z-1)) >= 1"), box, 1).true_count == 2);

    // ord(z^2 - t) >= 2 mod t^3 by brute force over coefficient vectors.
    std::uint64_t oracle = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                int c0 = a * a % 3, c1 = (2 * a * b - 1 + 9) % 3;
                (void)c;
                if (c0 == 0 && c1 == 0) ++oracle;
            }
    CHECK(count_mod(Structure(f3), parse_formula("ord(z^2 - t) >= 2"), box, 3).true_count == oracle);

    Box mixed;
    mixed.vf_min_ord["z"] = 0;
    mixed.vg["w"] = {0, 2};
    auto m = count_mod(Structure(f3), parse_formula("ord(z) = w and ac(z) = r"), mixed, 2);
    CHECK(m.total == 9 * 3 * 3);
    // ord(z) = 0: 6 classes, ord(z) = 1: 2 classes; each fixes one (w, r).
    CHECK(m.true_count == 8);
    // z = 0 mod t^2 leaves ord(z) in [2, inf]: undecided at w = 2 only.
    CHECK(m.unknown_count == 3);
}

TEST_CASE("congruence sentences agree with exhaustive search") {
    std::mt19937_64 rng(4242);
    int checked = 0;
    for (auto cfg : {FieldConfig::padic(3), FieldConfig::laurent(3), FieldConfig::padic(5), FieldConfig::laurent(5)}) {
        for (int trial = 0; trial < 40; ++trial) {
            auto P = random_poly(rng);
            auto Q = random_poly(rng);
            int kp = 1 + static_cast<int>(rng() % 3), kq = 1 + static_cast<int>(rng() % 2);
            bool exists = rng() % 2;
            bool conj = rng() % 2;
            bool negate_q = rng() % 2;
            std::string atom_p = "ord(" + P.render() + ") >= " + std::to_string(kp);
            std::string atom_q = "ord(" + Q.render() + ") >= " + std::to_string(kq);
            if (negate_q) atom_q = "not " + atom_q;
            std::string body = atom_p + (conj ? " and " : " or ") + atom_q;
            std::string text = std::string(exists ? "exists" : "forall") + " x:VF[ord>=0] (" + body + ")";

            int K = std::max(kp, kq);
            Truncated tp(cfg, kp), tq(cfg, kq), tk(cfg, K);
            bool any = false, all = true;
            for (std::int64_t x = 0; x < tk.size(); ++x) {
                bool a = tp.vanishes(P, x % tp.size());
                bool b = tq.vanishes(Q, x % tq.size()) != negate_q;
                bool v = conj ? (a && b) : (a || b);
                any = any || v;
                all = all && v;
            }
            Truth expected = (exists ? any : all) ? Truth::True : Truth::False;
            CAPTURE(cfg.describe());
            CAPTURE(text);
            CHECK(decide(cfg, text, static_cast<std::uint32_t>(K)) == expected);
            ++checked;
        }
    }
    CHECK(checked == 160);
}

TEST_CASE("decided values are stable under more digits") {
    std::mt19937_64 rng(99);
    int decided = 0;
    for (int trial = 0; trial < 120; ++trial) {
        auto cfg = trial % 2 ? FieldConfig::laurent(3, 6) : FieldConfig::padic(3, 6);
        auto P = random_poly(rng);
        auto Q = random_poly(rng);
        std::string body;
        switch (rng() % 3) {
            case 0: body = P.render() + " = 0"; break;
            case 1: body = P.render() + " = 0 or ord(" + Q.render() + ") >= 2"; break;
            default: body = "ord(" + P.render() + ") = 1 and not " + Q.render() + " = t"; break;
        }
        std::string text = std::string(rng() % 2 ? "exists" : "forall") + " x:VF[ord>=0] (" + body + ")";
        CAPTURE(text);
        std::optional<Truth> first;
        for (std::uint32_t M = 1; M <= 4; ++M) {
            Truth v = decide(cfg, text, M);
            if (first) CHECK(v == *first);
            else if (v != Truth::Unknown) first = v;
        }
        if (first) ++decided;
    }
    CHECK(decided > 60);
}

TEST_CASE("hensel certification") {
    for (auto cfg : {FieldConfig::laurent(7), FieldConfig::padic(7)}) {
        CAPTURE(cfg.describe());
        // No exact witness exists among finite digit strings, so only the certificate decides.
        CHECK(decide(cfg, "exists x:VF[ord>=0] x^2 = 2 + t") == Truth::True);
        CHECK(decide(cfg, "exists x:VF[ord>=0] (x^2 = 2 + t and ac(x) = 3)") == Truth::True);
        CHECK(decide(cfg, "exists x:VF[ord>=0] (x^2 = 2 + t and ord(x - 4) >= 1)") == Truth::True);
        CHECK(decide(cfg, "exists x:VF[ord>=0] x^2 - x - t = 0") == Truth::True);
        CHECK(decide(cfg, "forall x:VF[ord>=0] x^2 != 2 + t") == Truth::False);
        // Without certification the witness is never isolated.
        Evaluator plain(Structure(cfg), EvalOptions{4, false});
        CHECK(plain.eval_formula(parse_formula("exists x:VF[ord>=0] x^2 = 2 + t"), {}) == Truth::Unknown);
    }
}

TEST_CASE("ake sentences agree across characteristics") {
    for (std::uint32_t p : {3u, 5u, 7u}) {
        for (const auto& s : ake_suite()) {
            CAPTURE(p);
            CAPTURE(s.text);
            auto f = parse_formula(s.text);
            Evaluator zero(Structure(FieldConfig::padic(p)), EvalOptions{6, true});
            Evaluator positive(Structure(FieldConfig::laurent(p)), EvalOptions{6, true});
            Truth a = zero.eval_formula(f, {});
            CHECK(a != Truth::Unknown);
            CHECK(a == positive.eval_formula(f, {}));
        }
    }
}
