#include <random>

#include "doctest.h"
#include "dptk/algebra/constructible.hpp"
#include "dptk/lang/parser.hpp"

using namespace dptk;

namespace {

AElem random_aelem(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coeff(-4, 4), nterms(1, 4), expo(-3, 4), ndens(0, 2), di(1, 3);
    std::map<std::int64_t, mpz_class> num;
    for (int i = nterms(rng); i > 0; --i) num[expo(rng)] += coeff(rng);
    std::map<unsigned, unsigned> den;
    for (int i = ndens(rng); i > 0; --i) den[static_cast<unsigned>(di(rng))] += 1;
    return AElem::from_parts(num, den);
}

std::vector<mpq_class> sample_points() {
    std::vector<mpq_class> qs;
    for (int k = 1; k <= 50; ++k) qs.emplace_back(mpq_class(k + 1, k));
    for (int k = 2; k <= 10; ++k) qs.emplace_back(k);
    for (int k = 1; k <= 2000; ++k) qs.emplace_back(mpq_class(200 + k, 200));
    qs.emplace_back(100);
    qs.emplace_back(10000);
    for (auto& q : qs) q.canonicalize();
    return qs;
}

TermPtr vg(const std::string& text) { return parse_term(text, Sort::ValueGroup); }

}  // namespace

TEST_CASE("A arithmetic and normal form") {
    const AElem L = AElem::L();
    CHECK((L - 1) + 1 == L);
    CHECK(((L - 1) + 1).numerator() == AElem::L().numerator());

    // L^-1 / (1 - L^-1) = L^-1 * L / (L - 1)
    AElem x = AElem::L_pow(-1) * AElem::from_parts({{1, 1}}, {{1, 1}});
    CHECK(x.numerator() == std::map<std::int64_t, mpz_class>{{0, 1}});
    CHECK(x.denominator() == std::map<unsigned, unsigned>{{1, 1}});
    CHECK(x.to_string() == "1 / (L - 1)");

    AElem y = AElem::from_parts({{2, 1}, {0, -1}}, {{1, 1}});
    CHECK(y.denominator().empty());
    CHECK(y == L + 1);
    CHECK(y.to_string() == "L + 1");

    // Different normal forms of the same element compare equal.
    AElem z = AElem::from_parts({{1, 1}, {0, 1}}, {{2, 1}});
    CHECK(z == AElem::inv_L_power_minus_one(1));
    CHECK(z - AElem::inv_L_power_minus_one(1) == AElem(0));
    CHECK((L - 1) * AElem::inv_L_power_minus_one(1) == AElem(1));
    CHECK(AElem(0).to_string() == "0");
    CHECK_THROWS_AS(AElem::inv_L_power_minus_one(0), AlgebraError);
}

TEST_CASE("theta_q") {
    const AElem L = AElem::L();
    CHECK(theta_q(L * L - 1, 3) == 8);
    CHECK(theta_q(AElem::inv_L_power_minus_one(1), 5) == mpq_class(1, 4));
    CHECK(theta_q(AElem::L_pow(-2), 3) == mpq_class(1, 9));
    CHECK_THROWS_AS(theta_q(L, 1), AlgebraError);
    CHECK_THROWS_AS(theta_q(L, mpq_class(1, 2)), AlgebraError);

    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        AElem a = random_aelem(rng), b = random_aelem(rng);
        mpq_class q(static_cast<long>(2 + rng() % 12), static_cast<long>(1 + rng() % 3));
        q.canonicalize();
        if (q <= 1) q += 1;
        CHECK(theta_q(a * b, q) == theta_q(a, q) * theta_q(b, q));
        CHECK(theta_q(a + b, q) == theta_q(a, q) + theta_q(b, q));
        CHECK(theta_q(-a, q) == -theta_q(a, q));
    }
}

TEST_CASE("equality agrees with evaluation at enough points") {
    std::mt19937_64 rng(11);
    int equal_pairs = 0;
    for (int i = 0; i < 200; ++i) {
        AElem a = random_aelem(rng);
        AElem b = i % 2 ? random_aelem(rng) : a * AElem::L_pow(1) * AElem::inv_L_power_minus_one(2) * (AElem::L_pow(1) + 1) *
                                                  (AElem::L() - 1) * AElem::L_pow(-1);
        // b = a * L/(L^2-1) * (L+1)(L-1)/L = a in the even case.
        std::int64_t span = std::max(a.degree_span(), b.degree_span()) + std::max(a.degree_span(), b.degree_span());
        bool by_eval = true;
        for (std::int64_t k = 0; k <= span + 2; ++k)
            if (theta_q(a, 2 + k) != theta_q(b, 2 + k)) by_eval = false;
        CHECK((a == b) == by_eval);
        if (a == b) ++equal_pairs;
    }
    CHECK(equal_pairs >= 100);
}

TEST_CASE("positivity cone") {
    const AElem L = AElem::L();
    CHECK(is_in_A_plus(L - 1));
    CHECK_FALSE(is_in_A_plus(1 - L));
    CHECK_FALSE(is_in_A_plus(L - 3));
    CHECK_FALSE(is_in_A_plus(L * L - 3 * L + 2));
    CHECK(is_in_A_plus((L - 2) * (L - 2)));
    CHECK(is_in_A_plus(AElem::inv_L_power_minus_one(3)));
    CHECK(is_in_A_plus(AElem(0)));
    CHECK_FALSE(is_in_A_plus((L - 2) * (L - 2) * (L - 3)));
    CHECK(is_in_A_plus((L - 2) * (L - 2) * (L - 1)));

    auto qs = sample_points();
    std::mt19937_64 rng(5);
    int positives = 0;
    for (int i = 0; i < 200; ++i) {
        AElem a = random_aelem(rng);
        bool sampled = true;
        for (const auto& q : qs)
            if (theta_q(a, q) < 0) sampled = false;
        CAPTURE(a.to_string());
        CHECK(is_in_A_plus(a) == sampled);
        positives += sampled;
    }
    CHECK(positives > 20);
}

TEST_CASE("geometric sums") {
    CHECK(geom_sum(1, 0, 1, std::nullopt) == AElem::inv_L_power_minus_one(1));
    CHECK(geom_sum(1, 0, 0, 2) == (AElem::L() * AElem::L() + AElem::L() + 1) * AElem::L_pow(-2));
    CHECK(geom_sum(1, 0, 3, 2) == AElem(0));
    CHECK_THROWS_AS(geom_sum(0, 0, 0, std::nullopt), AlgebraError);
    CHECK_THROWS_AS(geom_sum(-1, 0, 0, std::nullopt), AlgebraError);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 30; ++i) {
        std::int64_t a = 1 + static_cast<std::int64_t>(rng() % 3), b = static_cast<std::int64_t>(rng() % 7) - 3,
                     l0 = static_cast<std::int64_t>(rng() % 5) - 2;
        mpq_class q(static_cast<long>(2 + rng() % 6));
        mpq_class full = theta_q(geom_sum(a, b, l0, std::nullopt), q);
        mpq_class prev_gap = -1;
        for (std::int64_t n = l0; n < l0 + 12; ++n) {
            mpq_class partial = theta_q(geom_sum(a, b, l0, n), q);
            mpq_class gap = full - partial;
            // The remainder is itself the tail sum and shrinks geometrically.
            CHECK(gap == theta_q(geom_sum(a, b, n + 1, std::nullopt), q));
            CHECK(gap > 0);
            if (prev_gap >= 0) CHECK(gap * 2 <= prev_gap);
            prev_gap = gap;
        }
    }
}

TEST_CASE("cyclotomic values") {
    for (std::uint32_t p : {3u, 5u, 7u}) {
        CycloValue sum(p, 0);
        for (std::uint32_t i = 0; i < p; ++i) sum += CycloValue::zeta(p, 1, i);
        CHECK(sum.is_zero());
        CHECK(CycloValue::zeta(p, 1, p) == CycloValue(p, 1));
        CHECK(CycloValue::zeta(p, 2, p) == CycloValue::zeta(p, 1, 1));
        CHECK(CycloValue::zeta(p, 2, 2 * p).reduced().level() == 1);
        CHECK(CycloValue::zeta(p, 1, 1).conj() == CycloValue::zeta(p, 1, p - 1));
        CHECK(CycloValue::zeta(p, 2, 1) * CycloValue::zeta(p, 2, p * p - 1) == CycloValue(p, 1));
        CycloValue sum2(p, 0);
        for (std::uint32_t i = 0; i < p * p; ++i) sum2 += CycloValue::zeta(p, 2, i);
        CHECK(sum2.is_zero());
    }

    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        const std::uint32_t p = i % 2 ? 5 : 3;
        const std::uint32_t level = 1 + static_cast<std::uint32_t>(rng() % 2);
        CycloValue x(p, 0);
        for (int k = 0; k < 4; ++k)
            x += CycloValue::zeta(p, level, static_cast<std::int64_t>(rng() % 30)).scaled(static_cast<long>(rng() % 7) - 3);
        CycloValue n = x.conj() * x;
        // |x|^2 is real: invariant under conjugation.
        CHECK(n.conj() == n);
        CHECK(std::abs(n.numeric() - std::norm(x.numeric())) < 1e-9);
        CycloValue y = CycloValue::zeta(p, 2, static_cast<std::int64_t>(rng() % 25)) + CycloValue(p, 2);
        CHECK(std::abs((x * y).numeric() - x.numeric() * y.numeric()) < 1e-9);
        CHECK(((x + y) - y) == x);
    }
    CHECK(CycloValue(5, mpq_class(3, 2)).to_string() == "3/2");
    CHECK((CycloValue(5, 1) - CycloValue::zeta(5, 1, 2)).to_string() == "1 - zeta5^2");
}

TEST_CASE("additive character") {
    for (auto cfg : {FieldConfig::padic(5, 6), FieldConfig::laurent(5, 6), FieldConfig::padic(3, 6)}) {
        CAPTURE(cfg.describe());
        const std::uint32_t p = cfg.p;
        CharacterConfig chi{1};
        // Trivial on pi^0 O, nontrivial on pi^-1 O.
        CHECK(psi(chi, FieldElement::from_int(cfg, 7)) == CycloValue(p, 1));
        auto inv_pi = FieldElement::uniformizer(cfg).inverse();
        CHECK(psi(chi, inv_pi) == CycloValue::zeta(p, 1, 1));
        CHECK(psi(CharacterConfig{0}, FieldElement::from_int(cfg, 2)) == CycloValue::zeta(p, 1, 2));

        std::mt19937_64 rng(p + static_cast<int>(cfg.characteristic));
        for (int i = 0; i < 40; ++i) {
            auto rand_el = [&] {
                std::vector<std::uint32_t> d(4);
                for (auto& x : d) x = static_cast<std::uint32_t>(rng() % p);
                return FieldElement::from_digits(cfg, -2, d, true);
            };
            auto x = rand_el(), y = rand_el();
            CHECK(psi(chi, x + y) == psi(chi, x) * psi(chi, y));
            CHECK(psi(chi, -x) == psi(chi, x).conj());
        }
        CHECK_THROWS_AS(psi(chi, FieldElement::exhausted(cfg, -3)), PrecisionError);
    }
    // Characteristic zero needs p^2-th roots of unity below the conductor.
    auto q3 = FieldConfig::padic(3, 6);
    CHECK(psi(CharacterConfig{1}, FieldElement::from_digits(q3, -2, {1}, true)) == CycloValue::zeta(3, 2, 1));
}

TEST_CASE("specialization of constructible functions") {
    auto q5 = FieldConfig::padic(5);
    ConstructibleFn squares;
    squares.terms.push_back({parse_formula("xi^2 = ac(u)"), {"xi"}, 1, {}, {}});
    Assignment at4;
    at4.set_vf("u", FieldElement::from_int(q5, 4));
    CHECK(specialize_fn(squares, Structure(q5), at4) == 2);

    auto f3 = FieldConfig::laurent(3);
    ConstructibleFn lord;
    lord.terms.push_back({nullptr, {}, 1, {parse_term("ord(u)")}, {}});
    Assignment t2;
    t2.set_vf("u", FieldElement::from_poly(f3, ZPoly::t_power(2)));
    CHECK(specialize_fn(lord, Structure(f3), t2) == 9);

    CHECK(specialize_fn(ConstructibleFn::constant(AElem::L() - 1), Structure(FieldConfig::padic(7)), {}) == 6);

    // Class of x != 0 in the residue line has q - 1 points.
    ConstructibleFn nonzero;
    nonzero.terms.push_back({parse_formula("r:RF != 0"), {"r"}, 1, {}, {}});
    CHECK(specialize_fn(nonzero, Structure(FieldConfig::laurent(7)), {}) == 6);

    // Polynomial factors and negative exponents.
    ConstructibleFn weighted;
    weighted.terms.push_back({nullptr, {}, AElem::inv_L_power_minus_one(1), {vg("0 - 2*w")}, {vg("w + 1")}});
    Assignment w2;
    w2.set_vg("w", 2);
    CHECK(specialize_fn(weighted, Structure(FieldConfig::padic(3)), w2) == mpq_class(1, 54));

    ConstructibleFn unknown;
    unknown.terms.push_back({parse_formula("ac(u) = r:RF"), {"r"}, 1, {}, {}});
    Assignment fuzzy;
    fuzzy.set_vf("u", FieldElement::exhausted(q5, 0));
    CHECK_THROWS_AS(specialize_fn(unknown, Structure(q5), fuzzy), SpecializationError);
}

TEST_CASE("specialization is additive and multiplicative") {
    std::mt19937_64 rng(23);
    std::vector<ConstructibleFn> pool;
    const char* fibers[] = {"r^2 = ac(u)", "r = ac(u) + 1", "r*s:RF = 1", "r:RF != 0 and ord(u) >= 1", "r:RF^3 = r"};
    for (int i = 0; i < 5; ++i) {
        ConstructibleFn f;
        auto fiber = parse_formula(fibers[i]);
        auto fv = free_variables(fiber);
        f.terms.push_back({fiber, fv.rf, AElem::L_pow(i % 3 - 1) + i, {}, {}});
        if (i % 2) f.terms.back().exponents.push_back(parse_term("ord(u)"));
        pool.push_back(f);
    }
    for (int trial = 0; trial < 100; ++trial) {
        auto cfg = trial % 2 ? FieldConfig::laurent(5) : FieldConfig::padic(5);
        Structure K(cfg);
        const auto& a = pool[rng() % pool.size()];
        const auto& b = pool[rng() % pool.size()];
        Assignment x;
        std::vector<std::uint32_t> d{static_cast<std::uint32_t>(rng() % 5), static_cast<std::uint32_t>(1 + rng() % 4)};
        x.set_vf("u", FieldElement::from_digits(cfg, static_cast<std::int64_t>(rng() % 2), d, true));
        CHECK(specialize_fn(a + b, K, x) == specialize_fn(a, K, x) + specialize_fn(b, K, x));
        CHECK(specialize_fn(a * b, K, x) == specialize_fn(a, K, x) * specialize_fn(b, K, x));
    }
}

TEST_CASE("exponential specialization") {
    auto f5 = FieldConfig::laurent(5);
    Structure K(f5);
    CharacterConfig chi{0};

    ExpConstructibleFn trivial;
    trivial.terms.push_back({{parse_formula("r^2 = 4:RF"), {"r"}, 1, {}, {}}, nullptr, nullptr});
    CHECK(specialize_exp_fn(trivial, K, chi, {}) == CycloValue(5, 2));

    ExpConstructibleFn line;
    line.terms.push_back({{nullptr, {"r"}, 1, {}, {}}, nullptr, parse_term("r", Sort::ResidueField)});
    CHECK(specialize_exp_fn(line, K, chi, {}).is_zero());

    ExpConstructibleFn gauss;
    gauss.terms.push_back({{parse_formula("b:RF = a:RF^2"), {"a", "b"}, 1, {}, {}}, nullptr, parse_term("b", Sort::ResidueField)});
    CycloValue g = specialize_exp_fn(gauss, K, chi, {});
    // Direct sum over F_5 of zeta^(a^2).
    CycloValue direct(5, 0);
    for (std::uint32_t a = 0; a < 5; ++a) direct += CycloValue::zeta(5, 1, a * a % 5);
    CHECK(g == direct);
    CHECK(g.conj() * g == CycloValue(5, 5));

    // psi of a VF term: sum over residues r of psi(r / t) with conductor 1 is the full character sum.
    ExpConstructibleFn psi_line;
    psi_line.terms.push_back({{nullptr, {"r"}, 1, {}, {}}, parse_term("u", Sort::ValuedField), nullptr});
    Assignment u;
    u.set_vf("u", FieldElement::from_digits(f5, -1, {3}, true));
    CHECK(specialize_exp_fn(psi_line, K, CharacterConfig{1}, u) == CycloValue::zeta(5, 1, 3).scaled(5));
}
