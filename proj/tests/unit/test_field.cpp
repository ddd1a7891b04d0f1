#include <random>
#include <tuple>

#include "doctest.h"
#include "dptk/field/field.hpp"

using namespace dptk;

namespace {

// Base-p digits of n mod p^len, computed with plain integer arithmetic.
std::vector<std::uint32_t> base_digits(std::int64_t n, std::int64_t p, int len) {
    std::int64_t m = 1;
    for (int i = 0; i < len; ++i) m *= p;
    n = ((n % m) + m) % m;
    std::vector<std::uint32_t> d;
    for (int i = 0; i < len; ++i) {
        d.push_back(static_cast<std::uint32_t>(n % p));
        n /= p;
    }
    return d;
}

std::int64_t ipow(std::int64_t b, int e) {
    std::int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

std::int64_t modinv(std::int64_t a, std::int64_t m) {
    std::int64_t g = m, x = 0, x1 = 1, a1 = a % m;
    while (a1) {
        std::int64_t q = g / a1;
        std::tie(g, a1) = std::make_pair(a1, g - q * a1);
        std::tie(x, x1) = std::make_pair(x1, x - q * x1);
    }
    return ((x % m) + m) % m;
}

FieldElement random_element(const FieldConfig& cfg, std::mt19937_64& rng, bool exact) {
    std::vector<std::uint32_t> d(1 + rng() % 5);
    for (auto& x : d) x = static_cast<std::uint32_t>(rng() % cfg.p);
    if (d[0] == 0) d[0] = 1;
    std::int64_t v = static_cast<std::int64_t>(rng() % 5) - 2;
    return FieldElement::from_digits(cfg, v, d, exact);
}

}  // namespace

TEST_CASE("uniformizer and coefficient map") {
    auto fq = FieldConfig::laurent(5);
    auto pi = FieldElement::uniformizer(fq);
    CHECK(pi.val() == 1);
    CHECK(pi.digits() == std::vector<std::uint32_t>{1});
    auto q5 = FieldConfig::padic(5);
    auto five = FieldElement::uniformizer(q5);
    CHECK(five.identical(FieldElement::from_int(q5, 5)));
    auto img = interpret_poly(q5, ZPoly({1, 0, 0, 1}));
    CHECK(img.identical(FieldElement::from_int(q5, 126)));
    CHECK(img.digits() == base_digits(126, 5, 4));
}

TEST_CASE("ord and ac") {
    auto q5 = FieldConfig::padic(5);
    auto fifty = FieldElement::from_int(q5, 50);
    CHECK(fifty.ord() == Valuation::finite(2));
    CHECK(fifty.ac() == 2);
    CHECK(FieldElement::zero(q5).ord().is_infinite());
    CHECK(FieldElement::zero(q5).ac() == 0);
    auto fp = FieldConfig::laurent(7);
    CHECK(FieldElement::uniformizer(fp).ord() == Valuation::finite(1));
    CHECK(FieldElement::uniformizer(fp).ac() == 1);
    auto ex = FieldElement::exhausted(fp, 4);
    CHECK(ex.ord() == Valuation::unknown(4));
    CHECK_THROWS_AS(ex.ac(), PrecisionError);
    CHECK(FieldElement::from_int(fp, 7).is_exact_zero());
    CHECK(FieldElement::from_int(q5, -1).ac() == 4);
    CHECK(FieldElement::from_int(q5, -1).digit(10) == 4u);
}

TEST_CASE("ring operations") {
    auto f3 = FieldConfig::laurent(3, 4);
    auto a = interpret_poly(f3, ZPoly({1, 1})), b = interpret_poly(f3, ZPoly({1, -1}));
    CHECK((a * b).identical(interpret_poly(f3, ZPoly({1, 0, -1}))));
    auto t = FieldElement::uniformizer(f3);
    CHECK((t + (-t)).is_exact_zero());
    auto ta = FieldElement::from_digits(f3, 1, {1, 0, 0}, false);
    auto c = ta + (-ta);
    CHECK(c.is_exhausted());
    CHECK(c.ord() == Valuation::unknown(4));
    auto q5 = FieldConfig::padic(5, 3);
    auto inv = FieldElement::from_int(q5, 6).inverse();
    CHECK(inv.digits() == base_digits(modinv(6, 125), 5, 3));
    CHECK(inv.absolute_precision() == 3);
    CHECK_THROWS_AS(FieldElement::zero(q5).inverse(), DivisionByZero);
    CHECK_THROWS_AS(FieldElement::exhausted(q5, 3).inverse(), PrecisionError);
    CHECK(FieldElement::from_int(q5, -5).inverse().is_exact());
    CHECK((FieldElement::from_int(q5, -3) + FieldElement::from_int(q5, 3)).is_exact_zero());
    CHECK((FieldElement::from_int(q5, -3) * FieldElement::from_int(q5, -7)).identical(FieldElement::from_int(q5, 21)));
    CHECK(FieldElement::inverse_of_int(FieldConfig::laurent(7), 3).identical(FieldElement::from_int(FieldConfig::laurent(7), 5)));
    CHECK_THROWS_AS(FieldElement::inverse_of_int(q5, 10), FieldError);
}

TEST_CASE("characteristic zero arithmetic matches integer arithmetic mod p^N") {
    std::mt19937_64 rng(3);
    for (std::uint32_t p : {3u, 5u, 7u, 11u}) {
        auto cfg = FieldConfig::padic(p, 5);
        std::int64_t m = ipow(p, 5);
        for (int i = 0; i < 200; ++i) {
            std::int64_t x = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
            std::int64_t y = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
            auto ex = FieldElement::from_digits(cfg, 0, base_digits(x, p, 5), false);
            auto ey = FieldElement::from_digits(cfg, 0, base_digits(y, p, 5), false);
            auto sum = FieldElement::from_digits(cfg, 0, base_digits(x + y, p, 5), false);
            CHECK((ex + ey).identical(sum));
            auto diff = FieldElement::from_digits(cfg, 0, base_digits(x - y, p, 5), false);
            CHECK((ex - ey).identical(diff));
            if (x % p != 0 && y % p != 0) {
                auto prod = FieldElement::from_digits(cfg, 0, base_digits(static_cast<std::int64_t>((__int128)x * y % m), p, 5), false);
                CHECK((ex * ey).identical(prod));
                auto inv = FieldElement::from_digits(cfg, 0, base_digits(modinv(x, m), p, 5), false);
                CHECK(ex.inverse().identical(inv));
            }
        }
    }
}

TEST_CASE("valuation properties on random elements") {
    std::mt19937_64 rng(11);
    for (auto cfg : {FieldConfig::padic(5, 6), FieldConfig::laurent(5, 6), FieldConfig::padic(3, 6), FieldConfig::laurent(7, 6)}) {
        for (int i = 0; i < 300; ++i) {
            auto a = random_element(cfg, rng, rng() % 2), b = random_element(cfg, rng, rng() % 2);
            auto prod = a * b;
            CHECK(prod.ord().value == a.ord().value + b.ord().value);
            CHECK(prod.ac() == (std::uint64_t(a.ac()) * b.ac()) % cfg.p);
            auto s = a + b;
            auto os = s.ord();
            std::int64_t lo = std::min(a.ord().value, b.ord().value);
            CHECK(os.value >= lo);
            if (a.ord().value != b.ord().value) CHECK(os == Valuation::finite(lo));
        }
    }
}

TEST_CASE("coefficient map is a ring homomorphism") {
    std::mt19937_64 rng(17);
    for (auto cfg : {FieldConfig::padic(5), FieldConfig::laurent(5), FieldConfig::padic(7), FieldConfig::laurent(3)}) {
        for (int i = 0; i < 100; ++i) {
            std::vector<std::int64_t> cg(1 + rng() % 4), ch(1 + rng() % 4);
            for (auto& x : cg) x = static_cast<std::int64_t>(rng() % 21) - 10;
            for (auto& x : ch) x = static_cast<std::int64_t>(rng() % 21) - 10;
            ZPoly g(cg), h(ch);
            auto lg = interpret_poly(cfg, g), lh = interpret_poly(cfg, h);
            CHECK(interpret_poly(cfg, g + h).identical(lg + lh));
            CHECK(interpret_poly(cfg, g * h).identical(lg * lh));
            CHECK(interpret_poly(cfg, g - h).identical(lg - lh));
        }
    }
}

TEST_CASE("precision monotonicity") {
    std::mt19937_64 rng(23);
    for (auto base : {FieldConfig::padic(5, 4), FieldConfig::laurent(5, 4)}) {
        auto hi = base;
        hi.precision = 9;
        for (int i = 0; i < 200; ++i) {
            auto a = random_element(base, rng, true), b = random_element(base, rng, true);
            auto coarse_a = a.truncated(a.val() + 3), coarse_b = b.truncated(b.val() + 3);
            auto fine_a = a.truncated(a.val() + 7), fine_b = b.truncated(b.val() + 7);
            CHECK((coarse_a + coarse_b).compatible(fine_a + fine_b));
            CHECK((coarse_a * coarse_b).compatible(fine_a * fine_b));
            CHECK((coarse_a - coarse_b).compatible(a - b));
            auto a_hi = FieldElement::from_digits(hi, a.val(), a.digits(), true);
            auto coarse_inv = a.inverse(), fine_inv = a_hi.inverse();
            if (coarse_inv.is_exact()) {
                CHECK(coarse_inv.digits() == fine_inv.digits());
                continue;
            }
            CHECK(coarse_inv.absolute_precision() < fine_inv.absolute_precision());
            for (std::int64_t k = coarse_inv.val(); k < coarse_inv.absolute_precision(); ++k)
                CHECK(coarse_inv.digit(k) == fine_inv.digit(k));
        }
    }
}

TEST_CASE("unramified extensions") {
    auto f3 = FieldConfig::laurent(3);
    auto e3 = make_extension(f3, 2, 2);
    auto x3 = ExtElement::generator(e3);
    CHECK((x3 + x3.conjugate()).trace().is_exact_zero());
    CHECK((x3 + x3.conjugate()).coord(1).is_exact_zero());
    auto q5 = FieldConfig::padic(5);
    auto e5 = make_extension(q5, 2, 2);
    auto x5 = ExtElement::generator(e5);
    CHECK(x5.norm().identical(FieldElement::from_int(q5, -2)));
    CHECK(reduce_mod(-2, 5) == 3);
    CHECK_THROWS_AS(make_extension(q5, 2, 4), FieldError);
    CHECK_THROWS_AS(make_extension(q5, 3, 2), FieldError);
    CHECK(find_irreducible_kummer_unit(5, 2) == 2);
    CHECK(find_irreducible_kummer_unit(7, 2) == 3);
}

TEST_CASE("Kummer irreducibility against a root search") {
    for (std::uint32_t p : {3u, 5u, 7u, 11u, 13u}) {
        for (std::int64_t a = 1; a < p; ++a) {
            bool has_root = false;
            for (std::uint32_t z = 0; z < p; ++z)
                if (mod_pow(z, 2, p) == a) has_root = true;
            CHECK(kummer_irreducible(p, 2, a) == !has_root);
            // Degree 3: irreducible iff no root.
            bool cube_root = false;
            for (std::uint32_t z = 0; z < p; ++z)
                if (mod_pow(z, 3, p) == a) cube_root = true;
            CHECK(kummer_irreducible(p, 3, a) == !cube_root);
        }
    }
}

TEST_CASE("extension norm, valuation and conjugation") {
    std::mt19937_64 rng(29);
    for (auto base : {FieldConfig::padic(7, 6), FieldConfig::laurent(7, 6), FieldConfig::laurent(13, 6)}) {
        for (std::uint32_t r : {2u, 3u}) {
            auto ext = make_extension(base, r, find_irreducible_kummer_unit(base.p, r));
            for (int i = 0; i < 100; ++i) {
                std::vector<FieldElement> c, d;
                for (std::uint32_t k = 0; k < r; ++k) {
                    c.push_back(rng() % 3 ? random_element(base, rng, true) : FieldElement::zero(base));
                    d.push_back(random_element(base, rng, true));
                }
                ExtElement e(ext, c), f(ext, d);
                auto oe = e.ord();
                if (oe.is_infinite()) continue;
                CHECK(e.norm().ord() == Valuation::finite(static_cast<std::int64_t>(r) * oe.value));
                if (base.characteristic == Characteristic::Positive || r == 2) {
                    CHECK((e * f).conjugate().coords().size() == r);
                    auto lhs = (e * f).conjugate(), rhs = e.conjugate() * f.conjugate();
                    for (std::uint32_t k = 0; k < r; ++k) CHECK(lhs.coord(k).compatible(rhs.coord(k)));
                    auto s1 = (e + f).conjugate(), s2 = e.conjugate() + f.conjugate();
                    for (std::uint32_t k = 0; k < r; ++k) CHECK(s1.coord(k).compatible(s2.coord(k)));
                    auto fixed = ExtElement::from_base(ext, d[0]).conjugate();
                    CHECK(fixed.coord(0).identical(d[0]));
                }
            }
        }
    }
}

TEST_CASE("Hensel lifting") {
    auto f5 = FieldConfig::laurent(5, 3);
    std::vector<FieldElement> c1{interpret_poly(f5, ZPoly({-1, -1})), FieldElement::zero(f5), FieldElement::from_int(f5, 1)};
    auto r1 = hensel_lift(c1, 1);
    auto sq = r1 * r1 - interpret_poly(f5, ZPoly({1, 1}));
    CHECK(sq.ord().value >= 3);
    auto q5 = FieldConfig::padic(5, 3);
    std::vector<FieldElement> c2{FieldElement::from_int(q5, -6), FieldElement::zero(q5), FieldElement::from_int(q5, 1)};
    auto r2 = hensel_lift(c2, 1);
    std::int64_t v = 0;
    for (std::size_t i = r2.digits().size(); i-- > 0;) v = v * 5 + r2.digits()[i];
    CHECK((v * v - 6) % 125 == 0);
    std::vector<FieldElement> c3{FieldElement::from_int(q5, -5), FieldElement::zero(q5), FieldElement::from_int(q5, 1)};
    CHECK_THROWS_AS(hensel_lift(c3, 0), FieldError);
}
