#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "dptk/lang/parser.hpp"
#include "dptk/measure/volume.hpp"

using namespace dptk;

namespace {

const std::vector<std::uint32_t> kPrimes{3, 5, 7};

Structure laurent(std::uint32_t p) { return Structure(FieldConfig::laurent(p, 12)); }
Structure padic(std::uint32_t p) { return Structure(FieldConfig::padic(p, 12)); }

std::vector<Structure> both_characteristics() {
    std::vector<Structure> out;
    for (auto p : kPrimes) {
        out.push_back(padic(p));
        out.push_back(laurent(p));
    }
    return out;
}

Box unit_box(const std::vector<std::string>& vars, std::int64_t v0 = 0) {
    Box b;
    for (const auto& v : vars) b.vf_min_ord[v] = v0;
    return b;
}

FormulaPtr fz(const std::string& text) { return parse_formula(text, {{"z", Sort::ValuedField}}); }

mpq_class qpow(std::int64_t q, std::int64_t e) {
    mpq_class r = 1;
    for (std::int64_t i = 0; i < (e < 0 ? -e : e); ++i) r *= q;
    return e < 0 ? mpq_class(1) / r : r;
}

// Integer valuation with v(0) = cap.
int val(std::int64_t n, std::int64_t p, int cap) {
    if (n == 0) return cap;
    int v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

bool has_rf_condition(const CellComplex& cx) {
    for (const auto& c : cx.cells)
        if (c.rf_condition) return true;
    return false;
}

std::vector<CellComplex> corpus() { return load_corpus(std::string(DPTK_DATA_DIR) + "/corpus"); }

}  // namespace

TEST_CASE("cell json round trip") {
    for (const auto& cx : corpus()) {
        CAPTURE(cx.name);
        auto again = complex_from_json(complex_to_json(cx));
        CHECK(complex_to_json(again) == complex_to_json(cx));
        CHECK(again.cells.size() == cx.cells.size());
    }
    CHECK(corpus().size() >= 12);
    CHECK_THROWS_AS(complex_from_json(nlohmann::json::parse(
                        R"({"name":"bad","variables":["z"],"box":[0],"cells":[{"vg":[{"name":"v","lo":0}],
                        "components":[{"center":"0","order":"v^2","angular":"1"}]}]})")),
                    CellError);
}

TEST_CASE("affine forms of orders") {
    auto t = parse_term("2*v + w - 3", Sort::ValueGroup, {{"v", Sort::ValueGroup}, {"w", Sort::ValueGroup}});
    AffineForm a = affine_form(t);
    CHECK(a.constant == -3);
    CHECK(a.coeffs.at("v") == 2);
    CHECK(a.coeffs.at("w") == 1);
}

TEST_CASE("decompose: maximal ideal") {
    auto cx = decompose_fragment(fz("ord(z) >= 1"), "z", {}, 0);
    int shells = 0, points = 0;
    for (const auto& c : cx.cells) {
        if (c.is_point()) {
            ++points;
            continue;
        }
        ++shells;
        REQUIRE(c.vg_params.size() == 1);
        CHECK(c.vg_params[0].lo == 1);
        CHECK_FALSE(c.vg_params[0].hi.has_value());
        CHECK(c.rf_params == std::vector<std::string>{"r"});
        CHECK(c.rf_condition == nullptr);
    }
    CHECK(shells == 1);
    CHECK(points == 1);
    CHECK(*motivic_volume(cx).exact == AElem::L_pow(-1));
    CHECK(cx.excluded_primes.empty());
}

TEST_CASE("decompose: two unit-distance balls") {
    auto cx = decompose_fragment(fz("ord(z) >= 1 or ord(z - 1) >= 1"), "z", {ZPoly(0), ZPoly(1)}, 0);
    std::set<std::string> centers;
    for (const auto& c : cx.cells)
        if (!c.is_point()) centers.insert(print_term(c.components[0].center));
    CHECK(centers == std::set<std::string>{"0", "1"});
    CHECK(*motivic_volume(cx).exact == AElem(2) * AElem::L_pow(-1));
    for (auto p : kPrimes) {
        auto rep = certify_complex(cx, laurent(p), 3);
        CHECK(rep.ok());
    }
}

TEST_CASE("decompose: one family around 1") {
    auto cx = decompose_fragment(fz("ord(z) = 0 and ac(z) = 1 and ord(z - 1) >= 2"), "z", {}, 0);
    for (const auto& c : cx.cells) CHECK(print_term(c.components[0].center) == "1");
    for (auto K : {laurent(5), padic(5)}) {
        auto rep = certify_complex(cx, K, 3);
        CHECK(rep.ok());
        CHECK(rep.points == 125);
    }
    CHECK(theta_q(*motivic_volume(cx).exact, 5) == mpq_class(1, 25));
}

TEST_CASE("decompose rejects atoms outside the fragment") {
    CHECK_THROWS_AS(decompose_fragment(fz("ord(z^2 - t) >= 1"), "z", {}, 0), CellError);
    CHECK_THROWS_AS(decompose_fragment(fz("exists w:VF[ord>=0] ord(z - w) >= 1"), "z", {}, 0), CellError);
    CHECK_THROWS_AS(decompose_fragment(fz("ord(z - 1/2) >= 1"), "z", {}, 0), CellError);
}

TEST_CASE("decomposition certified against the evaluator on random fragment formulas") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> centers{"0", "1", "t", "1 + t", "-1"};
    auto atom = [&]() {
        std::string c = centers[rng() % centers.size()];
        std::string d = c == "0" ? "z" : "z - (" + c + ")";
        switch (rng() % 3) {
            case 0: return "ord(" + d + ") >= " + std::to_string(rng() % 3);
            case 1: return "ord(" + d + ") = " + std::to_string(rng() % 3);
            default: return "(ord(" + d + ") = " + std::to_string(rng() % 2) + " and ac(" + d + ") = " +
                            std::to_string(1 + rng() % 2) + ")";
        }
    };
    for (int i = 0; i < 40; ++i) {
        std::string text = atom();
        for (int k = rng() % 3; k > 0; --k) text = "(" + text + (rng() % 2 ? " or " : " and not ") + atom() + ")";
        CAPTURE(text);
        auto cx = decompose_fragment(fz(text), "z", {}, 0);
        for (auto p : {5u, 7u}) {
            if (!cx.valid_for(p)) continue;
            for (auto K : {laurent(p), padic(p)}) {
                auto rep = certify_complex(cx, K, 3);
                CHECK(rep.ok());
            }
        }
    }
}

TEST_CASE("motivic volumes of basic cells") {
    // ball {ord(z - c) = alpha, ac = xi}
    for (std::int64_t alpha = -2; alpha <= 3; ++alpha) {
        Cell c;
        c.components.push_back({false, term::vf_const(ZPoly(1)), term::vg_const(alpha), term::rf_const(1)});
        CHECK(*cell_volume(c).exact == AElem::L_pow(-alpha - 1));
    }
    auto all = corpus();
    auto find = [&](const std::string& name) {
        for (const auto& cx : all)
            if (cx.name == name) return cx;
        FAIL("missing corpus entry " << name);
        return CellComplex{};
    };
    CHECK(*motivic_volume(find("unit-ball")).exact == AElem(1));
    CHECK(*motivic_volume(find("two-balls")).exact == AElem(2) * AElem::L_pow(-1));
    CHECK(*motivic_volume(find("ball-ord-at-least-minus-1")).exact == AElem::L());
    CHECK(*motivic_volume(find("ball-order-2")).exact == AElem::L_pow(-3));
    CHECK_FALSE(motivic_volume(find("rf-square-root-2")).exact.has_value());

    Cell bad;
    bad.vg_params.push_back({"v", 0, std::nullopt});
    bad.rf_params = {"r"};
    bad.components.push_back({false, term::vf_const(ZPoly()), term::neg(term::var("v", Sort::ValueGroup)),
                              term::var("r", Sort::ResidueField)});
    CHECK_THROWS_AS(cell_volume(bad), CellError);
}

TEST_CASE("p-adic volumes") {
    auto v = padic_volume(laurent(3), fz("ord(z) >= 1"), unit_box({"z"}), 6);
    CHECK(v.value == mpq_class(1, 3));
    CHECK(v.stabilized());
    auto ball = padic_volume(padic(5), fz("ord(z) = 2 and ac(z) = 1"), unit_box({"z"}), 6);
    CHECK(ball.value == mpq_class(1, 125));
    CHECK(*ball.stabilized_at == 3);

    // ord(z^2 - t) >= 2 at p = 3: brute count of z mod 3^3
    for (auto K : {laurent(3), padic(3)}) {
        auto r = padic_volume(K, fz("ord(z^2 - t) >= 2"), unit_box({"z"}), 6);
        std::int64_t hits = 0;
        for (std::int64_t a = 0; a < 27; ++a) hits += val(a * a - 3, 3, 3) >= 2;  // same count in F_3[t]
        mpq_class oracle(hits, 27);
        oracle.canonicalize();
        CHECK(r.value == oracle);
        CHECK(r.stabilized());
    }
    // uniform counting agrees with the adaptive sweep
    for (auto p : kPrimes) {
        auto f = fz("ord(z - 1) >= 2 or (ord(z) = 1 and ac(z) = 2)");
        auto a = padic_volume(padic(p), f, unit_box({"z"}), 5);
        auto u = padic_volume_uniform(padic(p), f, unit_box({"z"}), 3);
        CHECK(a.value == u.value);
        CHECK(u.unknown_mass == 0);
    }
    auto open = padic_volume(laurent(3), fz("ord(z) >= 1 and not ac(z) = 1"), unit_box({"z"}), 4);
    CHECK_FALSE(open.stabilized());
    CHECK(open.unknown_mass == mpq_class(1, 81));
}

TEST_CASE("integration of constructible functions") {
    auto K = laurent(3);
    auto one = ConstructibleFn::constant(1);
    CHECK(integrate_constructible(K, one, unit_box({"z"}), 4).value == 1);

    ConstructibleTerm t;
    t.fiber = fz("1 <= ord(z) and ord(z) <= 2");
    t.exponents.push_back(parse_term("-ord(z)", Sort::ValueGroup, {{"z", Sort::ValuedField}}));
    ConstructibleFn phi;
    phi.terms.push_back(t);
    mpq_class hand = 0;
    for (int alpha = 1; alpha <= 2; ++alpha) hand += qpow(3, -alpha) * mpq_class(2) * qpow(3, -alpha - 1);
    for (auto F : {laurent(3), padic(3)}) {
        auto r = integrate_constructible(F, phi, unit_box({"z"}), 6);
        CHECK(r.value == hand);
        CHECK(r.stabilized_at.has_value());
    }

    ExpConstructibleFn psi_z;
    psi_z.terms.push_back({ConstructibleTerm{}, term::var("z", Sort::ValuedField), nullptr});
    for (auto F : {laurent(5), padic(5)}) {
        // psi(z) = psi0(t z) is trivial on the unit ball
        auto r = integrate_constructible(F, psi_z, CharacterConfig{1}, unit_box({"z"}), 4);
        CHECK(r.value == CycloValue(5, 1));
        // psi0 itself sums to zero over the residue classes
        auto s = integrate_constructible(F, psi_z, CharacterConfig{0}, unit_box({"z"}), 4);
        CHECK(s.value.is_zero());
    }
}

TEST_CASE("specialization over the corpus") {
    auto fields = both_characteristics();
    for (const auto& cx : corpus()) {
        CAPTURE(cx.name);
        auto rep = check_specialization(cx, fields, 6);
        for (const auto& e : rep.entries) {
            CAPTURE(e.field);
            if (e.skipped) continue;
            CHECK(e.padic.stabilized());
            CHECK(e.equal == true);
        }
        CHECK(rep.all_equal());
        // transfer: both characteristics give the same volume for each p
        for (std::size_t i = 0; i + 1 < rep.entries.size(); i += 2)
            if (!rep.entries[i].skipped) CHECK(rep.entries[i].padic.value == rep.entries[i + 1].padic.value);
        if (rep.motivic.exact && !rep.motivic.exact->is_zero() && !has_rf_condition(cx))
            CHECK(rep.positive == true);
        for (const auto& e : rep.entries) CHECK(e.specialized >= 0);
    }
}

TEST_CASE("residue fiber counts depend on the residue field") {
    CellComplex cx;
    for (const auto& c : corpus())
        if (c.name == "rf-square-root-2") cx = c;
    auto rep = check_specialization(cx, {padic(3), padic(5), padic(7), laurent(7)}, 4);
    CHECK(rep.entries[0].specialized == 0);          // 2 is not a square mod 3
    CHECK(rep.entries[1].specialized == 0);          // nor mod 5
    CHECK(rep.entries[2].specialized == mpq_class(2, 7));  // 3^2 = 2 mod 7
    CHECK(rep.all_equal());
}

TEST_CASE("decomposed complexes are certified") {
    for (const auto& cx : corpus()) {
        CAPTURE(cx.name);
        for (auto p : {3u, 5u}) {
            if (!cx.valid_for(p)) continue;
            auto rep = certify_complex(cx, padic(p), cx.variables.size() == 1 ? 3 : 2);
            CHECK(rep.overlaps == 0);
            CHECK(rep.gaps == 0);
            CHECK(rep.extras == 0);
        }
    }
}

TEST_CASE("additivity of motivic volume") {
    auto a = decompose_fragment(fz("ord(z) >= 1"), "z", {}, 0);
    auto b = decompose_fragment(fz("ord(z - 1) >= 1"), "z", {}, 0);
    auto ab = decompose_fragment(fz("ord(z) >= 1 or ord(z - 1) >= 1"), "z", {}, 0);
    CHECK(*motivic_volume(a).exact + *motivic_volume(b).exact == *motivic_volume(ab).exact);
    for (const auto& cx : corpus()) {
        auto total = motivic_volume(cx);
        if (!total.exact) continue;
        AElem sum = 0;
        for (const auto& c : cx.cells) sum += *cell_volume(c).exact;
        CHECK(sum == *total.exact);
        if (!has_rf_condition(cx)) CHECK(is_in_A_plus(*total.exact));
    }
}

TEST_CASE("affine change of variables") {
    auto unit = fz("ord(z) >= 0");
    for (auto K : {laurent(3), padic(3)}) {
        auto r = affine_change_of_variables_check(ZPoly::t_power(1), ZPoly(), unit, "z", 0, K, 5);
        CHECK(r.holds == true);
        CHECK(r.image.value == mpq_class(1, 3));
        auto shift = affine_change_of_variables_check(ZPoly(1), ZPoly(1), fz("ord(z) >= 2"), "z", 0, K, 5);
        CHECK(shift.holds == true);
        CHECK(shift.image.value == shift.source.value);
    }
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10; ++i) {
        std::string text = "ord(z - " + std::to_string(rng() % 5) + ") >= " + std::to_string(1 + rng() % 2) +
                           " or (ord(z) = 1 and ac(z) = " + std::to_string(1 + rng() % 4) + ")";
        CAPTURE(text);
        auto u = ZPoly(std::vector<std::int64_t>{1, 1});
        auto v = ZPoly(static_cast<std::int64_t>(rng() % 5));
        for (auto K : {laurent(5), padic(5)}) {
            auto r = affine_change_of_variables_check(u, v, fz(text), "z", 0, K, 5);
            CHECK(r.holds == true);
        }
    }
    CHECK_THROWS_AS(affine_change_of_variables_check(ZPoly(3), ZPoly(), unit, "z", 0, padic(3), 3), CellError);
}

TEST_CASE("fubini") {
    std::map<std::string, Sort> vars{{"z1", Sort::ValuedField}, {"z2", Sort::ValuedField}};
    auto box = unit_box({"z1", "z2"});
    auto product = parse_formula("ord(z1) >= 1 and ord(z2) >= 2", vars);
    auto r = fubini_check(laurent(3), product, {"z1", "z2"}, box, 4);
    CHECK(r.holds == true);
    CHECK(r.first_outer.value == mpq_class(1, 27));

    auto wedge = parse_formula("ord(z2) <= ord(z1) and ord(z1) <= 3", vars);
    std::int64_t hits = 0;
    for (std::int64_t a = 0; a < 81; ++a)
        for (std::int64_t b = 0; b < 81; ++b) {
            int va = val(a, 3, 99), vb = val(b, 3, 99);
            hits += vb <= va && va <= 3;
        }
    for (auto K : {laurent(3), padic(3)}) {
        auto w = fubini_check(K, wedge, {"z1", "z2"}, box, 5);
        CHECK(w.holds == true);
        mpq_class oracle(hits, 81 * 81);
        oracle.canonicalize();
        CHECK(w.first_outer.value == oracle);
        CHECK(w.joint.value == w.first_outer.value);
    }

    for (const auto& cx : corpus()) {
        if (cx.name != "triangle-rf") continue;
        auto f = union_formula(cx, 10, true);
        auto t = fubini_check(padic(5), f, cx.variables, cx.box(), 4);
        CHECK(t.holds == true);
        CHECK(t.first_outer.value == specialize_fn(motivic_volume(cx).fn, padic(5), {}));
    }
}
