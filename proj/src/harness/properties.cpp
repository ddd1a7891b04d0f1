#include "dptk/harness/properties.hpp"

namespace dptk {

void PropertyResult::record(bool ok, const std::string& what) {
    ++cases;
    if (ok) return;
    if (failures++ == 0) first_failure = what;
}

AElem random_aelem(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coeff(-4, 4), nterms(1, 4), expo(-3, 4), ndens(0, 2), di(1, 3);
    std::map<std::int64_t, mpz_class> num;
    for (int i = nterms(rng); i > 0; --i) num[expo(rng)] += coeff(rng);
    std::map<unsigned, unsigned> den;
    for (int i = ndens(rng); i > 0; --i) den[static_cast<unsigned>(di(rng))] += 1;
    return AElem::from_parts(num, den);
}

std::vector<mpq_class> positivity_sample_points() {
    std::vector<mpq_class> qs;
    for (int k = 1; k <= 50; ++k) qs.emplace_back(k + 1, k);
    for (int k = 2; k <= 10; ++k) qs.emplace_back(k);
    for (int k = 1; k <= 2000; ++k) qs.emplace_back(200 + k, 200);
    qs.emplace_back(100);
    qs.emplace_back(10000);
    for (auto& q : qs) q.canonicalize();
    return qs;
}

namespace {

FieldElement pi_pow(const FieldConfig& K, int k) {
    FieldElement pi = FieldElement::uniformizer(K);
    return k >= 0 ? pi.pow(static_cast<unsigned>(k)) : pi.inverse().pow(static_cast<unsigned>(-k));
}

ZPoly random_zpoly(std::mt19937_64& rng, int lo, int hi, int degree) {
    std::uniform_int_distribution<int> c(lo, hi);
    std::vector<std::int64_t> v;
    for (int i = 0; i <= degree; ++i) v.push_back(c(rng));
    return ZPoly(v);
}

FieldElement random_entry(const FieldConfig& K, std::mt19937_64& rng) {
    if (rng() % 8 == 0) return FieldElement::zero(K);
    ZPoly u = random_zpoly(rng, -4, 4, 2);
    while (u.coeff(0) % static_cast<std::int64_t>(K.p) == 0) u = u + ZPoly(1);
    return FieldElement::from_poly(K, u) * pi_pow(K, static_cast<int>(rng() % 5) - 2);
}

}  // namespace

GL2Element random_gl2(const FieldConfig& K, std::mt19937_64& rng) {
    while (true) {
        try {
            return GL2Element(random_entry(K, rng), random_entry(K, rng), random_entry(K, rng), random_entry(K, rng));
        } catch (const GL2Error&) {
        }
    }
}

GL2Element random_gl2_integral(const FieldConfig& K, std::mt19937_64& rng) {
    while (true) {
        auto e = [&] { return FieldElement::from_poly(K, random_zpoly(rng, 0, static_cast<int>(K.p) - 1, 2)); };
        try {
            GL2Element k(e(), e(), e(), e());
            if (k.det_ord() == 0) return k;
        } catch (const GL2Error&) {
        }
    }
}

PropertyResult check_theta_homomorphism(std::uint64_t seed, std::uint32_t cases) {
    PropertyResult r{"theta_q is a ring homomorphism", 0, 0, {}};
    std::mt19937_64 rng(seed);
    for (std::uint32_t i = 0; i < cases; ++i) {
        AElem a = random_aelem(rng), b = random_aelem(rng);
        mpq_class q(static_cast<long>(2 + rng() % 12), static_cast<long>(1 + rng() % 3));
        q.canonicalize();
        if (q <= 1) q += 1;
        bool ok = theta_q(a * b, q) == theta_q(a, q) * theta_q(b, q) && theta_q(a + b, q) == theta_q(a, q) + theta_q(b, q) &&
                  theta_q(-a, q) == -theta_q(a, q) && theta_q(AElem(1), q) == 1;
        r.record(ok, "a = " + a.to_string() + ", b = " + b.to_string() + ", q = " + q.get_str());
    }
    return r;
}

PropertyResult check_positivity_sampling(std::uint64_t seed, std::uint32_t cases) {
    PropertyResult r{"is_in_A_plus agrees with sampling", 0, 0, {}};
    static const auto qs = positivity_sample_points();
    std::mt19937_64 rng(seed);
    for (std::uint32_t i = 0; i < cases; ++i) {
        AElem a = random_aelem(rng);
        bool sampled = true;
        for (const auto& q : qs)
            if (theta_q(a, q) < 0) {
                sampled = false;
                break;
            }
        r.record(is_in_A_plus(a) == sampled, a.to_string());
    }
    return r;
}

PropertyResult check_weight_right_K(std::uint64_t seed, std::uint32_t cases, const std::vector<FieldConfig>& fields) {
    PropertyResult r{"v_M(g k) = v_M(g) for k in GL2(O)", 0, 0, {}};
    std::mt19937_64 rng(seed);
    for (std::uint32_t i = 0; i < cases; ++i) {
        const FieldConfig& K = fields[i % fields.size()];
        GL2Element g = random_gl2(K, rng), k = random_gl2_integral(K, rng);
        r.record(weight_vM(g * k) == weight_vM(g), K.describe() + " g = " + g.to_string());
    }
    return r;
}

PropertyResult check_weight_lambda(std::uint64_t seed, std::uint32_t cases, const std::vector<FieldConfig>& fields) {
    PropertyResult r{"v_M does not depend on lambda", 0, 0, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coord(-5, 5);
    for (std::uint32_t i = 0; i < cases; ++i) {
        const FieldConfig& K = fields[i % fields.size()];
        GL2Element g = random_gl2(K, rng);
        std::vector<Lambda> lambdas{{1, -1}, {2, -2}, {3, -1}};
        while (lambdas.size() < 5) {
            Lambda l{coord(rng), coord(rng)};
            if (l[0] != l[1]) lambdas.push_back(l);
        }
        r.record(lambda_independence_check(g, lambdas).holds, K.describe() + " g = " + g.to_string());
    }
    return r;
}

}  // namespace dptk
