#include "dptk/gl2/weights.hpp"

#include <algorithm>
#include <functional>

#include "dptk/eval/evaluator.hpp"

namespace dptk {

namespace {

// Finite valuation, or nullopt for an exact zero.
std::optional<std::int64_t> entry_ord(const FieldElement& x) {
    Valuation v = x.ord();
    if (v.is_infinite()) return std::nullopt;
    if (v.is_unknown()) throw GL2Error("valuation of " + x.to_string() + " is not determined");
    return v.value;
}

std::int64_t row_min(const FieldElement& x, const FieldElement& y) {
    auto a = entry_ord(x), b = entry_ord(y);
    if (!a && !b) throw GL2Error("zero row");
    if (!a) return *b;
    if (!b) return *a;
    return std::min(*a, *b);
}

FieldElement pi_power(const FieldConfig& cfg, std::int64_t k) {
    FieldElement pi = FieldElement::uniformizer(cfg);
    if (k >= 0) return pi.pow(static_cast<unsigned>(k));
    return pi.inverse().pow(static_cast<unsigned>(-k));
}

mpq_class q_inverse_power(std::uint32_t q, std::int64_t e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), q, static_cast<unsigned long>(e));
    return mpq_class(1, r);
}

}  // namespace

GL2Element::GL2Element(FieldElement a11, FieldElement a12, FieldElement a21, FieldElement a22)
    : e_{std::move(a11), std::move(a12), std::move(a21), std::move(a22)} {
    det_ = e_[0] * e_[3] - e_[1] * e_[2];
    Valuation v = det_.ord();
    if (!v.is_finite()) throw GL2Error("determinant " + det_.to_string() + " is not a determined nonzero element");
    det_ord_ = v.value;
}

GL2Element GL2Element::from_polys(const FieldConfig& cfg, const ZPoly& a11, const ZPoly& a12, const ZPoly& a21,
                                  const ZPoly& a22) {
    return GL2Element(FieldElement::from_poly(cfg, a11), FieldElement::from_poly(cfg, a12),
                      FieldElement::from_poly(cfg, a21), FieldElement::from_poly(cfg, a22));
}

GL2Element GL2Element::diagonal(const FieldElement& m1, const FieldElement& m2) {
    FieldElement z = FieldElement::zero(m1.config());
    return GL2Element(m1, z, z, m2);
}

GL2Element operator*(const GL2Element& x, const GL2Element& y) {
    auto e = [&](int i, int j) { return x.at(i, 0) * y.at(0, j) + x.at(i, 1) * y.at(1, j); };
    return GL2Element(e(0, 0), e(0, 1), e(1, 0), e(1, 1));
}

std::string GL2Element::to_string() const {
    return "[[" + e_[0].to_string() + ", " + e_[1].to_string() + "], [" + e_[2].to_string() + ", " +
           e_[3].to_string() + "]]";
}

std::array<std::int64_t, 2> iwasawa_HP(const GL2Element& g, Parabolic P) {
    // Upper: the bottom row of g is m2 times a primitive row. Lower: the top row, with m1.
    if (P == Parabolic::Upper) {
        std::int64_t m2 = row_min(g.at(1, 0), g.at(1, 1));
        return {-(g.det_ord() - m2), -m2};
    }
    std::int64_t m1 = row_min(g.at(0, 0), g.at(0, 1));
    return {-m1, -(g.det_ord() - m1)};
}

std::int64_t theta(Parabolic P, const Lambda& lambda) {
    std::int64_t d = lambda[0] - lambda[1];
    return P == Parabolic::Upper ? d : -d;
}

mpq_class weight_vM(const GL2Element& g, const Lambda& lambda) {
    mpq_class total = 0;
    for (Parabolic P : {Parabolic::Upper, Parabolic::Lower}) {
        std::int64_t th = theta(P, lambda);
        if (th == 0)
            throw GL2Error("lambda = (" + std::to_string(lambda[0]) + ", " + std::to_string(lambda[1]) +
                           ") is not generic");
        auto H = iwasawa_HP(g, P);
        mpq_class term(mpz_class(static_cast<long>(checked::add(checked::mul(lambda[0], H[0]), checked::mul(lambda[1], H[1])))),
                       mpz_class(static_cast<long>(th)));
        term.canonicalize();
        total -= term;
    }
    total.canonicalize();
    return total;
}

LambdaReport lambda_independence_check(const GL2Element& g, const std::vector<Lambda>& lambdas) {
    LambdaReport r;
    for (const auto& l : lambdas) r.values.push_back(weight_vM(g, l));
    r.holds = std::all_of(r.values.begin(), r.values.end(), [&](const mpq_class& v) { return v == r.values.front(); });
    return r;
}

OrbitPoint OrbitPoint::from_char_poly(const ZPoly& tr, const ZPoly& det) { return OrbitPoint{tr, det, 0, 0, {}}; }

OrbitPoint OrbitPoint::from_eigenvalues(const ZPoly& l1, const ZPoly& l2) {
    return OrbitPoint{l1 + l2, l1 * l2, 0, 0, std::array<ZPoly, 2>{l1, l2}};
}

ZPoly OrbitPoint::discriminant() const { return tr * tr - ZPoly(4) * det; }

std::string OrbitPoint::to_string() const {
    auto part = [](const ZPoly& g, std::int64_t shift) {
        std::string s = g.to_string();
        return shift == 0 ? s : "t^" + std::to_string(shift) + "*(" + s + ")";
    };
    std::string s = "(tr, det) = (" + part(tr, tr_shift) + ", " + part(det, det_shift) + ")";
    if (eigenvalues) s += " eigenvalues " + (*eigenvalues)[0].to_string() + ", " + (*eigenvalues)[1].to_string();
    return s;
}

namespace {

class FiberIntegrator {
public:
    FiberIntegrator(const FieldConfig& K, FiberWeight f, const FiberSupport& support, std::uint32_t max_digits)
        : K_(K), f_(f), support_(support), max_digits_(max_digits), factor_(mpq_class(K.p - 1, K.p)) {}

    FiberVolume run(const OrbitPoint& c) {
        result_.max_digits = max_digits_;
        FieldElement tr = FieldElement::from_poly(K_, c.tr) * pi_power(K_, c.tr_shift);
        FieldElement det = FieldElement::from_poly(K_, c.det) * pi_power(K_, c.det_shift);
        FieldElement disc = tr * tr - FieldElement::from_int(K_, 4) * det;
        Valuation dv = disc.ord();
        if (dv.is_infinite()) throw GL2Error("characteristic polynomial " + c.to_string() + " is not regular");
        if (dv.is_unknown()) throw GL2Error("valuation of the discriminant is not determined");
        Valuation tv = tr.ord(), detv = det.ord();
        if ((tv.is_finite() && tv.value < 0) || (detv.is_finite() && detv.value < 0)) return result_;  // empty fiber
        tr_ = tr;
        det_ = det;

        if (c.eigenvalues) {
            lambda_ = {FieldElement::from_poly(K_, (*c.eigenvalues)[0]), FieldElement::from_poly(K_, (*c.eigenvalues)[1])};
        } else if (dv.value % 2 == 0) {
            FieldElement u = disc * pi_power(K_, -dv.value);
            std::uint32_t res = u.ac();
            if (mod_pow(res, (K_.p - 1) / 2, K_.p) == 1) {
                std::uint32_t root = 1;
                while (root * root % K_.p != res) ++root;
                FieldElement s = hensel_lift({-u, FieldElement::zero(K_), FieldElement::from_int(K_, 1)}, root) *
                                 pi_power(K_, dv.value / 2);
                FieldElement half = FieldElement::inverse_of_int(K_, 2);
                lambda_ = {(tr + s) * half, (tr - s) * half};
            }
        }
        result_.split = lambda_.has_value();
        if (f_ == FiberWeight::VM && !lambda_)
            throw GL2Error("the weight needs a split characteristic polynomial: " + c.to_string());
        if (lambda_) {
            Valuation ev = (lambda_->at(0) - lambda_->at(1)).ord();
            if (!ev.is_finite()) throw GL2Error("eigenvalues are not separated at the working precision");
            delta_ = ev.value;
        }
        std::vector<std::uint32_t> digits;
        explore(digits);
        result_.value.canonicalize();
        result_.unknown_mass.canonicalize();
        return result_;
    }

private:
    const FieldConfig& K_;
    FiberWeight f_;
    FiberSupport support_;
    std::uint32_t max_digits_;
    mpq_class factor_;  // 1 - 1/q, the mass of {(b, c) : bc = R, ord c = j} for each j <= ord R
    FieldElement tr_, det_;
    std::optional<std::array<FieldElement, 2>> lambda_;
    std::int64_t delta_ = 0;  // ord(l1 - l2)
    FiberVolume result_;

    bool keep_j(std::int64_t j) const {
        if (!support_.c_unit) return true;
        return *support_.c_unit ? j == 0 : j > 0;
    }

    // Mass of the fiber over a point a with ord(a - l_i) = o_i, integrated over c.
    mpq_class phi(std::int64_t o1, std::int64_t o2) const {
        mpq_class s = 0;
        for (std::int64_t j = 0; j <= o1 + o2; ++j) {
            if (!keep_j(j)) continue;
            if (f_ == FiberWeight::One) s += 1;
            else s += j + delta_ - std::min(j, o1) - std::min(j, o2);  // ord det g_x - row minima
        }
        return factor_ * s;
    }

    mpq_class phi_nonsplit(std::int64_t ord_r) const {
        mpq_class s = 0;
        for (std::int64_t j = 0; j <= ord_r; ++j)
            if (keep_j(j)) s += 1;
        return factor_ * s;
    }

    // sum_{s >= m} (1 - 1/q) q^-s phi(s, other): phi is a polynomial of degree <= 2 in s there.
    mpq_class shell_tail(std::int64_t m, std::int64_t other) const {
        mpq_class F[4];
        for (int i = 0; i < 4; ++i) F[i] = phi(m + i, other);
        mpq_class d1 = F[1] - F[0], d2 = F[2] - 2 * F[1] + F[0], d3 = F[3] - 3 * F[2] + 3 * F[1] - F[0];
        if (d3 != 0) throw std::logic_error("shell integrand is not quadratic");
        mpq_class x(1, K_.p), y = 1 - x;
        mpq_class series = F[0] / y + d1 * x / (y * y) + d2 * x * x / (y * y * y);
        return factor_ * q_inverse_power(K_.p, m) * series;
    }

    // ord(center - l) >= m (in), or its exact value; nullopt when undecidable at precision.
    std::optional<std::int64_t> distance(const FieldElement& center, const FieldElement& l, std::int64_t m,
                                         bool& in) const {
        Valuation v = (center - l).ord();
        in = v.is_infinite() || v.value >= m;
        if (in) return m;
        if (v.is_unknown()) return std::nullopt;
        return v.value;
    }

    void resolve(std::size_t m, const mpq_class& mass) {
        result_.value += mass;
        result_.stabilized_at = std::max<std::uint32_t>(result_.stabilized_at, static_cast<std::uint32_t>(m));
    }

    void explore(std::vector<std::uint32_t>& digits) {
        const std::size_t m = digits.size();
        if (m >= 1 && support_.a_residue && digits[0] != *support_.a_residue % K_.p) return;
        const mpq_class vol = q_inverse_power(K_.p, static_cast<std::int64_t>(m));
        if (m >= 1 || !support_.a_residue) {
            if (lambda_) {
                FieldElement center = FieldElement::from_digits(K_, 0, digits, true);
                bool in1 = false, in2 = false;
                auto o1 = distance(center, (*lambda_)[0], static_cast<std::int64_t>(m), in1);
                auto o2 = distance(center, (*lambda_)[1], static_cast<std::int64_t>(m), in2);
                if (o1 && o2) {
                    if (!in1 && !in2) return resolve(m, vol * phi(*o1, *o2));
                    if (in1 != in2 && static_cast<std::int64_t>(m) > delta_)
                        return resolve(m, shell_tail(static_cast<std::int64_t>(m), in1 ? *o2 : *o1));
                }
            } else {
                FieldElement a = ball_representative(K_, 0, digits);
                Valuation r = (a * (tr_ - a) - det_).ord();
                if (r.is_finite()) return resolve(m, vol * phi_nonsplit(r.value));
            }
        }
        if (m >= max_digits_) {
            result_.unknown_mass += vol;
            return;
        }
        for (std::uint32_t d = 0; d < K_.p; ++d) {
            digits.push_back(d);
            explore(digits);
            digits.pop_back();
        }
    }
};

}  // namespace

FiberVolume fiber_volume(const FieldConfig& K, const OrbitPoint& c, FiberWeight f, std::uint32_t max_digits,
                         const FiberSupport& support) {
    if (K.p == 2) throw GL2Error("residue characteristic 2 is not supported");
    if (c.eigenvalues && (c.tr_shift != 0 || c.det_shift != 0 || (*c.eigenvalues)[0] + (*c.eigenvalues)[1] != c.tr ||
                          (*c.eigenvalues)[0] * (*c.eigenvalues)[1] != c.det))
        throw GL2Error("eigenvalues do not match the characteristic polynomial");
    return FiberIntegrator(K, f, support, max_digits).run(c);
}

FiberVolume weighted_orbital(const FieldConfig& K, const OrbitPoint& gamma, std::uint32_t max_digits) {
    return fiber_volume(K, gamma, FiberWeight::VM, max_digits);
}

}  // namespace dptk
