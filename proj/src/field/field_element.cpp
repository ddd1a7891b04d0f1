#include <gmpxx.h>

#include <algorithm>
#include <sstream>

#include "dptk/field/field.hpp"

namespace dptk {

namespace {
constexpr std::int64_t kInfinitePrecision = std::numeric_limits<std::int64_t>::max();
}

FieldConfig FieldConfig::padic(std::uint32_t p, std::uint32_t precision) {
    if (!is_prime(p) || p == 2) throw FieldError("residue characteristic must be an odd prime");
    if (precision == 0) throw FieldError("working precision must be positive");
    return {Characteristic::Zero, p, precision};
}

FieldConfig FieldConfig::laurent(std::uint32_t p, std::uint32_t precision) {
    if (!is_prime(p) || p == 2) throw FieldError("residue characteristic must be an odd prime");
    if (precision == 0) throw FieldError("working precision must be positive");
    return {Characteristic::Positive, p, precision};
}

std::string FieldConfig::describe() const {
    return characteristic == Characteristic::Zero ? "Q_" + std::to_string(p) : "F_" + std::to_string(p) + "((t))";
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::string Valuation::to_string() const {
    switch (kind) {
        case Kind::Finite: return std::to_string(value);
        case Kind::Infinite: return "inf";
        case Kind::Unknown: return ">=" + std::to_string(value);
    }
    return "?";
}

std::uint32_t reduce_mod(std::int64_t a, std::uint32_t p) {
    std::int64_t r = a % static_cast<std::int64_t>(p);
    return static_cast<std::uint32_t>(r < 0 ? r + p : r);
}

std::uint32_t mod_pow(std::uint64_t a, std::uint64_t e, std::uint32_t p) {
    std::uint64_t r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1u) r = r * a % p;
        a = a * a % p;
        e >>= 1u;
    }
    return static_cast<std::uint32_t>(r);
}

std::uint32_t mod_inverse(std::uint32_t a, std::uint32_t p) {
    if (a % p == 0) throw DivisionByZero("residue 0 has no inverse");
    return mod_pow(a, p - 2, p);
}

using Digits = std::vector<std::uint32_t>;

struct FieldOps {
    static FieldElement make(const FieldConfig& cfg, FieldElement::Kind k, std::int64_t v, Digits d,
                             std::uint32_t tail = 0) {
        FieldElement e;
        e.cfg_ = cfg;
        e.kind_ = k;
        e.val_ = v;
        e.digits_ = std::move(d);
        e.tail_ = tail;
        return e;
    }

    static mpz_class power(std::uint32_t p, std::int64_t n) {
        mpz_class r;
        mpz_ui_pow_ui(r.get_mpz_t(), p, static_cast<unsigned long>(n));
        return r;
    }

    static mpz_class to_mpz(const Digits& d, std::uint32_t p) {
        mpz_class r = 0;
        for (auto it = d.rbegin(); it != d.rend(); ++it) {
            r *= p;
            r += *it;
        }
        return r;
    }

    /// Digits of w mod p^len (w >= 0).
    static Digits from_mpz(mpz_class w, std::uint32_t p, std::int64_t len) {
        Digits d(static_cast<std::size_t>(len), 0);
        for (std::int64_t i = 0; i < len && w != 0; ++i) {
            d[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(mpz_fdiv_q_ui(w.get_mpz_t(), w.get_mpz_t(), p));
        }
        return d;
    }

    static Digits window(const FieldElement& e, std::int64_t from, std::int64_t to) {
        Digits d;
        d.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, to - from)));
        for (std::int64_t k = from; k < to; ++k) {
            auto x = e.digit(k);
            if (!x) throw PrecisionError("digit requested beyond tracked precision");
            d.push_back(*x);
        }
        return d;
    }

    static FieldElement approx(const FieldConfig& cfg, std::int64_t start, const Digits& w) {
        std::size_t i = 0;
        while (i < w.size() && w[i] == 0) ++i;
        std::int64_t abs = start + static_cast<std::int64_t>(w.size());
        if (i == w.size()) return make(cfg, FieldElement::Kind::Approx, abs, {});
        return make(cfg, FieldElement::Kind::Approx, start + static_cast<std::int64_t>(i),
                    Digits(w.begin() + static_cast<std::ptrdiff_t>(i), w.end()));
    }

    static FieldElement exact_poly(const FieldConfig& cfg, Digits c, std::int64_t v) {
        std::size_t i = 0;
        while (i < c.size() && c[i] == 0) ++i;
        if (i == c.size()) return FieldElement::zero(cfg);
        while (!c.empty() && c.back() == 0) c.pop_back();
        return make(cfg, FieldElement::Kind::Exact, v + static_cast<std::int64_t>(i),
                    Digits(c.begin() + static_cast<std::ptrdiff_t>(i), c.end()));
    }

    static FieldElement exact_int(const FieldConfig& cfg, mpz_class n, std::int64_t v) {
        if (n == 0) return FieldElement::zero(cfg);
        const std::uint32_t p = cfg.p;
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
            ++v;
        }
        if (n > 0) {
            Digits d;
            while (n != 0) d.push_back(static_cast<std::uint32_t>(mpz_fdiv_q_ui(n.get_mpz_t(), n.get_mpz_t(), p)));
            return make(cfg, FieldElement::Kind::Exact, v, std::move(d), 0);
        }
        mpz_class mag = -n;
        std::int64_t len = static_cast<std::int64_t>(mpz_sizeinbase(mag.get_mpz_t(), p)) + 1;
        Digits d = from_mpz(n + power(p, len), p, len);
        while (d.size() > 1 && d.back() == p - 1) d.pop_back();
        return make(cfg, FieldElement::Kind::Exact, v, std::move(d), p - 1);
    }

    /// Exact characteristic-zero value as n * p^v.
    static mpz_class exact_value(const FieldElement& e) {
        mpz_class n = to_mpz(e.digits_, e.cfg_.p);
        if (e.tail_ != 0) n -= power(e.cfg_.p, static_cast<std::int64_t>(e.digits_.size()));
        return n;
    }

    static Digits poly_mul_mod(const Digits& a, const Digits& b, std::uint32_t p, std::size_t limit) {
        std::size_t n = std::min(limit, a.size() + b.size() - 1);
        std::vector<std::uint64_t> c(n, 0);
        for (std::size_t i = 0; i < a.size() && i < n; ++i) {
            if (a[i] == 0) continue;
            for (std::size_t j = 0; j < b.size() && i + j < n; ++j) c[i + j] = (c[i + j] + std::uint64_t(a[i]) * b[j]) % p;
        }
        return Digits(c.begin(), c.end());
    }
};

FieldElement FieldElement::zero(const FieldConfig& cfg) { return FieldOps::make(cfg, Kind::ExactZero, 0, {}); }

FieldElement FieldElement::from_int(const FieldConfig& cfg, std::int64_t n) { return from_poly(cfg, ZPoly(n)); }

FieldElement FieldElement::from_poly(const FieldConfig& cfg, const ZPoly& g) {
    if (cfg.characteristic == Characteristic::Positive) {
        Digits c;
        for (int i = 0; i <= g.degree(); ++i) c.push_back(reduce_mod(g.coeff(i), cfg.p));
        return FieldOps::exact_poly(cfg, std::move(c), 0);
    }
    mpz_class n = 0;
    for (int i = g.degree(); i >= 0; --i) {
        n *= cfg.p;
        n += mpz_class(std::to_string(g.coeff(i)));
    }
    return FieldOps::exact_int(cfg, n, 0);
}

FieldElement FieldElement::inverse_of_int(const FieldConfig& cfg, std::int64_t n) {
    if (reduce_mod(n, cfg.p) == 0)
        throw FieldError("constant 1/" + std::to_string(n) + " is not defined in residue characteristic " +
                         std::to_string(cfg.p));
    if (cfg.characteristic == Characteristic::Positive)
        return from_int(cfg, mod_inverse(reduce_mod(n, cfg.p), cfg.p));
    return from_int(cfg, n).inverse();
}

FieldElement FieldElement::from_digits(const FieldConfig& cfg, std::int64_t v0, const std::vector<std::uint32_t>& digits,
                                       bool exact) {
    for (auto d : digits)
        if (d >= cfg.p) throw FieldError("digit out of range");
    if (!exact) return FieldOps::approx(cfg, v0, digits);
    if (cfg.characteristic == Characteristic::Positive) return FieldOps::exact_poly(cfg, digits, v0);
    return FieldOps::exact_int(cfg, FieldOps::to_mpz(digits, cfg.p), v0);
}

FieldElement FieldElement::exhausted(const FieldConfig& cfg, std::int64_t v0) {
    return FieldOps::make(cfg, Kind::Approx, v0, {});
}

FieldElement FieldElement::uniformizer(const FieldConfig& cfg) { return from_digits(cfg, 1, {1}, true); }

std::int64_t FieldElement::relative_precision() const {
    return kind_ == Kind::Approx ? static_cast<std::int64_t>(digits_.size()) : kInfinitePrecision;
}

std::int64_t FieldElement::absolute_precision() const {
    return kind_ == Kind::Approx ? val_ + static_cast<std::int64_t>(digits_.size()) : kInfinitePrecision;
}

std::optional<std::uint32_t> FieldElement::digit(std::int64_t k) const {
    if (kind_ == Kind::ExactZero) return 0u;
    if (k < val_) return 0u;
    std::int64_t idx = k - val_;
    if (idx < static_cast<std::int64_t>(digits_.size())) return digits_[static_cast<std::size_t>(idx)];
    if (kind_ == Kind::Exact) return tail_;
    return std::nullopt;
}

Valuation FieldElement::ord() const {
    if (kind_ == Kind::ExactZero) return Valuation::infinite();
    if (is_exhausted()) return Valuation::unknown(val_);
    return Valuation::finite(val_);
}

std::uint32_t FieldElement::ac() const {
    if (kind_ == Kind::ExactZero) return 0;
    if (is_exhausted()) throw PrecisionError("angular component of an element with unknown valuation");
    return digits_.front();
}

FieldElement FieldElement::operator-() const {
    const std::uint32_t p = cfg_.p;
    if (kind_ == Kind::ExactZero || is_exhausted()) return *this;
    if (cfg_.characteristic == Characteristic::Positive) {
        Digits d(digits_);
        for (auto& x : d) x = (p - x) % p;
        return FieldOps::make(cfg_, kind_, val_, std::move(d), tail_);
    }
    if (kind_ == Kind::Exact) return FieldOps::exact_int(cfg_, -FieldOps::exact_value(*this), val_);
    auto len = static_cast<std::int64_t>(digits_.size());
    mpz_class m = FieldOps::power(p, len);
    mpz_class w = (m - FieldOps::to_mpz(digits_, p)) % m;
    return FieldOps::approx(cfg_, val_, FieldOps::from_mpz(w, p, len));
}

FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    if (!(a.cfg_ == b.cfg_)) throw FieldError("operands from different fields");
    if (a.is_exact_zero()) return b;
    if (b.is_exact_zero()) return a;
    const FieldConfig& cfg = a.cfg_;
    const std::uint32_t p = cfg.p;
    std::int64_t m = std::min(a.val_, b.val_);
    if (a.is_exact() && b.is_exact()) {
        if (cfg.characteristic == Characteristic::Positive) {
            std::int64_t top = std::max(a.val_ + static_cast<std::int64_t>(a.digits_.size()),
                                        b.val_ + static_cast<std::int64_t>(b.digits_.size()));
            Digits wa = FieldOps::window(a, m, top), wb = FieldOps::window(b, m, top);
            for (std::size_t i = 0; i < wa.size(); ++i) wa[i] = (wa[i] + wb[i]) % p;
            return FieldOps::exact_poly(cfg, std::move(wa), m);
        }
        mpz_class n = FieldOps::exact_value(a) * FieldOps::power(p, a.val_ - m) +
                      FieldOps::exact_value(b) * FieldOps::power(p, b.val_ - m);
        return FieldOps::exact_int(cfg, n, m);
    }
    std::int64_t abs = std::min(a.absolute_precision(), b.absolute_precision());
    if (m >= abs) return FieldElement::exhausted(cfg, abs);
    Digits wa = FieldOps::window(a, m, abs), wb = FieldOps::window(b, m, abs);
    if (cfg.characteristic == Characteristic::Positive) {
        for (std::size_t i = 0; i < wa.size(); ++i) wa[i] = (wa[i] + wb[i]) % p;
        return FieldOps::approx(cfg, m, wa);
    }
    std::int64_t len = abs - m;
    mpz_class w = (FieldOps::to_mpz(wa, p) + FieldOps::to_mpz(wb, p)) % FieldOps::power(p, len);
    return FieldOps::approx(cfg, m, FieldOps::from_mpz(w, p, len));
}

FieldElement operator-(const FieldElement& a, const FieldElement& b) { return a + (-b); }

FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    if (!(a.cfg_ == b.cfg_)) throw FieldError("operands from different fields");
    const FieldConfig& cfg = a.cfg_;
    if (a.is_exact_zero() || b.is_exact_zero()) return FieldElement::zero(cfg);
    const std::uint32_t p = cfg.p;
    std::int64_t v = a.val_ + b.val_;
    if (a.is_exact() && b.is_exact()) {
        if (cfg.characteristic == Characteristic::Positive)
            return FieldOps::exact_poly(cfg, FieldOps::poly_mul_mod(a.digits_, b.digits_, p, SIZE_MAX), v);
        return FieldOps::exact_int(cfg, FieldOps::exact_value(a) * FieldOps::exact_value(b), v);
    }
    std::int64_t r = std::min(a.relative_precision(), b.relative_precision());
    if (r == 0) return FieldElement::exhausted(cfg, v);
    Digits wa = FieldOps::window(a, a.val_, a.val_ + r), wb = FieldOps::window(b, b.val_, b.val_ + r);
    if (cfg.characteristic == Characteristic::Positive)
        return FieldOps::approx(cfg, v, FieldOps::poly_mul_mod(wa, wb, p, static_cast<std::size_t>(r)));
    mpz_class w = FieldOps::to_mpz(wa, p) * FieldOps::to_mpz(wb, p) % FieldOps::power(p, r);
    return FieldOps::approx(cfg, v, FieldOps::from_mpz(w, p, r));
}

FieldElement FieldElement::inverse() const {
    if (kind_ == Kind::ExactZero) throw DivisionByZero("inverse of exact zero");
    if (is_exhausted()) throw PrecisionError("inverse of an element whose valuation is unknown (precision exhausted)");
    const std::uint32_t p = cfg_.p;
    if (kind_ == Kind::Exact && digits_.size() == 1) {
        if (cfg_.characteristic == Characteristic::Positive)
            return FieldOps::make(cfg_, Kind::Exact, -val_, {mod_inverse(digits_[0], p)}, 0);
        if (digits_[0] == 1 && tail_ == 0) return FieldOps::make(cfg_, Kind::Exact, -val_, {1}, 0);
        if (digits_[0] == p - 1 && tail_ == p - 1) return FieldOps::make(cfg_, Kind::Exact, -val_, {p - 1}, p - 1);
    }
    std::int64_t r = std::min<std::int64_t>(relative_precision(), cfg_.precision);
    Digits w = FieldOps::window(*this, val_, val_ + r);
    if (cfg_.characteristic == Characteristic::Positive) {
        // Power series long division.
        Digits inv(static_cast<std::size_t>(r), 0);
        std::uint64_t lead_inv = mod_inverse(w[0], p);
        for (std::int64_t k = 0; k < r; ++k) {
            std::uint64_t s = k == 0 ? 1 : 0;
            for (std::int64_t j = 1; j <= k; ++j)
                s = (s + std::uint64_t(p - w[static_cast<std::size_t>(j)]) * inv[static_cast<std::size_t>(k - j)]) % p;
            inv[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(s * lead_inv % p);
        }
        return FieldOps::approx(cfg_, -val_, inv);
    }
    mpz_class m = FieldOps::power(p, r);
    mpz_class x = FieldOps::to_mpz(w, p), y;
    mpz_invert(y.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
    return FieldOps::approx(cfg_, -val_, FieldOps::from_mpz(y, p, r));
}

FieldElement FieldElement::pow(unsigned n) const {
    FieldElement r = from_int(cfg_, 1), base = *this;
    while (n) {
        if (n & 1u) r = r * base;
        n >>= 1u;
        if (n) base = base * base;
    }
    return r;
}

FieldElement FieldElement::truncated(std::int64_t abs) const {
    if (abs >= absolute_precision()) return *this;
    if (kind_ == Kind::ExactZero || abs <= val_) return exhausted(cfg_, abs);
    return FieldOps::approx(cfg_, val_, FieldOps::window(*this, val_, abs));
}

bool FieldElement::identical(const FieldElement& o) const {
    return cfg_ == o.cfg_ && kind_ == o.kind_ && (kind_ == Kind::ExactZero || (val_ == o.val_ && digits_ == o.digits_ && tail_ == o.tail_));
}

bool FieldElement::compatible(const FieldElement& o) const {
    if (is_exact() && o.is_exact()) return identical(o);
    std::int64_t abs = std::min(absolute_precision(), o.absolute_precision());
    std::int64_t lo = std::min(kind_ == Kind::ExactZero ? abs : val_, o.kind_ == Kind::ExactZero ? abs : o.val_);
    for (std::int64_t k = lo; k < abs; ++k)
        if (*digit(k) != *o.digit(k)) return false;
    return true;
}

std::string FieldElement::to_string() const {
    const bool zero_char = cfg_.characteristic == Characteristic::Zero;
    const std::string base = zero_char ? std::to_string(cfg_.p) : "t";
    auto monomial = [&](std::int64_t k) -> std::string {
        if (k == 0) return "";
        return k == 1 ? base : base + "^" + std::to_string(k);
    };
    if (kind_ == Kind::ExactZero) return "0";
    std::ostringstream os;
    if (kind_ == Kind::Exact && zero_char) {
        os << FieldOps::exact_value(*this).get_str();
        if (val_ != 0) os << "*" << monomial(val_);
        return os.str();
    }
    bool first = true;
    for (std::size_t i = 0; i < digits_.size(); ++i) {
        if (digits_[i] == 0) continue;
        std::int64_t k = val_ + static_cast<std::int64_t>(i);
        if (!first) os << " + ";
        first = false;
        std::string m = monomial(k);
        if (m.empty()) os << digits_[i];
        else if (digits_[i] == 1) os << m;
        else os << digits_[i] << "*" << m;
    }
    if (kind_ == Kind::Approx) {
        if (!first) os << " + ";
        os << "O(" << (absolute_precision() == 0 ? "1" : monomial(absolute_precision())) << ")";
    }
    return os.str();
}

FieldElement interpret_poly(const FieldConfig& cfg, const ZPoly& g) { return FieldElement::from_poly(cfg, g); }

FieldElement evaluate_poly(const std::vector<FieldElement>& coeffs, const FieldElement& x) {
    if (coeffs.empty()) return FieldElement::zero(x.config());
    FieldElement acc = coeffs.back();
    for (auto it = coeffs.rbegin() + 1; it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

FieldElement hensel_lift(const std::vector<FieldElement>& coeffs, std::uint32_t residue_root) {
    if (coeffs.empty()) throw FieldError("empty polynomial");
    const FieldConfig& cfg = coeffs.front().config();
    for (const auto& c : coeffs) {
        auto o = c.ord();
        if (o.is_finite() && o.value < 0) throw FieldError("polynomial coefficients must be integral");
        if (o.is_unknown() && o.value < 0) throw PrecisionError("coefficient valuation unknown");
    }
    std::vector<FieldElement> deriv;
    for (std::size_t i = 1; i < coeffs.size(); ++i)
        deriv.push_back(coeffs[i] * FieldElement::from_int(cfg, static_cast<std::int64_t>(i)));
    FieldElement x = FieldElement::from_int(cfg, residue_root % cfg.p);
    auto f0 = evaluate_poly(coeffs, x).ord();
    if (f0.is_finite() && f0.value <= 0) throw FieldError("not a residue root");
    if (f0.is_unknown() && f0.value <= 0) throw PrecisionError("cannot decide residue root");
    auto d0 = evaluate_poly(deriv, x).ord();
    if (!(d0.is_finite() && d0.value == 0)) throw FieldError("residue root is not simple");
    const std::int64_t target = cfg.precision;
    for (int iter = 0; iter < 64; ++iter) {
        FieldElement fx = evaluate_poly(coeffs, x);
        if (fx.is_exact_zero()) return x;
        auto o = fx.ord();
        if (o.value >= target) break;
        x = x - fx * evaluate_poly(deriv, x).inverse();
    }
    return x.truncated(target);
}

}  // namespace dptk
