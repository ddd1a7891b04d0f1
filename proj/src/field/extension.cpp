#include <algorithm>
#include <numeric>
#include <sstream>

#include "dptk/field/field.hpp"

namespace dptk {

namespace {

// Dense polynomials over F_p, index = degree.
using Poly = std::vector<std::uint64_t>;

void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

Poly poly_mod(Poly a, const Poly& m, std::uint64_t p) {
    trim(a);
    std::uint64_t lead_inv = mod_inverse(static_cast<std::uint32_t>(m.back()), static_cast<std::uint32_t>(p));
    while (a.size() >= m.size()) {
        std::uint64_t c = a.back() * lead_inv % p;
        std::size_t shift = a.size() - m.size();
        for (std::size_t i = 0; i < m.size(); ++i) a[shift + i] = (a[shift + i] + (p - c) * m[i]) % p;
        trim(a);
    }
    return a;
}

Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& m, std::uint64_t p) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % p;
    return poly_mod(std::move(c), m, p);
}

Poly poly_powmod(Poly base, std::uint64_t e, const Poly& m, std::uint64_t p) {
    Poly r{1};
    base = poly_mod(std::move(base), m, p);
    while (e) {
        if (e & 1u) r = poly_mulmod(r, base, m, p);
        e >>= 1u;
        if (e) base = poly_mulmod(base, base, m, p);
    }
    return r;
}

Poly poly_gcd(Poly a, Poly b, std::uint64_t p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = poly_mod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

FieldElement teichmuller_root(const FieldConfig& cfg, std::uint32_t residue, std::uint32_t r) {
    if (cfg.characteristic == Characteristic::Positive) return FieldElement::from_int(cfg, residue);
    if (residue == 1) return FieldElement::from_int(cfg, 1);
    if (residue == cfg.p - 1 && r % 2 == 0) return FieldElement::from_int(cfg, -1);
    // Root of X^r - 1 lifting the residue.
    std::vector<FieldElement> coeffs(r + 1, FieldElement::zero(cfg));
    coeffs[0] = FieldElement::from_int(cfg, -1);
    coeffs[r] = FieldElement::from_int(cfg, 1);
    return hensel_lift(coeffs, residue);
}

}  // namespace

bool kummer_irreducible(std::uint32_t p, std::uint32_t r, std::int64_t a) {
    std::uint64_t abar = reduce_mod(a, p);
    if (abar == 0) return r == 1;
    if (r == 1) return true;
    Poly f(r + 1, 0);
    f[0] = (p - abar) % p;
    f[r] = 1;
    Poly xpow{0, 1};
    for (std::uint32_t i = 1; i <= r / 2; ++i) {
        xpow = poly_powmod(xpow, p, f, p);
        Poly h = xpow;
        h.resize(std::max<std::size_t>(h.size(), 2), 0);
        h[1] = (h[1] + p - 1) % p;
        Poly g = poly_gcd(f, h, p);
        if (g.size() > 1) return false;
    }
    return true;
}

std::int64_t find_irreducible_kummer_unit(std::uint32_t p, std::uint32_t r) {
    for (std::int64_t a = 2; a < static_cast<std::int64_t>(p); ++a)
        if (kummer_irreducible(p, r, a)) return a;
    throw FieldError("no unit a with x^" + std::to_string(r) + " - a irreducible mod " + std::to_string(p));
}

ExtensionConfig make_extension(const FieldConfig& cfg, std::uint32_t r, std::int64_t a, bool need_conjugation) {
    if (r < 1) throw FieldError("extension degree must be positive");
    if (reduce_mod(a, cfg.p) == 0) throw FieldError("x^r - a needs a unit a");
    if (!kummer_irreducible(cfg.p, r, a))
        throw FieldError("x^" + std::to_string(r) + " - " + std::to_string(a) + " is reducible mod " + std::to_string(cfg.p));
    ExtensionConfig ext{cfg, r, a, std::nullopt};
    if ((cfg.p - 1) % r == 0) {
        for (std::uint32_t z = 1; z < cfg.p; ++z) {
            if (mod_pow(z, r, cfg.p) != 1) continue;
            bool primitive = true;
            for (std::uint32_t d = 1; d < r; ++d)
                if (r % d == 0 && mod_pow(z, d, cfg.p) == 1) primitive = false;
            if (primitive) {
                ext.zeta_residue = z;
                break;
            }
        }
    } else if (need_conjugation) {
        throw FieldError("conjugation x -> zeta x needs r | p - 1");
    }
    return ext;
}

ExtElement::ExtElement(const ExtensionConfig& ext, std::vector<FieldElement> coords)
    : ext_(ext), coords_(std::move(coords)) {
    if (coords_.size() != ext_.degree) throw FieldError("wrong number of coordinates for extension element");
}

ExtElement ExtElement::from_base(const ExtensionConfig& ext, const FieldElement& e) {
    std::vector<FieldElement> c(ext.degree, FieldElement::zero(ext.base));
    c[0] = e;
    return ExtElement(ext, std::move(c));
}

ExtElement ExtElement::generator(const ExtensionConfig& ext) {
    std::vector<FieldElement> c(ext.degree, FieldElement::zero(ext.base));
    if (ext.degree == 1) c[0] = FieldElement::from_int(ext.base, ext.a);
    else c[1] = FieldElement::from_int(ext.base, 1);
    return ExtElement(ext, std::move(c));
}

Valuation ExtElement::ord() const {
    // 1, x, ..., x^(r-1) is an integral basis with independent reductions, so the
    // valuation is the minimum over coordinates.
    std::optional<std::int64_t> finite;
    std::optional<std::int64_t> unknown_lower;
    for (const auto& c : coords_) {
        auto o = c.ord();
        if (o.is_finite()) finite = finite ? std::min(*finite, o.value) : o.value;
        if (o.is_unknown()) unknown_lower = unknown_lower ? std::min(*unknown_lower, o.value) : o.value;
    }
    if (finite && (!unknown_lower || *unknown_lower >= *finite)) return Valuation::finite(*finite);
    if (unknown_lower) return Valuation::unknown(finite ? std::min(*finite, *unknown_lower) : *unknown_lower);
    return Valuation::infinite();
}

std::vector<std::uint32_t> ExtElement::ac() const {
    auto o = ord();
    std::vector<std::uint32_t> out(ext_.degree, 0);
    if (o.is_infinite()) return out;
    if (o.is_unknown()) throw PrecisionError("angular component of an extension element with unknown valuation");
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        auto d = coords_[i].digit(o.value);
        if (!d) throw PrecisionError("angular component beyond tracked precision");
        out[i] = *d;
    }
    return out;
}

ExtElement ExtElement::operator-() const {
    std::vector<FieldElement> c;
    for (const auto& x : coords_) c.push_back(-x);
    return ExtElement(ext_, std::move(c));
}

ExtElement operator+(const ExtElement& a, const ExtElement& b) {
    std::vector<FieldElement> c;
    for (std::size_t i = 0; i < a.coords_.size(); ++i) c.push_back(a.coords_[i] + b.coords_.at(i));
    return ExtElement(a.ext_, std::move(c));
}

ExtElement operator-(const ExtElement& a, const ExtElement& b) { return a + (-b); }

ExtElement operator*(const ExtElement& a, const ExtElement& b) {
    const auto& ext = a.ext_;
    const std::size_t r = ext.degree;
    FieldElement av = FieldElement::from_int(ext.base, ext.a);
    std::vector<FieldElement> c(r, FieldElement::zero(ext.base));
    for (std::size_t i = 0; i < r; ++i) {
        if (a.coords_[i].is_exact_zero()) continue;
        for (std::size_t j = 0; j < r; ++j) {
            if (b.coords_[j].is_exact_zero()) continue;
            FieldElement prod = a.coords_[i] * b.coords_[j];
            if (i + j < r) c[i + j] = c[i + j] + prod;
            else c[i + j - r] = c[i + j - r] + av * prod;
        }
    }
    return ExtElement(ext, std::move(c));
}

FieldElement ExtElement::norm() const {
    const std::size_t r = ext_.degree;
    const FieldConfig& cfg = ext_.base;
    if (r == 1) return coords_[0];
    if (r == 2) return coords_[0] * coords_[0] - FieldElement::from_int(cfg, ext_.a) * coords_[1] * coords_[1];
    // Determinant of multiplication-by-e in the basis 1, x, ..., x^(r-1), by Leibniz.
    std::vector<std::vector<FieldElement>> mat;
    ExtElement col = *this;
    ExtElement x = generator(ext_);
    for (std::size_t j = 0; j < r; ++j) {
        mat.push_back(col.coords_);
        col = col * x;
    }
    std::vector<std::size_t> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    FieldElement det = FieldElement::zero(cfg);
    do {
        int inversions = 0;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i + 1; j < r; ++j) inversions += perm[i] > perm[j];
        FieldElement term = FieldElement::from_int(cfg, inversions % 2 ? -1 : 1);
        for (std::size_t j = 0; j < r; ++j) term = term * mat[j][perm[j]];
        det = det + term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

FieldElement ExtElement::trace() const {
    return FieldElement::from_int(ext_.base, static_cast<std::int64_t>(ext_.degree)) * coords_[0];
}

ExtElement ExtElement::conjugate() const {
    if (!ext_.zeta_residue) throw FieldError("conjugation needs r | p - 1");
    FieldElement zeta = teichmuller_root(ext_.base, *ext_.zeta_residue, ext_.degree);
    std::vector<FieldElement> c;
    FieldElement z = FieldElement::from_int(ext_.base, 1);
    for (const auto& x : coords_) {
        c.push_back(x * z);
        z = z * zeta;
    }
    return ExtElement(ext_, std::move(c));
}

std::string ExtElement::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (i) os << " + ";
        os << "(" << coords_[i].to_string() << ")";
        if (i == 1) os << "*x";
        if (i > 1) os << "*x^" << i;
    }
    return os.str();
}

}  // namespace dptk
