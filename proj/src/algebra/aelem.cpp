#include "dptk/algebra/aelem.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace dptk {

namespace {

// Dense polynomial with coefficient i of x^i.
template <typename T>
void trim(std::vector<T>& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

// Numerator as a dense polynomial after dividing by L^min_exponent.
std::vector<mpz_class> dense(const std::map<std::int64_t, mpz_class>& num, std::int64_t& shift) {
    std::vector<mpz_class> out;
    if (num.empty()) {
        shift = 0;
        return out;
    }
    shift = num.begin()->first;
    out.resize(static_cast<std::size_t>(num.rbegin()->first - shift + 1));
    for (const auto& [e, c] : num) out[static_cast<std::size_t>(e - shift)] = c;
    return out;
}

std::map<std::int64_t, mpz_class> sparse(const std::vector<mpz_class>& d, std::int64_t shift) {
    std::map<std::int64_t, mpz_class> out;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] != 0) out[shift + static_cast<std::int64_t>(i)] = d[i];
    return out;
}

// Exact division by x^i - 1; nullopt when the remainder is nonzero.
std::optional<std::vector<mpz_class>> divide_cyclic(const std::vector<mpz_class>& a, unsigned i) {
    if (a.size() <= i) return std::nullopt;
    // a = (x^i - 1) q  <=>  q_k = q_{k+i} - a_{k+i}... solve from the top: a_{k+i} = q_k - q_{k+i}.
    std::vector<mpz_class> rem = a;
    std::vector<mpz_class> q(a.size() - i);
    for (std::size_t k = a.size(); k-- > i;) {
        mpz_class c = rem[k];
        q[k - i] = c;
        rem[k] -= c;
        rem[k - i] += c;
    }
    for (const auto& r : rem)
        if (r != 0) return std::nullopt;
    return q;
}

std::map<std::int64_t, mpz_class> mul_sparse(const std::map<std::int64_t, mpz_class>& a,
                                              const std::map<std::int64_t, mpz_class>& b) {
    std::map<std::int64_t, mpz_class> out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) out[ea + eb] += ca * cb;
    for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
    return out;
}

std::map<std::int64_t, mpz_class> cyclic_factor(unsigned i) {
    return {{0, mpz_class(-1)}, {static_cast<std::int64_t>(i), mpz_class(1)}};
}

// Numerator of a over the denominator `target`, which must contain a's denominator.
std::map<std::int64_t, mpz_class> lift_numerator(const AElem& a, const std::map<unsigned, unsigned>& target) {
    auto num = a.numerator();
    for (const auto& [i, m] : target) {
        unsigned have = 0;
        if (auto it = a.denominator().find(i); it != a.denominator().end()) have = it->second;
        for (unsigned k = have; k < m; ++k) num = mul_sparse(num, cyclic_factor(i));
    }
    return num;
}

// ---- Sturm machinery over Q ----
using QPoly = std::vector<mpq_class>;

QPoly qpoly(const std::vector<mpz_class>& a) {
    QPoly out;
    for (const auto& c : a) out.emplace_back(c);
    trim(out);
    return out;
}

QPoly derivative(const QPoly& a) {
    QPoly d;
    for (std::size_t i = 1; i < a.size(); ++i) d.push_back(a[i] * static_cast<long>(i));
    trim(d);
    return d;
}

// Returns quotient, sets rem.
QPoly divmod(QPoly a, const QPoly& b, QPoly& rem) {
    trim(a);
    QPoly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0);
    while (a.size() >= b.size() && !a.empty()) {
        mpq_class c = a.back() / b.back();
        std::size_t shift = a.size() - b.size();
        q[shift] = c;
        for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= c * b[i];
        a.pop_back();
        trim(a);
    }
    rem = a;
    trim(q);
    return q;
}

QPoly gcd(QPoly a, QPoly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        QPoly r;
        divmod(a, b, r);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        mpq_class lc = a.back();
        for (auto& c : a) c /= lc;
    }
    return a;
}

int sign_at(const QPoly& a, const mpq_class& x) {
    mpq_class v = 0;
    for (std::size_t i = a.size(); i-- > 0;) v = v * x + a[i];
    return sgn(v);
}

int sign_at_infinity(const QPoly& a) { return a.empty() ? 0 : sgn(a.back()); }

// Number of distinct roots in (lo, infinity) of a squarefree polynomial.
int roots_above(const QPoly& f, const mpq_class& lo) {
    if (f.size() <= 1) return 0;
    std::vector<QPoly> seq{f, derivative(f)};
    while (seq.back().size() > 1) {
        QPoly r;
        divmod(seq[seq.size() - 2], seq.back(), r);
        for (auto& c : r) c = -c;
        if (r.empty()) break;
        seq.push_back(r);
    }
    auto changes = [&](auto signer) {
        int v = 0, last = 0;
        for (const auto& p : seq) {
            int s = signer(p);
            if (s == 0) continue;
            if (last != 0 && s != last) ++v;
            last = s;
        }
        return v;
    };
    return changes([&](const QPoly& p) { return sign_at(p, lo); }) - changes(sign_at_infinity);
}

// Yun's squarefree factorization: returns (factor, multiplicity) pairs.
std::vector<std::pair<QPoly, unsigned>> squarefree(const QPoly& f) {
    std::vector<std::pair<QPoly, unsigned>> out;
    QPoly a = gcd(f, derivative(f));
    QPoly r;
    QPoly b = divmod(f, a, r);
    QPoly c = divmod(derivative(f), a, r);
    QPoly bp = derivative(b);
    QPoly d(std::max(c.size(), bp.size()));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (i < c.size() ? c[i] : 0) - (i < bp.size() ? bp[i] : 0);
    trim(d);
    unsigned k = 1;
    while (b.size() > 1) {
        QPoly g = gcd(b, d);
        out.emplace_back(g, k);
        b = divmod(b, g, r);
        c = divmod(d, g, r);
        bp = derivative(b);
        d.assign(std::max(c.size(), bp.size()), 0);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (i < c.size() ? c[i] : 0) - (i < bp.size() ? bp[i] : 0);
        trim(d);
        ++k;
    }
    return out;
}

std::string monomial(std::int64_t e) {
    if (e == 0) return "1";
    if (e == 1) return "L";
    return "L^" + std::to_string(e);
}

}  // namespace

AElem::AElem(std::int64_t n) {
    if (n != 0) num_[0] = mpz_class(static_cast<long>(n));
}

AElem AElem::L() { return L_pow(1); }

AElem AElem::L_pow(std::int64_t k) {
    AElem a;
    a.num_[k] = 1;
    return a;
}

AElem AElem::inv_L_power_minus_one(unsigned i) {
    if (i == 0) throw AlgebraError("L^0 - 1 is zero");
    AElem a(1);
    a.den_[i] = 1;
    return a;
}

AElem AElem::from_parts(std::map<std::int64_t, mpz_class> numerator, std::map<unsigned, unsigned> denominator) {
    AElem a;
    for (auto& [e, c] : numerator)
        if (c != 0) a.num_[e] = c;
    for (auto [i, m] : denominator) {
        if (i == 0) throw AlgebraError("L^0 - 1 is zero");
        if (m) a.den_[i] = m;
    }
    a.normalize();
    return a;
}

void AElem::normalize() {
    for (auto it = num_.begin(); it != num_.end();) it = it->second == 0 ? num_.erase(it) : std::next(it);
    if (num_.empty()) {
        den_.clear();
        return;
    }
    std::int64_t shift = 0;
    auto d = dense(num_, shift);
    for (auto it = den_.rbegin(); it != den_.rend(); ++it) {
        while (it->second > 0) {
            auto q = divide_cyclic(d, it->first);
            if (!q) break;
            d = std::move(*q);
            --it->second;
        }
    }
    for (auto it = den_.begin(); it != den_.end();) it = it->second == 0 ? den_.erase(it) : std::next(it);
    num_ = sparse(d, shift);
}

AElem AElem::operator-() const {
    AElem a = *this;
    for (auto& [e, c] : a.num_) c = -c;
    return a;
}

AElem operator+(const AElem& a, const AElem& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    std::map<unsigned, unsigned> den = a.den_;
    for (auto [i, m] : b.den_) den[i] = std::max(den[i], m);
    auto na = lift_numerator(a, den), nb = lift_numerator(b, den);
    for (auto& [e, c] : nb) na[e] += c;
    AElem r;
    r.num_ = std::move(na);
    r.den_ = std::move(den);
    r.normalize();
    return r;
}

AElem operator-(const AElem& a, const AElem& b) { return a + (-b); }

AElem operator*(const AElem& a, const AElem& b) {
    if (a.is_zero() || b.is_zero()) return AElem();
    AElem r;
    r.num_ = mul_sparse(a.num_, b.num_);
    r.den_ = a.den_;
    for (auto [i, m] : b.den_) r.den_[i] += m;
    r.normalize();
    return r;
}

AElem AElem::pow(unsigned n) const {
    AElem r(1);
    for (unsigned i = 0; i < n; ++i) r = r * *this;
    return r;
}

AElem AElem::shifted(std::int64_t k) const {
    AElem r;
    for (const auto& [e, c] : num_) r.num_[e + k] = c;
    r.den_ = den_;
    return r;
}

bool operator==(const AElem& a, const AElem& b) {
    if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
    std::map<unsigned, unsigned> den = a.den_;
    for (auto [i, m] : b.den_) den[i] = std::max(den[i], m);
    return lift_numerator(a, den) == lift_numerator(b, den);
}

mpq_class AElem::theta(const mpq_class& q) const {
    if (q <= 1) throw AlgebraError("theta_q needs q > 1");
    auto qpow = [&](std::int64_t e) {
        mpq_class r = 1;
        mpq_class base = e >= 0 ? q : mpq_class(1) / q;
        for (std::int64_t k = 0; k < (e >= 0 ? e : -e); ++k) r *= base;
        return r;
    };
    mpq_class n = 0;
    for (const auto& [e, c] : num_) n += mpq_class(c) * qpow(e);
    for (auto [i, m] : den_)
        for (unsigned k = 0; k < m; ++k) n /= qpow(i) - 1;
    n.canonicalize();
    return n;
}

std::int64_t AElem::degree_span() const {
    std::int64_t span = num_.empty() ? 0 : num_.rbegin()->first - num_.begin()->first;
    for (auto [i, m] : den_) span += static_cast<std::int64_t>(i) * m;
    return span;
}

std::string AElem::to_string() const {
    if (num_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = num_.rbegin(); it != num_.rend(); ++it) {
        mpz_class c = it->second;
        bool neg = c < 0;
        if (neg) c = -c;
        if (first) os << (neg ? "-" : "");
        else os << (neg ? " - " : " + ");
        first = false;
        if (it->first == 0) os << c.get_str();
        else if (c == 1) os << monomial(it->first);
        else os << c.get_str() << "*" << monomial(it->first);
    }
    if (den_.empty()) return os.str();
    std::string n = os.str();
    if (num_.size() > 1) n = "(" + n + ")";
    std::ostringstream d;
    for (auto [i, m] : den_) {
        d << "(" << monomial(static_cast<std::int64_t>(i)) << " - 1)";
        if (m > 1) d << "^" << m;
    }
    return n + " / " + d.str();
}

mpq_class theta_q(const AElem& x, const mpq_class& q) { return x.theta(q); }

bool is_in_A_plus(const AElem& x) {
    if (x.is_zero()) return true;
    // Denominators and L^k are positive on (1, inf); only the numerator's sign matters there.
    std::int64_t shift = 0;
    QPoly f = qpoly(dense(x.numerator(), shift));
    if (f.back() < 0) return false;
    for (const auto& [factor, mult] : squarefree(f))
        if (mult % 2 == 1 && roots_above(factor, mpq_class(1)) > 0) return false;
    return true;
}

AElem geom_sum(std::int64_t step, std::int64_t offset, std::int64_t lower, std::optional<std::int64_t> upper) {
    if (upper) {
        AElem s;
        for (std::int64_t l = lower; l <= *upper; ++l) s += AElem::L_pow(-step * l + offset);
        return s;
    }
    if (step <= 0) throw AlgebraError("geometric sum over an infinite range diverges unless step > 0");
    // L^(-a l0 + b) / (1 - L^-a) = L^(-a l0 + b + a) / (L^a - 1)
    return AElem::L_pow(-step * lower + offset + step) * AElem::inv_L_power_minus_one(static_cast<unsigned>(step));
}

}  // namespace dptk
