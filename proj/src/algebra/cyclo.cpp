#include "dptk/algebra/cyclo.hpp"

#include <cmath>
#include <sstream>

#include "dptk/algebra/aelem.hpp"

namespace dptk {

namespace {

std::uint64_t ipow(std::uint64_t b, std::uint32_t e) {
    std::uint64_t r = 1;
    while (e--) r *= b;
    return r;
}

void check_prime_match(const CycloValue& a, const CycloValue& b) {
    if (a.p() != 0 && b.p() != 0 && a.p() != b.p())
        throw AlgebraError("cyclotomic values over different primes");
}

}  // namespace

CycloValue::CycloValue(std::uint32_t p, const mpq_class& r) : p_(p), level_(0), coeffs_{r} {
    if (r == 0) coeffs_.clear();
}

std::uint64_t CycloValue::order() const { return ipow(p_, level_); }

CycloValue CycloValue::zeta(std::uint32_t p, std::uint32_t level, std::int64_t k) {
    std::uint64_t n = ipow(p, level);
    std::vector<mpq_class> d(n);
    auto idx = static_cast<std::uint64_t>(((k % static_cast<std::int64_t>(n)) + static_cast<std::int64_t>(n)) %
                                          static_cast<std::int64_t>(n));
    d[idx] = 1;
    return from_dense(p, level, std::move(d));
}

CycloValue CycloValue::from_dense(std::uint32_t p, std::uint32_t level, std::vector<mpq_class> d) {
    CycloValue v;
    v.p_ = p;
    v.level_ = level;
    if (level == 0) {
        v.coeffs_ = {d.empty() ? mpq_class(0) : d[0]};
    } else {
        std::uint64_t n = d.size();
        std::uint64_t block = n / p;
        std::uint64_t phi = n - block;
        for (std::uint64_t r = 0; r < block; ++r) {
            mpq_class c = d[phi + r];
            if (c == 0) continue;
            for (std::uint32_t j = 0; j < p; ++j) d[r + j * block] -= c;
        }
        d.resize(phi);
        v.coeffs_ = std::move(d);
    }
    while (!v.coeffs_.empty() && v.coeffs_.back() == 0) v.coeffs_.pop_back();
    return v;
}

std::vector<mpq_class> CycloValue::dense() const {
    std::vector<mpq_class> d(order());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) d[i] = coeffs_[i];
    return d;
}

bool CycloValue::is_zero() const { return coeffs_.empty(); }

bool CycloValue::is_rational() const { return coeffs_.size() <= 1; }

CycloValue CycloValue::lifted(std::uint32_t level) const {
    if (level <= level_) return *this;
    std::uint64_t n = ipow(p_, level), scale = ipow(p_, level - level_);
    std::vector<mpq_class> d(n);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) d[i * scale] = coeffs_[i];
    return from_dense(p_, level, std::move(d));
}

CycloValue CycloValue::reduced() const {
    CycloValue v = *this;
    while (v.level_ > 0) {
        if (v.level_ == 1) {
            if (v.is_rational()) {
                CycloValue r(v.p_, v.rational_part());
                v = r;
                continue;
            }
            break;
        }
        // In the canonical basis an element of the subfield only uses exponents divisible by p.
        bool sub = true;
        for (std::size_t i = 0; i < v.coeffs_.size() && sub; ++i)
            if (i % v.p_ != 0 && v.coeffs_[i] != 0) sub = false;
        if (!sub) break;
        std::vector<mpq_class> d(ipow(v.p_, v.level_ - 1));
        for (std::size_t i = 0; i < v.coeffs_.size(); i += v.p_) d[i / v.p_] = v.coeffs_[i];
        v = from_dense(v.p_, v.level_ - 1, std::move(d));
    }
    return v;
}

CycloValue CycloValue::operator-() const {
    CycloValue v = *this;
    for (auto& c : v.coeffs_) c = -c;
    return v;
}

CycloValue operator+(const CycloValue& a, const CycloValue& b) {
    check_prime_match(a, b);
    if (a.p_ == 0) return b;
    if (b.p_ == 0) return a;
    std::uint32_t level = std::max(a.level_, b.level_);
    auto x = a.lifted(level).dense(), y = b.lifted(level).dense();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
    return CycloValue::from_dense(a.p_, level, std::move(x));
}

CycloValue operator-(const CycloValue& a, const CycloValue& b) { return a + (-b); }

CycloValue operator*(const CycloValue& a, const CycloValue& b) {
    check_prime_match(a, b);
    if (a.p_ == 0 || b.p_ == 0) return CycloValue();
    std::uint32_t level = std::max(a.level_, b.level_);
    CycloValue x = a.lifted(level), y = b.lifted(level);
    std::uint64_t n = x.order();
    std::vector<mpq_class> d(n);
    for (std::size_t i = 0; i < x.coeffs_.size(); ++i) {
        if (x.coeffs_[i] == 0) continue;
        for (std::size_t j = 0; j < y.coeffs_.size(); ++j) d[(i + j) % n] += x.coeffs_[i] * y.coeffs_[j];
    }
    return CycloValue::from_dense(a.p_, level, std::move(d));
}

CycloValue CycloValue::scaled(const mpq_class& r) const {
    CycloValue v = *this;
    for (auto& c : v.coeffs_) c *= r;
    if (r == 0) v.coeffs_.clear();
    return v;
}

CycloValue CycloValue::conj() const {
    if (p_ == 0) return *this;
    std::uint64_t n = order();
    std::vector<mpq_class> d(n);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) d[(n - i) % n] += coeffs_[i];
    return from_dense(p_, level_, std::move(d));
}

bool operator==(const CycloValue& a, const CycloValue& b) {
    if (a.p_ == 0 || b.p_ == 0) return a.is_zero() && b.is_zero();
    check_prime_match(a, b);
    std::uint32_t level = std::max(a.level_, b.level_);
    return a.lifted(level).coeffs_ == b.lifted(level).coeffs_;
}

std::string CycloValue::to_string() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    std::string z = "zeta" + std::to_string(order());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        mpq_class c = coeffs_[i];
        if (c == 0) continue;
        bool neg = c < 0;
        if (neg) c = -c;
        if (first) os << (neg ? "-" : "");
        else os << (neg ? " - " : " + ");
        first = false;
        if (i == 0) {
            os << c.get_str();
            continue;
        }
        if (c != 1) os << c.get_str() << "*";
        os << z;
        if (i > 1) os << "^" << i;
    }
    return os.str();
}

std::complex<double> CycloValue::numeric() const {
    std::complex<double> s = 0;
    const double n = static_cast<double>(order());
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        s += coeffs_[i].get_d() * std::polar(1.0, 2.0 * M_PI * static_cast<double>(i) / n);
    return s;
}

}  // namespace dptk
