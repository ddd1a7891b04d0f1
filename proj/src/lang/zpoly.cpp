#include "dptk/lang/zpoly.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dptk {

namespace checked {
std::int64_t add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in addition");
    return r;
}
std::int64_t mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in multiplication");
    return r;
}
std::int64_t gcd(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }
}  // namespace checked

ZPoly::ZPoly(std::int64_t c) {
    if (c != 0) coeffs_.push_back(c);
}

ZPoly::ZPoly(std::vector<std::int64_t> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

ZPoly ZPoly::t_power(int k) {
    if (k < 0) throw std::invalid_argument("negative power of t in ZPoly");
    std::vector<std::int64_t> c(static_cast<std::size_t>(k) + 1, 0);
    c.back() = 1;
    return ZPoly(std::move(c));
}

void ZPoly::normalize() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

std::int64_t ZPoly::coeff(int i) const {
    if (i < 0 || i >= static_cast<int>(coeffs_.size())) return 0;
    return coeffs_[static_cast<std::size_t>(i)];
}

int ZPoly::low_order() const {
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        if (coeffs_[i] != 0) return static_cast<int>(i);
    return -1;
}

std::int64_t ZPoly::low_coeff() const {
    int k = low_order();
    return k < 0 ? 0 : coeffs_[static_cast<std::size_t>(k)];
}

std::int64_t ZPoly::content() const {
    std::int64_t g = 0;
    for (auto c : coeffs_) g = std::gcd(g, c);
    return g;
}

bool ZPoly::is_monomial() const {
    int n = 0;
    for (auto c : coeffs_) n += (c != 0);
    return n <= 1;
}

ZPoly ZPoly::operator-() const {
    std::vector<std::int64_t> c(coeffs_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = checked::mul(coeffs_[i], -1);
    return ZPoly(std::move(c));
}

ZPoly operator+(const ZPoly& a, const ZPoly& b) {
    std::vector<std::int64_t> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = checked::add(a.coeff(static_cast<int>(i)), b.coeff(static_cast<int>(i)));
    return ZPoly(std::move(c));
}

ZPoly operator-(const ZPoly& a, const ZPoly& b) { return a + (-b); }

ZPoly operator*(const ZPoly& a, const ZPoly& b) {
    if (a.is_zero() || b.is_zero()) return ZPoly();
    std::vector<std::int64_t> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
            c[i + j] = checked::add(c[i + j], checked::mul(a.coeffs_[i], b.coeffs_[j]));
    return ZPoly(std::move(c));
}

ZPoly ZPoly::pow(unsigned n) const {
    ZPoly r(1), base = *this;
    while (n) {
        if (n & 1u) r = r * base;
        n >>= 1u;
        if (n) base = base * base;
    }
    return r;
}

ZPoly ZPoly::exact_div(std::int64_t d) const {
    if (d == 0) throw std::invalid_argument("division by zero");
    std::vector<std::int64_t> c(coeffs_);
    for (auto& x : c) {
        if (x % d != 0) throw std::invalid_argument("inexact division of ZPoly");
        x /= d;
    }
    return ZPoly(std::move(c));
}

std::string ZPoly::to_string() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        std::int64_t c = coeffs_[i];
        if (c == 0) continue;
        std::int64_t mag = c < 0 ? -c : c;
        if (first) {
            if (c < 0) os << "-";
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        first = false;
        if (i == 0) {
            os << mag;
            continue;
        }
        if (mag != 1) os << mag << "*";
        os << "t";
        if (i > 1) os << "^" << i;
    }
    return os.str();
}

}  // namespace dptk
