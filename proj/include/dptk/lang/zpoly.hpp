#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dptk {

/// Polynomial in t with integer coefficients; coeffs[i] multiplies t^i.
/// Always normalized: no trailing zero coefficients (the zero polynomial is empty).
class ZPoly {
public:
    ZPoly() = default;
    explicit ZPoly(std::int64_t c);
    explicit ZPoly(std::vector<std::int64_t> coeffs);

    static ZPoly t_power(int k);

    const std::vector<std::int64_t>& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    std::int64_t coeff(int i) const;

    /// Index of the lowest nonzero coefficient (t-adic order over Z); -1 for zero.
    int low_order() const;
    /// The lowest nonzero coefficient; 0 for the zero polynomial.
    std::int64_t low_coeff() const;
    /// gcd of the coefficients (0 for the zero polynomial), always >= 0.
    std::int64_t content() const;

    ZPoly operator-() const;
    friend ZPoly operator+(const ZPoly& a, const ZPoly& b);
    friend ZPoly operator-(const ZPoly& a, const ZPoly& b);
    friend ZPoly operator*(const ZPoly& a, const ZPoly& b);
    ZPoly pow(unsigned n) const;
    ZPoly exact_div(std::int64_t d) const;

    friend bool operator==(const ZPoly&, const ZPoly&) = default;
    friend auto operator<=>(const ZPoly& a, const ZPoly& b) { return a.coeffs_ <=> b.coeffs_; }

    /// Renders as e.g. "1 + t^3" or "-2*t"; parses back through the formula grammar.
    std::string to_string() const;
    bool is_monomial() const;

private:
    void normalize();
    std::vector<std::int64_t> coeffs_;
};

namespace checked {
std::int64_t add(std::int64_t a, std::int64_t b);
std::int64_t mul(std::int64_t a, std::int64_t b);
std::int64_t gcd(std::int64_t a, std::int64_t b);
}  // namespace checked

}  // namespace dptk
