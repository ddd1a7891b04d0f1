#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace dptk {

/// Element of Q(zeta_n), n = p^level, as sum c_i zeta^i over the basis zeta^0..zeta^(phi(n)-1).
/// The relation sum_{j<p} zeta^(r + j n/p) = 0 eliminates the exponents >= phi(n), so the
/// coefficient vector is canonical. Level 0 means a rational number. Operations on values of
/// different levels work in the larger field.
class CycloValue {
public:
    CycloValue() = default;
    CycloValue(std::uint32_t p, const mpq_class& r);

    /// zeta_{p^level}^k.
    static CycloValue zeta(std::uint32_t p, std::uint32_t level, std::int64_t k);
    static CycloValue rational(std::uint32_t p, const mpq_class& r) { return CycloValue(p, r); }

    std::uint32_t p() const { return p_; }
    std::uint32_t level() const { return level_; }
    std::uint64_t order() const;
    /// Coefficients over zeta^0..zeta^(phi(n)-1).
    const std::vector<mpq_class>& coefficients() const { return coeffs_; }

    bool is_rational() const;
    mpq_class rational_part() const { return coeffs_.empty() ? mpq_class(0) : coeffs_[0]; }
    bool is_zero() const;

    CycloValue operator-() const;
    friend CycloValue operator+(const CycloValue& a, const CycloValue& b);
    friend CycloValue operator-(const CycloValue& a, const CycloValue& b);
    friend CycloValue operator*(const CycloValue& a, const CycloValue& b);
    CycloValue& operator+=(const CycloValue& b) { return *this = *this + b; }
    CycloValue& operator*=(const CycloValue& b) { return *this = *this * b; }
    CycloValue scaled(const mpq_class& r) const;

    /// Complex conjugation zeta -> zeta^-1.
    CycloValue conj() const;
    /// Same element at a higher level.
    CycloValue lifted(std::uint32_t level) const;
    /// Same element at the smallest level that contains it.
    CycloValue reduced() const;

    friend bool operator==(const CycloValue& a, const CycloValue& b);
    friend bool operator!=(const CycloValue& a, const CycloValue& b) { return !(a == b); }

    /// e.g. "3/2 - zeta5 + 2*zeta5^3"; "0" for zero.
    std::string to_string() const;
    /// Floating-point rendering for display only.
    std::complex<double> numeric() const;

private:
    // Dense over all n exponents, reduced afterwards.
    static CycloValue from_dense(std::uint32_t p, std::uint32_t level, std::vector<mpq_class> dense);
    std::vector<mpq_class> dense() const;

    std::uint32_t p_ = 0;
    std::uint32_t level_ = 0;
    std::vector<mpq_class> coeffs_;
};

}  // namespace dptk
