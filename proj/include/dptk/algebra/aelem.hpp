#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace dptk {

class AlgebraError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Element of Z[L, L^-1, 1/(L^i - 1) : i > 0], stored as a Laurent polynomial in L over Z
/// divided by a product of factors (L^i - 1).
///
/// Normal form: zero has an empty denominator, no numerator term is zero, and no
/// denominator factor divides the numerator exactly. Distinct normal forms can still
/// describe the same element (e.g. (L+1)/(L^2-1) and 1/(L-1)); operator== cross-multiplies.
class AElem {
public:
    AElem() = default;
    AElem(std::int64_t n);  // NOLINT(google-explicit-constructor)

    static AElem L();
    static AElem L_pow(std::int64_t k);
    /// 1 / (L^i - 1).
    static AElem inv_L_power_minus_one(unsigned i);
    /// From numerator coefficients (exponent -> coefficient) and denominator (i -> multiplicity).
    static AElem from_parts(std::map<std::int64_t, mpz_class> numerator, std::map<unsigned, unsigned> denominator);

    const std::map<std::int64_t, mpz_class>& numerator() const { return num_; }
    const std::map<unsigned, unsigned>& denominator() const { return den_; }
    bool is_zero() const { return num_.empty(); }

    AElem operator-() const;
    friend AElem operator+(const AElem& a, const AElem& b);
    friend AElem operator-(const AElem& a, const AElem& b);
    friend AElem operator*(const AElem& a, const AElem& b);
    AElem& operator+=(const AElem& b) { return *this = *this + b; }
    AElem& operator*=(const AElem& b) { return *this = *this * b; }
    AElem pow(unsigned n) const;
    /// Multiplies by L^k.
    AElem shifted(std::int64_t k) const;

    friend bool operator==(const AElem& a, const AElem& b);
    friend bool operator!=(const AElem& a, const AElem& b) { return !(a == b); }

    /// Evaluation at L = q. Throws AlgebraError unless q > 1.
    mpq_class theta(const mpq_class& q) const;

    /// Degree bound used for equality by evaluation: numerator span plus denominator degree.
    std::int64_t degree_span() const;

    /// e.g. "(L^2 + 1) / (L - 1)^2(L^3 - 1)" or "L^-2 - 1".
    std::string to_string() const;

private:
    void normalize();

    std::map<std::int64_t, mpz_class> num_;
    std::map<unsigned, unsigned> den_;
};

mpq_class theta_q(const AElem& x, const mpq_class& q);

/// True iff theta_q(x) >= 0 for every real q > 1.
bool is_in_A_plus(const AElem& x);

/// Sum of L^(-step*l + offset) for lower <= l <= upper (upper = nullopt means infinity).
/// The infinite sum needs step > 0.
AElem geom_sum(std::int64_t step, std::int64_t offset, std::int64_t lower, std::optional<std::int64_t> upper);

}  // namespace dptk
