#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dptk/lang/zpoly.hpp"

namespace dptk {

enum class Characteristic { Zero, Positive };

/// A local field K with residue field F_p: Q_p (characteristic zero) or F_p((t)).
/// `precision` is the working relative precision used by operations that cannot be exact
/// (inversion, 1/N constants, Hensel lifting).
struct FieldConfig {
    Characteristic characteristic = Characteristic::Positive;
    std::uint32_t p = 5;
    std::uint32_t precision = 8;

    static FieldConfig padic(std::uint32_t p, std::uint32_t precision = 8);
    static FieldConfig laurent(std::uint32_t p, std::uint32_t precision = 8);
    std::string describe() const;  // "Q_5" or "F_5((t))"
    bool operator==(const FieldConfig&) const = default;
};

bool is_prime(std::uint64_t n);

class FieldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a result would depend on digits beyond the tracked precision.
class PrecisionError : public FieldError {
public:
    using FieldError::FieldError;
};

/// Raised on inversion of an exact zero.
class DivisionByZero : public FieldError {
public:
    using FieldError::FieldError;
};

/// Valuation of a truncated element: finite, infinite (exact zero), or unknown with a
/// lower bound (all tracked digits vanish).
struct Valuation {
    enum class Kind { Finite, Infinite, Unknown };
    Kind kind = Kind::Finite;
    std::int64_t value = 0;  // the valuation, or the lower bound when Unknown

    static Valuation finite(std::int64_t v) { return {Kind::Finite, v}; }
    static Valuation infinite() { return {Kind::Infinite, 0}; }
    static Valuation unknown(std::int64_t lower) { return {Kind::Unknown, lower}; }
    bool is_finite() const { return kind == Kind::Finite; }
    bool is_infinite() const { return kind == Kind::Infinite; }
    bool is_unknown() const { return kind == Kind::Unknown; }
    bool operator==(const Valuation&) const = default;
    std::string to_string() const;
};

/// Element of K known to finite precision, stored as pi^val * sum_i digits[i] pi^i with
/// plain base-p digits (pi = t or p).
///
/// ExactZero: the element is 0.
/// Exact: all digits are known; digits past the stored ones equal `tail` (p-1 encodes the
///        two's complement expansion of negative integers in characteristic zero).
/// Approx: the element is known modulo pi^(val + digits.size()). With no stored digits the
///         precision is exhausted and `val` is only a lower bound for the valuation.
class FieldElement {
public:
    enum class Kind { ExactZero, Exact, Approx };

    FieldElement() = default;

    static FieldElement zero(const FieldConfig& cfg);
    static FieldElement from_int(const FieldConfig& cfg, std::int64_t n);
    /// Image of g(t) under t -> pi.
    static FieldElement from_poly(const FieldConfig& cfg, const ZPoly& g);
    /// 1/n. Exact in positive characteristic, working precision in characteristic zero.
    static FieldElement inverse_of_int(const FieldConfig& cfg, std::int64_t n);
    /// pi^v0 * sum digits[i] pi^i. When `exact` the digits terminate; otherwise the value is
    /// known modulo pi^(v0 + digits.size()).
    static FieldElement from_digits(const FieldConfig& cfg, std::int64_t v0, const std::vector<std::uint32_t>& digits,
                                    bool exact);
    /// An element known only to lie in pi^v0 * O.
    static FieldElement exhausted(const FieldConfig& cfg, std::int64_t v0);
    static FieldElement uniformizer(const FieldConfig& cfg);

    const FieldConfig& config() const { return cfg_; }
    Kind kind() const { return kind_; }
    bool is_exact_zero() const { return kind_ == Kind::ExactZero; }
    bool is_exact() const { return kind_ != Kind::Approx; }
    bool is_exhausted() const { return kind_ == Kind::Approx && digits_.empty(); }
    std::int64_t val() const { return val_; }
    const std::vector<std::uint32_t>& digits() const { return digits_; }
    std::uint32_t tail() const { return tail_; }

    /// Number of known digits after the leading one (infinite for exact elements).
    std::int64_t relative_precision() const;
    /// The element is known modulo pi^absolute_precision() (max int64 for exact elements).
    std::int64_t absolute_precision() const;

    /// Coefficient of pi^k in the expansion; nullopt when beyond the known precision.
    std::optional<std::uint32_t> digit(std::int64_t k) const;

    Valuation ord() const;
    /// Angular component; 0 for exact zero. Throws PrecisionError when exhausted.
    std::uint32_t ac() const;

    FieldElement operator-() const;
    friend FieldElement operator+(const FieldElement& a, const FieldElement& b);
    friend FieldElement operator-(const FieldElement& a, const FieldElement& b);
    friend FieldElement operator*(const FieldElement& a, const FieldElement& b);
    /// Throws DivisionByZero on exact zero and PrecisionError when the valuation is unknown.
    FieldElement inverse() const;
    FieldElement pow(unsigned n) const;
    /// Forgets everything past pi^abs.
    FieldElement truncated(std::int64_t abs) const;

    /// Same kind, valuation, digits and tail.
    bool identical(const FieldElement& other) const;
    /// True when the known digits of both agree up to the smaller absolute precision.
    bool compatible(const FieldElement& other) const;

    /// e.g. "1 + 4*5 + 4*5^2 + O(5^3)" or "2*t^-1 + t + O(t^4)".
    std::string to_string() const;

private:
    FieldConfig cfg_;
    Kind kind_ = Kind::ExactZero;
    std::int64_t val_ = 0;
    std::vector<std::uint32_t> digits_;
    std::uint32_t tail_ = 0;

    friend struct FieldOps;
};

/// Unramified extension E = K[x]/(x^degree - a) with a a unit whose reduction makes
/// x^degree - a irreducible over F_p.
struct ExtensionConfig {
    FieldConfig base;
    std::uint32_t degree = 2;
    std::int64_t a = 2;
    /// A primitive degree-th root of unity in K when degree | p-1 (Teichmuller lift in
    /// characteristic zero, to working precision); used by the conjugation x -> zeta x.
    std::optional<std::uint32_t> zeta_residue;
};

/// Throws FieldError when x^r - a is reducible mod p, a is not a unit, or r does not divide
/// p-1 while `need_conjugation`.
ExtensionConfig make_extension(const FieldConfig& cfg, std::uint32_t r, std::int64_t a, bool need_conjugation = true);

/// Smallest a in [2, p) with x^r - a irreducible over F_p.
std::int64_t find_irreducible_kummer_unit(std::uint32_t p, std::uint32_t r);

/// Irreducibility of x^r - a over F_p (Ben-Or).
bool kummer_irreducible(std::uint32_t p, std::uint32_t r, std::int64_t a);

/// Element sum_i coords[i] x^i of E.
class ExtElement {
public:
    ExtElement() = default;
    ExtElement(const ExtensionConfig& ext, std::vector<FieldElement> coords);
    static ExtElement from_base(const ExtensionConfig& ext, const FieldElement& e);
    static ExtElement generator(const ExtensionConfig& ext);  // x

    const ExtensionConfig& config() const { return ext_; }
    const std::vector<FieldElement>& coords() const { return coords_; }
    const FieldElement& coord(std::size_t i) const { return coords_.at(i); }

    /// Valuation of E normalized so that ord(pi) = 1 (E/K is unramified).
    Valuation ord() const;
    /// Residue of e * pi^-ord(e) in F_p[x]/(x^r - a), as r coordinates.
    std::vector<std::uint32_t> ac() const;

    ExtElement operator-() const;
    friend ExtElement operator+(const ExtElement& a, const ExtElement& b);
    friend ExtElement operator-(const ExtElement& a, const ExtElement& b);
    friend ExtElement operator*(const ExtElement& a, const ExtElement& b);

    FieldElement norm() const;
    FieldElement trace() const;
    /// x -> zeta x.
    ExtElement conjugate() const;

    std::string to_string() const;

private:
    ExtensionConfig ext_;
    std::vector<FieldElement> coords_;
};

/// Value of a Z[t]-polynomial at pi (the coefficient map t -> pi).
FieldElement interpret_poly(const FieldConfig& cfg, const ZPoly& g);

/// Newton lift of a simple residue root of sum_i coeffs[i] X^i to working precision.
/// Throws FieldError when the residue root is not a simple root or the coefficients are not
/// integral.
FieldElement hensel_lift(const std::vector<FieldElement>& coeffs, std::uint32_t residue_root);

/// Polynomial evaluation by Horner's rule.
FieldElement evaluate_poly(const std::vector<FieldElement>& coeffs, const FieldElement& x);

std::uint32_t mod_inverse(std::uint32_t a, std::uint32_t p);
std::uint32_t mod_pow(std::uint64_t a, std::uint64_t e, std::uint32_t p);
std::uint32_t reduce_mod(std::int64_t a, std::uint32_t p);

}  // namespace dptk
