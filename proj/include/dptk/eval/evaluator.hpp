#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dptk/field/field.hpp"
#include "dptk/lang/ast.hpp"

namespace dptk {

enum class Truth { False, True, Unknown };

Truth t_not(Truth a);
Truth t_and(Truth a, Truth b);
Truth t_or(Truth a, Truth b);
Truth t_implies(Truth a, Truth b);
Truth t_iff(Truth a, Truth b);
std::string to_string(Truth t);

/// Integer or +/- infinity.
struct ExtInt {
    enum class Kind { NegInf, Finite, PosInf };
    Kind kind = Kind::Finite;
    std::int64_t value = 0;

    static ExtInt finite(std::int64_t v) { return {Kind::Finite, v}; }
    static ExtInt pos_inf() { return {Kind::PosInf, 0}; }
    static ExtInt neg_inf() { return {Kind::NegInf, 0}; }
    bool is_finite() const { return kind == Kind::Finite; }
    bool operator==(const ExtInt&) const = default;
    std::string to_string() const;
};
bool operator<(const ExtInt& a, const ExtInt& b);

/// Value-group value known to lie in [lo, hi]; +inf stands for ord(0).
struct VGValue {
    ExtInt lo, hi;
    static VGValue exact(std::int64_t v) { return {ExtInt::finite(v), ExtInt::finite(v)}; }
    static VGValue infinity() { return {ExtInt::pos_inf(), ExtInt::pos_inf()}; }
    bool determined() const { return lo == hi; }
    bool operator==(const VGValue&) const = default;
    std::string to_string() const;
};

/// Residue value; nullopt when undetermined.
using RFValue = std::optional<std::uint32_t>;

using Value = std::variant<FieldElement, RFValue, VGValue>;

struct Assignment {
    std::map<std::string, Value> values;

    Assignment& set_vf(const std::string& name, const FieldElement& e);
    Assignment& set_rf(const std::string& name, std::uint32_t r);
    Assignment& set_vg(const std::string& name, std::int64_t v);
    const Value* find(const std::string& name) const;
};

/// Enumeration ranges for variables without bound annotations, and for counting.
struct Box {
    std::map<std::string, std::int64_t> vf_min_ord;
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> vg;
};

/// A structure K for the language: the field plus the interpretation of 1/N constants.
class Structure {
public:
    explicit Structure(FieldConfig field);
    const FieldConfig& field() const { return field_; }
    std::uint32_t q() const { return field_.p; }
    /// Interprets a VF constant poly(t)/N. Throws FieldError when p divides N.
    FieldElement constant(const Term& vf_const) const;
    std::string describe() const { return field_.describe(); }

private:
    FieldConfig field_;
};

struct EvalOptions {
    /// Digits per VF quantifier variable (balls mod pi^(v0 + digits)); 0 uses the field's
    /// working precision.
    std::uint32_t digits = 0;
    /// Try Hensel certification and atom case splits on undecided balls.
    bool certify = true;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Three-valued evaluator. VF quantifiers are decided by refining balls one digit at a time
/// up to `digits`; a ball decides the quantifier only when the body's value is the same for
/// every element of the ball (or a Hensel root inside it is certified).
class Evaluator {
public:
    Evaluator(Structure s, EvalOptions opts = {});

    Value eval_term(const TermPtr& t, const Assignment& asg);
    Truth eval_formula(const FormulaPtr& f, const Assignment& asg, const Box& box = {});

    const std::vector<std::string>& diagnostics() const { return diagnostics_; }
    const Structure& structure() const { return s_; }
    std::uint32_t digits() const;

    /// Number of balls visited by VF quantifiers since construction.
    std::uint64_t balls_visited() const { return balls_; }

private:
    struct Scope;
    Value term(const TermPtr& t, Scope& sc);
    Truth formula(const FormulaPtr& f, Scope& sc);
    Truth quantifier(const FormulaPtr& f, Scope& sc);
    Truth vf_quantifier(const FormulaPtr& f, Scope& sc, std::int64_t v0);
    std::optional<Truth> certify_ball(const FormulaPtr& f, Scope& sc, std::int64_t v0,
                                      const std::vector<std::uint32_t>& prefix);
    void collect_candidate_atoms(const FormulaPtr& body, const std::string& var, Scope& sc,
                                 std::vector<const Formula*>& out);
    std::optional<std::vector<FieldElement>> as_polynomial(const TermPtr& t, const std::string& var, Scope& sc);
    void diag(const std::string& msg);

    Structure s_;
    EvalOptions opts_;
    std::vector<std::string> diagnostics_;
    std::map<const Formula*, Truth> forced_;
    std::map<std::pair<ZPoly, std::int64_t>, FieldElement> const_cache_;
    std::uint64_t balls_ = 0;
};

Value eval_term(const Structure& s, const TermPtr& t, const Assignment& asg);
Truth eval_formula(const Structure& s, const FormulaPtr& f, const Assignment& asg, const Box& box = {},
                   std::uint32_t digits = 0);

/// Ball pi^v0 * (d_0 + d_1 pi + ... + d_{M-1} pi^{M-1}) + O(pi^(v0+M)).
FieldElement ball_representative(const FieldConfig& cfg, std::int64_t v0, const std::vector<std::uint32_t>& digits);

struct EnumerationResult {
    std::vector<Assignment> points;          // representatives where the formula is True
    std::vector<Assignment> unknown_points;  // representatives left Unknown
    std::uint64_t total = 0;
};

/// Evaluates f at every representative of the box: VF variables mod pi^(v0+M), RF variables
/// over F_p, VG variables over their intervals. Every free variable of f must be boxed
/// (RF variables need no entry).
EnumerationResult enumerate_points(const Structure& s, const FormulaPtr& f, const Box& box, std::uint32_t M,
                                   bool keep_points = true);

struct PointCount {
    std::uint64_t true_count = 0;
    std::uint64_t unknown_count = 0;
    std::uint64_t total = 0;
};

PointCount count_mod(const Structure& s, const FormulaPtr& f, const Box& box, std::uint32_t M);

}  // namespace dptk
