#pragma once

#include <string>
#include <vector>

#include "dptk/algebra/aelem.hpp"
#include "dptk/algebra/cyclo.hpp"
#include "dptk/eval/evaluator.hpp"
#include "dptk/lang/ast.hpp"

namespace dptk {

/// One summand [Y -> X] * coefficient * L^(sum of exponents) * prod(factors). Y is the set of
/// fiber_vars in k^n with `fiber` true (fiber may also mention base variables).
struct ConstructibleTerm {
    FormulaPtr fiber;
    std::vector<std::string> fiber_vars;  // residue-field variables
    AElem coefficient = 1;
    std::vector<TermPtr> exponents;       // value-group terms alpha, as L^alpha
    std::vector<TermPtr> factors;         // value-group terms alpha, as plain factors
};

struct ConstructibleFn {
    std::vector<ConstructibleTerm> terms;

    static ConstructibleFn constant(const AElem& c);
    friend ConstructibleFn operator+(const ConstructibleFn& a, const ConstructibleFn& b);
    /// Product of fibers; the fiber variables of b are renamed apart.
    friend ConstructibleFn operator*(const ConstructibleFn& a, const ConstructibleFn& b);
};

/// A term of an exponential constructible function additionally carries g (VF term) and
/// xi (RF term), both defined on the fiber; a fiber point y contributes psi(g(y)) e(xi(y)).
struct ExpConstructibleTerm {
    ConstructibleTerm base;
    TermPtr g;   // null means 0
    TermPtr xi;  // null means 0
};

struct ExpConstructibleFn {
    std::vector<ExpConstructibleTerm> terms;
};

/// psi(x) = psi0(pi^shift * x), where psi0 is trivial on the maximal ideal and equals
/// exp(2 pi i xbar / p) on the valuation ring. In characteristic zero psi0 is extended to K
/// through the fractional part of x / p; in positive characteristic through the coefficient
/// of t^0.
struct CharacterConfig {
    std::int64_t shift = 0;
    bool conjugate = false;  // use the complex conjugate character
};

/// psi(x). Throws PrecisionError when the digits psi depends on are not known.
CycloValue psi(const CharacterConfig& chi, const FieldElement& x);
/// exp(2 pi i r / p).
CycloValue residue_character(std::uint32_t p, std::uint32_t r);

class SpecializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Value of phi at a base point: sum over terms and fiber points of
/// theta_q(coefficient) q^(sum alpha) prod(alpha).
mpq_class specialize_fn(const ConstructibleFn& phi, const Structure& K, const Assignment& x);
/// As above, reusing an evaluator over K.
mpq_class specialize_fn(const ConstructibleFn& phi, Evaluator& ev, const Assignment& x);

CycloValue specialize_exp_fn(const ExpConstructibleFn& phi, const Structure& K, const CharacterConfig& chi,
                             const Assignment& x);
CycloValue specialize_exp_fn(const ExpConstructibleFn& phi, Evaluator& ev, const CharacterConfig& chi,
                             const Assignment& x);

}  // namespace dptk
