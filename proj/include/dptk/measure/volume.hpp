#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "dptk/algebra/aelem.hpp"
#include "dptk/algebra/constructible.hpp"
#include "dptk/eval/evaluator.hpp"
#include "dptk/measure/cell.hpp"
#include "dptk/measure/decompose.hpp"

namespace dptk {

/// Symbolic volume. `exact` is set when every cell's residue parameter set has a class in A
/// (no residue condition, or only conditions r != c); fn is always a valid form.
struct MotivicVolume {
    ConstructibleFn fn;
    std::optional<AElem> exact;
};

/// Volume of one cell: a 1-cell of order alpha has fiber volume L^(-alpha-1); VG parameters
/// are summed as geometric series and RF parameters counted. Point cells have volume 0.
/// Throws CellError on a non-summable parameter range.
MotivicVolume cell_volume(const Cell& cell);
MotivicVolume motivic_volume(const CellComplex& cx);

/// Haar measure with vol(R_K) = 1, so the box B(0, v0) has volume q^(-v0) per variable.
struct PadicVolume {
    mpq_class value;
    mpq_class unknown_mass;
    std::uint32_t digits = 0;                  // refinement depth of the final run
    std::optional<std::uint32_t> stabilized_at;  // smallest depth with no Unknown mass
    std::uint64_t balls = 0;
    bool stabilized() const { return stabilized_at.has_value(); }
};

/// Adaptive ball refinement over the VF variables of `box`: a True ball adds its volume,
/// a False ball is dropped, an Unknown ball is split one digit at a time (round robin over
/// the variables) down to max_digits. Runs depth 1, 2, ... until no Unknown mass is left.
PadicVolume padic_volume(const Structure& K, const FormulaPtr& f, const Box& box, std::uint32_t max_digits);
/// Uniform count of representatives mod pi^(v0+M), scaled to the Haar measure.
PadicVolume padic_volume_uniform(const Structure& K, const FormulaPtr& f, const Box& box, std::uint32_t M);

struct Integral {
    mpq_class value;
    mpq_class unknown_mass;
    std::optional<std::uint32_t> stabilized_at;
};
struct ExpIntegral {
    CycloValue value;
    mpq_class unknown_mass;
    std::optional<std::uint32_t> stabilized_at;
};

/// Integral of phi over the box: phi is specialized at ball representatives and a ball whose
/// specialization succeeds is summed with its volume; others are refined.
Integral integrate_constructible(const Structure& K, const ConstructibleFn& phi, const Box& box,
                                 std::uint32_t max_digits);
ExpIntegral integrate_constructible(const Structure& K, const ExpConstructibleFn& phi, const CharacterConfig& chi,
                                    const Box& box, std::uint32_t max_digits);

struct VolumeEntry {
    std::string field;  // "Q_5", "F_5((t))"
    bool skipped = false;  // prime excluded for this complex
    mpq_class specialized;
    PadicVolume padic;
    std::optional<bool> equal;  // set only when both sides are exact
};

struct VolumeReport {
    std::string complex;
    MotivicVolume motivic;
    std::optional<bool> positive;  // is_in_A_plus of the exact volume
    std::vector<VolumeEntry> entries;
    bool all_equal() const;
};

/// Compares theta_q(motivic volume) with the p-adic volume of the ambient formula (or the
/// union of the cells, up to null sets) in each structure.
VolumeReport check_specialization(const CellComplex& cx, const std::vector<Structure>& fields,
                                  std::uint32_t max_digits);

struct ChangeOfVariablesReport {
    PadicVolume source, image;
    mpq_class jacobian_factor;  // q^(-ord u)
    std::optional<bool> holds;
};
/// vol(u A + v) = q^(-ord u) vol(A). Throws CellError when ac(u) vanishes mod p.
ChangeOfVariablesReport affine_change_of_variables_check(const ZPoly& u, const ZPoly& v, const FormulaPtr& f,
                                                         const std::string& var, std::int64_t v0,
                                                         const Structure& K, std::uint32_t max_digits);

struct FubiniReport {
    Integral first_outer, second_outer;  // outer variable: vars[0], resp. vars[1]
    PadicVolume joint;
    std::optional<bool> holds;
};
/// Iterated volumes of {f} over a two-variable box in both orders.
FubiniReport fubini_check(const Structure& K, const FormulaPtr& f, const std::vector<std::string>& vars,
                          const Box& box, std::uint32_t max_digits);

}  // namespace dptk
