#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dptk/eval/evaluator.hpp"
#include "dptk/lang/ast.hpp"

namespace dptk {

class CellError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Value-group parameter ranging over lo <= v <= hi (hi = nullopt: unbounded above).
struct VGParam {
    std::string name;
    std::int64_t lo = 0;
    std::optional<std::int64_t> hi;
};

/// One fiber coordinate of a cell. A 1-cell component is {ord(z - center) = order,
/// ac(z - center) = angular}; a 0-cell component is {z = center}.
struct CellComponent {
    bool point = false;
    TermPtr center;   // VF term in the earlier fiber variables
    TermPtr order;    // VG term, affine in the cell's VG parameters
    TermPtr angular;  // RF term in the cell's RF parameters
};

/// A cell in a tower of VF variables, parameterized by residue-field and value-group
/// parameters. Parameters range over rf_condition (RF) and independent intervals (VG);
/// every angular component must be nonzero, which is imposed on the parameters.
struct Cell {
    std::vector<std::string> rf_params;
    FormulaPtr rf_condition;  // over rf_params; null means true
    std::vector<VGParam> vg_params;
    std::vector<CellComponent> components;

    bool is_point() const;  // some component is a 0-cell
};

struct CellComplex {
    std::string name;
    std::string description;
    std::vector<std::string> variables;     // fiber variables, outermost first
    std::vector<std::int64_t> box_min_ord;  // per variable
    std::vector<Cell> cells;
    /// Formula the cells decompose, when known.
    FormulaPtr ambient;
    /// Primes for which the complex is not valid (centers or constants collide mod p).
    std::vector<std::uint32_t> excluded_primes;

    Box box() const;
    bool valid_for(std::uint32_t p) const;
};

/// Membership in one cell as a formula in the fiber variables. A VG parameter with
/// coefficient +-1 in some component order is eliminated through ord of that component;
/// the rest are quantified, truncated at `vg_cap` when unbounded.
/// With up_to_null, an unconstrained angular parameter is dropped together with its
/// ac conjunct, which adds the center point (a null set) to the cell.
FormulaPtr membership_formula(const CellComplex& cx, const Cell& cell, std::int64_t vg_cap,
                              bool up_to_null = false);
/// Disjunction of all cell memberships.
FormulaPtr union_formula(const CellComplex& cx, std::int64_t vg_cap, bool up_to_null = false);

/// Coefficients of an affine VG term: value = constant + sum coeff[name] * name.
struct AffineForm {
    std::int64_t constant = 0;
    std::map<std::string, std::int64_t> coeffs;
};
/// Throws CellError when the term is not affine in the named parameters.
AffineForm affine_form(const TermPtr& t);

/// Pointwise check that the cells are pairwise disjoint and (when an ambient formula is
/// given) cover exactly the ambient set, over all representatives of the box mod pi^(v0+M).
struct CertificationReport {
    std::uint64_t points = 0;
    std::uint64_t overlaps = 0;   // two cells True at one point
    std::uint64_t gaps = 0;       // ambient True, no cell True and none Unknown
    std::uint64_t extras = 0;     // ambient False, some cell True
    std::uint64_t unknown = 0;    // points with an Unknown verdict somewhere
    bool ok() const { return overlaps == 0 && gaps == 0 && extras == 0; }
};
CertificationReport certify_complex(const CellComplex& cx, const Structure& K, std::uint32_t M);

CellComplex complex_from_json(const nlohmann::json& j);
nlohmann::json complex_to_json(const CellComplex& cx);
CellComplex load_complex(const std::string& path);
std::vector<CellComplex> load_corpus(const std::string& directory);

}  // namespace dptk
