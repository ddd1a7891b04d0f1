#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dptk/lang/ast.hpp"
#include "dptk/lang/zpoly.hpp"
#include "dptk/measure/cell.hpp"

namespace dptk {

/// Cell decomposition of {z in B(0, box_min_ord) : f(z)} for f a boolean combination of
/// atoms ord(z - c) ~ k and ac(z - c) = a, with c in Z[t], k a VG constant and a an RF
/// constant. Centers named in f are added to `centers`. The result records the primes at
/// which two distinct center data collide mod p.
CellComplex decompose_fragment(const FormulaPtr& f, const std::string& var, const std::vector<ZPoly>& centers,
                               std::int64_t box_min_ord);

/// Image of the fragment set {z in B(0, v0) : f} under z -> u z + v, as a fragment formula in
/// the same variable together with the box it lives in.
struct AffineImage {
    FormulaPtr formula;
    std::int64_t box_min_ord;
};
AffineImage affine_image(const FormulaPtr& f, const std::string& var, std::int64_t v0, const ZPoly& u,
                         const ZPoly& v);

/// Folds a variable-free VF term into Z[t]. Throws CellError on fractions or variables.
ZPoly integral_constant(const TermPtr& t);

/// Primes dividing n (n != 0).
std::vector<std::uint32_t> prime_divisors(std::int64_t n);

}  // namespace dptk
