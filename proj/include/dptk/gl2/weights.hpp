#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "dptk/field/field.hpp"
#include "dptk/lang/zpoly.hpp"

namespace dptk {

class GL2Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invertible 2x2 matrix over K; the determinant must have a determined finite valuation.
class GL2Element {
public:
    GL2Element(FieldElement a11, FieldElement a12, FieldElement a21, FieldElement a22);
    static GL2Element from_polys(const FieldConfig& cfg, const ZPoly& a11, const ZPoly& a12, const ZPoly& a21,
                                 const ZPoly& a22);
    static GL2Element diagonal(const FieldElement& m1, const FieldElement& m2);

    const FieldElement& at(int i, int j) const { return e_[2 * i + j]; }
    const FieldElement& det() const { return det_; }
    std::int64_t det_ord() const { return det_ord_; }
    const FieldConfig& config() const { return e_[0].config(); }

    friend GL2Element operator*(const GL2Element& x, const GL2Element& y);
    std::string to_string() const;

private:
    std::array<FieldElement, 4> e_;
    FieldElement det_;
    std::int64_t det_ord_ = 0;
};

/// The two Borel subgroups containing the diagonal torus.
enum class Parabolic { Upper, Lower };

/// H_P(g) for g = n m k with n in N_P, m = diag(m1, m2), k in GL2(O):
/// H_P(g) = (-ord m1, -ord m2). Throws GL2Error on undetermined valuations.
std::array<std::int64_t, 2> iwasawa_HP(const GL2Element& g, Parabolic P);

/// lambda in X(M)_rat = Z^2, paired with H by the dot product.
using Lambda = std::array<std::int64_t, 2>;

/// theta_P(lambda) = lambda(coroot of the simple root of P): lambda1 - lambda2 for the
/// upper Borel, lambda2 - lambda1 for the lower one.
std::int64_t theta(Parabolic P, const Lambda& lambda);

/// v_M(g) = -sum_P lambda(H_P(g)) / theta_P(lambda). Throws GL2Error when lambda is not
/// generic (theta_P(lambda) = 0).
mpq_class weight_vM(const GL2Element& g, const Lambda& lambda = {1, -1});

struct LambdaReport {
    std::vector<mpq_class> values;
    bool holds = false;
};
LambdaReport lambda_independence_check(const GL2Element& g, const std::vector<Lambda>& lambdas);

/// A point (tr, det) of the Steinberg base, in Z[t]-form: tr = pi^tr_shift * tr(pi) and
/// likewise for det. Split data may carry its eigenvalues.
struct OrbitPoint {
    ZPoly tr, det;
    std::int64_t tr_shift = 0, det_shift = 0;
    std::optional<std::array<ZPoly, 2>> eigenvalues;

    static OrbitPoint from_char_poly(const ZPoly& tr, const ZPoly& det);
    static OrbitPoint from_eigenvalues(const ZPoly& l1, const ZPoly& l2);
    ZPoly discriminant() const;  // tr^2 - 4 det, ignoring the shifts
    std::string to_string() const;
};

enum class FiberWeight { One, VM };

/// Congruence restriction of the support of x = [[a, b], [c, d]].
struct FiberSupport {
    std::optional<std::uint32_t> a_residue;  // a = a_residue mod pi
    std::optional<bool> c_unit;              // c a unit (true) or in the maximal ideal (false)
};

struct FiberVolume {
    mpq_class value;
    mpq_class unknown_mass;
    std::uint32_t stabilized_at = 0;  // deepest a-ball resolved
    std::uint32_t max_digits = 0;
    bool split = false;
    bool stabilized() const { return unknown_mass == 0; }
};

/// Integral of f(g_x) over {x in M2(O) : char(x) = c}, with the measure that is the limit of
/// q^(-2M) times the count of classes mod pi^M. g_x has the left eigenvectors of x as rows,
/// so x = g_x^-1 diag(l1, l2) g_x. The entry a is refined digit by digit; around an
/// eigenvalue the shells are summed in closed form. Throws GL2Error when c is not regular,
/// p = 2, or f = VM for non-split c.
FiberVolume fiber_volume(const FieldConfig& K, const OrbitPoint& c, FiberWeight f, std::uint32_t max_digits,
                         const FiberSupport& support = {});

/// fiber_volume with f = v_M at the characteristic polynomial of gamma.
FiberVolume weighted_orbital(const FieldConfig& K, const OrbitPoint& gamma, std::uint32_t max_digits);

}  // namespace dptk
