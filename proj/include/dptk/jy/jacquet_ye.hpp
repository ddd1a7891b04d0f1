#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dptk/algebra/constructible.hpp"
#include "dptk/algebra/cyclo.hpp"
#include "dptk/eval/evaluator.hpp"
#include "dptk/field/field.hpp"
#include "dptk/lang/zpoly.hpp"

namespace dptk {

class JYError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// a_i = unit * pi^k.
struct DiagEntry {
    ZPoly unit{1};
    std::int64_t k = 0;
};

struct DiagParam {
    std::vector<DiagEntry> entries;
    std::size_t n() const { return entries.size(); }
    std::string to_string() const;
};

/// (-1)^ord x. Throws JYError when ord x is not determined.
int eta(const FieldElement& x);
/// prod_{i < n} eta(a_1 ... a_i).
int gamma_factor(const DiagParam& a);

/// Minimum valuations of the superdiagonal coordinates on the support of the integrand
/// (x, y for I; z0, z1 for J). Empty when a_1 is not integral.
struct SupportBox {
    bool empty = false;
    std::vector<std::int64_t> min_ord;
};
SupportBox support_bounds(const DiagParam& a);

struct JYConfig {
    std::uint32_t max_digits = 5;
    CharacterConfig chi{1, false};  // psi(x) = psi0(pi x): trivial exactly on O
};

struct JYIntegral {
    CycloValue value;
    std::optional<std::uint32_t> stabilized_at;
    mpq_class unknown_mass;
};

/// Non-square unit used for E = F(sqrt A) and for the unit sweep.
std::int64_t nonsquare_unit(std::uint32_t p);

/// Integrands as exponential constructible functions on the support box.
ExpConstructibleFn I_integrand(const DiagParam& a);
ExpConstructibleFn J_integrand(const DiagParam& a, std::int64_t A);

JYIntegral I_integral(const Structure& K, const DiagParam& a, const JYConfig& cfg);
JYIntegral J_integral(const Structure& K, const DiagParam& a, const JYConfig& cfg);

struct JYResult {
    std::string field;
    std::string param;
    CycloValue I, J;
    int gamma = 1;
    bool holds = false;
    bool stabilized = false;
    std::optional<std::uint32_t> I_depth, J_depth;
    std::uint32_t max_digits = 0;
};

JYResult check_identity(const DiagParam& a, const Structure& K, const JYConfig& cfg);

}  // namespace dptk
