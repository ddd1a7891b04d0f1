#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dptk/algebra/aelem.hpp"
#include "dptk/field/field.hpp"
#include "dptk/gl2/weights.hpp"

namespace dptk {

struct PropertyResult {
    std::string name;
    std::uint64_t cases = 0;
    std::uint64_t failures = 0;
    std::string first_failure;

    void record(bool ok, const std::string& what);
    bool ok() const { return failures == 0 && cases > 0; }
};

/// Random element of A: up to four L-powers in [-3, 4] over a product of up to two
/// factors 1 / (1 - L^-i), i <= 3.
AElem random_aelem(std::mt19937_64& rng);
/// Rationals q > 1 dense enough near 1 to detect sign changes of the random elements.
std::vector<mpq_class> positivity_sample_points();

/// A random invertible matrix with entries u t^e (e in [-2, 2]) or 0.
GL2Element random_gl2(const FieldConfig& K, std::mt19937_64& rng);
/// A random element of GL2(O).
GL2Element random_gl2_integral(const FieldConfig& K, std::mt19937_64& rng);

PropertyResult check_theta_homomorphism(std::uint64_t seed, std::uint32_t cases);
PropertyResult check_positivity_sampling(std::uint64_t seed, std::uint32_t cases);
PropertyResult check_weight_right_K(std::uint64_t seed, std::uint32_t cases, const std::vector<FieldConfig>& fields);
PropertyResult check_weight_lambda(std::uint64_t seed, std::uint32_t cases, const std::vector<FieldConfig>& fields);

}  // namespace dptk
