#pragma once

#include <string>
#include <vector>

namespace dptk {

/// Bounded-quantifier sentences whose truth value should not depend on the characteristic
/// of a local field with residue field F_p (p odd).
struct AkeSentence {
    std::string name;
    std::string text;
};

const std::vector<AkeSentence>& ake_suite();

}  // namespace dptk
