#include "dptk/eval/ake_suite.hpp"

namespace dptk {

const std::vector<AkeSentence>& ake_suite() {
    static const std::vector<AkeSentence> suite = {
        {"sqrt-1+t", "exists x:VF[ord>=0] x^2 = 1+t"},
        {"sqrt-t", "exists x:VF[ord>=0] x^2 = t"},
        {"sqrt-minus-1", "exists x:VF[ord>=0] x^2 = -1"},
        {"sqrt-2+t", "exists x:VF[ord>=0] x^2 = 2+t"},
        {"fourth-root-1+t", "exists x:VF[ord>=0] x^4 = 1+t"},
        {"cube-of-2+t", "exists x:VF[ord>=0] x^3 = (2+t)^3"},
        {"odd-ord-times-t", "forall x:VF[ord>=0] ((exists w:VG[0..3] ord(x^2*t) = 2*w+1) or ord(x) >= 2)"},
        {"one-plus-uniformizer-square",
         "exists y:VF[ord>=1] (ord(y) = 1 and exists x:VF[ord>=0] x^2 = 1+y)"},
        {"residue-square-lifts", "(exists r:RF r^2 = 2) <-> (exists x:VF[ord>=0] x^2 = 2)"},
        {"no-half-ord", "exists x:VF[ord>=-1] t*x^2 = 1"},
        {"quadratic-root", "exists x:VF[ord>=0] x^2 - x - t = 0"},
        {"cubic-root", "exists x:VF[ord>=0] x^3 - x + t = 0"},
    };
    return suite;
}

}  // namespace dptk
