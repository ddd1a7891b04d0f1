#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "dptk/lang/ast.hpp"

namespace dptk::testing {

/// Generator of random well-sorted ASTs in the canonical form produced by the parser
/// (constant VF subterms already folded).
class RandomAst {
public:
    explicit RandomAst(std::uint64_t seed) : rng_(seed) {}

    FormulaPtr formula(int depth) {
        int pick = uniform(0, depth <= 0 ? 1 : 8);
        switch (pick) {
            case 0:
            case 1: return atom();
            case 2: return fml::neg(formula(depth - 1));
            case 3: return fml::conj(formula(depth - 1), formula(depth - 1));
            case 4: return fml::disj(formula(depth - 1), formula(depth - 1));
            case 5: return fml::implies(formula(depth - 1), formula(depth - 1));
            case 6: return fml::iff(formula(depth - 1), formula(depth - 1));
            default: return quantifier(depth);
        }
    }

    TermPtr term(Sort s, int depth) {
        if (depth <= 0 || uniform(0, 3) == 0) return leaf(s);
        int pick = uniform(0, s == Sort::ValuedField ? 4 : 5);
        if (pick == 5) return s == Sort::ValueGroup ? term::ord(term(Sort::ValuedField, depth - 1))
                                                    : term::ac(term(Sort::ValuedField, depth - 1));
        TermPtr a = term(s, depth - 1);
        if (pick == 3) return term::neg(non_const(a, s));
        if (pick == 4) return term::pow(non_const(a, s), uniform(0, 3));
        TermPtr b = term(s, depth - 1);
        if (s == Sort::ValuedField && a->kind == TermKind::VFConst && b->kind == TermKind::VFConst)
            b = variable(s);
        if (pick == 0) return term::add(a, b);
        if (pick == 1) return term::sub(a, b);
        return term::mul(a, b);
    }

private:
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    TermPtr non_const(const TermPtr& t, Sort s) {
        return t->kind == TermKind::VFConst ? variable(s) : t;
    }

    TermPtr variable(Sort s) {
        // Bound variables in scope are preferred half of the time.
        std::vector<std::string> candidates, seen;
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
            if (std::find(seen.begin(), seen.end(), it->first) != seen.end()) continue;
            seen.push_back(it->first);
            if (it->second == s) candidates.push_back(it->first);
        }
        if (!candidates.empty() && uniform(0, 1) == 0)
            return term::var(candidates[static_cast<std::size_t>(uniform(0, static_cast<int>(candidates.size()) - 1))], s);
        static const char* vf[] = {"x", "y", "z"};
        static const char* rf[] = {"r", "s"};
        static const char* vg[] = {"w", "v"};
        if (s == Sort::ValuedField) return term::var(vf[uniform(0, 2)], s);
        if (s == Sort::ResidueField) return term::var(rf[uniform(0, 1)], s);
        return term::var(vg[uniform(0, 1)], s);
    }

    TermPtr leaf(Sort s) {
        if (uniform(0, 1) == 0) return variable(s);
        if (s == Sort::ValuedField) {
            std::vector<std::int64_t> c(static_cast<std::size_t>(uniform(1, 3)));
            for (auto& x : c) x = uniform(-4, 4);
            std::int64_t d = uniform(0, 3) == 0 ? uniform(1, 6) : 1;
            return term::vf_const(ZPoly(c), d);
        }
        if (s == Sort::ResidueField) return term::rf_const(uniform(-3, 6));
        return term::vg_const(uniform(-5, 5));
    }

    FormulaPtr atom() {
        if (uniform(0, 2) == 0)
            return fml::lt(term(Sort::ValueGroup, 2), term(Sort::ValueGroup, 2));
        Sort s = static_cast<Sort>(uniform(0, 2));
        return fml::eq(term(s, 3), term(s, 3));
    }

    FormulaPtr quantifier(int depth) {
        Sort s = static_cast<Sort>(uniform(0, 2));
        std::string name = "b" + std::to_string(uniform(0, 3));
        std::optional<BoundAnnotation> bound;
        if (s == Sort::ValuedField && uniform(0, 1)) bound = BoundAnnotation{uniform(-2, 2), std::nullopt};
        if (s == Sort::ValueGroup && uniform(0, 1)) {
            int lo = uniform(-3, 3);
            bound = BoundAnnotation{std::nullopt, std::make_pair<std::int64_t, std::int64_t>(lo, lo + uniform(0, 4))};
        }
        scope_.emplace_back(name, s);
        FormulaPtr body = formula(depth - 1);
        scope_.pop_back();
        return uniform(0, 1) ? fml::forall(name, s, body, bound) : fml::exists(name, s, body, bound);
    }

    std::mt19937_64 rng_;
    std::vector<std::pair<std::string, Sort>> scope_;
};

}  // namespace dptk::testing
