#include "dptk/measure/decompose.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <functional>
#include <set>

namespace dptk {

namespace {

constexpr std::int64_t kInf = INT64_MAX;

enum class AtomKind { OrdLess, OrdGreater, OrdEqual, AcEqual };  // ord < k, k < ord, ord = k, ac = a

struct Atom {
    AtomKind kind;
    std::size_t center;
    std::int64_t k;
};

// Local data of z - c_j on a piece: ord (kInf for z = c_j) and ac (nullopt: a generic angular value).
struct Local {
    std::int64_t ord;
    std::optional<std::int64_t> ac;
};

std::int64_t fold_int(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::RFConst:
        case TermKind::VGConst: return t->value;
        case TermKind::Neg: return -fold_int(t->lhs);
        case TermKind::Add: return checked::add(fold_int(t->lhs), fold_int(t->rhs));
        case TermKind::Sub: return checked::add(fold_int(t->lhs), -fold_int(t->rhs));
        case TermKind::Mul: return checked::mul(fold_int(t->lhs), fold_int(t->rhs));
        default: throw CellError("expected an integer constant in a fragment atom");
    }
}

class Fragment {
public:
    Fragment(const std::string& var, std::vector<ZPoly> centers) : var_(var), centers_(std::move(centers)) {}

    void collect(const FormulaPtr& f) {
        switch (f->kind) {
            case FormulaKind::Eq:
            case FormulaKind::Lt: atoms_[f.get()] = classify(*f); return;
            case FormulaKind::Not: collect(f->a); return;
            case FormulaKind::And:
            case FormulaKind::Or:
            case FormulaKind::Implies:
            case FormulaKind::Iff:
                collect(f->a);
                collect(f->b);
                return;
            default: throw CellError("quantifier inside a fragment formula");
        }
    }

    bool eval(const FormulaPtr& f, const std::vector<Local>& loc) {
        switch (f->kind) {
            case FormulaKind::Eq:
            case FormulaKind::Lt: return atom(atoms_.at(f.get()), loc);
            case FormulaKind::Not: return !eval(f->a, loc);
            case FormulaKind::And: return eval(f->a, loc) && eval(f->b, loc);
            case FormulaKind::Or: return eval(f->a, loc) || eval(f->b, loc);
            case FormulaKind::Implies: return !eval(f->a, loc) || eval(f->b, loc);
            case FormulaKind::Iff: return eval(f->a, loc) == eval(f->b, loc);
            default: throw CellError("quantifier inside a fragment formula");
        }
    }

    const std::vector<ZPoly>& centers() const { return centers_; }
    const std::map<const Formula*, Atom>& atoms() const { return atoms_; }
    std::set<std::int64_t>& units() { return units_; }

private:
    // x = k*z + c with k in {0, 1}.
    std::optional<std::pair<int, ZPoly>> linear(const TermPtr& x) {
        if (x->kind == TermKind::Var) {
            if (x->name != var_) return std::nullopt;
            return std::make_pair(1, ZPoly());
        }
        if (x->kind == TermKind::Add || x->kind == TermKind::Sub) {
            auto a = linear(x->lhs), b = linear(x->rhs);
            if (!a || !b) return std::nullopt;
            const int k = x->kind == TermKind::Add ? a->first + b->first : a->first - b->first;
            if (k != 0 && k != 1) return std::nullopt;
            return std::make_pair(k, x->kind == TermKind::Add ? a->second + b->second : a->second - b->second);
        }
        if (contains_var(x)) return std::nullopt;
        return std::make_pair(0, integral_constant(x));
    }

    static bool contains_var(const TermPtr& x) {
        if (!x) return false;
        return x->kind == TermKind::Var || contains_var(x->lhs) || contains_var(x->rhs);
    }

    std::optional<std::size_t> center_of(const TermPtr& x) {
        auto l = linear(x);
        if (!l || l->first != 1) return std::nullopt;
        ZPoly c = -l->second;
        auto it = std::find(centers_.begin(), centers_.end(), c);
        if (it != centers_.end()) return static_cast<std::size_t>(it - centers_.begin());
        centers_.push_back(c);
        return centers_.size() - 1;
    }

    Atom classify(const Formula& f) {
        auto side = [&](const TermPtr& t, TermKind k) -> std::optional<std::size_t> {
            if (t->kind != k) return std::nullopt;
            return center_of(t->lhs);
        };
        const auto outside = CellError("atom outside the fragment: ord(z - c) ~ k or ac(z - c) = a");
        if (f.kind == FormulaKind::Eq) {
            for (int flip = 0; flip < 2; ++flip) {
                const TermPtr& x = flip ? f.rhs : f.lhs;
                const TermPtr& y = flip ? f.lhs : f.rhs;
                if (auto c = side(x, TermKind::Ord)) return {AtomKind::OrdEqual, *c, fold_int(y)};
                if (auto c = side(x, TermKind::Ac)) return {AtomKind::AcEqual, *c, fold_int(y)};
            }
            throw outside;
        }
        if (auto c = side(f.lhs, TermKind::Ord)) return {AtomKind::OrdLess, *c, fold_int(f.rhs)};
        if (auto c = side(f.rhs, TermKind::Ord)) return {AtomKind::OrdGreater, *c, fold_int(f.lhs)};
        throw outside;
    }

    bool atom(const Atom& a, const std::vector<Local>& loc) {
        const Local& l = loc.at(a.center);
        switch (a.kind) {
            case AtomKind::OrdLess: return l.ord != kInf && l.ord < a.k;
            case AtomKind::OrdGreater: return l.ord == kInf || a.k < l.ord;
            case AtomKind::OrdEqual: return l.ord == a.k;
            case AtomKind::AcEqual:
                if (!l.ac) return false;
                if (*l.ac != a.k) units_.insert(*l.ac - a.k);
                return *l.ac == a.k;
        }
        return false;
    }

    std::string var_;
    std::vector<ZPoly> centers_;
    std::map<const Formula*, Atom> atoms_;
    std::set<std::int64_t> units_;  // integers that must stay nonzero mod p
};

// What a shell {ord(z - a) = alpha, ac(z - a) = xi} contributes.
struct ShellPattern {
    std::vector<std::int64_t> constants;  // xi values whose piece lies in f
    bool generic = false;                 // xi outside `excluded` lies in f
    std::vector<std::int64_t> excluded;
    std::map<std::int64_t, std::size_t> sub_balls;  // eta -> a center of the sub-ball
    bool operator==(const ShellPattern& o) const {
        return constants == o.constants && generic == o.generic && excluded == o.excluded && sub_balls.empty() &&
               o.sub_balls.empty();
    }
};

class Decomposer {
public:
    Decomposer(Fragment& frag, FormulaPtr f, CellComplex& out) : frag_(frag), f_(std::move(f)), out_(out) {}

    void region(const ZPoly& anchor, std::int64_t level) {
        const auto& cs = frag_.centers();
        std::vector<std::int64_t> delta(cs.size()), eta(cs.size(), 0);
        for (std::size_t j = 0; j < cs.size(); ++j) {
            ZPoly d = cs[j] - anchor;
            if (d.is_zero()) {
                delta[j] = kInf;
                continue;
            }
            delta[j] = d.low_order();
            eta[j] = d.low_coeff();
            frag_.units().insert(eta[j]);
        }

        std::vector<Local> at_anchor(cs.size());
        for (std::size_t j = 0; j < cs.size(); ++j)
            at_anchor[j] = delta[j] == kInf ? Local{kInf, 0} : Local{delta[j], -eta[j]};
        if (frag_.eval(f_, at_anchor)) {
            Cell c;
            c.components.push_back(CellComponent{true, term::vf_const(anchor), nullptr, nullptr});
            out_.cells.push_back(std::move(c));
        }

        std::int64_t top = level - 1;
        for (std::size_t j = 0; j < cs.size(); ++j)
            if (delta[j] != kInf) top = std::max(top, delta[j]);
        for (const auto& [node, a] : frag_.atoms())
            if (a.kind != AtomKind::AcEqual) top = std::max(top, a.k);
        const std::int64_t tail = std::max(level, top + 1);

        std::optional<ShellPattern> run;
        std::int64_t run_lo = level;
        for (std::int64_t alpha = level; alpha <= tail; ++alpha) {
            ShellPattern pat = shell(anchor, alpha, delta, eta);
            if (run && *run == pat && alpha < tail) continue;
            if (run && *run == pat) {  // the tail extends the current run
                emit(anchor, *run, run_lo, std::nullopt);
                run.reset();
                break;
            }
            if (run) emit(anchor, *run, run_lo, alpha - 1);
            for (const auto& [e, j] : pat.sub_balls) region(frag_.centers()[j], alpha + 1);
            run = pat;
            run_lo = alpha;
            if (alpha == tail) emit(anchor, pat, alpha, std::nullopt);
        }
    }

private:
    ShellPattern shell(const ZPoly& anchor, std::int64_t alpha, const std::vector<std::int64_t>& delta,
                       const std::vector<std::int64_t>& eta) {
        (void)anchor;
        const auto& cs = frag_.centers();
        ShellPattern pat;
        std::set<std::int64_t> special;
        for (std::size_t j = 0; j < cs.size(); ++j)
            if (delta[j] == alpha) pat.sub_balls.emplace(eta[j], j);
        for (const auto& [node, a] : frag_.atoms()) {
            if (a.kind != AtomKind::AcEqual) continue;
            if (delta[a.center] > alpha) special.insert(a.k);
            else if (delta[a.center] == alpha) special.insert(a.k + eta[a.center]);
        }
        special.erase(0);
        for (const auto& [e, j] : pat.sub_balls) special.erase(e);

        std::vector<std::int64_t> all(special.begin(), special.end());
        for (const auto& [e, j] : pat.sub_balls) all.push_back(e);
        for (std::size_t i = 0; i < all.size(); ++i) {
            frag_.units().insert(all[i]);
            for (std::size_t k = i + 1; k < all.size(); ++k) frag_.units().insert(all[i] - all[k]);
        }

        auto locals = [&](std::optional<std::int64_t> xi) {
            std::vector<Local> loc(cs.size());
            for (std::size_t j = 0; j < cs.size(); ++j) {
                if (delta[j] > alpha) loc[j] = {alpha, xi};
                else if (delta[j] == alpha) loc[j] = {alpha, xi ? std::optional<std::int64_t>(*xi - eta[j]) : std::nullopt};
                else loc[j] = {delta[j], -eta[j]};
            }
            return loc;
        };
        for (auto s : special)
            if (frag_.eval(f_, locals(s))) pat.constants.push_back(s);
        pat.generic = frag_.eval(f_, locals(std::nullopt));
        if (pat.generic) {
            std::sort(all.begin(), all.end());
            pat.excluded = all;
        }
        return pat;
    }

    void emit(const ZPoly& anchor, const ShellPattern& pat, std::int64_t lo, std::optional<std::int64_t> hi) {
        auto shell_cell = [&](TermPtr angular) {
            Cell c;
            CellComponent comp{false, term::vf_const(anchor), nullptr, std::move(angular)};
            if (hi && *hi == lo) comp.order = term::vg_const(lo);
            else {
                c.vg_params.push_back(VGParam{"v", lo, hi});
                comp.order = term::var("v", Sort::ValueGroup);
            }
            c.components.push_back(comp);
            return c;
        };
        for (auto s : pat.constants) out_.cells.push_back(shell_cell(term::rf_const(s)));
        if (pat.generic) {
            Cell c = shell_cell(term::var("r", Sort::ResidueField));
            c.rf_params = {"r"};
            for (auto e : pat.excluded) {
                auto ne = fml::ne(term::var("r", Sort::ResidueField), term::rf_const(e));
                c.rf_condition = c.rf_condition ? fml::conj(c.rf_condition, ne) : ne;
            }
            out_.cells.push_back(std::move(c));
        }
    }

    Fragment& frag_;
    FormulaPtr f_;
    CellComplex& out_;
};

}  // namespace

ZPoly integral_constant(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::VFConst:
            if (t->denom != 1) throw CellError("fragment centers must lie in Z[t]");
            return t->poly;
        case TermKind::Neg: return -integral_constant(t->lhs);
        case TermKind::Add: return integral_constant(t->lhs) + integral_constant(t->rhs);
        case TermKind::Sub: return integral_constant(t->lhs) - integral_constant(t->rhs);
        case TermKind::Mul: return integral_constant(t->lhs) * integral_constant(t->rhs);
        case TermKind::Pow: return integral_constant(t->lhs).pow(static_cast<unsigned>(t->value));
        default: throw CellError("fragment center is not a constant");
    }
}

std::vector<std::uint32_t> prime_divisors(std::int64_t n) {
    std::vector<std::uint32_t> out;
    std::uint64_t m = n < 0 ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
    for (std::uint64_t d = 2; d * d <= m; ++d) {
        if (m % d) continue;
        out.push_back(static_cast<std::uint32_t>(d));
        while (m % d == 0) m /= d;
    }
    if (m > 1 && m <= UINT32_MAX) out.push_back(static_cast<std::uint32_t>(m));
    return out;
}

CellComplex decompose_fragment(const FormulaPtr& f, const std::string& var, const std::vector<ZPoly>& centers,
                               std::int64_t box_min_ord) {
    std::vector<ZPoly> distinct;
    for (const auto& c : centers)
        if (std::find(distinct.begin(), distinct.end(), c) == distinct.end()) distinct.push_back(c);
    Fragment frag(var, distinct);
    frag.collect(f);

    CellComplex cx;
    cx.variables = {var};
    cx.box_min_ord = {box_min_ord};
    cx.ambient = f;
    Decomposer(frag, f, cx).region(ZPoly(), box_min_ord);

    std::set<std::uint32_t> bad;
    for (auto u : frag.units()) {
        if (u == 0) throw CellError("two fragment data coincide identically");
        for (auto p : prime_divisors(u)) bad.insert(p);
    }
    cx.excluded_primes.assign(bad.begin(), bad.end());
    return cx;
}

AffineImage affine_image(const FormulaPtr& f, const std::string& var, std::int64_t v0, const ZPoly& u,
                         const ZPoly& v) {
    if (u.is_zero()) throw CellError("affine map with u = 0");
    Fragment frag(var, {});
    frag.collect(f);
    const std::int64_t ord_u = u.low_order(), ac_u = u.low_coeff();
    auto diff = [&](const ZPoly& c) {
        auto w = term::var(var, Sort::ValuedField);
        return c.is_zero() ? w : term::sub(w, term::vf_const(c));
    };
    std::function<FormulaPtr(const FormulaPtr&)> go = [&](const FormulaPtr& g) -> FormulaPtr {
        switch (g->kind) {
            case FormulaKind::Eq:
            case FormulaKind::Lt: {
                const Atom& a = frag.atoms().at(g.get());
                auto d = diff(v + u * frag.centers()[a.center]);
                switch (a.kind) {
                    case AtomKind::OrdLess: return fml::lt(term::ord(d), term::vg_const(a.k + ord_u));
                    case AtomKind::OrdGreater: return fml::lt(term::vg_const(a.k + ord_u), term::ord(d));
                    case AtomKind::OrdEqual: return fml::eq(term::ord(d), term::vg_const(a.k + ord_u));
                    case AtomKind::AcEqual: return fml::eq(term::ac(d), term::rf_const(checked::mul(a.k, ac_u)));
                }
                return nullptr;
            }
            case FormulaKind::Not: return fml::neg(go(g->a));
            case FormulaKind::And: return fml::conj(go(g->a), go(g->b));
            case FormulaKind::Or: return fml::disj(go(g->a), go(g->b));
            case FormulaKind::Implies: return fml::implies(go(g->a), go(g->b));
            case FormulaKind::Iff: return fml::iff(go(g->a), go(g->b));
            default: throw CellError("quantifier inside a fragment formula");
        }
    };
    AffineImage img;
    img.box_min_ord = v0 + ord_u;
    img.formula = fml::conj(fml::le(term::vg_const(v0 + ord_u), term::ord(diff(v))), go(f));
    if (!v.is_zero()) img.box_min_ord = std::min(img.box_min_ord, static_cast<std::int64_t>(v.low_order()));
    return img;
}

}  // namespace dptk
