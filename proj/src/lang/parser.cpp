#include "dptk/lang/parser.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <set>

namespace dptk {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Int, Ident, Sym, End };

struct Token {
    Tok kind;
    std::string text;
    std::int64_t num = 0;
    std::size_t pos = 0;
    std::size_t end = 0;
};

std::vector<Token> lex(std::string_view s) {
    static const char* const kSyms[] = {"<->", "->", "<=", ">=", "!=", "..", "(", ")", "[", "]", ",", ":",
                                        "+",   "-",  "*",  "^",  "/",  "=",  "<", ">", "&", "|", "!", "~"};
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (std::isdigit(c)) {
            std::size_t j = i;
            std::int64_t v = 0;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
                int d = s[j] - '0';
                if (v > (INT64_MAX - d) / 10) throw ParseError("integer literal too large", i);
                v = v * 10 + d;
                ++j;
            }
            out.push_back({Tok::Int, std::string(s.substr(i, j - i)), v, i, j});
            i = j;
            continue;
        }
        if (std::isalpha(c) || c == '_') {
            std::size_t j = i;
            while (j < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\''))
                ++j;
            out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), 0, i, j});
            i = j;
            continue;
        }
        bool matched = false;
        for (const char* sym : kSyms) {
            std::string_view sv(sym);
            if (s.substr(i, sv.size()) == sv) {
                out.push_back({Tok::Sym, std::string(sv), 0, i, i + sv.size()});
                i += sv.size();
                matched = true;
                break;
            }
        }
        if (!matched) throw ParseError(std::string("unexpected character '") + s[i] + "'", i);
    }
    out.push_back({Tok::End, "", 0, s.size(), s.size()});
    return out;
}

bool is_keyword(const std::string& s) {
    return s == "forall" || s == "exists" || s == "and" || s == "or" || s == "not" || s == "ord" || s == "ac" ||
           s == "t";
}

// ---------------------------------------------------------------------------
// Untyped syntax trees

struct RawTerm {
    enum class K { Ident, Int, Inv, T, Add, Sub, Mul, Neg, Pow, Ord, Ac } k;
    std::size_t pos = 0;
    std::string name;
    std::optional<Sort> annot;
    std::int64_t num = 0, den = 1;
    std::unique_ptr<RawTerm> l, r;
};
using RawTermPtr = std::unique_ptr<RawTerm>;

struct RawFormula {
    enum class K { Atom, Not, And, Or, Implies, Iff, Forall, Exists } k;
    std::size_t pos = 0;
    std::string rel;
    RawTermPtr lhs, rhs;
    std::unique_ptr<RawFormula> a, b;
    std::string var;
    Sort sort = Sort::ValuedField;
    std::optional<BoundAnnotation> bound;
};
using RawFormulaPtr = std::unique_ptr<RawFormula>;

RawTermPtr raw(RawTerm::K k, std::size_t pos) {
    auto r = std::make_unique<RawTerm>();
    r->k = k;
    r->pos = pos;
    return r;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(lex(text)) {}

    RawFormulaPtr formula_entry() {
        auto f = parse_iff();
        expect_end();
        return f;
    }

    RawTermPtr term_entry() {
        auto t = parse_sum();
        expect_end();
        return t;
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(idx_ + k, toks_.size() - 1)]; }
    bool at_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }
    bool at_word(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }
    const Token& next() { return toks_[idx_ < toks_.size() - 1 ? idx_++ : idx_]; }

    [[noreturn]] void fail(const std::string& msg) const {
        std::string found = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
        throw ParseError(msg + ", found " + found, peek().pos);
    }

    void expect_sym(const char* s) {
        if (!at_sym(s)) fail(std::string("expected '") + s + "'");
        next();
    }

    void expect_end() {
        if (peek().kind != Tok::End) fail("unexpected trailing input");
    }

    std::int64_t signed_int() {
        bool negative = false;
        if (at_sym("-")) {
            next();
            negative = true;
        }
        if (peek().kind != Tok::Int) fail("expected integer");
        std::int64_t v = next().num;
        return negative ? -v : v;
    }

    std::optional<Sort> maybe_annotation() {
        if (!at_sym(":")) return std::nullopt;
        next();
        if (peek().kind != Tok::Ident) fail("expected sort name VF, RF or VG");
        auto s = sort_from_name(peek().text);
        if (!s) fail("unknown sort");
        next();
        return s;
    }

    // term := mul (('+'|'-') mul)*
    RawTermPtr parse_sum() {
        auto lhs = parse_product();
        while (at_sym("+") || at_sym("-")) {
            std::size_t pos = peek().pos;
            auto k = next().text == "+" ? RawTerm::K::Add : RawTerm::K::Sub;
            auto node = raw(k, pos);
            node->l = std::move(lhs);
            node->r = parse_product();
            lhs = std::move(node);
        }
        return lhs;
    }

    RawTermPtr parse_product() {
        auto lhs = parse_unary();
        while (at_sym("*")) {
            std::size_t pos = next().pos;
            auto node = raw(RawTerm::K::Mul, pos);
            node->l = std::move(lhs);
            node->r = parse_unary();
            lhs = std::move(node);
        }
        return lhs;
    }

    RawTermPtr parse_unary() {
        if (at_sym("-")) {
            // A minus sign glued to an integer literal is a negative literal.
            const Token& minus = peek();
            const Token& after = peek(1);
            if (after.kind == Tok::Int && after.pos == minus.end) return parse_power();
            std::size_t pos = next().pos;
            auto node = raw(RawTerm::K::Neg, pos);
            node->l = parse_unary();
            return node;
        }
        return parse_power();
    }

    RawTermPtr parse_power() {
        auto base = parse_primary();
        if (at_sym("^")) {
            std::size_t pos = next().pos;
            if (peek().kind != Tok::Int) fail("expected a nonnegative integer exponent");
            auto node = raw(RawTerm::K::Pow, pos);
            node->num = next().num;
            node->l = std::move(base);
            return node;
        }
        return base;
    }

    RawTermPtr parse_literal() {
        std::size_t pos = peek().pos;
        bool negative = false;
        if (at_sym("-")) {
            next();
            negative = true;
        }
        std::int64_t v = next().num;
        if (negative) v = -v;
        if (at_sym("/")) {
            next();
            if (peek().kind != Tok::Int) fail("expected denominator");
            auto node = raw(RawTerm::K::Inv, pos);
            node->num = v;
            node->den = next().num;
            if (node->den == 0) throw ParseError("zero denominator", pos);
            node->annot = maybe_annotation();
            return node;
        }
        auto node = raw(RawTerm::K::Int, pos);
        node->num = v;
        node->annot = maybe_annotation();
        return node;
    }

    RawTermPtr parse_primary() {
        const Token& tok = peek();
        if (tok.kind == Tok::Int || (tok.kind == Tok::Sym && tok.text == "-")) return parse_literal();
        if (tok.kind == Tok::Sym && tok.text == "(") {
            next();
            auto inner = parse_sum();
            expect_sym(")");
            return inner;
        }
        if (tok.kind == Tok::Ident) {
            if (tok.text == "t") {
                return raw(RawTerm::K::T, next().pos);
            }
            if (tok.text == "ord" || tok.text == "ac") {
                auto node = raw(tok.text == "ord" ? RawTerm::K::Ord : RawTerm::K::Ac, tok.pos);
                next();
                expect_sym("(");
                node->l = parse_sum();
                expect_sym(")");
                return node;
            }
            if (is_keyword(tok.text)) fail("unexpected keyword");
            auto node = raw(RawTerm::K::Ident, tok.pos);
            node->name = next().text;
            node->annot = maybe_annotation();
            return node;
        }
        fail("expected a term");
    }

    RawFormulaPtr parse_iff() {
        auto lhs = parse_implies();
        if (at_sym("<->")) {
            std::size_t pos = next().pos;
            auto node = std::make_unique<RawFormula>();
            node->k = RawFormula::K::Iff;
            node->pos = pos;
            node->a = std::move(lhs);
            node->b = parse_iff();
            return node;
        }
        return lhs;
    }

    RawFormulaPtr parse_implies() {
        auto lhs = parse_or();
        if (at_sym("->")) {
            std::size_t pos = next().pos;
            auto node = std::make_unique<RawFormula>();
            node->k = RawFormula::K::Implies;
            node->pos = pos;
            node->a = std::move(lhs);
            node->b = parse_implies();
            return node;
        }
        return lhs;
    }

    RawFormulaPtr parse_or() {
        auto lhs = parse_and();
        while (at_word("or") || at_sym("|")) {
            std::size_t pos = next().pos;
            auto node = std::make_unique<RawFormula>();
            node->k = RawFormula::K::Or;
            node->pos = pos;
            node->a = std::move(lhs);
            node->b = parse_and();
            lhs = std::move(node);
        }
        return lhs;
    }

    RawFormulaPtr parse_and() {
        auto lhs = parse_unary_formula();
        while (at_word("and") || at_sym("&")) {
            std::size_t pos = next().pos;
            auto node = std::make_unique<RawFormula>();
            node->k = RawFormula::K::And;
            node->pos = pos;
            node->a = std::move(lhs);
            node->b = parse_unary_formula();
            lhs = std::move(node);
        }
        return lhs;
    }

    RawFormulaPtr parse_unary_formula() {
        if (at_word("not") || at_sym("!") || at_sym("~")) {
            std::size_t pos = next().pos;
            auto node = std::make_unique<RawFormula>();
            node->k = RawFormula::K::Not;
            node->pos = pos;
            node->a = parse_unary_formula();
            return node;
        }
        if (at_word("forall") || at_word("exists")) return parse_quantifier();
        return parse_primary_formula();
    }

    RawFormulaPtr parse_quantifier() {
        auto node = std::make_unique<RawFormula>();
        node->pos = peek().pos;
        node->k = next().text == "forall" ? RawFormula::K::Forall : RawFormula::K::Exists;
        if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail("expected a variable name");
        node->var = next().text;
        expect_sym(":");
        if (peek().kind != Tok::Ident || !sort_from_name(peek().text)) fail("expected sort name VF, RF or VG");
        node->sort = *sort_from_name(next().text);
        if (at_sym("[")) {
            std::size_t pos = next().pos;
            BoundAnnotation b;
            if (node->sort == Sort::ValuedField) {
                if (!at_word("ord")) fail("expected 'ord>=n' bound");
                next();
                expect_sym(">=");
                b.min_ord = signed_int();
            } else if (node->sort == Sort::ValueGroup) {
                std::int64_t lo = signed_int();
                expect_sym("..");
                std::int64_t hi = signed_int();
                b.interval = {lo, hi};
            } else {
                throw ParseError("residue-field quantifiers take no bound", pos);
            }
            expect_sym("]");
            node->bound = b;
        }
        node->a = parse_iff();
        return node;
    }

    RawFormulaPtr parse_atom() {
        auto node = std::make_unique<RawFormula>();
        node->k = RawFormula::K::Atom;
        node->pos = peek().pos;
        node->lhs = parse_sum();
        static const char* const rels[] = {"=", "<", "<=", ">", ">=", "!="};
        for (const char* r : rels) {
            if (at_sym(r)) {
                node->rel = next().text;
                node->rhs = parse_sum();
                return node;
            }
        }
        fail("expected a relation (=, <, <=, >, >=, !=)");
    }

    RawFormulaPtr parse_primary_formula() {
        if (at_sym("(")) {
            std::size_t save = idx_;
            try {
                return parse_atom();
            } catch (const ParseError& atom_error) {
                idx_ = save;
                next();
                try {
                    auto inner = parse_iff();
                    expect_sym(")");
                    return inner;
                } catch (const ParseError& group_error) {
                    // Report whichever reading got further.
                    if (atom_error.position() > group_error.position()) throw atom_error;
                    throw;
                }
            }
        }
        return parse_atom();
    }

    std::vector<Token> toks_;
    std::size_t idx_ = 0;
};

// ---------------------------------------------------------------------------
// Sort inference and typed construction

struct Scope {
    std::vector<std::pair<std::string, Sort>> bound;
    std::optional<Sort> lookup(const std::string& n) const {
        for (auto it = bound.rbegin(); it != bound.rend(); ++it)
            if (it->first == n) return it->second;
        return std::nullopt;
    }
};

class Typer {
public:
    explicit Typer(std::map<std::string, Sort> known = {}) : free_(std::move(known)) {}

    void infer(const RawFormula& f) {
        // Iterate to a fixpoint: each pass may fix the sort of more free variables.
        // Explicit annotations and forced sorts first; literal defaults only once those are exhausted.
        for (bool defaults : {false, true}) {
            allow_defaults_ = defaults;
            for (int pass = 0; pass < 64; ++pass) {
                changed_ = false;
                pending_.clear();
                Scope scope;
                walk(f, scope);
                if (!changed_) break;
            }
        }
        if (!pending_.empty()) {
            const RawTerm* t = pending_.front();
            throw SortError("cannot infer the sort of '" + describe(*t) + "' (annotate it as name:VF/RF/VG)",
                            describe(*t));
        }
    }

    std::optional<Sort> synth_top(const RawTerm& t) {
        Scope scope;
        return synth(t, scope);
    }

    void infer_term(const RawTerm& t, std::optional<Sort> expected) {
        Scope scope;
        for (int pass = 0; pass < 64; ++pass) {
            changed_ = false;
            auto s = expected ? expected : synth(t, scope);
            if (s) check(t, *s, scope);
            if (!changed_) break;
        }
    }

    FormulaPtr build(const RawFormula& f, Scope& scope) {
        using K = RawFormula::K;
        switch (f.k) {
            case K::Atom: return build_atom(f, scope);
            case K::Not: return fml::neg(build(*f.a, scope));
            case K::And: return fml::conj(build(*f.a, scope), build(*f.b, scope));
            case K::Or: return fml::disj(build(*f.a, scope), build(*f.b, scope));
            case K::Implies: return fml::implies(build(*f.a, scope), build(*f.b, scope));
            case K::Iff: return fml::iff(build(*f.a, scope), build(*f.b, scope));
            case K::Forall:
            case K::Exists: {
                scope.bound.emplace_back(f.var, f.sort);
                auto body = build(*f.a, scope);
                scope.bound.pop_back();
                return f.k == K::Forall ? fml::forall(f.var, f.sort, body, f.bound)
                                        : fml::exists(f.var, f.sort, body, f.bound);
            }
        }
        throw std::logic_error("unreachable");
    }

    TermPtr build_term(const RawTerm& t, Sort s, const Scope& scope) {
        using K = RawTerm::K;
        if (t.annot && *t.annot != s) mismatch(t, s, *t.annot);
        switch (t.k) {
            case K::Int:
                if (s == Sort::ValuedField) return term::vf_const(ZPoly(t.num));
                if (s == Sort::ResidueField) return term::rf_const(t.num);
                return term::vg_const(t.num);
            case K::Inv:
                if (s != Sort::ValuedField) mismatch(t, s, Sort::ValuedField);
                return term::vf_const(ZPoly(t.num), t.den);
            case K::T:
                if (s != Sort::ValuedField) mismatch(t, s, Sort::ValuedField);
                return term::vf_const(ZPoly::t_power(1));
            case K::Ident: {
                auto actual = sort_of_ident(t, scope);
                if (!actual) throw SortError("cannot infer the sort of '" + t.name + "'", t.name);
                if (*actual != s) mismatch(t, s, *actual);
                return term::var(t.name, s);
            }
            case K::Ord:
                if (s != Sort::ValueGroup) mismatch(t, s, Sort::ValueGroup);
                return term::ord(build_term(*t.l, Sort::ValuedField, scope));
            case K::Ac:
                if (s != Sort::ResidueField) mismatch(t, s, Sort::ResidueField);
                return term::ac(build_term(*t.l, Sort::ValuedField, scope));
            case K::Neg: {
                auto a = build_term(*t.l, s, scope);
                if (a->kind == TermKind::VFConst) return term::vf_const(-a->poly, a->denom);
                return term::neg(a);
            }
            case K::Pow: {
                auto a = build_term(*t.l, s, scope);
                if (a->kind == TermKind::VFConst) {
                    std::int64_t d = 1;
                    for (std::int64_t i = 0; i < t.num; ++i) d = checked::mul(d, a->denom);
                    return term::vf_const(a->poly.pow(static_cast<unsigned>(t.num)), d);
                }
                return term::pow(a, t.num);
            }
            case K::Add:
            case K::Sub:
            case K::Mul: {
                auto a = build_term(*t.l, s, scope);
                auto b = build_term(*t.r, s, scope);
                if (a->kind == TermKind::VFConst && b->kind == TermKind::VFConst) return fold(t.k, *a, *b);
                if (t.k == K::Add) return term::add(a, b);
                if (t.k == K::Sub) return term::sub(a, b);
                return term::mul(a, b);
            }
        }
        throw std::logic_error("unreachable");
    }

private:
    static TermPtr fold(RawTerm::K k, const Term& a, const Term& b) {
        using K = RawTerm::K;
        if (k == K::Mul) return term::vf_const(a.poly * b.poly, checked::mul(a.denom, b.denom));
        ZPoly an = a.poly * ZPoly(b.denom);
        ZPoly bn = b.poly * ZPoly(a.denom);
        ZPoly num = k == K::Add ? an + bn : an - bn;
        return term::vf_const(num, checked::mul(a.denom, b.denom));
    }

    static std::string describe(const RawTerm& t) {
        switch (t.k) {
            case RawTerm::K::Ident: return t.name;
            case RawTerm::K::Int: return std::to_string(t.num);
            default: return "term at position " + std::to_string(t.pos);
        }
    }

    [[noreturn]] static void mismatch(const RawTerm& t, Sort expected, Sort actual) {
        throw SortError("sort mismatch: '" + describe(t) + "' has sort " + std::string(sort_name(actual)) +
                            " where " + std::string(sort_name(expected)) + " is required",
                        describe(t));
    }

    std::optional<Sort> sort_of_ident(const RawTerm& t, const Scope& scope) const {
        if (auto s = scope.lookup(t.name)) return s;
        auto it = free_.find(t.name);
        if (it != free_.end()) return it->second;
        return std::nullopt;
    }

    void record(const RawTerm& t, Sort s) {
        auto it = free_.find(t.name);
        if (it == free_.end()) {
            free_.emplace(t.name, s);
            changed_ = true;
        } else if (it->second != s) {
            mismatch(t, s, it->second);
        }
    }

    std::optional<Sort> synth(const RawTerm& t, const Scope& scope) {
        using K = RawTerm::K;
        switch (t.k) {
            case K::Ident: {
                if (auto s = scope.lookup(t.name)) return s;
                if (t.annot) {
                    record(t, *t.annot);
                    return t.annot;
                }
                auto it = free_.find(t.name);
                if (it != free_.end()) return it->second;
                return std::nullopt;
            }
            case K::Int: return t.annot;
            case K::Inv:
            case K::T: return Sort::ValuedField;
            case K::Ord: return Sort::ValueGroup;
            case K::Ac: return Sort::ResidueField;
            case K::Neg:
            case K::Pow: return synth(*t.l, scope);
            default: {
                auto a = synth(*t.l, scope);
                auto b = synth(*t.r, scope);
                if (a && b && *a != *b) mismatch(*t.r, *a, *b);
                return a ? a : b;
            }
        }
    }

    void check(const RawTerm& t, Sort s, const Scope& scope) {
        using K = RawTerm::K;
        if (t.annot && *t.annot != s) mismatch(t, s, *t.annot);
        switch (t.k) {
            case K::Ident: {
                if (auto b = scope.lookup(t.name)) {
                    if (*b != s) mismatch(t, s, *b);
                } else {
                    record(t, s);
                }
                return;
            }
            case K::Int: return;
            case K::Inv:
            case K::T:
                if (s != Sort::ValuedField) mismatch(t, s, Sort::ValuedField);
                return;
            case K::Ord:
                if (s != Sort::ValueGroup) mismatch(t, s, Sort::ValueGroup);
                check(*t.l, Sort::ValuedField, scope);
                return;
            case K::Ac:
                if (s != Sort::ResidueField) mismatch(t, s, Sort::ResidueField);
                check(*t.l, Sort::ValuedField, scope);
                return;
            case K::Neg:
            case K::Pow: check(*t.l, s, scope); return;
            default:
                check(*t.l, s, scope);
                check(*t.r, s, scope);
                return;
        }
    }

    // Terms whose sort cannot yet be decided; only atoms built purely from integer
    // literals may stay undecided (they default to VF).
public:
    static bool literal_only(const RawTerm& t) {
        using K = RawTerm::K;
        if (t.k == K::Int) return true;
        if (t.k == K::Ident || t.k == K::Ord || t.k == K::Ac) return false;
        if (t.k == K::Inv || t.k == K::T) return true;
        if (t.k == K::Neg || t.k == K::Pow) return literal_only(*t.l);
        return literal_only(*t.l) && literal_only(*t.r);
    }

private:
    static const RawTerm* first_unknown_ident(const RawTerm& t, const Scope& scope,
                                              const std::map<std::string, Sort>& known) {
        if (t.k == RawTerm::K::Ident) {
            if (scope.lookup(t.name) || known.count(t.name)) return nullptr;
            return &t;
        }
        const RawTerm* r = nullptr;
        if (t.l) r = first_unknown_ident(*t.l, scope, known);
        if (!r && t.r) r = first_unknown_ident(*t.r, scope, known);
        return r;
    }

    void walk(const RawFormula& f, Scope& scope) {
        using K = RawFormula::K;
        switch (f.k) {
            case K::Atom: {
                std::optional<Sort> s;
                bool ordered = f.rel != "=" && f.rel != "!=";
                if (ordered) {
                    s = Sort::ValueGroup;
                } else {
                    auto a = synth(*f.lhs, scope);
                    auto b = synth(*f.rhs, scope);
                    if (a && b && *a != *b)
                        throw SortError("atom compares terms of sorts " + std::string(sort_name(*a)) + " and " +
                                            std::string(sort_name(*b)),
                                        f.rel);
                    s = a ? a : b;
                    // An integer literal on either side anchors an otherwise undecided atom in VF.
                    if (!s && allow_defaults_ && (literal_only(*f.lhs) || literal_only(*f.rhs)))
                        s = Sort::ValuedField;
                }
                if (s) {
                    check(*f.lhs, *s, scope);
                    check(*f.rhs, *s, scope);
                } else {
                    const RawTerm* u = first_unknown_ident(*f.lhs, scope, free_);
                    if (!u) u = first_unknown_ident(*f.rhs, scope, free_);
                    if (u) pending_.push_back(u);
                }
                return;
            }
            case K::Not: walk(*f.a, scope); return;
            case K::Forall:
            case K::Exists:
                scope.bound.emplace_back(f.var, f.sort);
                walk(*f.a, scope);
                scope.bound.pop_back();
                return;
            default:
                walk(*f.a, scope);
                walk(*f.b, scope);
                return;
        }
    }

    FormulaPtr build_atom(const RawFormula& f, Scope& scope) {
        std::optional<Sort> s;
        if (f.rel == "=" || f.rel == "!=") {
            s = synth(*f.lhs, scope);
            if (!s) s = synth(*f.rhs, scope);
            if (!s) s = Sort::ValuedField;
        } else {
            s = Sort::ValueGroup;
        }
        auto l = build_term(*f.lhs, *s, scope);
        auto r = build_term(*f.rhs, *s, scope);
        if (f.rel == "=") return fml::eq(l, r);
        if (f.rel == "!=") return fml::ne(l, r);
        if (f.rel == "<") return fml::lt(l, r);
        if (f.rel == ">") return fml::lt(r, l);
        if (f.rel == "<=") return fml::le(l, r);
        return fml::le(r, l);  // ">="
    }

    std::map<std::string, Sort> free_;
    std::vector<const RawTerm*> pending_;
    bool changed_ = false;
    bool allow_defaults_ = false;
};

// ---------------------------------------------------------------------------
// Printer

class Printer {
public:
    std::string formula(const FormulaPtr& f, int min_prec, std::vector<std::string>& scope) {
        // Precedence: iff 1, implies 2, or 3, and 4, not 5, atoms/quantifiers 6.
        switch (f->kind) {
            case FormulaKind::Eq:
            case FormulaKind::Lt: {
                bool pure = f->lhs->sort != Sort::ValuedField && !has_anchor(f->lhs) && !has_anchor(f->rhs);
                annotate_literal_ = pure && f->kind == FormulaKind::Eq;
                std::string s = term(f->lhs, 0, scope) + (f->kind == FormulaKind::Eq ? " = " : " < ") +
                                term(f->rhs, 0, scope);
                annotate_literal_ = false;
                return s;
            }
            case FormulaKind::Not: return wrap("not " + formula(f->a, 5, scope), 5, min_prec);
            case FormulaKind::And:
                return wrap(formula(f->a, 4, scope) + " and " + formula(f->b, 5, scope), 4, min_prec);
            case FormulaKind::Or:
                return wrap(formula(f->a, 3, scope) + " or " + formula(f->b, 4, scope), 3, min_prec);
            case FormulaKind::Implies:
                return wrap(formula(f->a, 3, scope) + " -> " + formula(f->b, 2, scope), 2, min_prec);
            case FormulaKind::Iff:
                return wrap(formula(f->a, 2, scope) + " <-> " + formula(f->b, 1, scope), 1, min_prec);
            case FormulaKind::Forall:
            case FormulaKind::Exists: {
                std::string head = (f->kind == FormulaKind::Forall ? "forall " : "exists ") + f->var + ":" +
                                   std::string(sort_name(f->var_sort));
                if (f->bound) {
                    if (f->bound->min_ord) head += "[ord>=" + std::to_string(*f->bound->min_ord) + "]";
                    if (f->bound->interval)
                        head += "[" + std::to_string(f->bound->interval->first) + ".." +
                                std::to_string(f->bound->interval->second) + "]";
                }
                scope.push_back(f->var);
                std::string body = formula(f->a, 0, scope);
                scope.pop_back();
                // A quantifier body extends as far right as possible.
                return wrap(head + " " + body, 0, min_prec == 0 ? 0 : 7);
            }
        }
        return {};
    }

    std::string term(const TermPtr& t, int min_prec, const std::vector<std::string>& scope) {
        switch (t->kind) {
            case TermKind::Var: {
                std::string s = t->name;
                bool bound = std::find(scope.begin(), scope.end(), t->name) != scope.end();
                if (!bound && annotated_.insert(t->name).second) s += ":" + std::string(sort_name(t->sort));
                return s;
            }
            case TermKind::RFConst:
            case TermKind::VGConst: {
                std::string s = std::to_string(t->value);
                if (annotate_literal_) {
                    s += ":" + std::string(sort_name(t->sort));
                    annotate_literal_ = false;
                }
                return s;
            }
            case TermKind::VFConst: return vf_const(*t);
            case TermKind::Add:
                return wrap(term(t->lhs, 1, scope) + " + " + term(t->rhs, 2, scope), 1, min_prec);
            case TermKind::Sub:
                return wrap(term(t->lhs, 1, scope) + " - " + term(t->rhs, 2, scope), 1, min_prec);
            case TermKind::Mul: return wrap(term(t->lhs, 2, scope) + "*" + term(t->rhs, 3, scope), 2, min_prec);
            case TermKind::Neg: return wrap("-(" + term(t->lhs, 0, scope) + ")", 3, min_prec);
            case TermKind::Pow:
                return wrap(term(t->lhs, 5, scope) + "^" + std::to_string(t->value), 4, min_prec);
            case TermKind::Ord: return "ord(" + term(t->lhs, 0, scope) + ")";
            case TermKind::Ac: return "ac(" + term(t->lhs, 0, scope) + ")";
        }
        return {};
    }

private:
    static std::string wrap(std::string s, int prec, int min_prec) {
        return prec < min_prec ? "(" + s + ")" : s;
    }

    static bool has_anchor(const TermPtr& t) {
        if (!t) return false;
        if (t->kind == TermKind::Var || t->kind == TermKind::Ord || t->kind == TermKind::Ac) return true;
        return has_anchor(t->lhs) || has_anchor(t->rhs);
    }

    static std::string vf_const(const Term& t) {
        const ZPoly& p = t.poly;
        bool integer = p.degree() <= 0;
        if (t.denom == 1) {
            if (integer) return std::to_string(p.coeff(0));
            if (p == ZPoly::t_power(1)) return "t";
            return "(" + p.to_string() + ")";
        }
        if (integer) return std::to_string(p.coeff(0)) + "/" + std::to_string(t.denom);
        return "(1/" + std::to_string(t.denom) + "*(" + p.to_string() + "))";
    }

    std::set<std::string> annotated_;
    bool annotate_literal_ = false;
};

// ---------------------------------------------------------------------------
// Free variables

void collect(const TermPtr& t, const std::vector<std::string>& scope, FreeVariables& out) {
    if (!t) return;
    if (t->kind == TermKind::Var) {
        if (std::find(scope.begin(), scope.end(), t->name) != scope.end()) return;
        auto& list = out.of(t->sort);
        if (std::find(list.begin(), list.end(), t->name) == list.end()) list.push_back(t->name);
        return;
    }
    collect(t->lhs, scope, out);
    collect(t->rhs, scope, out);
}

void collect(const FormulaPtr& f, std::vector<std::string>& scope, FreeVariables& out) {
    if (!f) return;
    if (is_atom(*f)) {
        collect(f->lhs, scope, out);
        collect(f->rhs, scope, out);
        return;
    }
    if (is_quantifier(*f)) {
        scope.push_back(f->var);
        collect(f->a, scope, out);
        scope.pop_back();
        return;
    }
    collect(f->a, scope, out);
    collect(f->b, scope, out);
}

// ---------------------------------------------------------------------------
// Sort validation

class Validator {
public:
    void term(const TermPtr& t, const std::vector<std::pair<std::string, Sort>>& scope) {
        if (!t) throw SortError("null term", "<null>");
        auto fail = [&](const std::string& why) { throw SortError(why + " in '" + print_term(t) + "'", print_term(t)); };
        switch (t->kind) {
            case TermKind::Var: {
                for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
                    if (it->first == t->name) {
                        if (it->second != t->sort) fail("variable used with a sort different from its binder");
                        return;
                    }
                }
                auto [pos, inserted] = free_.emplace(t->name, t->sort);
                if (!inserted && pos->second != t->sort) fail("free variable used with two sorts");
                return;
            }
            case TermKind::VFConst:
                if (t->sort != Sort::ValuedField) fail("VF constant carries a non-VF sort");
                if (t->denom <= 0) fail("VF constant with nonpositive denominator");
                return;
            case TermKind::RFConst:
                if (t->sort != Sort::ResidueField) fail("RF constant carries a non-RF sort");
                return;
            case TermKind::VGConst:
                if (t->sort != Sort::ValueGroup) fail("VG constant carries a non-VG sort");
                return;
            case TermKind::Ord:
                if (t->sort != Sort::ValueGroup) fail("ord must have sort VG");
                if (!t->lhs || t->lhs->sort != Sort::ValuedField) fail("ord applied to a non-VF term");
                term(t->lhs, scope);
                return;
            case TermKind::Ac:
                if (t->sort != Sort::ResidueField) fail("ac must have sort RF");
                if (!t->lhs || t->lhs->sort != Sort::ValuedField) fail("ac applied to a non-VF term");
                term(t->lhs, scope);
                return;
            case TermKind::Neg:
            case TermKind::Pow:
                if (!t->lhs || t->lhs->sort != t->sort) fail("operand sort differs from result sort");
                if (t->kind == TermKind::Pow && t->value < 0) fail("negative exponent");
                term(t->lhs, scope);
                return;
            default:
                if (!t->lhs || !t->rhs) fail("missing operand");
                if (t->lhs->sort != t->sort || t->rhs->sort != t->sort) fail("ring operation joins different sorts");
                term(t->lhs, scope);
                term(t->rhs, scope);
                return;
        }
    }

    void formula(const FormulaPtr& f, std::vector<std::pair<std::string, Sort>>& scope) {
        if (!f) throw SortError("null formula", "<null>");
        switch (f->kind) {
            case FormulaKind::Eq:
                term(f->lhs, scope);
                term(f->rhs, scope);
                if (f->lhs->sort != f->rhs->sort)
                    throw SortError("atom compares different sorts: " + print_formula(f), print_formula(f));
                return;
            case FormulaKind::Lt:
                term(f->lhs, scope);
                term(f->rhs, scope);
                if (f->lhs->sort != Sort::ValueGroup || f->rhs->sort != Sort::ValueGroup)
                    throw SortError("'<' between non-VG terms: " + print_formula(f), print_formula(f));
                return;
            case FormulaKind::Not: formula(f->a, scope); return;
            case FormulaKind::Forall:
            case FormulaKind::Exists:
                if (f->bound) {
                    bool ok = (f->var_sort == Sort::ValuedField && f->bound->min_ord && !f->bound->interval) ||
                              (f->var_sort == Sort::ValueGroup && f->bound->interval && !f->bound->min_ord);
                    if (!ok) throw SortError("bound annotation does not match the sort of " + f->var, f->var);
                }
                scope.emplace_back(f->var, f->var_sort);
                formula(f->a, scope);
                scope.pop_back();
                return;
            default:
                formula(f->a, scope);
                formula(f->b, scope);
                return;
        }
    }

private:
    std::map<std::string, Sort> free_;
};

}  // namespace

std::vector<std::string>& FreeVariables::of(Sort s) {
    return s == Sort::ValuedField ? vf : s == Sort::ResidueField ? rf : vg;
}
const std::vector<std::string>& FreeVariables::of(Sort s) const {
    return s == Sort::ValuedField ? vf : s == Sort::ResidueField ? rf : vg;
}

FormulaPtr parse_formula(std::string_view text) { return parse_formula(text, {}); }

FormulaPtr parse_formula(std::string_view text, const std::map<std::string, Sort>& vars) {
    Parser p(text);
    auto rawf = p.formula_entry();
    Typer typer(vars);
    typer.infer(*rawf);
    Scope scope;
    return typer.build(*rawf, scope);
}

TermPtr parse_term(std::string_view text, std::optional<Sort> expected, const std::map<std::string, Sort>& vars) {
    Parser p(text);
    auto rawt = p.term_entry();
    Typer typer(vars);
    std::optional<Sort> s = expected ? expected : typer.synth_top(*rawt);
    if (!s && Typer::literal_only(*rawt)) s = Sort::ValuedField;
    if (!s) throw SortError("cannot determine the sort of term '" + std::string(text) + "'", std::string(text));
    typer.infer_term(*rawt, s);
    Scope scope;
    return typer.build_term(*rawt, *s, scope);
}

std::string print_formula(const FormulaPtr& f) {
    Printer p;
    std::vector<std::string> scope;
    return p.formula(f, 0, scope);
}

std::string print_term(const TermPtr& t) {
    Printer p;
    return p.term(t, 0, {});
}

FreeVariables free_variables(const FormulaPtr& f) {
    FreeVariables out;
    std::vector<std::string> scope;
    collect(f, scope, out);
    return out;
}

FreeVariables free_variables(const TermPtr& t) {
    FreeVariables out;
    collect(t, {}, out);
    return out;
}

void sort_check(const FormulaPtr& f) {
    Validator v;
    std::vector<std::pair<std::string, Sort>> scope;
    v.formula(f, scope);
}

void sort_check(const TermPtr& t) {
    Validator v;
    v.term(t, {});
}

}  // namespace dptk
