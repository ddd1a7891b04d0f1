#include "dptk/measure/cell.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "dptk/lang/parser.hpp"
#include "dptk/measure/decompose.hpp"

namespace dptk {

namespace {

bool is_zero_const(const TermPtr& t) { return t->kind == TermKind::VFConst && t->poly.is_zero(); }

TermPtr offset(const std::string& var, const TermPtr& center) {
    auto z = term::var(var, Sort::ValuedField);
    return is_zero_const(center) ? z : term::sub(z, center);
}

FormulaPtr conj_all(const std::vector<FormulaPtr>& parts) {
    FormulaPtr f;
    for (const auto& p : parts) f = f ? fml::conj(f, p) : p;
    return f ? f : fml::truth();
}

std::map<std::string, Sort> sorted_names(const std::vector<std::string>& names, Sort s) {
    std::map<std::string, Sort> m;
    for (const auto& n : names) m[n] = s;
    return m;
}

}  // namespace

bool Cell::is_point() const {
    return std::any_of(components.begin(), components.end(), [](const CellComponent& c) { return c.point; });
}

Box CellComplex::box() const {
    Box b;
    for (std::size_t i = 0; i < variables.size(); ++i) b.vf_min_ord[variables[i]] = box_min_ord.at(i);
    return b;
}

bool CellComplex::valid_for(std::uint32_t p) const {
    return std::find(excluded_primes.begin(), excluded_primes.end(), p) == excluded_primes.end();
}

namespace {

using Form = AffineForm;  // keys are VG parameters or "#i" for ord of component i

void substitute(Form& f, const std::string& v, const Form& by) {
    auto it = f.coeffs.find(v);
    if (it == f.coeffs.end()) return;
    const std::int64_t c = it->second;
    f.coeffs.erase(it);
    f.constant = checked::add(f.constant, checked::mul(c, by.constant));
    for (const auto& [k, b] : by.coeffs) {
        auto& slot = f.coeffs[k];
        slot = checked::add(slot, checked::mul(c, b));
        if (slot == 0) f.coeffs.erase(k);
    }
}

TermPtr form_term(const Form& f, const std::vector<TermPtr>& ords) {
    TermPtr out;
    auto push = [&](TermPtr x, std::int64_t c) {
        if (c == 0) return;
        TermPtr scaled = c == 1 || c == -1 ? x : term::mul(term::vg_const(c < 0 ? -c : c), x);
        if (!out) out = c < 0 ? term::neg(scaled) : scaled;
        else out = c < 0 ? term::sub(out, scaled) : term::add(out, scaled);
    };
    for (const auto& [k, c] : f.coeffs)
        push(k[0] == '#' ? ords.at(std::stoul(k.substr(1))) : term::var(k, Sort::ValueGroup), c);
    if (!out) return term::vg_const(f.constant);
    if (f.constant > 0) return term::add(out, term::vg_const(f.constant));
    if (f.constant < 0) return term::sub(out, term::vg_const(-f.constant));
    return out;
}

}  // namespace

FormulaPtr membership_formula(const CellComplex& cx, const Cell& cell, std::int64_t vg_cap, bool up_to_null) {
    if (cell.components.size() != cx.variables.size())
        throw CellError("cell has " + std::to_string(cell.components.size()) + " components for " +
                        std::to_string(cx.variables.size()) + " variables");
    const std::size_t n = cell.components.size();
    std::vector<TermPtr> diffs(n), ords(n);
    std::vector<Form> orders(n);
    std::vector<bool> pivot(n, false);
    std::map<std::string, int> angular_uses;
    for (const auto& c : cell.components)
        if (!c.point && c.angular->kind == TermKind::Var) ++angular_uses[c.angular->name];

    std::vector<FormulaPtr> parts;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = cell.components[i];
        if (c.point) {
            parts.push_back(fml::eq(term::var(cx.variables[i], Sort::ValuedField), c.center));
            continue;
        }
        diffs[i] = offset(cx.variables[i], c.center);
        ords[i] = term::ord(diffs[i]);
        orders[i] = affine_form(c.order);
    }

    // Eliminate parameters: ord_i = R + c*v with c = +-1 gives v = c*(ord_i - R).
    struct Constraint {
        Form form;
        std::int64_t lo;
        std::optional<std::int64_t> hi;
    };
    std::vector<Constraint> constraints;
    std::vector<VGParam> kept;
    for (const auto& v : cell.vg_params) {
        std::optional<std::size_t> piv;
        for (std::size_t i = 0; i < n && !piv; ++i) {
            if (cell.components[i].point || pivot[i]) continue;
            auto it = orders[i].coeffs.find(v.name);
            if (it != orders[i].coeffs.end() && (it->second == 1 || it->second == -1)) piv = i;
        }
        if (!piv) {
            kept.push_back(v);
            continue;
        }
        const std::int64_t c = orders[*piv].coeffs.at(v.name);
        Form expr;
        expr.coeffs["#" + std::to_string(*piv)] = c;
        expr.constant = -c * orders[*piv].constant;
        for (const auto& [k, a] : orders[*piv].coeffs)
            if (k != v.name) expr.coeffs[k] = -c * a;
        pivot[*piv] = true;
        for (std::size_t j = 0; j < n; ++j)
            if (!pivot[j]) substitute(orders[j], v.name, expr);
        for (auto& con : constraints) substitute(con.form, v.name, expr);
        constraints.push_back({expr, v.lo, v.hi});
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = cell.components[i];
        if (c.point) continue;
        if (!pivot[i]) parts.push_back(fml::eq(ords[i], form_term(orders[i], ords)));
        const bool drop = up_to_null && !cell.rf_condition && c.angular->kind == TermKind::Var &&
                          angular_uses[c.angular->name] == 1;
        if (drop) continue;
        parts.push_back(fml::eq(term::ac(diffs[i]), c.angular));
        parts.push_back(fml::ne(c.angular, term::rf_const(0)));
    }
    for (const auto& con : constraints) {
        auto t = form_term(con.form, ords);
        parts.push_back(fml::le(term::vg_const(con.lo), t));
        if (con.hi) parts.push_back(fml::le(t, term::vg_const(*con.hi)));
    }
    if (cell.rf_condition) parts.push_back(cell.rf_condition);
    FormulaPtr f = conj_all(parts);
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
        std::int64_t hi = it->hi ? std::min(*it->hi, vg_cap) : vg_cap;
        if (hi < it->lo) return fml::falsity();
        f = fml::exists(it->name, Sort::ValueGroup, f, BoundAnnotation{std::nullopt, std::make_pair(it->lo, hi)});
    }
    for (auto it = cell.rf_params.rbegin(); it != cell.rf_params.rend(); ++it) {
        bool used = false;
        for (const auto& c : cell.components)
            if (!c.point && c.angular->kind == TermKind::Var && c.angular->name == *it)
                used = !(up_to_null && !cell.rf_condition && angular_uses[*it] == 1) || used;
        if (used || cell.rf_condition) f = fml::exists(*it, Sort::ResidueField, f);
    }
    return f;
}

FormulaPtr union_formula(const CellComplex& cx, std::int64_t vg_cap, bool up_to_null) {
    FormulaPtr f;
    for (const auto& c : cx.cells) {
        auto m = membership_formula(cx, c, vg_cap, up_to_null);
        f = f ? fml::disj(f, m) : m;
    }
    return f ? f : fml::falsity();
}

AffineForm affine_form(const TermPtr& t) {
    AffineForm out;
    switch (t->kind) {
        case TermKind::VGConst: out.constant = t->value; return out;
        case TermKind::Var: out.coeffs[t->name] = 1; return out;
        case TermKind::Neg: {
            out = affine_form(t->lhs);
            out.constant = -out.constant;
            for (auto& [k, v] : out.coeffs) v = -v;
            return out;
        }
        case TermKind::Add:
        case TermKind::Sub: {
            auto a = affine_form(t->lhs), b = affine_form(t->rhs);
            const std::int64_t s = t->kind == TermKind::Add ? 1 : -1;
            a.constant = checked::add(a.constant, s * b.constant);
            for (auto& [k, v] : b.coeffs) a.coeffs[k] += s * v;
            return a;
        }
        case TermKind::Mul: {
            auto a = affine_form(t->lhs), b = affine_form(t->rhs);
            if (!a.coeffs.empty() && !b.coeffs.empty()) throw CellError("order term is not affine");
            if (!a.coeffs.empty()) std::swap(a, b);
            // a is constant
            b.constant = checked::mul(b.constant, a.constant);
            for (auto& [k, v] : b.coeffs) v = checked::mul(v, a.constant);
            return b;
        }
        case TermKind::Pow: {
            auto a = affine_form(t->lhs);
            if (t->value == 1) return a;
            if (!a.coeffs.empty()) throw CellError("order term is not affine");
            std::int64_t r = 1;
            for (std::int64_t i = 0; i < t->value; ++i) r = checked::mul(r, a.constant);
            out.constant = r;
            return out;
        }
        default: throw CellError("order term is not affine in the value-group parameters");
    }
}

CertificationReport certify_complex(const CellComplex& cx, const Structure& K, std::uint32_t M) {
    const FieldConfig& cfg = K.field();
    const std::int64_t cap = *std::max_element(cx.box_min_ord.begin(), cx.box_min_ord.end()) + M + 2;
    std::vector<FormulaPtr> members;
    for (const auto& c : cx.cells) members.push_back(membership_formula(cx, c, cap));
    Evaluator ev(K, EvalOptions{M, true});
    Box box = cx.box();
    const std::size_t m = cx.variables.size();
    std::vector<std::uint32_t> idx(m * M, 0);
    CertificationReport rep;
    while (true) {
        Assignment asg;
        for (std::size_t v = 0; v < m; ++v) {
            std::vector<std::uint32_t> d(idx.begin() + static_cast<std::ptrdiff_t>(v * M),
                                         idx.begin() + static_cast<std::ptrdiff_t>((v + 1) * M));
            asg.set_vf(cx.variables[v], ball_representative(cfg, cx.box_min_ord[v], d));
        }
        ++rep.points;
        int trues = 0;
        bool unknown = false;
        for (const auto& f : members) {
            Truth t = ev.eval_formula(f, asg, box);
            if (t == Truth::True) ++trues;
            if (t == Truth::Unknown) unknown = true;
        }
        if (trues >= 2) ++rep.overlaps;
        if (cx.ambient) {
            Truth a = ev.eval_formula(cx.ambient, asg, box);
            if (a == Truth::True && trues == 0 && !unknown) ++rep.gaps;
            if (a == Truth::False && trues > 0) ++rep.extras;
            if (a == Truth::Unknown) unknown = true;
        }
        if (unknown) ++rep.unknown;
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == cfg.p) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    return rep;
}

CellComplex complex_from_json(const nlohmann::json& j) {
    CellComplex cx;
    cx.name = j.at("name").get<std::string>();
    cx.description = j.value("description", "");
    cx.variables = j.at("variables").get<std::vector<std::string>>();
    cx.box_min_ord = j.at("box").get<std::vector<std::int64_t>>();
    if (cx.box_min_ord.size() != cx.variables.size()) throw CellError(cx.name + ": box and variables differ in length");
    cx.excluded_primes = j.value("excluded_primes", std::vector<std::uint32_t>{});
    auto vf = sorted_names(cx.variables, Sort::ValuedField);
    if (j.contains("fragment")) {
        const auto& jf = j.at("fragment");
        if (cx.variables.size() != 1) throw CellError(cx.name + ": a fragment has one variable");
        std::vector<ZPoly> centers;
        for (const auto& c : jf.value("centers", std::vector<std::string>{}))
            centers.push_back(integral_constant(parse_term(c, Sort::ValuedField)));
        auto f = parse_formula(jf.at("formula").get<std::string>(), vf);
        CellComplex d = decompose_fragment(f, cx.variables[0], centers, cx.box_min_ord[0]);
        d.name = cx.name;
        d.description = cx.description;
        for (auto p : cx.excluded_primes)
            if (!std::count(d.excluded_primes.begin(), d.excluded_primes.end(), p)) d.excluded_primes.push_back(p);
        return d;
    }
    if (j.contains("ambient")) cx.ambient = parse_formula(j.at("ambient").get<std::string>(), vf);
    for (const auto& jc : j.at("cells")) {
        Cell c;
        c.rf_params = jc.value("rf", std::vector<std::string>{});
        auto rf = sorted_names(c.rf_params, Sort::ResidueField);
        if (jc.contains("rf_condition")) c.rf_condition = parse_formula(jc.at("rf_condition").get<std::string>(), rf);
        std::vector<std::string> vg_names;
        for (const auto& jv : jc.value("vg", nlohmann::json::array())) {
            VGParam v{jv.at("name").get<std::string>(), jv.at("lo").get<std::int64_t>(), std::nullopt};
            if (jv.contains("hi") && !jv.at("hi").is_null()) v.hi = jv.at("hi").get<std::int64_t>();
            vg_names.push_back(v.name);
            c.vg_params.push_back(v);
        }
        auto vg = sorted_names(vg_names, Sort::ValueGroup);
        std::map<std::string, Sort> earlier;
        for (const auto& jcomp : jc.at("components")) {
            CellComponent comp;
            comp.point = jcomp.value("point", false);
            comp.center = parse_term(jcomp.value("center", "0"), Sort::ValuedField, earlier);
            if (!comp.point) {
                comp.order = parse_term(jcomp.at("order").get<std::string>(), Sort::ValueGroup, vg);
                comp.angular = parse_term(jcomp.at("angular").get<std::string>(), Sort::ResidueField, rf);
                affine_form(comp.order);
            }
            earlier[cx.variables.at(c.components.size())] = Sort::ValuedField;
            c.components.push_back(comp);
        }
        if (c.components.size() != cx.variables.size()) throw CellError(cx.name + ": wrong number of components");
        cx.cells.push_back(std::move(c));
    }
    return cx;
}

nlohmann::json complex_to_json(const CellComplex& cx) {
    nlohmann::json j;
    j["name"] = cx.name;
    if (!cx.description.empty()) j["description"] = cx.description;
    j["variables"] = cx.variables;
    j["box"] = cx.box_min_ord;
    if (!cx.excluded_primes.empty()) j["excluded_primes"] = cx.excluded_primes;
    if (cx.ambient) j["ambient"] = print_formula(cx.ambient);
    j["cells"] = nlohmann::json::array();
    for (const auto& c : cx.cells) {
        nlohmann::json jc;
        if (!c.rf_params.empty()) jc["rf"] = c.rf_params;
        if (c.rf_condition) jc["rf_condition"] = print_formula(c.rf_condition);
        if (!c.vg_params.empty()) {
            jc["vg"] = nlohmann::json::array();
            for (const auto& v : c.vg_params) {
                nlohmann::json jv{{"name", v.name}, {"lo", v.lo}};
                if (v.hi) jv["hi"] = *v.hi;
                jc["vg"].push_back(jv);
            }
        }
        jc["components"] = nlohmann::json::array();
        for (const auto& comp : c.components) {
            nlohmann::json jcomp{{"center", print_term(comp.center)}};
            if (comp.point) jcomp["point"] = true;
            else {
                jcomp["order"] = print_term(comp.order);
                jcomp["angular"] = print_term(comp.angular);
            }
            jc["components"].push_back(jcomp);
        }
        j["cells"].push_back(jc);
    }
    return j;
}

CellComplex load_complex(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CellError("cannot open " + path);
    try {
        return complex_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw CellError(path + ": " + e.what());
    }
}

std::vector<CellComplex> load_corpus(const std::string& directory) {
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(directory))
        if (e.path().extension() == ".json") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    std::vector<CellComplex> out;
    for (const auto& f : files) out.push_back(load_complex(f));
    return out;
}

}  // namespace dptk
