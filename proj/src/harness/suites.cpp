#include <chrono>
#include <functional>
#include <iomanip>
#include <sstream>

#include "dptk/eval/ake_suite.hpp"
#include "dptk/eval/evaluator.hpp"
#include "dptk/gl2/weights.hpp"
#include "dptk/harness/harness.hpp"
#include "dptk/harness/properties.hpp"
#include "dptk/jy/jacquet_ye.hpp"
#include "dptk/lang/parser.hpp"
#include "dptk/measure/volume.hpp"

namespace dptk {

namespace {

using nlohmann::json;

// The records of one case at one prime, recomputed with the next digit budget while any of
// them is inconclusive.
struct Group {
    std::string case_id;
    std::uint32_t p = 0;
    json key;
    std::function<std::vector<ReportRecord>(std::uint32_t)> compute;
};

std::string padded_p(std::uint32_t p) {
    std::ostringstream os;
    os << "p=" << std::setw(2) << std::setfill('0') << p;
    return os.str();
}

std::vector<FieldConfig> fields_for(const ExperimentConfig& cfg, std::uint32_t p) {
    const auto precision = static_cast<std::uint32_t>(cfg.params.value("precision", 16));
    std::vector<FieldConfig> out;
    if (cfg.characteristics != CharacteristicSet::Positive) out.push_back(FieldConfig::padic(p, precision));
    if (cfg.characteristics != CharacteristicSet::Zero) out.push_back(FieldConfig::laurent(p, precision));
    return out;
}

json field_names(const std::vector<FieldConfig>& fields) {
    json j = json::array();
    for (const auto& K : fields) j.push_back(K.describe());
    return j;
}

ZPoly parse_zpoly(const std::string& text) {
    try {
        return integral_constant(parse_term(text, Sort::ValuedField));
    } catch (const std::exception& e) {
        throw ConfigError("'" + text + "' is not a polynomial in t with integer coefficients: " + e.what());
    }
}

ReportRecord make_record(const ExperimentConfig& cfg, const std::string& case_id, const std::string& field,
                         std::uint32_t p) {
    ReportRecord r;
    r.suite = cfg.suite;
    r.case_id = case_id;
    r.field = field;
    r.p = p;
    return r;
}

// Comparison of one value across the two characteristics; nullopt when not comparable.
ReportRecord cross_record(const ExperimentConfig& cfg, const std::string& case_id, std::uint32_t p,
                          std::optional<bool> equal, const std::string& detail) {
    ReportRecord r = make_record(cfg, case_id, "cross", p);
    r.value = !equal ? "undecided" : *equal ? "equal" : "differ";
    r.verdict = !equal ? Verdict::Inconclusive : *equal ? Verdict::Pass : Verdict::Fail;
    r.detail = detail;
    return r;
}

std::optional<std::uint32_t> max_depth(std::optional<std::uint32_t> a, std::optional<std::uint32_t> b) {
    if (!a || !b) return std::nullopt;
    return std::max(*a, *b);
}

std::vector<std::pair<std::string, std::string>> named_formulas(const ExperimentConfig& cfg, const char* key,
                                                                bool builtin_ake) {
    std::vector<std::pair<std::string, std::string>> out;
    if (cfg.params.contains(key)) {
        const json& list = cfg.params.at(key);
        if (!list.is_array()) throw ConfigError(std::string("params.") + key + " must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            std::ostringstream name;
            name << "f" << std::setw(2) << std::setfill('0') << i + 1;
            if (list[i].is_string()) out.emplace_back(name.str(), list[i].get<std::string>());
            else if (list[i].is_object())
                out.emplace_back(list[i].value("name", name.str()), list[i].at("text").get<std::string>());
            else throw ConfigError(std::string("params.") + key + " entries must be strings or {name, text}");
        }
    } else if (builtin_ake) {
        for (const auto& s : ake_suite()) out.emplace_back(s.name, s.text);
    } else {
        throw ConfigError(std::string("params.") + key + " is required");
    }
    for (const auto& [name, text] : out) {
        try {
            parse_formula(text);
        } catch (const std::exception& e) {
            throw ConfigError(name + ": " + e.what());
        }
    }
    return out;
}

std::vector<Group> truth_groups(const ExperimentConfig& cfg, bool ake) {
    std::vector<Group> groups;
    for (const auto& [name, text] : named_formulas(cfg, ake ? "sentences" : "formulas", ake))
        for (std::uint32_t p : cfg.primes) {
            const auto fields = fields_for(cfg, p);
            const std::string case_id = name + " " + padded_p(p);
            Group g{case_id, p, json{{"formula", text}, {"fields", field_names(fields)}}, {}};
            g.compute = [&cfg, fields, case_id, p, text = text](std::uint32_t M) {
                std::vector<ReportRecord> out;
                auto f = parse_formula(text);
                std::vector<Truth> values;
                for (const auto& K : fields) {
                    Evaluator ev(Structure(K), EvalOptions{M, true});
                    Truth v = ev.eval_formula(f, {});
                    values.push_back(v);
                    ReportRecord r = make_record(cfg, case_id, K.describe(), p);
                    r.value = to_string(v);
                    r.m_star = M;
                    r.detail = text;
                    r.verdict = v == Truth::Unknown ? Verdict::Inconclusive : Verdict::Pass;
                    out.push_back(r);
                }
                if (values.size() == 2) {
                    std::optional<bool> eq;
                    if (values[0] != Truth::Unknown && values[1] != Truth::Unknown) eq = values[0] == values[1];
                    out.push_back(cross_record(cfg, case_id, p, eq, "truth values"));
                }
                return out;
            };
            groups.push_back(std::move(g));
        }
    return groups;
}

std::vector<CellComplex> corpus_of(const ExperimentConfig& cfg) {
    std::vector<CellComplex> out;
    if (cfg.params.contains("corpus")) {
        auto dir = cfg.base_dir / cfg.params.at("corpus").get<std::string>();
        if (!std::filesystem::is_directory(dir)) throw ConfigError("corpus directory " + dir.string() + " not found");
        out = load_corpus(dir.string());
    }
    if (cfg.params.contains("complexes"))
        for (const auto& f : cfg.params.at("complexes")) {
            auto path = cfg.base_dir / f.get<std::string>();
            if (!std::filesystem::exists(path)) throw ConfigError("complex file " + path.string() + " not found");
            out.push_back(load_complex(path.string()));
        }
    if (out.empty()) throw ConfigError("volumes needs params.corpus or params.complexes");
    return out;
}

std::vector<Group> volume_groups(const ExperimentConfig& cfg) {
    std::vector<Group> groups;
    std::vector<CellComplex> corpus;
    try {
        corpus = corpus_of(cfg);
    } catch (const CellError& e) {
        throw ConfigError(e.what());
    }
    for (const auto& cx : corpus)
        for (std::uint32_t p : cfg.primes) {
            const auto fields = fields_for(cfg, p);
            const std::string case_id = cx.name + " " + padded_p(p);
            Group g{case_id, p, json{{"complex", complex_to_json(cx)}, {"fields", field_names(fields)}}, {}};
            g.compute = [&cfg, fields, case_id, p, cx](std::uint32_t M) {
                std::vector<ReportRecord> out;
                if (!cx.valid_for(p)) {
                    for (const auto& K : fields) {
                        ReportRecord r = make_record(cfg, case_id, K.describe(), p);
                        r.value = "excluded";
                        r.detail = "prime excluded by the complex";
                        r.verdict = Verdict::Skipped;
                        out.push_back(r);
                    }
                    return out;
                }
                std::vector<Structure> structures;
                for (const auto& K : fields) structures.emplace_back(K);
                VolumeReport rep = check_specialization(cx, structures, M);
                for (const auto& e : rep.entries) {
                    ReportRecord r = make_record(cfg, case_id, e.field, p);
                    r.value = e.padic.value.get_str();
                    r.m_star = e.padic.stabilized_at;
                    r.detail = "theta_q(motivic) = " + e.specialized.get_str();
                    if (!e.padic.stabilized()) {
                        r.detail += ", unknown mass " + e.padic.unknown_mass.get_str();
                        r.verdict = Verdict::Inconclusive;
                    } else {
                        r.verdict = e.equal && *e.equal ? Verdict::Pass : Verdict::Fail;
                    }
                    out.push_back(r);
                }
                if (rep.entries.size() == 2) {
                    std::optional<bool> eq;
                    const auto& a = rep.entries[0].padic;
                    const auto& b = rep.entries[1].padic;
                    if (a.stabilized() && b.stabilized()) eq = a.value == b.value;
                    out.push_back(cross_record(cfg, case_id, p, eq, "p-adic volumes"));
                }
                return out;
            };
            groups.push_back(std::move(g));
        }
    return groups;
}

std::string signed_str(std::int64_t k) { return (k >= 0 ? "+" : "") + std::to_string(k); }

std::vector<Group> jy_groups(const ExperimentConfig& cfg) {
    std::vector<Group> groups;
    const auto k_min = cfg.params.value("k_min", -2), k_max = cfg.params.value("k_max", 2);
    if (k_min > k_max) throw ConfigError("k_min > k_max");
    const std::vector<std::string> units = cfg.params.value("units", std::vector<std::string>{"1", "nonsquare"});
    const bool cross = cfg.params.value("cross_characteristic", true);
    for (std::uint32_t p : cfg.primes)
        for (std::int64_t k1 = k_min; k1 <= k_max; ++k1)
            for (std::int64_t k2 = k_min; k2 <= k_max; ++k2)
                for (const auto& u1 : units)
                    for (const auto& u2 : units) {
                        auto unit = [&](const std::string& u) {
                            return u == "nonsquare" ? ZPoly(nonsquare_unit(p)) : parse_zpoly(u);
                        };
                        DiagParam a{{DiagEntry{unit(u1), k1}, DiagEntry{unit(u2), k2}}};
                        const auto fields = fields_for(cfg, p);
                        const std::string case_id = padded_p(p) + " k=(" + signed_str(k1) + "," + signed_str(k2) +
                                                    ") u=(" + u1 + "," + u2 + ")";
                        Group g{case_id, p,
                                json{{"param", a.to_string()}, {"fields", field_names(fields)}, {"cross", cross}}, {}};
                        g.compute = [&cfg, fields, case_id, p, a, cross](std::uint32_t M) {
                            std::vector<ReportRecord> out;
                            JYConfig jc;
                            jc.max_digits = M;
                            jc.chi = CharacterConfig{cfg.conductor_shift, false};
                            std::vector<JYResult> results;
                            for (const auto& K : fields) {
                                JYResult res = check_identity(a, Structure(K), jc);
                                ReportRecord r = make_record(cfg, case_id, K.describe(), p);
                                r.value = "I = " + res.I.to_string();
                                r.detail = "J = " + res.J.to_string() + ", gamma = " + std::to_string(res.gamma);
                                r.m_star = max_depth(res.I_depth, res.J_depth);
                                r.verdict = !res.stabilized ? Verdict::Inconclusive
                                            : res.holds     ? Verdict::Pass
                                                            : Verdict::Fail;
                                out.push_back(r);
                                results.push_back(res);
                            }
                            if (cross && results.size() == 2) {
                                std::optional<bool> eq;
                                if (results[0].stabilized && results[1].stabilized)
                                    eq = results[0].I == results[1].I && results[0].J == results[1].J;
                                out.push_back(cross_record(cfg, case_id, p, eq, "I and J"));
                            }
                            return out;
                        };
                        groups.push_back(std::move(g));
                    }
    return groups;
}

OrbitPoint orbit_of(const json& j) {
    if (j.contains("eigenvalues")) {
        const auto& e = j.at("eigenvalues");
        if (!e.is_array() || e.size() != 2) throw ConfigError("eigenvalues must be a pair");
        return OrbitPoint::from_eigenvalues(parse_zpoly(e[0].get<std::string>()), parse_zpoly(e[1].get<std::string>()));
    }
    if (!j.contains("tr") || !j.contains("det")) throw ConfigError("an orbit needs eigenvalues or tr and det");
    OrbitPoint c = OrbitPoint::from_char_poly(parse_zpoly(j.at("tr").get<std::string>()),
                                              parse_zpoly(j.at("det").get<std::string>()));
    c.tr_shift = j.value("tr_shift", 0);
    c.det_shift = j.value("det_shift", 0);
    return c;
}

std::vector<Group> weight_groups(const ExperimentConfig& cfg) {
    std::vector<Group> groups;
    if (!cfg.params.contains("orbits") || !cfg.params.at("orbits").is_array())
        throw ConfigError("weights needs params.orbits");
    const std::string weight = cfg.params.value("weight", std::string("vM"));
    if (weight != "vM" && weight != "one") throw ConfigError("weight must be vM or one");
    const FiberWeight f = weight == "vM" ? FiberWeight::VM : FiberWeight::One;
    for (const auto& oj : cfg.params.at("orbits")) {
        const OrbitPoint c = orbit_of(oj);
        for (std::uint32_t p : cfg.primes) {
            const auto fields = fields_for(cfg, p);
            const std::string case_id = weight + " " + c.to_string() + " " + padded_p(p);
            Group g{case_id, p, json{{"orbit", oj}, {"weight", weight}, {"fields", field_names(fields)}}, {}};
            g.compute = [&cfg, fields, case_id, p, c, f](std::uint32_t M) {
                std::vector<ReportRecord> out;
                std::vector<FiberVolume> vols;
                for (const auto& K : fields) {
                    FiberVolume v = fiber_volume(K, c, f, M);
                    ReportRecord r = make_record(cfg, case_id, K.describe(), p);
                    r.value = v.value.get_str();
                    if (v.stabilized()) r.m_star = v.stabilized_at;
                    r.detail = std::string(v.split ? "split" : "non-split");
                    if (!v.stabilized()) r.detail += ", unknown mass " + v.unknown_mass.get_str();
                    r.verdict = v.stabilized() ? Verdict::Pass : Verdict::Inconclusive;
                    out.push_back(r);
                    vols.push_back(v);
                }
                if (vols.size() == 2) {
                    std::optional<bool> eq;
                    if (vols[0].stabilized() && vols[1].stabilized()) eq = vols[0].value == vols[1].value;
                    out.push_back(cross_record(cfg, case_id, p, eq, "fiber volumes"));
                }
                return out;
            };
            groups.push_back(std::move(g));
        }
    }
    return groups;
}

std::vector<Group> property_groups(const ExperimentConfig& cfg) {
    const auto cases = static_cast<std::uint32_t>(cfg.params.value("cases", 100));
    const auto seed = static_cast<std::uint64_t>(cfg.params.value("seed", 1));
    std::vector<FieldConfig> fields;
    for (std::uint32_t p : cfg.primes)
        for (const auto& K : fields_for(cfg, p)) fields.push_back(K);
    if (fields.empty()) throw ConfigError("algebra-properties needs at least one prime");
    using Check = std::function<PropertyResult()>;
    const std::vector<std::pair<std::string, Check>> checks{
        {"theta-homomorphism", [=] { return check_theta_homomorphism(seed, cases); }},
        {"positivity-sampling", [=] { return check_positivity_sampling(seed, cases); }},
        {"weight-right-K", [=] { return check_weight_right_K(seed, cases, fields); }},
        {"weight-lambda", [=] { return check_weight_lambda(seed, cases, fields); }},
    };
    std::vector<Group> groups;
    for (const auto& [name, check] : checks) {
        Group g{name, 0, json{{"cases", cases}, {"seed", seed}, {"fields", field_names(fields)}}, {}};
        g.compute = [&cfg, name = name, check = check](std::uint32_t) {
            PropertyResult res = check();
            ReportRecord r = make_record(cfg, name, "-", 0);
            r.value = std::to_string(res.cases) + " cases, " + std::to_string(res.failures) + " failures";
            r.detail = res.failures ? "first failure: " + res.first_failure : res.name;
            r.verdict = res.ok() ? Verdict::Pass : Verdict::Fail;
            return std::vector<ReportRecord>{r};
        };
        groups.push_back(std::move(g));
    }
    return groups;
}

bool any_inconclusive(const std::vector<ReportRecord>& records) {
    for (const auto& r : records)
        if (r.verdict == Verdict::Inconclusive) return true;
    return false;
}

json records_json(const std::vector<ReportRecord>& records) {
    json j = json::array();
    for (const auto& r : records) j.push_back(r.to_json(false));
    return j;
}

}  // namespace

std::vector<ReportRecord> run_suite(const ExperimentConfig& cfg, ResultCache& cache) {
    std::vector<Group> groups;
    if (cfg.suite == "eval") groups = truth_groups(cfg, false);
    else if (cfg.suite == "ake") groups = truth_groups(cfg, true);
    else if (cfg.suite == "volumes") groups = volume_groups(cfg);
    else if (cfg.suite == "jy") groups = jy_groups(cfg);
    else if (cfg.suite == "weights") groups = weight_groups(cfg);
    else if (cfg.suite == "algebra-properties") groups = property_groups(cfg);
    else throw ConfigError("unknown suite '" + cfg.suite + "'");

    std::vector<ReportRecord> all;
    for (auto& g : groups) {
        json key = g.key;
        key["suite"] = cfg.suite;
        key["case"] = g.case_id;
        key["m_schedule"] = cfg.m_schedule;
        key["conductor_shift"] = cfg.conductor_shift;
        key["precision"] = cfg.params.value("precision", 16);
        key["version"] = code_version();
        const std::string key_text = key.dump();

        std::optional<json> cached = cache.get(key_text);
        if (cached && cache.mode() == ResultCache::Mode::ReadWrite) {
            ++cache.hits;
            for (const auto& rj : *cached) all.push_back(ReportRecord::from_json(rj));
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        std::vector<ReportRecord> records;
        try {
            for (std::uint32_t M : cfg.m_schedule) {
                records = g.compute(M);
                if (!any_inconclusive(records)) break;
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            ReportRecord r = make_record(cfg, g.case_id, "-", g.p);
            r.value = "error";
            r.detail = e.what();
            r.verdict = Verdict::Fail;
            records = {r};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (auto& r : records) r.seconds = seconds;
        ++cache.misses;
        if (cached) {
            if (*cached != records_json(records)) {
                ++cache.mismatches;
                ReportRecord r = make_record(cfg, g.case_id, "cache", g.p);
                r.value = "mismatch";
                r.detail = "cached records differ from a fresh computation";
                r.verdict = Verdict::Fail;
                records.push_back(r);
            }
        } else {
            cache.put(key_text, records_json(records));
        }
        all.insert(all.end(), records.begin(), records.end());
    }
    sort_records(all);
    return all;
}

}  // namespace dptk
