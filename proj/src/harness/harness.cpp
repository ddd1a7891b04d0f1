#include "dptk/harness/harness.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dptk/field/field.hpp"

namespace dptk {

const char* code_version() { return "dptk-1"; }

const std::vector<SuiteInfo>& suites() {
    static const std::vector<SuiteInfo> s{
        {"eval", 3, "truth values of formulas in each field"},
        {"ake", 3, "bounded sentences decided in both characteristics"},
        {"volumes", 3, "specialized motivic volumes against p-adic volumes"},
        {"jy", 3, "I(a) = gamma(a) J(a) over a sweep of diagonal parameters"},
        {"weights", 3, "fiber volumes and weighted orbital integrals for GL2"},
        {"algebra-properties", 3, "randomized identities of theta_q, A_+ and v_M"},
    };
    return s;
}

namespace {

const SuiteInfo* find_suite(const std::string& id) {
    for (const auto& s : suites())
        if (s.id == id) return &s;
    return nullptr;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    static const std::vector<std::string> known{"suite",  "primes", "characteristics", "m_schedule", "conductor_shift",
                                                "output", "timing", "params"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown configuration field '" + it.key() + "'");
    ExperimentConfig cfg;
    cfg.base_dir = base_dir;
    cfg.suite = get_or<std::string>(j, "suite", "");
    const SuiteInfo* info = find_suite(cfg.suite);
    if (!info) throw ConfigError("unknown suite '" + cfg.suite + "'");
    cfg.primes = get_or<std::vector<std::uint32_t>>(j, "primes", {3, 5, 7});
    for (auto p : cfg.primes) {
        if (p < 3 || !is_prime(p)) throw ConfigError("p = " + std::to_string(p) + " is not an odd prime");
        if (p < info->min_p)
            throw ConfigError("suite " + cfg.suite + " needs p >= " + std::to_string(info->min_p));
    }
    std::sort(cfg.primes.begin(), cfg.primes.end());
    cfg.primes.erase(std::unique(cfg.primes.begin(), cfg.primes.end()), cfg.primes.end());
    std::string chars = get_or<std::string>(j, "characteristics", "both");
    if (chars == "zero") cfg.characteristics = CharacteristicSet::Zero;
    else if (chars == "positive") cfg.characteristics = CharacteristicSet::Positive;
    else if (chars == "both") cfg.characteristics = CharacteristicSet::Both;
    else throw ConfigError("characteristics must be zero, positive or both");
    cfg.m_schedule = get_or<std::vector<std::uint32_t>>(j, "m_schedule", {6});
    if (cfg.m_schedule.empty()) throw ConfigError("m_schedule is empty");
    for (auto m : cfg.m_schedule)
        if (m == 0 || m > 12) throw ConfigError("digit budgets must lie in [1, 12]");
    cfg.conductor_shift = get_or<std::int64_t>(j, "conductor_shift", 1);
    if (j.contains("output")) cfg.output = get_or<std::string>(j, "output", "");
    cfg.timing = get_or<bool>(j, "timing", false);
    if (j.contains("params")) {
        if (!j.at("params").is_object()) throw ConfigError("params must be an object");
        cfg.params = j.at("params");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Skipped: return "skipped";
        case Verdict::Inconclusive: return "inconclusive";
        case Verdict::Fail: return "fail";
    }
    return "?";
}

namespace {

Verdict verdict_from_string(const std::string& s) {
    for (Verdict v : {Verdict::Pass, Verdict::Skipped, Verdict::Inconclusive, Verdict::Fail})
        if (to_string(v) == s) return v;
    throw ConfigError("unknown verdict '" + s + "'");
}

}  // namespace

nlohmann::json ReportRecord::to_json(bool with_timing) const {
    // nlohmann::json keeps keys sorted, so the serialization is stable.
    nlohmann::json j{{"suite", suite}, {"case", case_id},       {"field", field},
                     {"p", p},         {"value", value},        {"detail", detail},
                     {"verdict", to_string(verdict)}};
    j["m_star"] = m_star ? nlohmann::json(*m_star) : nlohmann::json(nullptr);
    if (with_timing) j["seconds"] = seconds;
    return j;
}

ReportRecord ReportRecord::from_json(const nlohmann::json& j) {
    ReportRecord r;
    r.suite = j.at("suite").get<std::string>();
    r.case_id = j.at("case").get<std::string>();
    r.field = j.at("field").get<std::string>();
    r.p = j.at("p").get<std::uint32_t>();
    r.value = j.at("value").get<std::string>();
    r.detail = j.at("detail").get<std::string>();
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    if (!j.at("m_star").is_null()) r.m_star = j.at("m_star").get<std::uint32_t>();
    return r;
}

void sort_records(std::vector<ReportRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const ReportRecord& a, const ReportRecord& b) {
        return std::tie(a.suite, a.case_id, a.field) < std::tie(b.suite, b.case_id, b.field);
    });
}

std::string render_ndjson(const std::vector<ReportRecord>& records, bool with_timing) {
    std::string out;
    for (const auto& r : records) out += r.to_json(with_timing).dump() + "\n";
    return out;
}

std::string render_table(const std::vector<ReportRecord>& records) {
    const std::vector<std::string> head{"suite", "case", "field", "M*", "verdict", "seconds", "value"};
    std::vector<std::vector<std::string>> rows{head};
    for (const auto& r : records) {
        std::ostringstream secs;
        secs << std::fixed << std::setprecision(3) << r.seconds;
        rows.push_back({r.suite, r.case_id, r.field, r.m_star ? std::to_string(*r.m_star) : "-", to_string(r.verdict),
                        secs.str(), r.value});
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i + 1 < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    std::string out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            line += row[i];
            if (i + 1 < row.size()) line += std::string(width[i] - row[i].size() + 2, ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    }
    return out;
}

int exit_code(const std::vector<ReportRecord>& records) {
    bool inconclusive = false;
    for (const auto& r : records) {
        if (r.verdict == Verdict::Fail) return 1;
        if (r.verdict == Verdict::Inconclusive) inconclusive = true;
    }
    return inconclusive ? 2 : 0;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ResultCache::ResultCache(std::filesystem::path dir, Mode mode) : dir_(std::move(dir)), mode_(mode) {
    if (mode_ != Mode::Off) std::filesystem::create_directories(dir_);
}

std::string ResultCache::path_for(const std::string& key) const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(key);
    return (dir_ / (os.str() + ".json")).string();
}

std::optional<nlohmann::json> ResultCache::get(const std::string& key) const {
    if (mode_ == Mode::Off) return std::nullopt;
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    try {
        nlohmann::json j;
        in >> j;
        // The key is stored alongside the value so hash collisions read as misses.
        if (j.at("key").get<std::string>() != key) return std::nullopt;
        return j.at("value");
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

void ResultCache::put(const std::string& key, const nlohmann::json& value) const {
    if (mode_ == Mode::Off) return;
    const std::string target = path_for(key);
    const std::string tmp = target + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << nlohmann::json{{"key", key}, {"value", value}}.dump() << "\n";
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace dptk
