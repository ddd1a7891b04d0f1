#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dptk {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CharacteristicSet { Zero, Positive, Both };

/// One experiment. Field names in the JSON form are the member names below; suite-specific
/// inputs live in `params` (see README for the keys each suite reads).
struct ExperimentConfig {
    std::string suite;
    std::vector<std::uint32_t> primes;
    CharacteristicSet characteristics = CharacteristicSet::Both;
    /// Digit budgets tried in order until a case has no Unknown part.
    std::vector<std::uint32_t> m_schedule{6};
    std::int64_t conductor_shift = 1;
    std::optional<std::string> output;  // NDJSON path
    bool timing = false;                // add wall times to machine records
    nlohmann::json params = nlohmann::json::object();
    /// Directory that relative paths in params are resolved against.
    std::filesystem::path base_dir = ".";
};

/// Throws ConfigError on unknown suites, malformed fields, or primes that are not odd primes
/// at or above the suite's minimum.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

struct SuiteInfo {
    std::string id;
    std::uint32_t min_p;
    std::string summary;
};
const std::vector<SuiteInfo>& suites();

enum class Verdict { Pass, Skipped, Inconclusive, Fail };
std::string to_string(Verdict v);

struct ReportRecord {
    std::string suite;
    std::string case_id;
    std::string field;  // "Q_5", "F_5((t))", or "cross" for a comparison between them
    std::uint32_t p = 0;
    std::optional<std::uint32_t> m_star;
    std::string value;
    std::string detail;
    Verdict verdict = Verdict::Pass;
    double seconds = 0;

    nlohmann::json to_json(bool with_timing) const;
    static ReportRecord from_json(const nlohmann::json& j);
};

/// Sorts by (suite, case, field).
void sort_records(std::vector<ReportRecord>& records);
std::string render_ndjson(const std::vector<ReportRecord>& records, bool with_timing);
std::string render_table(const std::vector<ReportRecord>& records);
/// 0 when everything passed or was skipped, 1 on any failure, 2 when the worst verdict is
/// inconclusive. Configuration errors use 3.
int exit_code(const std::vector<ReportRecord>& records);
constexpr int kConfigErrorExit = 3;

std::uint64_t fnv1a64(const std::string& data);

/// Content-addressed store: one JSON file per key under `dir`, written through a temporary
/// file and a rename.
class ResultCache {
public:
    enum class Mode { Off, ReadWrite, Verify };
    ResultCache(std::filesystem::path dir, Mode mode);

    std::optional<nlohmann::json> get(const std::string& key) const;
    void put(const std::string& key, const nlohmann::json& value) const;
    Mode mode() const { return mode_; }
    std::string path_for(const std::string& key) const;

    std::uint64_t hits = 0, misses = 0, mismatches = 0;

private:
    std::filesystem::path dir_;
    Mode mode_;
};

/// Runs the configured suite. Cases are looked up in the cache by a hash of the case
/// description, the field set, the digit schedule and the code version.
std::vector<ReportRecord> run_suite(const ExperimentConfig& cfg, ResultCache& cache);

/// Version string mixed into cache keys.
const char* code_version();

}  // namespace dptk
