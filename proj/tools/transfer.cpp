// Command line front end for the experiment suites.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dptk/harness/harness.hpp"

using dptk::ConfigError;
using nlohmann::json;

namespace {

struct Common {
    std::vector<std::uint32_t> primes{3, 5, 7};
    std::string characteristics = "both";
    std::vector<std::uint32_t> digits{6};
    std::int64_t shift = 1;
    std::string output;
    std::string cache_dir = ".transfer-cache";
    bool no_cache = false;
    bool verify_cache = false;
    bool timing = false;
    bool ndjson = false;
    std::uint32_t precision = 16;
};

void add_common(CLI::App* cmd, Common& c, bool with_fields = true) {
    if (with_fields) {
        cmd->add_option("-p,--primes", c.primes, "odd primes")->delimiter(',');
        cmd->add_option("-c,--characteristics", c.characteristics, "zero, positive or both")
            ->check(CLI::IsMember({"zero", "positive", "both"}));
        cmd->add_option("-M,--digits", c.digits, "digit budgets, tried in order")->delimiter(',');
        cmd->add_option("--precision", c.precision, "working relative precision of the fields");
    }
    cmd->add_option("-o,--output", c.output, "write NDJSON records here");
    cmd->add_option("--cache-dir", c.cache_dir, "content-addressed result cache");
    cmd->add_flag("--no-cache", c.no_cache, "neither read nor write the cache");
    cmd->add_flag("--verify-cache", c.verify_cache, "recompute every case and compare with the cache");
    cmd->add_flag("--timing", c.timing, "include wall times in NDJSON records");
    cmd->add_flag("--ndjson", c.ndjson, "print NDJSON instead of the table");
}

json base_config(const std::string& suite, const Common& c) {
    return json{{"suite", suite},
                {"primes", c.primes},
                {"characteristics", c.characteristics},
                {"m_schedule", c.digits},
                {"conductor_shift", c.shift},
                {"params", json{{"precision", c.precision}}}};
}

std::vector<std::string> split_pair(const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigError("expected two comma separated polynomials: " + text);
    return {text.substr(0, comma), text.substr(comma + 1)};
}

int run(const dptk::ExperimentConfig& cfg, const Common& c) {
    using Mode = dptk::ResultCache::Mode;
    const Mode mode = c.no_cache ? Mode::Off : c.verify_cache ? Mode::Verify : Mode::ReadWrite;
    dptk::ResultCache cache(c.cache_dir, mode);
    auto records = dptk::run_suite(cfg, cache);
    const bool timing = cfg.timing || c.timing;
    const std::string machine = dptk::render_ndjson(records, timing);
    std::string out_path = c.output.empty() && cfg.output ? *cfg.output : c.output;
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + out_path);
        out << machine;
    }
    std::cout << (c.ndjson ? machine : dptk::render_table(records));
    const int code = dptk::exit_code(records);
    std::cerr << records.size() << " records, cache hits " << cache.hits << ", computed " << cache.misses;
    if (mode == Mode::Verify) std::cerr << ", cache mismatches " << cache.mismatches;
    std::cerr << ", exit " << code << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transfer checks between Q_p and F_p((t))"};
    app.require_subcommand(1);

    Common c;
    std::vector<std::string> formulas;
    auto* eval = app.add_subcommand("eval", "evaluate sentences in each field");
    eval->add_option("formula", formulas, "sentences")->required();
    add_common(eval, c);

    auto* ake = app.add_subcommand("ake", "built-in bounded sentences in both characteristics");
    add_common(ake, c);

    std::string corpus;
    std::vector<std::string> complexes;
    auto* volume = app.add_subcommand("volume", "motivic against p-adic volumes of cell complexes");
    volume->add_option("--corpus", corpus, "directory of complex JSON files");
    volume->add_option("--complex", complexes, "complex JSON files");
    add_common(volume, c);

    std::int64_t k_min = -2, k_max = 2;
    std::vector<std::string> units{"1", "nonsquare"};
    bool no_cross = false;
    auto* jy = app.add_subcommand("jy", "I(a) = gamma(a) J(a) for n = 2");
    jy->add_option("--k-min", k_min);
    jy->add_option("--k-max", k_max);
    jy->add_option("--units", units, "unit polynomials, or 'nonsquare'")->delimiter(',');
    jy->add_option("--shift", c.shift, "psi(x) = psi0(pi^shift x)");
    jy->add_flag("--no-cross", no_cross, "skip the comparison across characteristics");
    add_common(jy, c);

    std::vector<std::string> eigen, charpoly;
    std::string weight = "vM";
    auto* weights = app.add_subcommand("weights", "fiber volumes and weighted orbital integrals for GL2");
    weights->add_option("--eigenvalues", eigen, "'l1,l2' in Z[t]");
    weights->add_option("--char-poly", charpoly, "'tr,det' in Z[t]");
    weights->add_option("-f,--weight", weight)->check(CLI::IsMember({"vM", "one"}));
    add_common(weights, c);

    std::string config_path;
    auto* report = app.add_subcommand("report", "run an experiment configuration file");
    report->add_option("config", config_path)->required();
    add_common(report, c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : dptk::kConfigErrorExit;
    }

    try {
        dptk::ExperimentConfig cfg;
        if (*report) {
            cfg = dptk::load_config(config_path);
        } else {
            json j;
            if (*eval) {
                j = base_config("eval", c);
                j["params"]["formulas"] = formulas;
            } else if (*ake) {
                j = base_config("ake", c);
            } else if (*volume) {
                j = base_config("volumes", c);
                if (!corpus.empty()) j["params"]["corpus"] = corpus;
                if (!complexes.empty()) j["params"]["complexes"] = complexes;
            } else if (*jy) {
                j = base_config("jy", c);
                j["params"]["k_min"] = k_min;
                j["params"]["k_max"] = k_max;
                j["params"]["units"] = units;
                j["params"]["cross_characteristic"] = !no_cross;
            } else {
                j = base_config("weights", c);
                j["params"]["weight"] = weight;
                json orbits = json::array();
                for (const auto& e : eigen) orbits.push_back(json{{"eigenvalues", split_pair(e)}});
                for (const auto& e : charpoly) {
                    auto v = split_pair(e);
                    orbits.push_back(json{{"tr", v[0]}, {"det", v[1]}});
                }
                j["params"]["orbits"] = orbits;
            }
            cfg = dptk::parse_config(j);
        }
        return run(cfg, c);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return dptk::kConfigErrorExit;
    }
}
