#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "embias/analogy.hpp"
#include "embias/embedding.hpp"
#include "embias/experiments.hpp"
#include "embias/measures.hpp"
#include "embias/parallel.hpp"
#include "embias/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheckFailed = 3;

struct EmbeddingArgs {
    std::string path;
    std::string format = "binary";

    void attach(CLI::App* cmd) {
        cmd->add_option("--embedding", path,
                        "word2vec embedding file (or set EMBIAS_EMBEDDING)");
        cmd->add_option("--embedding-format", format, "binary or text")
            ->check(CLI::IsMember({"binary", "text"}));
    }

    embias::EmbeddingTable load(std::vector<std::string>* warnings = nullptr) const {
        std::string resolved = path;
        if (resolved.empty()) {
            if (const char* env = std::getenv("EMBIAS_EMBEDDING")) resolved = env;
        }
        if (resolved.empty()) {
            throw embias::Error("no embedding given: pass --embedding or set EMBIAS_EMBEDDING");
        }
        const auto fmt = format == "text" ? embias::EmbeddingFormat::Text
                                          : embias::EmbeddingFormat::Binary;
        return embias::load_embedding(resolved, fmt, warnings);
    }
};

embias::BasePair parse_pair_arg(const std::string& arg) {
    const auto comma = arg.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 >= arg.size()) {
        throw embias::Error("expected a pair like \"she,he\", got \"" + arg + "\"");
    }
    return {arg.substr(0, comma), arg.substr(comma + 1)};
}

void print_score(const embias::BiasScore& score) {
    std::cout << embias::format_fixed(score.value) << " direction=" << to_string(score.direction)
              << " measure=" << to_string(score.measure) << " pair=" << score.pair.label() << '\n';
}

int run_inspect(const EmbeddingArgs& embedding, const std::vector<std::string>& words,
                std::uint32_t filter_n, const std::string& cache_path) {
    std::vector<std::string> warnings;
    const auto table = embedding.load(&warnings);
    std::cout << "count " << table.count() << '\n';
    std::cout << "dim " << table.dim() << '\n';
    std::cout << "checksum " << embias::to_hex(embias::table_checksum(table)) << '\n';
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    if (filter_n > 0) {
        const auto rows = embias::frequent_word_filter(table, std::min(filter_n, table.count()));
        std::cout << "frequent_filter " << rows.size() << " of " << filter_n << '\n';
    }
    for (const auto& word : words) {
        const auto row = table.require(word);
        const auto v = table.row(row);
        double ss = 0.0;
        for (const float x : v) ss += static_cast<double>(x) * x;
        std::cout << word << " row=" << row << " norm=" << embias::format_fixed(std::sqrt(ss));
        const std::size_t head = std::min<std::size_t>(v.size(), 6);
        std::cout << " head=[";
        for (std::size_t i = 0; i < head; ++i) {
            std::cout << (i ? " " : "") << embias::format_fixed(v[i]);
        }
        std::cout << "]\n";
    }
    if (!cache_path.empty()) {
        embias::EmbeddingCache cache;
        cache.source_checksum = embias::table_checksum(table);
        cache.count = table.count();
        cache.dim = table.dim();
        cache.norms = embias::row_norms(table, embias::default_thread_count());
        cache.frequent_rows =
            embias::frequent_word_filter(table, std::min<std::uint32_t>(50000, table.count()));
        embias::write_embedding_cache(cache, cache_path);
        std::cout << "cache written to " << cache_path << '\n';
    }
    return kExitOk;
}

int run_score(const EmbeddingArgs& embedding, const std::string& word, const std::string& measure,
              const std::string& pair_arg, std::uint32_t k, const std::string& neutral_path) {
    const auto table = embedding.load();
    const auto pair = parse_pair_arg(pair_arg);
    const auto m = embias::measure_from_string(measure);
    if (!m) throw embias::Error("unknown measure \"" + measure + "\"");
    const auto score = [&]() -> embias::BiasScore {
        switch (*m) {
            case embias::Measure::DbWa: return embias::direct_bias(table, word, pair);
            case embias::Measure::Ripa: return embias::ripa(table, word, pair);
            case embias::Measure::Nbm: {
                if (neutral_path.empty()) {
                    throw embias::Error("NBM needs --neutral <token file>");
                }
                const auto neutral =
                    embias::NeutralSet::build(table, embias::read_token_list(neutral_path));
                return embias::nbm(table, word, pair, neutral, k);
            }
        }
        throw embias::Error("unknown measure \"" + measure + "\"");
    }();
    print_score(score);
    return kExitOk;
}

int run_analogy(const EmbeddingArgs& embedding, const std::string& a, const std::string& b,
                const std::string& c, unsigned threads) {
    const auto table = embedding.load();
    const auto answer = embias::solve_3cosadd(
        table, {a, b, c}, threads == 0 ? embias::default_thread_count() : threads);
    std::cout << answer.token << " score=" << embias::format_fixed(answer.score) << '\n';
    return kExitOk;
}

int run_pairs(const EmbeddingArgs& embedding, const std::string& pair_arg, std::uint32_t top_n,
              double delta, std::uint32_t max_candidates, const std::string& candidates_path,
              unsigned threads) {
    const auto table = embedding.load();
    const auto pair = parse_pair_arg(pair_arg);
    std::vector<std::uint32_t> candidates;
    if (!candidates_path.empty()) {
        for (const auto& token : embias::read_token_list(candidates_path)) {
            if (const auto row = table.find(token)) candidates.push_back(*row);
        }
    } else {
        candidates = embias::frequent_word_filter(table, std::min<std::uint32_t>(50000,
                                                                                 table.count()));
        if (max_candidates > 0 && candidates.size() > max_candidates) {
            candidates.resize(max_candidates);
        }
    }
    const auto result = embias::generate_biased_pairs(
        table, pair, candidates, delta, top_n,
        threads == 0 ? embias::default_thread_count() : threads);
    for (const auto& p : result) {
        std::cout << table.word(p.x_row) << ' ' << table.word(p.y_row) << ' '
                  << embias::format_fixed(p.score) << " cos=" << embias::format_fixed(p.cosine_xy)
                  << '\n';
    }
    return kExitOk;
}

int run_report(const std::string& input, const std::string& format) {
    std::ifstream in(input);
    if (!in) throw embias::Error("cannot open report: " + input);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw embias::Error("report " + input + ": " + e.what());
    }
    embias::Report report;
    report.experiment = j.at("experiment").get<std::string>();
    const auto& prov = j.at("provenance");
    report.provenance.config_hash = prov.at("config_hash").get<std::string>();
    report.provenance.embedding_checksum = prov.at("embedding_checksum").get<std::string>();
    report.provenance.seed = prov.at("seed").get<std::uint64_t>();
    for (const auto& jt : j.at("tables")) {
        embias::ReportTable t(jt.at("name").get<std::string>(),
                              jt.at("rows").get<std::vector<std::string>>(),
                              jt.at("cols").get<std::vector<std::string>>());
        const auto& cells = jt.at("cells");
        for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
            for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
                const auto& cell = cells.at(r).at(c);
                if (!cell.is_null()) t.set(r, c, cell.get<double>());
            }
        }
        report.tables.push_back(std::move(t));
    }
    for (const auto& js : j.at("skips")) {
        report.skip(js.at("context").get<std::string>(), js.at("token").get<std::string>());
    }
    report.notes = j.at("notes").get<std::vector<std::string>>();

    const auto fmt = embias::output_format_from_string(format);
    if (!fmt) throw embias::Error("unknown format \"" + format + "\"");
    embias::write_report(report, *fmt, std::cout);
    return kExitOk;
}

// Data an experiment cannot run without; "all" silently skips experiments
// whose inputs are not configured, explicit names fail loudly instead.
std::vector<std::string> missing_inputs(const embias::ExperimentConfig& config,
                                        const std::string& name) {
    std::vector<std::string> missing;
    const auto need = [&](const std::string& path, const char* key) {
        if (path.empty()) missing.push_back(key);
    };
    const bool wants_professions =
        name == "base-pair-stability" || name == "base-pair-capitalization" ||
        name == "word-form-stability" || name == "measure-agreement" ||
        name == "difference-vector-correlation" || name == "ripa-pair-swap";
    const bool wants_pairs = name != "ripa-pair-swap" && name != "analogy-study" &&
                             name != "similarity-baselines";
    if (wants_professions) need(config.professions_path, "data.professions");
    if (wants_pairs) need(config.base_pairs_path, "data.base_pairs");
    if (name == "word-form-stability" && config.word_forms_path.empty() &&
        !config.word_forms_heuristic) {
        missing.push_back("data.word_forms (or word_forms_heuristic)");
    }
    if (name == "linguistic-correspondence") {
        need(config.bsri_female_path, "data.bsri_female");
        need(config.bsri_male_path, "data.bsri_male");
        need(config.animal_pairs_path, "data.animal_pairs");
    }
    if (name == "analogy-study") need(config.analogy_suite_path, "data.analogy_suite");
    return missing;
}

int run_experiment_cmd(const std::string& name, const std::string& config_path,
                       const EmbeddingArgs& embedding_override, const std::string& format,
                       const std::string& out_dir, const std::string& check_path,
                       unsigned threads) {
    auto config = embias::load_config(config_path);
    if (!embedding_override.path.empty()) {
        config.embedding_path = embedding_override.path;
        config.embedding_format = embedding_override.format == "text"
                                      ? embias::EmbeddingFormat::Text
                                      : embias::EmbeddingFormat::Binary;
    }
    if (threads > 0) config.threads = threads;
    if (config.embedding_path.empty()) {
        throw embias::Error("config has no embedding path (set embedding.path, --embedding or "
                            "EMBIAS_EMBEDDING)");
    }

    std::vector<std::string> names;
    if (name == "all") {
        for (const auto& n : embias::experiment_names()) {
            const auto missing = missing_inputs(config, n);
            if (missing.empty()) {
                names.push_back(n);
            } else {
                std::cerr << "skipping " << n << " (missing";
                for (const auto& m : missing) std::cerr << ' ' << m;
                std::cerr << ")\n";
            }
        }
    } else {
        const auto& all = embias::experiment_names();
        if (std::find(all.begin(), all.end(), name) == all.end()) {
            throw embias::Error("unknown experiment: \"" + name + "\"");
        }
        names.push_back(name);
    }
    if (names.empty()) throw embias::Error("no experiment is runnable with this config");

    std::vector<std::string> warnings;
    const auto table = embias::load_embedding(config.embedding_path, config.embedding_format,
                                              &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    auto bundle = embias::load_bundle(config, table);
    embias::ExperimentContext ctx(table, std::move(bundle), config);
    if (!config.cache_path.empty()) {
        const auto checksum = embias::table_checksum(table);
        if (auto loaded = embias::try_load_embedding_cache(config.cache_path, checksum)) {
            ctx.set_cached_norms(std::move(loaded->norms));
            std::cerr << "cache: loaded " << config.cache_path << '\n';
        } else {
            embias::EmbeddingCache fresh;
            fresh.source_checksum = checksum;
            fresh.count = table.count();
            fresh.dim = table.dim();
            fresh.norms = embias::row_norms(table, ctx.threads());
            fresh.frequent_rows = embias::frequent_word_filter(
                table, std::min(config.frequent_n, table.count()));
            embias::write_embedding_cache(fresh, config.cache_path);
            ctx.set_cached_norms(std::move(fresh.norms));
            std::cerr << "cache: wrote " << config.cache_path << '\n';
        }
    }

    const auto fmt = embias::output_format_from_string(format);
    if (!fmt) throw embias::Error("unknown format \"" + format + "\"");

    std::map<std::string, embias::Report> reports;
    for (const auto& n : names) {
        auto report = embias::run_experiment(ctx, n);
        const std::string rendered = embias::render_report(report, *fmt);
        if (out_dir.empty()) {
            std::cout << rendered;
        } else {
            std::filesystem::create_directories(out_dir);
            const auto base = std::filesystem::path(out_dir) / n;
            {
                std::ofstream out(base.string() + "." +
                                  std::string(embias::output_format_extension(*fmt)),
                                  std::ios::binary);
                out << rendered;
            }
            nlohmann::ordered_json sidecar;
            sidecar["experiment"] = report.experiment;
            sidecar["config_hash"] = report.provenance.config_hash;
            sidecar["embedding_checksum"] = report.provenance.embedding_checksum;
            sidecar["seed"] = report.provenance.seed;
            std::ofstream prov(base.string() + ".provenance.json", std::ios::binary);
            prov << sidecar.dump(2) << '\n';
        }
        reports.emplace(n, std::move(report));
    }

    if (!check_path.empty()) {
        const auto checks = embias::load_cell_checks(check_path);
        const auto failures = embias::run_cell_checks(checks, reports);
        for (const auto& f : failures) std::cerr << "check failed: " << f << '\n';
        std::cerr << (checks.size() - failures.size()) << "/" << checks.size()
                  << " checks passed\n";
        if (!failures.empty()) return kExitCheckFailed;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"word-embedding gender bias measures and robustness experiments"};
    app.require_subcommand(1);

    // inspect
    auto* inspect = app.add_subcommand("inspect", "load an embedding and print summary facts");
    EmbeddingArgs inspect_embedding;
    inspect_embedding.attach(inspect);
    std::vector<std::string> inspect_words;
    std::uint32_t inspect_filter = 0;
    std::string inspect_cache;
    inspect->add_option("--word", inspect_words, "print norm and leading components of a word");
    inspect->add_option("--filter-count", inspect_filter,
                        "report the frequency-filter survivor count over the first N words");
    inspect->add_option("--cache", inspect_cache, "write a norms/filter cache file");

    // score
    auto* score = app.add_subcommand("score", "score one word under a measure and base pair");
    EmbeddingArgs score_embedding;
    score_embedding.attach(score);
    std::string score_word, score_measure = "dbwa", score_pair, score_neutral;
    std::uint32_t score_k = 100;
    score->add_option("word", score_word, "the word to score")->required();
    score->add_option("--measure", score_measure, "dbwa, ripa or nbm");
    score->add_option("--pair", score_pair, "base pair, e.g. she,he")->required();
    score->add_option("--k", score_k, "NBM neighborhood size");
    score->add_option("--neutral", score_neutral, "neutral word list (NBM only)");

    // analogy
    auto* analogy = app.add_subcommand("analogy", "solve \"a is to b as c is to ?\"");
    EmbeddingArgs analogy_embedding;
    analogy_embedding.attach(analogy);
    std::string analogy_a, analogy_b, analogy_c;
    unsigned analogy_threads = 0;
    analogy->add_option("a", analogy_a)->required();
    analogy->add_option("b", analogy_b)->required();
    analogy->add_option("c", analogy_c)->required();
    analogy->add_option("--threads", analogy_threads, "worker threads (0 = hardware)");

    // pairs
    auto* pairs = app.add_subcommand("pairs", "generate constrained biased analogy pairs");
    EmbeddingArgs pairs_embedding;
    pairs_embedding.attach(pairs);
    std::string pairs_pair, pairs_candidates;
    std::uint32_t pairs_top = 20, pairs_max_candidates = 5000;
    double pairs_delta = 1.0;
    unsigned pairs_threads = 0;
    pairs->add_option("pair", pairs_pair, "template pair, e.g. she,he")->required();
    pairs->add_option("--top", pairs_top, "number of pairs to print");
    pairs->add_option("--delta", pairs_delta, "difference-norm constraint in (0, 2]");
    pairs->add_option("--max-candidates", pairs_max_candidates,
                      "cap on the frequency-filtered candidate pool (0 = no cap)");
    pairs->add_option("--candidates", pairs_candidates, "explicit candidate token file");
    pairs->add_option("--threads", pairs_threads, "worker threads (0 = hardware)");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a named experiment (or \"all\")");
    EmbeddingArgs experiment_embedding;
    experiment_embedding.attach(experiment);
    std::string exp_name, exp_config, exp_format = "json", exp_out, exp_check;
    unsigned exp_threads = 0;
    experiment->add_option("name", exp_name, "experiment name or \"all\"")->required();
    experiment->add_option("--config", exp_config, "JSON config file")->required();
    experiment->add_option("--format", exp_format, "csv, markdown or json");
    experiment->add_option("--out", exp_out, "directory for report + provenance files");
    experiment->add_option("--check", exp_check, "expected-cell JSON; exit 3 on any miss");
    experiment->add_option("--threads", exp_threads, "worker threads (0 = config/hardware)");

    // report
    auto* report = app.add_subcommand("report", "re-render a JSON report");
    std::string report_input, report_format = "markdown";
    report->add_option("input", report_input, "report JSON file")->required();
    report->add_option("--format", report_format, "csv, markdown or json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (inspect->parsed()) {
            return run_inspect(inspect_embedding, inspect_words, inspect_filter, inspect_cache);
        }
        if (score->parsed()) {
            return run_score(score_embedding, score_word, score_measure, score_pair, score_k,
                             score_neutral);
        }
        if (analogy->parsed()) {
            return run_analogy(analogy_embedding, analogy_a, analogy_b, analogy_c,
                               analogy_threads);
        }
        if (pairs->parsed()) {
            return run_pairs(pairs_embedding, pairs_pair, pairs_top, pairs_delta,
                             pairs_max_candidates, pairs_candidates, pairs_threads);
        }
        if (experiment->parsed()) {
            return run_experiment_cmd(exp_name, exp_config, experiment_embedding, exp_format,
                                      exp_out, exp_check, exp_threads);
        }
        if (report->parsed()) {
            return run_report(report_input, report_format);
        }
    } catch (const embias::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
