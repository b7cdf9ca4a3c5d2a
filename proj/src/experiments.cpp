#include "embias/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "embias/parallel.hpp"

namespace embias {

namespace {

constexpr std::array<Measure, 3> kAllMeasures{Measure::DbWa, Measure::Ripa, Measure::Nbm};

bool has_measure(const ExperimentConfig& config, Measure m) {
    return std::find(config.measures.begin(), config.measures.end(), m) != config.measures.end();
}

int label_of(Direction d) { return static_cast<int>(d); }

std::vector<std::string> pair_columns(const std::vector<BasePair>& pairs) {
    std::vector<std::string> cols;
    cols.reserve(pairs.size() + 1);
    for (const auto& p : pairs) cols.push_back(p.label());
    cols.push_back("mean");
    return cols;
}

// Mean over the non-null pair cells, written into the trailing "mean" column.
void fill_row_mean(ReportTable& t, std::size_t row) {
    const std::size_t mean_col = t.col_labels.size() - 1;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < mean_col; ++c) {
        if (const auto& v = t.at(row, c)) {
            sum += *v;
            ++n;
        }
    }
    if (n > 0) t.set(row, mean_col, sum / static_cast<double>(n));
}

struct ResolvedList {
    std::vector<std::string> words;
    std::vector<std::uint32_t> rows;
};

ResolvedList resolve_words(const EmbeddingTable& table, std::span<const std::string> tokens,
                           Report& report, const std::string& context) {
    ResolvedList out;
    out.words.reserve(tokens.size());
    out.rows.reserve(tokens.size());
    for (const auto& token : tokens) {
        if (const auto row = table.find(token)) {
            out.words.push_back(token);
            out.rows.push_back(*row);
        } else {
            report.skip(context, token);
        }
    }
    return out;
}

}  // namespace

std::string capitalized_form(std::string_view token) {
    std::string out(token);
    if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') {
        out[0] = static_cast<char>(out[0] - 'a' + 'A');
    }
    return out;
}

std::string uppercase_form(std::string_view token) {
    std::string out(token);
    for (char& c : out) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    return out;
}

std::unordered_map<std::string, WordForms> read_word_forms(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open word forms file: " + path);
    std::unordered_map<std::string, WordForms> forms;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string base, plural, capital, upper, extra;
        if (!(fields >> base >> plural >> capital >> upper) || (fields >> extra)) {
            throw ParseError("word forms line " + std::to_string(line_no) +
                             ": expected \"base plural Capital UPPER\"");
        }
        if (capital != capitalized_form(base) || upper != uppercase_form(base)) {
            throw ParseError("word forms line " + std::to_string(line_no) + ": case forms of \"" +
                             base + "\" do not match the deterministic transforms");
        }
        if (!forms.emplace(base, WordForms{plural, capital, upper}).second) {
            throw ParseError("word forms line " + std::to_string(line_no) + ": duplicate base \"" +
                             base + "\"");
        }
    }
    return forms;
}

std::vector<BasePair> read_pair_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pair list: " + path);
    std::vector<BasePair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string first, second, extra;
        if (!(fields >> first >> second) || (fields >> extra)) {
            throw ParseError("pair list line " + std::to_string(line_no) +
                             ": expected exactly two tokens");
        }
        pairs.emplace_back(first, second);
    }
    return pairs;
}

unsigned ExperimentConfig::effective_threads() const {
    return threads == 0 ? default_thread_count() : threads;
}

namespace {

const char* kMeasureKeys[3] = {"dbwa", "ripa", "nbm"};

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error("unknown config key \"" + key + "\" in " + where);
        }
    }
}

BasePair pair_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) {
        throw Error("config: " + what + " must be a two-element array");
    }
    return {j[0].get<std::string>(), j[1].get<std::string>()};
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    reject_unknown_keys(j,
                        {"embedding", "data", "measures", "nbm_k", "significance_sd", "seed",
                         "baseline_samples", "pearson_permutations", "frequent_words", "threads",
                         "nbm_population", "word_forms_heuristic", "population_std", "ripa_swap",
                         "analogy", "cache"},
                        "top level");
    if (j.contains("embedding")) {
        const auto& e = j.at("embedding");
        reject_unknown_keys(e, {"path", "format"}, "embedding");
        if (e.contains("path")) c.embedding_path = e.at("path").get<std::string>();
        if (e.contains("format")) {
            const auto f = e.at("format").get<std::string>();
            if (f == "binary") {
                c.embedding_format = EmbeddingFormat::Binary;
            } else if (f == "text") {
                c.embedding_format = EmbeddingFormat::Text;
            } else {
                throw Error("config: embedding.format must be \"binary\" or \"text\"");
            }
        }
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        reject_unknown_keys(d,
                            {"professions", "base_pairs", "bsri_female", "bsri_male",
                             "animal_pairs", "neutral_words", "word_forms", "analogy_suite"},
                            "data");
        const auto get = [&](const char* key, std::string& out) {
            if (d.contains(key)) out = d.at(key).get<std::string>();
        };
        get("professions", c.professions_path);
        get("base_pairs", c.base_pairs_path);
        get("bsri_female", c.bsri_female_path);
        get("bsri_male", c.bsri_male_path);
        get("animal_pairs", c.animal_pairs_path);
        get("neutral_words", c.neutral_words_path);
        get("word_forms", c.word_forms_path);
        get("analogy_suite", c.analogy_suite_path);
    }
    if (j.contains("measures")) {
        c.measures.clear();
        for (const auto& m : j.at("measures")) {
            const auto parsed = measure_from_string(m.get<std::string>());
            if (!parsed) throw Error("config: unknown measure \"" + m.get<std::string>() + "\"");
            if (!has_measure(c, *parsed)) c.measures.push_back(*parsed);
        }
    }
    if (j.contains("nbm_k")) c.nbm_k = j.at("nbm_k").get<std::uint32_t>();
    if (j.contains("significance_sd")) c.significance_sd = j.at("significance_sd").get<double>();
    if (c.significance_sd <= 0.0) throw Error("config: significance_sd must be positive");
    if (c.nbm_k == 0) throw Error("config: nbm_k must be at least 1");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("baseline_samples")) {
        c.baseline_samples = j.at("baseline_samples").get<std::uint64_t>();
    }
    if (j.contains("pearson_permutations")) {
        c.pearson_permutations = j.at("pearson_permutations").get<std::uint64_t>();
    }
    if (j.contains("frequent_words")) c.frequent_n = j.at("frequent_words").get<std::uint32_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("nbm_population")) c.nbm_population = j.at("nbm_population").get<bool>();
    if (j.contains("word_forms_heuristic")) {
        c.word_forms_heuristic = j.at("word_forms_heuristic").get<bool>();
    }
    if (j.contains("population_std")) {
        const auto& p = j.at("population_std");
        reject_unknown_keys(p, {"dbwa", "ripa", "nbm"}, "population_std");
        for (std::size_t i = 0; i < 3; ++i) {
            if (p.contains(kMeasureKeys[i])) {
                c.population_std_override[i] = p.at(kMeasureKeys[i]).get<double>();
            }
        }
    }
    if (j.contains("ripa_swap")) {
        const auto& s = j.at("ripa_swap");
        reject_unknown_keys(s, {"from", "to"}, "ripa_swap");
        if (s.contains("from")) c.ripa_swap_from = pair_from_json(s.at("from"), "ripa_swap.from");
        if (s.contains("to")) c.ripa_swap_to = pair_from_json(s.at("to"), "ripa_swap.to");
    }
    if (j.contains("analogy")) {
        const auto& a = j.at("analogy");
        reject_unknown_keys(a, {"template", "excluded_categories"}, "analogy");
        if (a.contains("template")) {
            c.analogy_template = pair_from_json(a.at("template"), "analogy.template");
        }
        if (a.contains("excluded_categories")) {
            c.analogy_excluded_categories =
                a.at("excluded_categories").get<std::vector<std::string>>();
        }
    }
    if (j.contains("cache")) c.cache_path = j.at("cache").get<std::string>();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("config " + path + ": " + e.what());
    }
    auto config = config_from_json(j);
    if (const char* env = std::getenv("EMBIAS_EMBEDDING")) {
        if (*env != '\0') config.embedding_path = env;
    }
    return config;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["embedding"] = {{"path", c.embedding_path},
                      {"format", c.embedding_format == EmbeddingFormat::Binary ? "binary" : "text"}};
    j["data"] = {{"professions", c.professions_path},
                 {"base_pairs", c.base_pairs_path},
                 {"bsri_female", c.bsri_female_path},
                 {"bsri_male", c.bsri_male_path},
                 {"animal_pairs", c.animal_pairs_path},
                 {"neutral_words", c.neutral_words_path},
                 {"word_forms", c.word_forms_path},
                 {"analogy_suite", c.analogy_suite_path}};
    auto measures = nlohmann::ordered_json::array();
    for (const auto m : c.measures) {
        measures.push_back(kMeasureKeys[static_cast<std::size_t>(m)]);
    }
    j["measures"] = std::move(measures);
    j["nbm_k"] = c.nbm_k;
    j["significance_sd"] = c.significance_sd;
    j["seed"] = c.seed;
    j["baseline_samples"] = c.baseline_samples;
    j["pearson_permutations"] = c.pearson_permutations;
    j["frequent_words"] = c.frequent_n;
    j["nbm_population"] = c.nbm_population;
    j["word_forms_heuristic"] = c.word_forms_heuristic;
    auto pop = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < 3; ++i) {
        if (c.population_std_override[i]) pop[kMeasureKeys[i]] = *c.population_std_override[i];
    }
    j["population_std"] = std::move(pop);
    j["ripa_swap"] = {{"from", {c.ripa_swap_from.first, c.ripa_swap_from.second}},
                      {"to", {c.ripa_swap_to.first, c.ripa_swap_to.second}}};
    j["analogy"] = {{"template", {c.analogy_template.first, c.analogy_template.second}},
                    {"excluded_categories", c.analogy_excluded_categories}};
    return j;
}

std::string config_hash(const ExperimentConfig& config) {
    // threads and cache location affect scheduling only, never results, so
    // they stay out of the canonical form.
    Fnv1a64 h;
    h.update(config_to_json(config).dump());
    return to_hex(h.digest());
}

WordListBundle load_bundle(const ExperimentConfig& config, const EmbeddingTable& table) {
    WordListBundle b;
    if (!config.professions_path.empty()) b.professions = read_token_list(config.professions_path);
    if (!config.base_pairs_path.empty()) b.base_pairs = read_pair_list(config.base_pairs_path);
    if (!config.bsri_female_path.empty()) b.bsri_female = read_token_list(config.bsri_female_path);
    if (!config.bsri_male_path.empty()) b.bsri_male = read_token_list(config.bsri_male_path);
    if (!config.animal_pairs_path.empty()) b.animal_pairs = read_pair_list(config.animal_pairs_path);
    if (!config.neutral_words_path.empty()) {
        b.neutral_words = read_token_list(config.neutral_words_path);
    }
    if (!config.word_forms_path.empty()) b.word_forms = read_word_forms(config.word_forms_path);
    if (config.word_forms_heuristic) {
        for (const auto& base : b.professions) {
            if (b.word_forms.contains(base)) continue;
            for (const char* suffix : {"s", "es"}) {
                const std::string plural = base + suffix;
                if (table.contains(plural)) {
                    b.word_forms.emplace(
                        base, WordForms{plural, capitalized_form(base), uppercase_form(base)});
                    break;
                }
            }
        }
    }
    return b;
}

ExperimentContext::ExperimentContext(const EmbeddingTable& table, WordListBundle bundle,
                                     ExperimentConfig config)
    : table_(&table),
      bundle_(std::move(bundle)),
      config_(std::move(config)),
      threads_(config_.effective_threads()),
      table_checksum_(table_checksum(table)) {}

const std::vector<std::uint32_t>& ExperimentContext::frequent_rows() {
    if (!frequent_rows_) {
        frequent_rows_ =
            frequent_word_filter(*table_, std::min(config_.frequent_n, table_->count()));
    }
    return *frequent_rows_;
}

const NeutralSet& ExperimentContext::neutral() {
    if (!neutral_) {
        if (bundle_.neutral_words.empty()) {
            throw Error("neutral word list not configured (required for NBM)");
        }
        neutral_ = NeutralSet::build(*table_, bundle_.neutral_words);
        if (neutral_->size() == 0) throw Error("no neutral word resolves in the vocabulary");
    }
    return *neutral_;
}

const PairAxis& ExperimentContext::axis(const BasePair& pair) {
    const auto key = std::make_pair(pair.first, pair.second);
    auto it = axes_.find(key);
    if (it == axes_.end()) {
        it = axes_.emplace(key, PairAxis(*table_, pair)).first;
    }
    return it->second;
}

const std::vector<Direction>& ExperimentContext::neutral_directions(const BasePair& pair) {
    const auto key = std::make_pair(pair.first, pair.second);
    auto it = neutral_directions_.find(key);
    if (it == neutral_directions_.end()) {
        it = neutral_directions_.emplace(key, candidate_directions(*table_, neutral(), axis(pair)))
                 .first;
    }
    return it->second;
}

const std::vector<std::uint32_t>& ExperimentContext::neighbors(std::uint32_t row) {
    auto it = neighbors_.find(row);
    if (it == neighbors_.end()) {
        it = neighbors_
                 .emplace(row, top_k_neighbor_positions(*table_, row, neutral(), config_.nbm_k))
                 .first;
    }
    return it->second;
}

void ExperimentContext::prefetch_neighbors(std::span<const std::uint32_t> rows) {
    std::vector<std::uint32_t> missing;
    for (const auto row : rows) {
        if (!neighbors_.contains(row)) missing.push_back(row);
    }
    if (missing.empty()) return;
    auto lists = top_k_neighbor_positions_batch(*table_, missing, neutral(), config_.nbm_k,
                                                threads_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
        neighbors_.emplace(missing[i], std::move(lists[i]));
    }
}

double ExperimentContext::score(Measure m, std::uint32_t row, const BasePair& pair) {
    switch (m) {
        case Measure::DbWa: return axis(pair).dbwa_value(*table_, row);
        case Measure::Ripa: return axis(pair).ripa_value(*table_, row);
        case Measure::Nbm:
            return nbm_value_from_neighbors(neighbors(row), neutral_directions(pair),
                                            config_.nbm_k);
    }
    throw InvalidArgument("unknown measure");
}

PopulationStats ExperimentContext::population(Measure m) {
    const auto idx = static_cast<std::size_t>(m);
    if (population_[idx]) return *population_[idx];
    if (bundle_.base_pairs.empty()) {
        throw Error("population statistics need a base pair list");
    }
    const auto& rows = frequent_rows();
    if (m == Measure::Nbm) prefetch_neighbors(rows);
    PopulationAccumulator acc;
    for (const auto& pair : bundle_.base_pairs) {
        std::vector<double> values;
        switch (m) {
            case Measure::DbWa: values = dbwa_values(*table_, rows, axis(pair), threads_); break;
            case Measure::Ripa: values = ripa_values(*table_, rows, axis(pair), threads_); break;
            case Measure::Nbm: {
                const auto& dirs = neutral_directions(pair);
                values = parallel_map<double>(rows.size(), threads_, [&](std::size_t i) {
                    return nbm_value_from_neighbors(neighbors_.at(rows[i]), dirs, config_.nbm_k);
                });
                break;
            }
        }
        for (const double v : values) acc.add(v);
    }
    population_[idx] = acc.finalize();
    return *population_[idx];
}

double ExperimentContext::population_std(Measure m) {
    const auto idx = static_cast<std::size_t>(m);
    if (config_.population_std_override[idx]) return *config_.population_std_override[idx];
    return population(m).std;
}

bool ExperimentContext::population_available(Measure m) const {
    const auto idx = static_cast<std::size_t>(m);
    return config_.population_std_override[idx].has_value() || population_[idx].has_value();
}

void ExperimentContext::set_cached_norms(std::vector<double> norms) {
    if (norms.size() != table_->count()) {
        throw InvalidArgument("cached norms do not match the vocabulary size");
    }
    cached_norms_ = std::move(norms);
}

const std::vector<double>* ExperimentContext::cached_norms() const noexcept {
    return cached_norms_ ? &*cached_norms_ : nullptr;
}

Provenance ExperimentContext::provenance() const {
    return {config_hash(config_), to_hex(table_checksum_), config_.seed};
}

namespace {

Report make_report(ExperimentContext& ctx, std::string name) {
    Report r;
    r.experiment = std::move(name);
    r.provenance = ctx.provenance();
    return r;
}

const std::vector<std::string> kMeasureRowLabels{"DB/WA", "RIPA", "NBM"};

// Direction labels for one word list under every base pair: pair-major,
// aligned with the resolved rows.
std::vector<std::vector<Direction>> directions_by_pair(ExperimentContext& ctx, Measure m,
                                                       std::span<const std::uint32_t> rows) {
    std::vector<std::vector<Direction>> out;
    out.reserve(ctx.bundle().base_pairs.size());
    if (m == Measure::Nbm) ctx.prefetch_neighbors(rows);
    for (const auto& pair : ctx.bundle().base_pairs) {
        std::vector<Direction> dirs(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            dirs[i] = direction_of(ctx.score(m, rows[i], pair));
        }
        out.push_back(std::move(dirs));
    }
    return out;
}

std::vector<std::vector<double>> values_by_pair(ExperimentContext& ctx, Measure m,
                                                std::span<const std::uint32_t> rows) {
    std::vector<std::vector<double>> out;
    out.reserve(ctx.bundle().base_pairs.size());
    if (m == Measure::Nbm) ctx.prefetch_neighbors(rows);
    for (const auto& pair : ctx.bundle().base_pairs) {
        std::vector<double> values(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            values[i] = ctx.score(m, rows[i], pair);
        }
        out.push_back(std::move(values));
    }
    return out;
}

std::vector<int> to_labels(std::span<const Direction> dirs) {
    std::vector<int> labels(dirs.size());
    std::transform(dirs.begin(), dirs.end(), labels.begin(), label_of);
    return labels;
}

}  // namespace

Report exp_population_stats(ExperimentContext& ctx) {
    Report report = make_report(ctx, "population-stats");
    ReportTable table("population", {"mean", "std"}, {"DB/WA", "RIPA", "NBM"});
    ReportTable counts("score_counts", {"scores"}, {"DB/WA", "RIPA", "NBM"});
    const auto n_scores = static_cast<double>(ctx.frequent_rows().size()) *
                          static_cast<double>(ctx.bundle().base_pairs.size());
    for (std::size_t c = 0; c < kAllMeasures.size(); ++c) {
        const Measure m = kAllMeasures[c];
        if (!has_measure(ctx.config(), m)) continue;
        if (m == Measure::Nbm && !ctx.config().nbm_population) {
            report.notes.push_back(
                "NBM population statistics gated off; enable nbm_population to compute them");
            continue;
        }
        const auto stats = ctx.population(m);
        table.set(0, c, stats.mean);
        table.set(1, c, stats.std);
        counts.set(0, c, static_cast<double>(stats.n));
    }
    report.notes.push_back("filtered words: " + std::to_string(ctx.frequent_rows().size()) +
                           " of first " + std::to_string(ctx.config().frequent_n));
    report.notes.push_back("expected scores per measure: " +
                           std::to_string(static_cast<std::uint64_t>(n_scores)));
    report.tables.push_back(std::move(table));
    report.tables.push_back(std::move(counts));
    return report;
}

Report exp_base_pair_stability(ExperimentContext& ctx) {
    Report report = make_report(ctx, "base-pair-stability");
    const auto professions =
        resolve_words(ctx.table(), ctx.bundle().professions, report, "professions");
    const std::size_t n_pairs = ctx.bundle().base_pairs.size();
    if (n_pairs < 2) throw Error("base-pair-stability needs at least two base pairs");

    ReportTable main("stability", kMeasureRowLabels, {"fleiss_kappa", "magnitude_fraction"});
    ReportTable agree("all_directions_agree", kMeasureRowLabels, {"fraction"});
    ReportTable orders("magnitude_fraction_orders", kMeasureRowLabels,
                       {"by_profession", "by_combination"});

    for (std::size_t mi = 0; mi < kAllMeasures.size(); ++mi) {
        const Measure m = kAllMeasures[mi];
        if (!has_measure(ctx.config(), m)) continue;
        const auto values = values_by_pair(ctx, m, professions.rows);

        AnnotationMatrix grid;
        grid.n_subjects = static_cast<std::uint32_t>(professions.rows.size());
        grid.n_annotators = static_cast<std::uint32_t>(n_pairs);
        grid.labels.reserve(grid.n_subjects * grid.n_annotators);
        for (std::size_t s = 0; s < professions.rows.size(); ++s) {
            for (std::size_t p = 0; p < n_pairs; ++p) {
                grid.labels.push_back(label_of(direction_of(values[p][s])));
            }
        }
        main.set(mi, 0, fleiss_kappa(grid).value);

        const double threshold = ctx.config().significance_sd * ctx.population_std(m);
        if (!ctx.config().population_std_override[static_cast<std::size_t>(m)]) {
            report.notes.push_back(std::string(to_string(m)) +
                                   " significance threshold from computed population std");
        }
        double by_profession = 0.0;
        std::vector<double> combo_hits(n_pairs * n_pairs, 0.0);
        for (std::size_t s = 0; s < professions.rows.size(); ++s) {
            std::size_t significant = 0, combos = 0;
            for (std::size_t i = 0; i < n_pairs; ++i) {
                for (std::size_t j = i + 1; j < n_pairs; ++j) {
                    const bool hit = std::abs(values[i][s] - values[j][s]) > threshold;
                    significant += hit;
                    combo_hits[i * n_pairs + j] += hit;
                    ++combos;
                }
            }
            by_profession += static_cast<double>(significant) / static_cast<double>(combos);
        }
        by_profession /= static_cast<double>(professions.rows.size());
        double by_combination = 0.0;
        std::size_t n_combos = 0;
        for (std::size_t i = 0; i < n_pairs; ++i) {
            for (std::size_t j = i + 1; j < n_pairs; ++j) {
                by_combination +=
                    combo_hits[i * n_pairs + j] / static_cast<double>(professions.rows.size());
                ++n_combos;
            }
        }
        by_combination /= static_cast<double>(n_combos);
        main.set(mi, 1, by_profession);
        orders.set(mi, 0, by_profession);
        orders.set(mi, 1, by_combination);

        std::size_t all_agree = 0;
        for (std::size_t s = 0; s < professions.rows.size(); ++s) {
            const Direction head = direction_of(values[0][s]);
            bool same = true;
            for (std::size_t p = 1; p < n_pairs && same; ++p) {
                same = direction_of(values[p][s]) == head;
            }
            all_agree += same;
        }
        agree.set(mi, 0,
                  static_cast<double>(all_agree) / static_cast<double>(professions.rows.size()));
    }
    report.notes.push_back("professions used: " + std::to_string(professions.rows.size()) +
                           " of " + std::to_string(ctx.bundle().professions.size()));
    report.tables.push_back(std::move(main));
    report.tables.push_back(std::move(agree));
    report.tables.push_back(std::move(orders));
    return report;
}

Report exp_basepair_capitalization(ExperimentContext& ctx) {
    Report report = make_report(ctx, "base-pair-capitalization");
    const auto professions =
        resolve_words(ctx.table(), ctx.bundle().professions, report, "professions");
    const auto& pairs = ctx.bundle().base_pairs;
    ReportTable table("capitalization", kMeasureRowLabels, pair_columns(pairs));

    for (std::size_t mi = 0; mi < kAllMeasures.size(); ++mi) {
        const Measure m = kAllMeasures[mi];
        if (!has_measure(ctx.config(), m)) continue;
        if (m == Measure::Nbm) ctx.prefetch_neighbors(professions.rows);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const BasePair capitalized(capitalized_form(pairs[p].first),
                                       capitalized_form(pairs[p].second));
            bool available = true;
            for (const auto& member : {capitalized.first, capitalized.second}) {
                if (!ctx.table().contains(member)) {
                    report.skip("capitalized form of " + pairs[p].label(), member);
                    available = false;
                }
            }
            if (!available) continue;
            std::vector<int> lower(professions.rows.size()), capital(professions.rows.size());
            for (std::size_t s = 0; s < professions.rows.size(); ++s) {
                lower[s] = label_of(direction_of(ctx.score(m, professions.rows[s], pairs[p])));
                capital[s] =
                    label_of(direction_of(ctx.score(m, professions.rows[s], capitalized)));
            }
            table.set(mi, p, cohen_kappa(lower, capital).value);
        }
        fill_row_mean(table, mi);
    }
    report.notes.push_back("professions used: " + std::to_string(professions.rows.size()) +
                           " of " + std::to_string(ctx.bundle().professions.size()));
    report.tables.push_back(std::move(table));
    return report;
}

Report exp_word_form_stability(ExperimentContext& ctx) {
    Report report = make_report(ctx, "word-form-stability");
    const auto& bundle = ctx.bundle();
    const auto& pairs = bundle.base_pairs;

    // Professions whose base, plural, capitalized and uppercase forms all
    // resolve; each variant list stays aligned with the base list.
    struct Variant {
        std::string label;
        std::vector<std::uint32_t> rows;
    };
    std::vector<std::uint32_t> base_rows;
    std::array<Variant, 3> variants{Variant{"Plural", {}}, Variant{"Capital", {}},
                                    Variant{"Upper", {}}};
    for (const auto& word : bundle.professions) {
        const auto base_row = ctx.table().find(word);
        if (!base_row) {
            report.skip("professions", word);
            continue;
        }
        const auto forms = bundle.word_forms.find(word);
        if (forms == bundle.word_forms.end()) {
            report.skip("word forms (no entry)", word);
            continue;
        }
        const auto plural_row = ctx.table().find(forms->second.plural);
        const auto capital_row = ctx.table().find(forms->second.capitalized);
        const auto upper_row = ctx.table().find(forms->second.uppercase);
        if (!plural_row || !capital_row || !upper_row) {
            report.skip("word forms (variant out of vocabulary)", word);
            continue;
        }
        base_rows.push_back(*base_row);
        variants[0].rows.push_back(*plural_row);
        variants[1].rows.push_back(*capital_row);
        variants[2].rows.push_back(*upper_row);
    }

    std::vector<std::string> row_labels;
    for (const auto& v : variants) {
        for (const auto& m : kMeasureRowLabels) row_labels.push_back(v.label + " " + m);
    }
    ReportTable table("word_forms", row_labels, pair_columns(pairs));
    ReportTable eligibility("eligibility", {"professions"}, {"eligible"});
    eligibility.set(0, 0, static_cast<double>(base_rows.size()));

    if (!base_rows.empty()) {
        for (std::size_t vi = 0; vi < variants.size(); ++vi) {
            for (std::size_t mi = 0; mi < kAllMeasures.size(); ++mi) {
                const Measure m = kAllMeasures[mi];
                if (!has_measure(ctx.config(), m)) continue;
                if (m == Measure::Nbm) {
                    ctx.prefetch_neighbors(base_rows);
                    ctx.prefetch_neighbors(variants[vi].rows);
                }
                const std::size_t row = vi * kAllMeasures.size() + mi;
                for (std::size_t p = 0; p < pairs.size(); ++p) {
                    std::vector<int> base_labels(base_rows.size()),
                        variant_labels(base_rows.size());
                    for (std::size_t s = 0; s < base_rows.size(); ++s) {
                        base_labels[s] =
                            label_of(direction_of(ctx.score(m, base_rows[s], pairs[p])));
                        variant_labels[s] =
                            label_of(direction_of(ctx.score(m, variants[vi].rows[s], pairs[p])));
                    }
                    table.set(row, p, cohen_kappa(base_labels, variant_labels).value);
                }
                fill_row_mean(table, row);
            }
        }
    }
    report.notes.push_back("eligible professions (all three variants in vocabulary): " +
                           std::to_string(base_rows.size()));
    report.tables.push_back(std::move(table));
    report.tables.push_back(std::move(eligibility));
    return report;
}

Report exp_linguistic_correspondence(ExperimentContext& ctx) {
    Report report = make_report(ctx, "linguistic-correspondence");
    const auto& bundle = ctx.bundle();
    const auto& pairs = bundle.base_pairs;

    struct LabeledList {
        std::string name;
        std::vector<std::uint32_t> rows;
        std::vector<int> truth;
    };
    std::array<LabeledList, 2> lists{LabeledList{"BSRI", {}, {}}, LabeledList{"Animal", {}, {}}};

    const auto add = [&](LabeledList& list, const std::string& token, Direction truth) {
        if (const auto row = ctx.table().find(token)) {
            list.rows.push_back(*row);
            list.truth.push_back(label_of(truth));
        } else {
            report.skip(list.name, token);
        }
    };
    for (const auto& w : bundle.bsri_female) add(lists[0], w, Direction::First);
    for (const auto& w : bundle.bsri_male) add(lists[0], w, Direction::Second);
    for (const auto& p : bundle.animal_pairs) {
        add(lists[1], p.first, Direction::First);
        add(lists[1], p.second, Direction::Second);
    }

    std::vector<std::string> row_labels;
    for (const auto& list : lists) {
        for (const auto& m : kMeasureRowLabels) row_labels.push_back(list.name + " " + m);
    }
    ReportTable table("linguistic", row_labels, pair_columns(pairs));

    for (std::size_t li = 0; li < lists.size(); ++li) {
        const auto& list = lists[li];
        if (list.rows.empty()) continue;
        for (std::size_t mi = 0; mi < kAllMeasures.size(); ++mi) {
            const Measure m = kAllMeasures[mi];
            if (!has_measure(ctx.config(), m)) continue;
            if (m == Measure::Nbm) ctx.prefetch_neighbors(list.rows);
            const std::size_t row = li * kAllMeasures.size() + mi;
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                std::vector<int> predicted(list.rows.size());
                for (std::size_t s = 0; s < list.rows.size(); ++s) {
                    predicted[s] = label_of(direction_of(ctx.score(m, list.rows[s], pairs[p])));
                }
                table.set(row, p, cohen_kappa(predicted, list.truth).value);
            }
            fill_row_mean(table, row);
        }
        report.notes.push_back(list.name + " words used: " + std::to_string(list.rows.size()));
    }
    report.tables.push_back(std::move(table));
    return report;
}

Report exp_measure_agreement(ExperimentContext& ctx) {
    Report report = make_report(ctx, "measure-agreement");
    const auto professions =
        resolve_words(ctx.table(), ctx.bundle().professions, report, "professions");
    const auto& pairs = ctx.bundle().base_pairs;

    constexpr std::array<std::pair<Measure, Measure>, 3> kCombos{
        std::pair{Measure::DbWa, Measure::Ripa}, std::pair{Measure::DbWa, Measure::Nbm},
        std::pair{Measure::Ripa, Measure::Nbm}};
    ReportTable table("measure_agreement", {"DB/WA & RIPA", "DB/WA & NBM", "RIPA & NBM"},
                      pair_columns(pairs));

    for (std::size_t ci = 0; ci < kCombos.size(); ++ci) {
        const auto [ma, mb] = kCombos[ci];
        if (!has_measure(ctx.config(), ma) || !has_measure(ctx.config(), mb)) continue;
        if (ma == Measure::Nbm || mb == Measure::Nbm) ctx.prefetch_neighbors(professions.rows);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            std::vector<int> a(professions.rows.size()), b(professions.rows.size());
            for (std::size_t s = 0; s < professions.rows.size(); ++s) {
                a[s] = label_of(direction_of(ctx.score(ma, professions.rows[s], pairs[p])));
                b[s] = label_of(direction_of(ctx.score(mb, professions.rows[s], pairs[p])));
            }
            table.set(ci, p, cohen_kappa(a, b).value);
        }
        fill_row_mean(table, ci);
    }
    report.notes.push_back("professions used: " + std::to_string(professions.rows.size()) +
                           " of " + std::to_string(ctx.bundle().professions.size()));
    report.tables.push_back(std::move(table));
    return report;
}

Report exp_difference_vector_correlation(ExperimentContext& ctx) {
    Report report = make_report(ctx, "difference-vector-correlation");
    const auto professions =
        resolve_words(ctx.table(), ctx.bundle().professions, report, "professions");
    const auto& pairs = ctx.bundle().base_pairs;
    const std::size_t n = pairs.size();
    if (n < 3) throw Error("difference-vector-correlation needs at least three base pairs");

    // Normalized-member difference vector per pair.
    std::vector<std::vector<double>> diffs;
    diffs.reserve(n);
    for (const auto& pair : pairs) {
        const auto& axis = ctx.axis(pair);  // validates both members are nonzero
        const auto x = ctx.table().row(axis.first_row());
        const auto y = ctx.table().row(axis.second_row());
        std::vector<double> d(ctx.table().dim());
        double sx = 0.0, sy = 0.0;
        for (const float v : x) sx += static_cast<double>(v) * v;
        for (const float v : y) sy += static_cast<double>(v) * v;
        const double inx = 1.0 / std::sqrt(sx), iny = 1.0 / std::sqrt(sy);
        for (std::uint32_t j = 0; j < ctx.table().dim(); ++j) {
            d[j] = static_cast<double>(x[j]) * inx - static_cast<double>(y[j]) * iny;
        }
        diffs.push_back(std::move(d));
    }

    std::vector<std::vector<int>> dbwa_dirs(n);
    for (std::size_t p = 0; p < n; ++p) {
        dbwa_dirs[p].resize(professions.rows.size());
        for (std::size_t s = 0; s < professions.rows.size(); ++s) {
            dbwa_dirs[p][s] =
                label_of(direction_of(ctx.score(Measure::DbWa, professions.rows[s], pairs[p])));
        }
    }

    std::vector<double> cos_matrix(n * n, 0.0), kappa_matrix(n * n, 0.0);
    ReportTable scatter("scatter", {}, {"cosine", "kappa"});
    double cos_sum = 0.0;
    std::size_t combos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = cosine(std::span<const double>(diffs[i]),
                                    std::span<const double>(diffs[j]));
            const double k = cohen_kappa(dbwa_dirs[i], dbwa_dirs[j]).value;
            cos_matrix[i * n + j] = cos_matrix[j * n + i] = c;
            kappa_matrix[i * n + j] = kappa_matrix[j * n + i] = k;
            cos_sum += c;
            ++combos;
            scatter.row_labels.push_back(pairs[i].label() + " vs " + pairs[j].label());
            scatter.cells.push_back(c);
            scatter.cells.push_back(k);
        }
    }

    ReportTable summary("summary", {"difference_vector_cosine"}, {"mean"});
    summary.set(0, 0, cos_sum / static_cast<double>(combos));

    ReportTable per_pair("per_pair", {}, {"pearson_r", "p_value"});
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> xs, ys;
        xs.reserve(n - 1);
        ys.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            xs.push_back(cos_matrix[i * n + j]);
            ys.push_back(kappa_matrix[i * n + j]);
        }
        const auto result =
            pearson_r(xs, ys, ctx.config().pearson_permutations, ctx.config().seed);
        per_pair.row_labels.push_back(pairs[i].label());
        per_pair.cells.push_back(result.r);
        per_pair.cells.push_back(result.p);
    }

    report.tables.push_back(std::move(summary));
    report.tables.push_back(std::move(per_pair));
    report.tables.push_back(std::move(scatter));
    return report;
}

Report exp_ripa_pair_swap(ExperimentContext& ctx) {
    Report report = make_report(ctx, "ripa-pair-swap");
    const auto professions =
        resolve_words(ctx.table(), ctx.bundle().professions, report, "professions");
    const auto& from = ctx.config().ripa_swap_from;
    const auto& to = ctx.config().ripa_swap_to;
    std::size_t flips = 0;
    for (const auto row : professions.rows) {
        const Direction a = direction_of(ctx.score(Measure::Ripa, row, from));
        const Direction b = direction_of(ctx.score(Measure::Ripa, row, to));
        flips += a != b;
    }
    ReportTable table("ripa_swap", {"professions"}, {"flips", "fraction", "count"});
    table.set(0, 0, static_cast<double>(flips));
    table.set(0, 1, professions.rows.empty()
                        ? 0.0
                        : static_cast<double>(flips) / static_cast<double>(professions.rows.size()));
    table.set(0, 2, static_cast<double>(professions.rows.size()));
    report.notes.push_back("from " + from.label() + " to " + to.label());
    report.tables.push_back(std::move(table));
    return report;
}

Report exp_analogy_study(ExperimentContext& ctx) {
    Report report = make_report(ctx, "analogy-study");
    if (ctx.config().analogy_suite_path.empty()) {
        throw Error("analogy-study needs data.analogy_suite in the config");
    }
    const auto suite = load_analogy_suite(ctx.config().analogy_suite_path);
    TemplateSuiteOptions options;
    options.excluded_categories = ctx.config().analogy_excluded_categories;
    options.threads = ctx.threads();
    options.norms = ctx.cached_norms();
    const auto result =
        run_template_suite(ctx.table(), suite, ctx.config().analogy_template, options);

    ReportTable summary("summary", {"analogies"},
                        {"unique_pairs", "attempted", "correct", "accuracy", "skipped",
                         "cosine_mean", "cosine_std"});
    summary.set(0, 0, static_cast<double>(result.unique_pairs));
    summary.set(0, 1, static_cast<double>(result.attempted));
    summary.set(0, 2, static_cast<double>(result.correct));
    if (result.attempted > 0) summary.set(0, 3, result.accuracy);
    summary.set(0, 4, static_cast<double>(result.skipped_oov));
    if (result.pair_cosine.n > 0) {
        summary.set(0, 5, result.pair_cosine.mean);
        summary.set(0, 6, result.pair_cosine.std);
    }

    ReportTable categories("categories", {}, {"pairs", "attempted", "correct", "accuracy"});
    for (const auto& cat : result.categories) {
        categories.row_labels.push_back(cat.name);
        categories.cells.push_back(static_cast<double>(cat.pairs));
        categories.cells.push_back(static_cast<double>(cat.attempted));
        categories.cells.push_back(static_cast<double>(cat.correct));
        categories.cells.push_back(cat.attempted == 0 ? std::optional<double>{}
                                                      : std::optional<double>{
                                                            static_cast<double>(cat.correct) /
                                                            cat.attempted});
    }
    if (result.attempted == 0) {
        report.notes.push_back("accuracy undefined: no analogy pair could be attempted");
    }
    report.notes.push_back("template: " + ctx.config().analogy_template.second + " is to x as " +
                           ctx.config().analogy_template.first + " is to ?");
    report.tables.push_back(std::move(summary));
    report.tables.push_back(std::move(categories));
    return report;
}

Report exp_similarity_baselines(ExperimentContext& ctx) {
    Report report = make_report(ctx, "similarity-baselines");
    const auto baselines = random_similarity_baselines(
        ctx.table(), ctx.frequent_rows(), ctx.config().baseline_samples, ctx.config().seed);
    ReportTable table("baselines", {"random_pair", "random_difference"}, {"mean", "std"});
    table.set(0, 0, baselines.pair.mean);
    table.set(0, 1, baselines.pair.std);
    table.set(1, 0, baselines.difference.mean);
    table.set(1, 1, baselines.difference.std);
    report.notes.push_back("samples: " + std::to_string(ctx.config().baseline_samples) +
                           ", sampled from " + std::to_string(ctx.frequent_rows().size()) +
                           " filtered words");
    report.tables.push_back(std::move(table));
    return report;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "population-stats",       "base-pair-stability",
        "base-pair-capitalization", "word-form-stability",
        "linguistic-correspondence", "measure-agreement",
        "difference-vector-correlation", "ripa-pair-swap",
        "analogy-study",          "similarity-baselines"};
    return names;
}

Report run_experiment(ExperimentContext& ctx, std::string_view name) {
    if (name == "population-stats") return exp_population_stats(ctx);
    if (name == "base-pair-stability") return exp_base_pair_stability(ctx);
    if (name == "base-pair-capitalization") return exp_basepair_capitalization(ctx);
    if (name == "word-form-stability") return exp_word_form_stability(ctx);
    if (name == "linguistic-correspondence") return exp_linguistic_correspondence(ctx);
    if (name == "measure-agreement") return exp_measure_agreement(ctx);
    if (name == "difference-vector-correlation") return exp_difference_vector_correlation(ctx);
    if (name == "ripa-pair-swap") return exp_ripa_pair_swap(ctx);
    if (name == "analogy-study") return exp_analogy_study(ctx);
    if (name == "similarity-baselines") return exp_similarity_baselines(ctx);
    throw Error("unknown experiment: \"" + std::string(name) + "\"");
}

std::vector<CellCheck> load_cell_checks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open checks file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("checks " + path + ": " + e.what());
    }
    if (!j.is_array()) throw Error("checks file must contain a JSON array");
    std::vector<CellCheck> checks;
    for (const auto& item : j) {
        CellCheck c;
        c.experiment = item.at("experiment").get<std::string>();
        c.table = item.at("table").get<std::string>();
        c.row = item.at("row").get<std::string>();
        c.col = item.at("col").get<std::string>();
        c.expected = item.at("expected").get<double>();
        c.tolerance = item.at("tolerance").get<double>();
        checks.push_back(std::move(c));
    }
    return checks;
}

std::vector<std::string> run_cell_checks(const std::vector<CellCheck>& checks,
                                         const std::map<std::string, Report>& reports) {
    std::vector<std::string> failures;
    for (const auto& check : checks) {
        const std::string where = check.experiment + "/" + check.table + "[" + check.row + "," +
                                  check.col + "]";
        const auto rep = reports.find(check.experiment);
        if (rep == reports.end()) {
            failures.push_back(where + ": experiment report missing");
            continue;
        }
        const auto* table = rep->second.table(check.table);
        if (!table) {
            failures.push_back(where + ": table missing");
            continue;
        }
        const auto cell = table->cell(check.row, check.col);
        if (!cell) {
            failures.push_back(where + ": cell empty");
            continue;
        }
        if (std::abs(*cell - check.expected) > check.tolerance) {
            failures.push_back(where + ": got " + format_fixed(*cell) + ", expected " +
                               format_fixed(check.expected) + " +/- " +
                               format_fixed(check.tolerance));
        }
    }
    return failures;
}

}  // namespace embias
