#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "embias/analogy.hpp"
#include "embias/embedding.hpp"
#include "embias/measures.hpp"
#include "embias/report.hpp"
#include "embias/stats.hpp"

namespace embias {

// Inflected / recased forms of a base token. The case forms are always the
// deterministic ASCII transforms of the base; plurals come from data.
struct WordForms {
    std::string plural;
    std::string capitalized;
    std::string uppercase;
};

std::string capitalized_form(std::string_view token);
std::string uppercase_form(std::string_view token);

// One line per base token: "base plural Capital UPPER". The case columns
// must equal the deterministic transforms of the base.
std::unordered_map<std::string, WordForms> read_word_forms(const std::string& path);

// Two whitespace-separated tokens per line.
std::vector<BasePair> read_pair_list(const std::string& path);

struct WordListBundle {
    std::vector<std::string> professions;
    std::vector<BasePair> base_pairs;  // (female, male)
    std::vector<std::string> bsri_female;
    std::vector<std::string> bsri_male;
    std::vector<BasePair> animal_pairs;  // (female, male)
    std::vector<std::string> neutral_words;
    std::unordered_map<std::string, WordForms> word_forms;
};

struct ExperimentConfig {
    std::string embedding_path;
    EmbeddingFormat embedding_format = EmbeddingFormat::Binary;

    std::string professions_path;
    std::string base_pairs_path;
    std::string bsri_female_path;
    std::string bsri_male_path;
    std::string animal_pairs_path;
    std::string neutral_words_path;
    std::string word_forms_path;
    std::string analogy_suite_path;
    std::string cache_path;

    // Derive missing plural forms by probing base+"s" / base+"es" against
    // the vocabulary. Off by default; shipped form files are authoritative.
    bool word_forms_heuristic = false;

    std::vector<Measure> measures{Measure::DbWa, Measure::Ripa, Measure::Nbm};
    std::uint32_t nbm_k = 100;
    double significance_sd = 1.0;
    std::uint64_t seed = 12345;
    std::uint64_t baseline_samples = 100000;
    std::uint64_t pearson_permutations = 100000;
    std::uint32_t frequent_n = 50000;
    unsigned threads = 0;  // 0 = hardware concurrency

    // The NBM population statistic scores every filtered word and is by far
    // the slowest step; it stays off unless explicitly requested or given
    // an override below.
    bool nbm_population = false;
    std::array<std::optional<double>, 3> population_std_override{};  // indexed by Measure

    BasePair ripa_swap_from{"man", "woman"};
    BasePair ripa_swap_to{"king", "queen"};
    BasePair analogy_template{"woman", "man"};
    std::vector<std::string> analogy_excluded_categories{"family"};

    unsigned effective_threads() const;
};

// Reads the JSON config documented in the README. The EMBIAS_EMBEDDING
// environment variable, when set, overrides the embedding path.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j);
// Canonical serialization; its hash identifies the run in provenance blocks.
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

WordListBundle load_bundle(const ExperimentConfig& config, const EmbeddingTable& table);

// Shared lazily-built state for one (table, bundle, config) run: resolved
// pair axes, the frequency-filtered rows, the neutral candidate set,
// per-pair candidate directions, per-word neighborhoods and the population
// statistics that calibrate magnitude significance.
class ExperimentContext {
public:
    ExperimentContext(const EmbeddingTable& table, WordListBundle bundle,
                      ExperimentConfig config);

    const EmbeddingTable& table() const noexcept { return *table_; }
    const WordListBundle& bundle() const noexcept { return bundle_; }
    const ExperimentConfig& config() const noexcept { return config_; }
    unsigned threads() const noexcept { return threads_; }

    const std::vector<std::uint32_t>& frequent_rows();
    const NeutralSet& neutral();
    const PairAxis& axis(const BasePair& pair);

    // Direction of every neutral candidate under a pair (for NBM).
    const std::vector<Direction>& neutral_directions(const BasePair& pair);

    // Top-K neighborhood of a vocabulary row within the neutral set.
    const std::vector<std::uint32_t>& neighbors(std::uint32_t row);
    void prefetch_neighbors(std::span<const std::uint32_t> rows);

    // Table-1 population statistics; computed on demand and cached.
    PopulationStats population(Measure m);
    // Significance yardstick: override when configured, else computed.
    double population_std(Measure m);
    bool population_available(Measure m) const;

    double score(Measure m, std::uint32_t row, const BasePair& pair);

    // Row norms restored from a cache file, if any; consumed by the
    // analogy study to skip one full-matrix pass.
    void set_cached_norms(std::vector<double> norms);
    const std::vector<double>* cached_norms() const noexcept;

    Provenance provenance() const;

private:
    const EmbeddingTable* table_;
    WordListBundle bundle_;
    ExperimentConfig config_;
    unsigned threads_;
    std::uint64_t table_checksum_;
    std::optional<std::vector<std::uint32_t>> frequent_rows_;
    std::optional<NeutralSet> neutral_;
    std::map<std::pair<std::string, std::string>, PairAxis> axes_;
    std::map<std::pair<std::string, std::string>, std::vector<Direction>> neutral_directions_;
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> neighbors_;
    std::array<std::optional<PopulationStats>, 3> population_;
    std::optional<std::vector<double>> cached_norms_;
};

Report exp_population_stats(ExperimentContext& ctx);
Report exp_base_pair_stability(ExperimentContext& ctx);
Report exp_basepair_capitalization(ExperimentContext& ctx);
Report exp_word_form_stability(ExperimentContext& ctx);
Report exp_linguistic_correspondence(ExperimentContext& ctx);
Report exp_measure_agreement(ExperimentContext& ctx);
Report exp_difference_vector_correlation(ExperimentContext& ctx);
Report exp_ripa_pair_swap(ExperimentContext& ctx);
Report exp_analogy_study(ExperimentContext& ctx);
Report exp_similarity_baselines(ExperimentContext& ctx);

const std::vector<std::string>& experiment_names();
Report run_experiment(ExperimentContext& ctx, std::string_view name);

// Expected-cell checks for `experiment --check`: an array of objects with
// experiment/table/row/col/expected/tolerance fields.
struct CellCheck {
    std::string experiment, table, row, col;
    double expected = 0.0;
    double tolerance = 0.0;
};

std::vector<CellCheck> load_cell_checks(const std::string& path);
// Returns human-readable failure lines; empty means all checks passed.
std::vector<std::string> run_cell_checks(const std::vector<CellCheck>& checks,
                                         const std::map<std::string, Report>& reports);

}  // namespace embias
