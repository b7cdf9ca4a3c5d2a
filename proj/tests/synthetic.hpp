#pragma once

// A small synthetic gendered embedding plus the full data bundle, written to
// disk so experiment and CLI tests exercise the real loaders end to end.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "embias/embedding.hpp"
#include "embias/experiments.hpp"
#include "helpers.hpp"

namespace embias::test {

struct SyntheticWorld {
    std::filesystem::path dir;
    EmbeddingTable table;
    ExperimentConfig config;  // all data paths point into dir

    WordListBundle bundle() const { return load_bundle(config, table); }
};

// Gender load lives on coordinates 0 (female) and 1 (male); the remaining
// coordinates carry seeded noise.
inline SyntheticWorld make_world(const std::filesystem::path& dir, std::uint64_t seed = 4242) {
    std::filesystem::create_directories(dir);
    Rng rng(seed);
    const std::uint32_t dim = 8;

    std::vector<std::string> words;
    std::vector<float> matrix;
    const auto add = [&](const std::string& token, double female, double male) {
        words.push_back(token);
        for (std::uint32_t j = 0; j < dim; ++j) {
            double v = uniform_pm1(rng) * 0.3;
            if (j == 0) v += female;
            if (j == 1) v += male;
            matrix.push_back(static_cast<float>(v));
        }
    };

    // Base pairs, lowercase plus capitalized and uppercase forms.
    const std::vector<std::pair<std::string, std::string>> pair_tokens{
        {"fema", "mala"}, {"femb", "malb"}, {"femc", "malc"}, {"Femd", "Mald"}};
    for (const auto& [f, m] : pair_tokens) {
        add(f, 1.0, 0.05);
        add(m, 0.05, 1.0);
        if (capitalized_form(f) != f) add(capitalized_form(f), 0.9, 0.1);
        if (capitalized_form(m) != m) add(capitalized_form(m), 0.1, 0.9);
        if (uppercase_form(f) != f) add(uppercase_form(f), 0.8, 0.15);
        if (uppercase_form(m) != m) add(uppercase_form(m), 0.15, 0.8);
    }

    // Professions with assorted gender loads, plus plural/case variants.
    std::vector<std::string> professions;
    for (int i = 0; i < 24; ++i) {
        const std::string base = "prof" + letter_token(static_cast<std::size_t>(i));
        professions.push_back(base);
        const double female = uniform_pm1(rng) * 0.8;
        const double male = uniform_pm1(rng) * 0.8;
        add(base, female, male);
        // Variants sit near the base; a few get their axis flipped so
        // agreement statistics stay away from exactly 1.
        const bool flip = i % 5 == 0;
        add(base + "s", flip ? male : female, flip ? female : male);
        add(capitalized_form(base), female + 0.1, male);
        add(uppercase_form(base), female, male + 0.1);
    }
    professions.push_back("ghostword");  // stays out of the vocabulary

    // BSRI-style trait lists, mostly aligned with their ground truth.
    std::vector<std::string> bsri_female, bsri_male;
    for (int i = 0; i < 8; ++i) {
        const std::string token = "traitf" + letter_token(static_cast<std::size_t>(i));
        bsri_female.push_back(token);
        add(token, i < 6 ? 0.9 : -0.2, 0.1);
    }
    for (int i = 0; i < 7; ++i) {
        const std::string token = "traitm" + letter_token(static_cast<std::size_t>(i));
        bsri_male.push_back(token);
        add(token, 0.1, i < 5 ? 0.9 : -0.2);
    }

    const std::vector<std::pair<std::string, std::string>> animals{
        {"henx", "roosterx"}, {"lionessx", "lionx"}, {"marex", "stallionx"}};
    for (const auto& [f, m] : animals) {
        add(f, 0.8, 0.1);
        add(m, 0.1, 0.8);
    }

    std::vector<std::string> neutral;
    for (int i = 0; i < 80; ++i) {
        const std::string token = "neut" + letter_token(static_cast<std::size_t>(i));
        neutral.push_back(token);
        add(token, uniform_pm1(rng) * 0.9, uniform_pm1(rng) * 0.9);
    }

    EmbeddingTable table(dim, std::move(words), std::move(matrix));

    const auto write_lines = [&](const std::string& name,
                                 const std::vector<std::string>& lines) {
        std::ofstream out(dir / name, std::ios::binary);
        for (const auto& line : lines) out << line << '\n';
        return (dir / name).string();
    };

    ExperimentConfig config;
    {
        std::ofstream out(dir / "embedding.txt", std::ios::binary);
        write_word2vec_text(table, out);
    }
    config.embedding_path = (dir / "embedding.txt").string();
    config.embedding_format = EmbeddingFormat::Text;
    config.professions_path = write_lines("professions.txt", professions);
    {
        std::vector<std::string> lines;
        for (const auto& [f, m] : pair_tokens) lines.push_back(f + " " + m);
        config.base_pairs_path = write_lines("base_pairs.txt", lines);
    }
    config.bsri_female_path = write_lines("bsri_female.txt", bsri_female);
    config.bsri_male_path = write_lines("bsri_male.txt", bsri_male);
    {
        std::vector<std::string> lines;
        for (const auto& [f, m] : animals) lines.push_back(f + " " + m);
        config.animal_pairs_path = write_lines("animal_pairs.txt", lines);
    }
    config.neutral_words_path = write_lines("neutral.txt", neutral);
    {
        std::vector<std::string> lines;
        for (const auto& base : professions) {
            if (base == "ghostword") continue;
            lines.push_back(base + " " + base + "s " + capitalized_form(base) + " " +
                            uppercase_form(base));
        }
        config.word_forms_path = write_lines("word_forms.txt", lines);
    }
    config.measures = {Measure::DbWa, Measure::Ripa, Measure::Nbm};
    config.nbm_k = 10;
    config.seed = 2718;
    config.baseline_samples = 500;
    config.frequent_n = table.count();
    config.threads = 1;
    config.nbm_population = true;
    config.ripa_swap_from = {"fema", "mala"};
    config.ripa_swap_to = {"femb", "malb"};

    return {dir, std::move(table), std::move(config)};
}

inline void write_config_json(const SyntheticWorld& world, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    out << config_to_json(world.config).dump(2) << '\n';
}

}  // namespace embias::test
